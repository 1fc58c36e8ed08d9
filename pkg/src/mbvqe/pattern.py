"""Measurement-pattern IR, node templates and the ansatz compilers.

A logical qubit lives on a *wire*: the label of the physical qubit currently
holding it. A J-step measures the wire qubit in the XY plane after linking it
by CZ to a fresh |+> qubit, which becomes the new wire and receives
``R_X(phi) H`` of the old state. Chains of J-steps build every single-qubit
node. A multi-qubit rotation uses one ancilla joined to every target by a
controlled-P edge and measured in the YZ plane; the wires stay put.

By-products are tracked as a Pauli frame ``X^x Z^z`` per wire, where ``x``
and ``z`` are sets of measured qubits whose outcome parity switches the
factor on. Frames adapt later measurement angles and become the end-of-pattern
corrections.
"""

from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .circuit import (
    CNOT,
    CZ,
    AngleSource,
    AxisRotation,
    CircuitIR,
    Constant,
    H,
    Param,
    PauliGate,
    PauliStringRotation,
    angle_from_json,
)
from .models import Heisenberg2D, Hubbard, ModelSpec, TFIM, hva_generators
from .pauli import PauliString
from .statevector import HADAMARD, PAULI_MATRICES, rotation_matrix

NODE_BUDGETS = {"green": 1, "orange": 2, "blue": 4, "yellow": 4, "red": 4}
ROLES = ("input", "body", "output")

_HALF_PI = math.pi / 2


@dataclass(frozen=True)
class MeasurementCommand:
    """Measure ``qubit`` in ``plane`` at ``(-1)**s * (base - pi * t)``.

    ``s`` is the outcome parity of ``sign_deps`` and ``t`` that of ``offset_deps``.
    """

    qubit: int
    plane: str
    base_angle: AngleSource
    sign_deps: frozenset = frozenset()
    offset_deps: frozenset = frozenset()

    def angle(self, params, outcomes) -> float:
        s = sum(outcomes[q] for q in self.sign_deps) & 1
        t = sum(outcomes[q] for q in self.offset_deps) & 1
        value = self.base_angle.resolve(params) - math.pi * t
        return -value if s else value


@dataclass(frozen=True)
class CorrectionCommand:
    pauli: str
    target: int
    deps: frozenset

    def active(self, outcomes) -> bool:
        return bool(sum(outcomes[q] for q in self.deps) & 1)


@dataclass(frozen=True)
class NodeRecord:
    """Bookkeeping for one colored node: what it implements and which qubits it measured."""

    color: str
    logical: tuple
    measured: tuple
    description: str = ""


@dataclass(frozen=True)
class PatternIR:
    qubits: tuple
    edges: tuple
    commands: tuple
    corrections: tuple
    n_params: int
    inputs: tuple
    output_map: tuple
    nodes: tuple = ()
    metadata: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        labels = [q for q, _ in self.qubits]
        if len(set(labels)) != len(labels):
            raise ValueError("duplicate qubit labels")
        declared = set(labels)
        for a, b, p in self.edges:
            if a not in declared or b not in declared or a == b:
                raise ValueError(f"edge ({a}, {b}) references undeclared or identical qubits")
            if p not in ("X", "Y", "Z"):
                raise ValueError(f"unknown entangling Pauli {p!r}")
        measured = set()
        outputs = set(self.output_map)
        for cmd in self.commands:
            if cmd.qubit not in declared:
                raise ValueError(f"measurement of undeclared qubit {cmd.qubit}")
            if cmd.qubit in measured:
                raise ValueError(f"qubit {cmd.qubit} measured twice")
            if cmd.qubit in outputs:
                raise ValueError(f"output qubit {cmd.qubit} is measured")
            if not (cmd.sign_deps | cmd.offset_deps) <= measured:
                raise ValueError(f"measurement of {cmd.qubit} depends on a later outcome")
            if isinstance(cmd.base_angle, Param) and cmd.base_angle.index >= self.n_params:
                raise ValueError(f"measurement of {cmd.qubit} references a missing parameter")
            measured.add(cmd.qubit)
        for corr in self.corrections:
            if corr.target not in outputs:
                raise ValueError(f"correction targets non-output qubit {corr.target}")
            if not corr.deps <= measured:
                raise ValueError("correction depends on an unmeasured qubit")
        if not set(self.inputs) <= declared or not outputs <= declared:
            raise ValueError("inputs and outputs must be declared qubits")
        if len(self.inputs) != len(self.output_map):
            raise ValueError("a pattern maps N logical inputs to N outputs")

    @property
    def n_logical(self) -> int:
        return len(self.inputs)

    @property
    def n_measurements(self) -> int:
        return len(self.commands)

    def role(self, label) -> str:
        return dict(self.qubits)[label]

    def neighbours(self) -> dict:
        adj: dict = {q: [] for q, _ in self.qubits}
        for a, b, _ in self.edges:
            adj[a].append(b)
            adj[b].append(a)
        return adj


# -- single-qubit unitaries and their J-step sequences ---------------------------


def jstep_matrix(phi: float) -> np.ndarray:
    """The unitary ``R_X(phi) H`` enacted by one J-step with outcome 0."""
    return rotation_matrix("X", phi) @ HADAMARD


def sequence_unitary(phis) -> np.ndarray:
    """Product of J-steps applied in order (first entry acts first)."""
    u = np.eye(2, dtype=np.complex128)
    for phi in phis:
        u = jstep_matrix(phi) @ u
    return u


def proportional(a: np.ndarray, b: np.ndarray, tol: float = 1e-9) -> bool:
    """True when ``a = e^{i c} b`` for 2x2 unitaries."""
    overlap = abs(np.trace(a.conj().T @ b)) / 2
    return overlap > 1 - tol


def euler_xzx(u: np.ndarray) -> tuple[float, float, float]:
    """Angles ``(a, b, c)`` with ``u`` proportional to ``R_X(a) R_Z(b) R_X(c)``."""
    # conjugating by H turns X rotations into Z rotations: H u H = R_Z(a) R_X(b) R_Z(c)
    v = HADAMARD @ u @ HADAMARD
    v = v / cmath.sqrt(np.linalg.det(v))
    # R_Z(a) R_X(b) R_Z(c) = [[cos(b/2) e^{-i(a+c)/2}, -i sin(b/2) e^{-i(a-c)/2}], ...]
    b = 2 * math.atan2(abs(v[0, 1]), abs(v[0, 0]))
    if abs(v[0, 0]) > 1e-12 and abs(v[0, 1]) > 1e-12:
        s = -2 * cmath.phase(v[0, 0])
        d = -2 * cmath.phase(1j * v[0, 1])
    elif abs(v[0, 1]) <= 1e-12:
        s, d = -2 * cmath.phase(v[0, 0]), 0.0
    else:
        s, d = 0.0, -2 * cmath.phase(1j * v[0, 1])
    a, c = (s + d) / 2, (s - d) / 2
    return a, b, c


def rx_angle(u: np.ndarray, tol: float = 1e-9) -> float | None:
    """``a`` if ``u`` is proportional to ``R_X(a)``, else None."""
    v = u / cmath.sqrt(np.linalg.det(u))
    if abs(v[0, 1] - v[1, 0]) > tol or abs(v[0, 0] - v[1, 1]) > tol or abs(v[0, 0].imag) > tol or abs(v[0, 1].real) > tol:
        return None
    return 2 * math.atan2(-v[0, 1].imag, v[0, 0].real)


def is_identity(u: np.ndarray, tol: float = 1e-9) -> bool:
    return proportional(u, np.eye(2), tol)


RY_MINUS = rotation_matrix("Y", -_HALF_PI)
RY_PLUS = rotation_matrix("Y", _HALF_PI)
YELLOW = rotation_matrix("X", _HALF_PI) @ rotation_matrix("Y", _HALF_PI)
RED = rotation_matrix("Y", -_HALF_PI) @ rotation_matrix("X", -_HALF_PI)

# Fixed J-step angles of the constant four-measurement nodes.
NODE_SEQUENCES = {
    "blue-": (0.0, -_HALF_PI, _HALF_PI, _HALF_PI),
    "blue+": (0.0, -_HALF_PI, -_HALF_PI, _HALF_PI),
    "yellow": (0.0, -_HALF_PI, -_HALF_PI, math.pi),
    "red": (0.0, -math.pi, _HALF_PI, _HALF_PI),
}
NODE_TARGETS = {"blue-": RY_MINUS, "blue+": RY_PLUS, "yellow": YELLOW, "red": RED}


def node_color(name: str) -> str:
    return name.rstrip("+-")


def classify_unitary(u: np.ndarray) -> tuple[str, tuple]:
    """Cheapest node for a constant single-qubit unitary: ``(name, J-step angles)``."""
    if is_identity(u):
        return "identity", ()
    a = rx_angle(u)
    if a is not None:
        return "orange", (0.0, a)
    for name, target in NODE_TARGETS.items():
        if proportional(u, target):
            return name, NODE_SEQUENCES[name]
    a, b, c = euler_xzx(u)
    return "composite", (0.0, c, b, a)


# -- builder ---------------------------------------------------------------------


class PatternBuilder:
    """Incrementally builds a pattern over ``n_logical`` wires with Pauli-frame tracking."""

    def __init__(self, n_logical: int, n_params: int = 0):
        if n_logical < 0:
            raise ValueError("n_logical must be non-negative")
        self.n_logical = n_logical
        self.n_params = n_params
        self.inputs = tuple(range(n_logical))
        self.wires = list(range(n_logical))
        self.next_label = n_logical
        self.edges: list = []
        self.commands: list = []
        self.nodes: list = []
        self.x = [frozenset() for _ in range(n_logical)]
        self.z = [frozenset() for _ in range(n_logical)]
        self._measured_in_node: list = []

    def _fresh(self) -> int:
        label = self.next_label
        self.next_label += 1
        return label

    def _record(self, color: str, logical, description: str = "") -> None:
        self.nodes.append(NodeRecord(color, tuple(logical), tuple(self._measured_in_node), description))
        self._measured_in_node = []

    def jstep(self, i: int, phi: AngleSource) -> None:
        """Apply ``R_X(phi) H`` to logical qubit ``i`` with one XY measurement."""
        w = self.wires[i]
        v = self._fresh()
        self.edges.append((w, v, "Z"))
        base = phi.scaled(-1.0)
        self.commands.append(MeasurementCommand(w, "XY", base, self.x[i], self.z[i]))
        self._measured_in_node.append(w)
        self.x[i], self.z[i] = frozenset({w}), self.x[i]
        self.wires[i] = v

    def jsteps(self, i: int, phis, color: str, description: str = "") -> None:
        for phi in phis:
            self.jstep(i, phi if isinstance(phi, (Constant, Param)) else Constant(float(phi)))
        self._record(color, (i,), description)

    def rx(self, i: int, theta: AngleSource) -> None:
        """Orange node: ``R_X(theta)`` in two measurements."""
        self.jsteps(i, (Constant(0.0), theta), "orange", "R_X")

    def named_node(self, i: int, name: str) -> None:
        self.jsteps(i, NODE_SEQUENCES[name], node_color(name), name)

    def unitary(self, i: int, u: np.ndarray) -> str:
        """Implement a constant single-qubit unitary with the cheapest node; returns its name."""
        name, phis = classify_unitary(u)
        if name == "identity":
            return name
        color = node_color(name) if name in NODE_SEQUENCES or name == "orange" else "composite"
        self.jsteps(i, phis, color, name)
        return name

    def rotation(self, targets, pauli: str, theta: AngleSource) -> int:
        """``exp(-i theta P^{(x)targets} / 2)`` via one ancilla measured in the YZ plane."""
        targets = list(targets)
        if not targets:
            raise ValueError("a multi-qubit rotation needs at least one target")
        if len(set(targets)) != len(targets):
            raise ValueError(f"duplicate targets {targets}")
        if pauli not in ("X", "Y", "Z"):
            raise ValueError(f"unknown Pauli {pauli!r}")
        a = self._fresh()
        for i in targets:
            self.edges.append((a, self.wires[i], pauli))
        sign = frozenset()
        for i in targets:
            # frame factors anticommuting with P flip the rotation direction
            if pauli == "Z":
                sign ^= self.x[i]
            elif pauli == "X":
                sign ^= self.z[i]
            else:
                sign ^= self.x[i] ^ self.z[i]
        self.commands.append(MeasurementCommand(a, "YZ", theta.scaled(-1.0), sign, frozenset()))
        for i in targets:
            if pauli in "XY":
                self.x[i] = self.x[i] ^ {a}
            if pauli in "YZ":
                self.z[i] = self.z[i] ^ {a}
        self._measured_in_node.append(a)
        self._record("green", targets, f"R_{pauli * len(targets)}")
        return a

    def cz(self, i: int, j: int) -> None:
        """Entangle two wires directly (no measurement)."""
        a, b = self.wires[i], self.wires[j]
        self.edges.append((a, b, "Z"))
        xi, xj = self.x[i], self.x[j]
        self.z[i] = self.z[i] ^ xj
        self.z[j] = self.z[j] ^ xi

    def build(self, metadata: dict | None = None) -> PatternIR:
        measured = {c.qubit for c in self.commands}
        outputs = tuple(self.wires)
        roles = []
        for label in range(self.next_label):
            if label in self.inputs:
                role = "input"
            elif label in outputs and label not in measured:
                role = "output"
            else:
                role = "body"
            roles.append((label, role))
        corrections = []
        for i, w in enumerate(outputs):
            # the wire holds X^x Z^z |psi>: undo X first, then Z
            if self.x[i]:
                corrections.append(CorrectionCommand("X", w, self.x[i]))
            if self.z[i]:
                corrections.append(CorrectionCommand("Z", w, self.z[i]))
        return PatternIR(
            tuple(roles),
            tuple(self.edges),
            tuple(self.commands),
            tuple(corrections),
            self.n_params,
            self.inputs,
            outputs,
            tuple(self.nodes),
            dict(metadata or {}),
        )


# -- fragments ---------------------------------------------------------------


def multi_qubit_rotation_pattern(targets, p: str, angle: AngleSource) -> PatternIR:
    """Standalone ancilla pattern for ``exp(-i theta P^{(x)N} / 2)`` on ``len(targets)`` qubits.

    ``targets`` fixes the order of the logical inputs.
    """
    targets = list(targets)
    if len(set(targets)) != len(targets):
        raise ValueError(f"duplicate targets {targets}")
    n_params = angle.index + 1 if isinstance(angle, Param) else 0
    builder = PatternBuilder(len(targets), n_params)
    builder.rotation(range(len(targets)), p, angle)
    return builder.build({"kind": "rotation", "pauli": p})


def single_qubit_node(color: str, angle: AngleSource | float | None = None) -> PatternIR:
    """One colored node on a single wire.

    ``color`` is ``green`` (an R_Z rotation), ``orange`` (an R_X rotation),
    ``blue-``/``blue+`` (R_Y(-+pi/2)), ``yellow`` (R_X(pi/2) R_Y(pi/2)) or
    ``red`` (R_Y(-pi/2) R_X(-pi/2)). ``blue`` alone means ``blue-``.
    """
    if color == "blue":
        color = "blue-"
    if isinstance(angle, (int, float)):
        angle = Constant(float(angle))
    if color in ("green", "orange"):
        if angle is None:
            raise ValueError(f"{color} node needs an angle")
        n_params = angle.index + 1 if isinstance(angle, Param) else 0
        builder = PatternBuilder(1, n_params)
        if color == "green":
            builder.rotation([0], "Z", angle)
        else:
            builder.rx(0, angle)
        return builder.build({"kind": "node", "color": color})
    if color not in NODE_SEQUENCES:
        raise ValueError(f"unknown node color {color!r}")
    if angle is not None:
        raise ValueError(f"{color} node takes no angle")
    builder = PatternBuilder(1)
    builder.named_node(0, color)
    return builder.build({"kind": "node", "color": color})


def node_target_unitary(color: str, angle: float | None = None) -> np.ndarray:
    """Dense 2x2 target of :func:`single_qubit_node`."""
    if color == "blue":
        color = "blue-"
    if color == "green":
        return rotation_matrix("Z", angle)
    if color == "orange":
        return rotation_matrix("X", angle)
    return NODE_TARGETS[color]


# -- ansatz compilers ------------------------------------------------------------

# time-ordered basis change taking Z to P, and back
_PRE = {"X": RY_MINUS, "Y": rotation_matrix("X", _HALF_PI)}
_POST = {"X": RY_PLUS, "Y": rotation_matrix("X", -_HALF_PI)}


class _PendingWires:
    """Per-wire constant unitaries waiting to be merged into one node."""

    def __init__(self, builder: PatternBuilder):
        self.builder = builder
        self.pending = [np.eye(2, dtype=np.complex128) for _ in range(builder.n_logical)]

    def push(self, i: int, u: np.ndarray) -> None:
        self.pending[i] = u @ self.pending[i]

    def flush(self, qubits) -> None:
        for i in qubits:
            self.builder.unitary(i, self.pending[i])
            self.pending[i] = np.eye(2, dtype=np.complex128)

    def flush_all(self) -> None:
        self.flush(range(self.builder.n_logical))


def compile_generators(builder: PatternBuilder, generators, first_param: int, pending: _PendingWires) -> int:
    """Emit one layer of rotations; returns the next free parameter index."""
    k = first_param
    for gen in generators:
        ops = gen.ops
        for q, op in ops.items():
            if op in _PRE:
                pending.push(q, _PRE[op])
        pending.flush(gen.qubits)
        builder.rotation(gen.qubits, "Z", Param(k))
        k += 1
        for q, op in ops.items():
            if op in _POST:
                pending.push(q, _POST[op])
    return k


def compile_mbhva(model: ModelSpec, depth: int, parameter_sharing: bool = False) -> PatternIR:
    """Measurement-based HVA: per generator, merged basis-change nodes around a Z-type green node.

    Constant basis changes accumulate per wire and are emitted as a single
    node right before the wire's next green node, and at the end of every
    layer, so adjacent coaxial or cancelling rotations cost nothing extra.
    """
    if not isinstance(model, (TFIM, Heisenberg2D, Hubbard)):
        raise ValueError(f"unsupported model {model!r}")
    if depth < 1:
        raise ValueError("depth must be at least 1")
    generators = hva_generators(model)
    per_layer = len(generators)
    n_params = per_layer if parameter_sharing else per_layer * depth
    builder = PatternBuilder(model.n_qubits, n_params)
    pending = _PendingWires(builder)
    for d in range(depth):
        first = 0 if parameter_sharing else d * per_layer
        compile_generators(builder, generators, first, pending)
        pending.flush_all()
    return builder.build({"kind": "mbhva", "model": type(model).__name__, "depth": depth})


def compile_rotation(generator: PauliString, n_qubits: int | None = None) -> PatternIR:
    """A single Pauli-string rotation lowered like one MBHVA generator (basis nodes + green)."""
    n = n_qubits if n_qubits is not None else generator.qubits[-1] + 1
    builder = PatternBuilder(n, 1)
    pending = _PendingWires(builder)
    compile_generators(builder, [generator], 0, pending)
    pending.flush_all()
    return builder.build({"kind": "rotation", "generator": generator.label(n)})


def compile_mbhea(N: int, depth: int) -> PatternIR:
    """Hardware-efficient ansatz: R_X, R_Z, R_X per qubit then a global Z...Z rotation per layer."""
    if N < 1 or depth < 1:
        raise ValueError("N and depth must be at least 1")
    builder = PatternBuilder(N, (3 * N + 1) * depth)
    k = 0
    for _ in range(depth):
        for q in range(N):
            builder.rx(q, Param(k))
            builder.rotation([q], "Z", Param(k + 1))
            builder.rx(q, Param(k + 2))
            k += 3
        builder.rotation(range(N), "Z", Param(k))
        k += 1
    return builder.build({"kind": "mbhea", "depth": depth})


# -- naive gate-by-gate translation ---------------------------------------------

DEFAULT_COST_TABLE = {
    "cnot": 4,
    "cz": 0,
    "rz": 1,
    "rx": 2,
    "h": 1,
    "single": 4,
}
"""Measurements charged per gate class by :func:`translate_circuit_naive`.

``rz`` is a parametrized Z rotation (one green node), ``rx`` a parametrized
X rotation (orange node), ``h`` a Hadamard (one J-step), ``single`` any
other constant single-qubit unitary that is not an X rotation (four
J-steps). Each maximal run of constant single-qubit gates on
a wire is fused into one unitary before it is charged.
"""


def _constant_matrix(gate) -> np.ndarray:
    if isinstance(gate, AxisRotation):
        return rotation_matrix(gate.axis, gate.angle.value)
    if isinstance(gate, H):
        return HADAMARD
    return PAULI_MATRICES[gate.pauli]


class _NaiveTranslator:
    def __init__(self, circuit: CircuitIR, costs: dict):
        self.costs = costs
        self.builder = PatternBuilder(circuit.n_qubits, circuit.n_params)
        self.runs = [np.eye(2, dtype=np.complex128) for _ in range(circuit.n_qubits)]
        self.dirty = [False] * circuit.n_qubits

    def _pad(self, i: int, extra: int) -> None:
        # identity padding: pairs of J(0) steps, H H = I
        if extra < 0 or extra % 2:
            raise ValueError(f"cost table cannot be realised: {extra} extra measurements on a wire")
        for _ in range(extra // 2):
            self.builder.jsteps(i, (0.0, 0.0), "identity")

    def flush(self, i: int) -> None:
        if not self.dirty[i]:
            return
        u = self.runs[i]
        self.runs[i] = np.eye(2, dtype=np.complex128)
        self.dirty[i] = False
        if is_identity(u):
            return
        if proportional(u, HADAMARD):
            self._charge(i, [0.0], "h", "h")
            return
        name, phis = classify_unitary(u)
        if len(phis) == 2:
            self._charge(i, list(phis), "rx", "orange")
        else:
            self._charge(i, list(phis), "single", node_color(name) if name in NODE_SEQUENCES else "composite")

    def _charge(self, i: int, phis, key: str, color: str) -> None:
        budget = self.costs[key]
        if budget < len(phis):
            raise ValueError(f"cost table entry {key}={budget} is below the {len(phis)} measurements needed")
        self._pad(i, budget - len(phis))
        self.builder.jsteps(i, phis, color)

    def gate(self, gate) -> None:
        b = self.builder
        if isinstance(gate, (H, PauliGate)) or (isinstance(gate, AxisRotation) and isinstance(gate.angle, Constant)):
            q = gate.qubits[0]
            self.runs[q] = _constant_matrix(gate) @ self.runs[q]
            self.dirty[q] = True
            return
        for q in gate.qubits:
            self.flush(q)
        if isinstance(gate, AxisRotation):
            q = gate.qubit
            if gate.axis == "Z":
                extra = self.costs["rz"] - 1
                b.rotation([q], "Z", gate.angle)
                self._pad(q, extra)
            elif gate.axis == "X":
                if self.costs["rx"] < 2:
                    raise ValueError("an X rotation needs at least two measurements")
                self._pad(q, self.costs["rx"] - 2)
                b.rx(q, gate.angle)
            else:
                # R_Y(t) = R_X(pi/2) R_Z(-t) R_X(-pi/2)
                b.jsteps(q, (Constant(0.0), Constant(-_HALF_PI)), "orange")
                b.rotation([q], "Z", gate.angle.scaled(-1.0))
                b.jsteps(q, (Constant(0.0), Constant(_HALF_PI)), "orange")
        elif isinstance(gate, CZ):
            if self.costs["cz"]:
                raise ValueError("a CZ is a bare edge; its cost must be 0")
            b.cz(gate.a, gate.b)
        elif isinstance(gate, CNOT):
            c, t = gate.control, gate.target
            budget = self.costs["cnot"]
            if budget < 2:
                raise ValueError("a CNOT needs at least two measurements")
            # target: H, CZ, H as two J(0) steps around a wire-wire CZ
            b.jsteps(t, (0.0,), "h")
            b.cz(c, t)
            b.jsteps(t, (0.0,), "h")
            extra = budget - 2
            if extra % 2:
                raise ValueError("the CNOT cost table entry must be even")
            for _ in range(extra // 2):
                b.jsteps(c, (0.0, 0.0), "identity")
        else:
            raise ValueError(f"non-native gate {gate!r}; decompose the circuit first")

    def finish(self) -> PatternIR:
        for q in range(len(self.runs)):
            self.flush(q)
        return self.builder.build({"kind": "naive", "cost_table": dict(self.costs)})


def translate_circuit_naive(circuit: CircuitIR, cost_table: dict | None = None) -> PatternIR:
    """Lower a native circuit gate by gate, with the measurement cost of each gate class from ``cost_table``."""
    costs = dict(DEFAULT_COST_TABLE)
    if cost_table:
        unknown = set(cost_table) - set(costs)
        if unknown:
            raise ValueError(f"unknown cost table entries {sorted(unknown)}")
        costs.update(cost_table)
    translator = _NaiveTranslator(circuit, costs)
    for gate in circuit.gates:
        if isinstance(gate, PauliStringRotation):
            raise ValueError("non-native gate: multi-qubit rotations must be decomposed first")
        translator.gate(gate)
    return translator.finish()


# -- resources -------------------------------------------------------------------


@dataclass
class PatternResources:
    measurements: int = 0
    ancillas: int = 0
    entangling_edges: int = 0
    n_params: int = 0
    qubits: int = 0
    nodes_by_color: dict = field(default_factory=dict)
    peak_active_qubits: int | None = None

    def to_dict(self) -> dict:
        return {
            "measurements": self.measurements,
            "ancillas": self.ancillas,
            "entangling_edges": self.entangling_edges,
            "n_params": self.n_params,
            "qubits": self.qubits,
            "nodes_by_color": dict(sorted(self.nodes_by_color.items())),
            "peak_active_qubits": self.peak_active_qubits,
        }


def count_pattern_resources(pattern: PatternIR, with_width: bool = False) -> PatternResources:
    """Counts read off the IR; ancillas are all non-input qubits."""
    colors: dict = {}
    for node in pattern.nodes:
        colors[node.color] = colors.get(node.color, 0) + 1
    report = PatternResources(
        measurements=len(pattern.commands),
        ancillas=len(pattern.qubits) - len(pattern.inputs),
        entangling_edges=len(pattern.edges),
        n_params=pattern.n_params,
        qubits=len(pattern.qubits),
        nodes_by_color=colors,
    )
    if with_width:
        from .execution import peak_active_width

        report.peak_active_qubits = peak_active_width(pattern)
    return report


# -- serialization ---------------------------------------------------------------

PATTERN_FORMAT = "mbvqe-pattern"
PATTERN_VERSION = 1


def pattern_to_json(pattern: PatternIR) -> dict:
    return {
        "format": PATTERN_FORMAT,
        "version": PATTERN_VERSION,
        "n_params": pattern.n_params,
        "qubits": [{"label": q, "role": r} for q, r in pattern.qubits],
        "inputs": list(pattern.inputs),
        "outputs": list(pattern.output_map),
        "edges": [{"a": a, "b": b, "pauli": p} for a, b, p in pattern.edges],
        "commands": [
            {
                "qubit": c.qubit,
                "plane": c.plane,
                "angle": c.base_angle.to_json(),
                "sign_deps": sorted(c.sign_deps),
                "offset_deps": sorted(c.offset_deps),
            }
            for c in pattern.commands
        ],
        "corrections": [
            {"pauli": c.pauli, "target": c.target, "deps": sorted(c.deps)} for c in pattern.corrections
        ],
        "nodes": [
            {"color": n.color, "logical": list(n.logical), "measured": list(n.measured), "description": n.description}
            for n in pattern.nodes
        ],
        "metadata": pattern.metadata,
    }


def pattern_from_json(data: dict) -> PatternIR:
    if data.get("format") != PATTERN_FORMAT or data.get("version") != PATTERN_VERSION:
        raise ValueError("not a version-1 pattern document")
    return PatternIR(
        tuple((q["label"], q["role"]) for q in data["qubits"]),
        tuple((e["a"], e["b"], e["pauli"]) for e in data["edges"]),
        tuple(
            MeasurementCommand(
                c["qubit"], c["plane"], angle_from_json(c["angle"]), frozenset(c["sign_deps"]), frozenset(c["offset_deps"])
            )
            for c in data["commands"]
        ),
        tuple(CorrectionCommand(c["pauli"], c["target"], frozenset(c["deps"])) for c in data["corrections"]),
        int(data["n_params"]),
        tuple(data["inputs"]),
        tuple(data["outputs"]),
        tuple(NodeRecord(n["color"], tuple(n["logical"]), tuple(n["measured"]), n["description"]) for n in data["nodes"]),
        dict(data.get("metadata", {})),
    )


def dumps_pattern(pattern: PatternIR) -> str:
    return json.dumps(pattern_to_json(pattern), indent=1, sort_keys=True) + "\n"


def _angle_text(angle: AngleSource) -> str:
    if isinstance(angle, Constant):
        return f"{angle.value:.6g}"
    text = f"{angle.scale:+g}*t{angle.index}"
    if angle.offset:
        text += f"{angle.offset:+.6g}"
    return text


def emit_dot(pattern: PatternIR) -> str:
    """Deterministic Graphviz rendering of the pattern.

    Qubits are nodes (colored by the node that measures them), solid edges
    are entangling links, dashed edges run from each signal source to the
    measurement it adapts.
    """
    color_of = {}
    for node in pattern.nodes:
        for q in node.measured:
            color_of[q] = node.color
    commands = {c.qubit: c for c in pattern.commands}
    fills = {
        "green": "palegreen",
        "orange": "orange",
        "blue": "lightblue",
        "yellow": "khaki",
        "red": "salmon",
        "composite": "plum",
        "h": "gray90",
        "identity": "white",
    }
    lines = ["digraph pattern {", "  rankdir=LR;", "  node [shape=circle, style=filled, fontsize=10];"]
    for label, role in pattern.qubits:
        cmd = commands.get(label)
        if cmd is not None:
            text = f"{label}\\n{color_of.get(label, '?')} {cmd.plane}\\n{_angle_text(cmd.base_angle)}"
            fill = fills.get(color_of.get(label), "white")
        else:
            text = f"{label}\\n{role}"
            fill = "white"
        shape = ", shape=doublecircle" if role == "input" or label in pattern.output_map else ""
        lines.append(f'  q{label} [label="{text}", fillcolor="{fill}"{shape}];')
    for a, b, p in pattern.edges:
        lines.append(f'  q{a} -> q{b} [dir=none, label="C{p}"];')
    for cmd in pattern.commands:
        for dep in sorted(cmd.sign_deps):
            lines.append(f'  q{dep} -> q{cmd.qubit} [style=dashed, color=blue, label="s"];')
        for dep in sorted(cmd.offset_deps):
            lines.append(f'  q{dep} -> q{cmd.qubit} [style=dashed, color=red, label="t"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
