"""Circuit IR, ansatz builders, native-gate lowering and circuit simulation."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .models import Heisenberg2D, Hubbard, ModelSpec, TFIM, hva_generators, LatticeSpec
from .pauli import PauliString
from .statevector import (
    HADAMARD,
    PAULI_MATRICES,
    StateVector,
    _apply_matrix,
    controlled_pauli_inplace,
    pauli_rotation_inplace,
    rotation_matrix,
)

TWO_PI = 2 * math.pi


@dataclass(frozen=True)
class Constant:
    value: float

    def __post_init__(self):
        if not math.isfinite(self.value):
            raise ValueError("constant angle must be finite")

    def resolve(self, params) -> float:
        return self.value

    def scaled(self, factor: float) -> Constant:
        return Constant(factor * self.value)

    def to_json(self) -> dict:
        return {"kind": "constant", "value": self.value}


@dataclass(frozen=True)
class Param:
    """Affine reference ``scale * params[index] + offset``."""

    index: int
    scale: float = 1.0
    offset: float = 0.0

    def __post_init__(self):
        if self.index < 0:
            raise ValueError("parameter index must be non-negative")
        if not math.isfinite(self.scale) or self.scale == 0:
            raise ValueError("parameter scale must be finite and nonzero")
        if not math.isfinite(self.offset):
            raise ValueError("parameter offset must be finite")

    def resolve(self, params) -> float:
        return self.scale * params[self.index] + self.offset

    def scaled(self, factor: float) -> Param:
        return Param(self.index, factor * self.scale, factor * self.offset)

    def to_json(self) -> dict:
        return {"kind": "param", "index": self.index, "scale": self.scale, "offset": self.offset}


AngleSource = Union[Constant, Param]


def angle_from_json(data: dict) -> AngleSource:
    if data["kind"] == "constant":
        return Constant(float(data["value"]))
    return Param(int(data["index"]), float(data["scale"]), float(data.get("offset", 0.0)))


def add_angles(a: AngleSource, b: AngleSource) -> AngleSource | None:
    """Sum of two angle sources, or None when it is not a single source."""
    if isinstance(a, Constant) and isinstance(b, Constant):
        return Constant(a.value + b.value)
    if isinstance(a, Param) and isinstance(b, Constant):
        return Param(a.index, a.scale, a.offset + b.value)
    if isinstance(a, Constant) and isinstance(b, Param):
        return Param(b.index, b.scale, b.offset + a.value)
    return None


@dataclass(frozen=True)
class AxisRotation:
    axis: str
    qubit: int
    angle: AngleSource

    @property
    def qubits(self):
        return (self.qubit,)


@dataclass(frozen=True)
class PauliStringRotation:
    generator: PauliString
    angle: AngleSource

    @property
    def qubits(self):
        return self.generator.qubits


@dataclass(frozen=True)
class H:
    qubit: int

    @property
    def qubits(self):
        return (self.qubit,)


@dataclass(frozen=True)
class PauliGate:
    pauli: str
    qubit: int

    @property
    def qubits(self):
        return (self.qubit,)


@dataclass(frozen=True)
class CZ:
    a: int
    b: int

    @property
    def qubits(self):
        return (self.a, self.b)


@dataclass(frozen=True)
class CNOT:
    control: int
    target: int

    @property
    def qubits(self):
        return (self.control, self.target)


Gate = Union[AxisRotation, PauliStringRotation, H, PauliGate, CZ, CNOT]
SINGLE_QUBIT_GATES = (AxisRotation, H, PauliGate)
ENTANGLERS = (CZ, CNOT)


@dataclass(frozen=True)
class CircuitIR:
    n_qubits: int
    gates: tuple
    n_params: int = 0
    metadata: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        for gate in self.gates:
            qs = gate.qubits
            if any(q < 0 or q >= self.n_qubits for q in qs):
                raise ValueError(f"{gate} acts outside {self.n_qubits} qubits")
            if len(set(qs)) != len(qs):
                raise ValueError(f"{gate} repeats a qubit")
            if isinstance(gate, AxisRotation) and gate.axis not in "XYZ":
                raise ValueError(f"unknown rotation axis {gate.axis!r}")
            if isinstance(gate, PauliGate) and gate.pauli not in "XYZ":
                raise ValueError(f"unknown Pauli {gate.pauli!r}")
            angle = getattr(gate, "angle", None)
            if isinstance(angle, Param) and angle.index >= self.n_params:
                raise ValueError(f"{gate} references parameter {angle.index} of {self.n_params}")

    def __len__(self):
        return len(self.gates)


def _layered_rotations(generators: list[PauliString], n_qubits: int, depth: int, shared: bool) -> CircuitIR:
    if depth < 1:
        raise ValueError("depth must be at least 1")
    gates = []
    per_layer = len(generators)
    for d in range(depth):
        base = 0 if shared else d * per_layer
        for k, gen in enumerate(generators):
            gates.append(PauliStringRotation(gen, Param(base + k)))
    n_params = per_layer if shared else per_layer * depth
    return CircuitIR(n_qubits, gates, n_params)


def build_cbhva(model: ModelSpec, depth: int, parameter_sharing: bool = False) -> tuple[CircuitIR, dict]:
    """Layered Hamiltonian-variational circuit: one rotation per generator per layer.

    With ``parameter_sharing`` every layer reuses the first layer's parameters.
    """
    if not isinstance(model, (TFIM, Heisenberg2D, Hubbard)):
        raise ValueError(f"unsupported model {model!r}")
    generators = hva_generators(model)
    circuit = _layered_rotations(generators, model.n_qubits, depth, parameter_sharing)
    layout = {
        "generators_per_layer": len(generators),
        "depth": depth,
        "parameter_sharing": parameter_sharing,
        "generators": [g.label(model.n_qubits) for g in generators],
    }
    if isinstance(model, Heisenberg2D):
        lattice = LatticeSpec("square", model.side, model.boundary)
        layout["column_edges"] = lattice.column_edges()
        layout["row_edges"] = lattice.row_edges()
    return circuit, layout


def build_mbhea_reference_circuit(N: int, depth: int) -> CircuitIR:
    """Per layer: R_X, R_Z, R_X on every qubit, then one global Z...Z rotation."""
    if N < 1 or depth < 1:
        raise ValueError("N and depth must be at least 1")
    gates, k = [], 0
    global_z = PauliString.from_ops({q: "Z" for q in range(N)})
    for _ in range(depth):
        for q in range(N):
            for axis in "XZX":
                gates.append(AxisRotation(axis, q, Param(k)))
                k += 1
        gates.append(PauliStringRotation(global_z, Param(k)))
        k += 1
    return CircuitIR(N, gates, k)


# -- native lowering ---------------------------------------------------------

# time-ordered basis change taking Z to the given Pauli, and its inverse
_PRE = {"X": ("Y", -math.pi / 2), "Y": ("X", math.pi / 2)}
_POST = {"X": ("Y", math.pi / 2), "Y": ("X", -math.pi / 2)}


def _is_zero_mod_2pi(value: float, tol: float = 1e-12) -> bool:
    r = math.remainder(value, TWO_PI)
    return abs(r) < tol


def _ladder(qubits: tuple[int, ...], entangler: str) -> list:
    out = []
    for c, t in zip(qubits, qubits[1:]):
        if entangler == "CNOT":
            out.append(CNOT(c, t))
        else:
            out += [H(t), CZ(c, t), H(t)]
    return out


def lower_pauli_rotation(gate: PauliStringRotation, entangler: str = "CNOT") -> list:
    """Basis sandwich, CNOT ladder to the last support qubit, R_Z, mirrored ladder."""
    gen = gate.generator
    qubits = gen.qubits
    ops = gen.ops
    pre, post = [], []
    for q in qubits:
        if ops[q] in _PRE:
            axis, angle = _PRE[ops[q]]
            pre.append(AxisRotation(axis, q, Constant(angle)))
            axis, angle = _POST[ops[q]]
            post.append(AxisRotation(axis, q, Constant(angle)))
    ladder = _ladder(qubits, entangler)
    mirrored = list(reversed(ladder))
    core = [AxisRotation("Z", qubits[-1], gate.angle)]
    return pre + ladder + core + mirrored + post


def _lower_ry(gate: AxisRotation) -> list:
    # R_Y(a) = R_X(pi/2) R_Z(-a) R_X(-pi/2) as an operator product
    return [
        AxisRotation("X", gate.qubit, Constant(-math.pi / 2)),
        AxisRotation("Z", gate.qubit, gate.angle.scaled(-1.0)),
        AxisRotation("X", gate.qubit, Constant(math.pi / 2)),
    ]


class _Merger:
    """Appends gates while folding adjacent same-axis rotations on a wire."""

    def __init__(self, n_qubits: int):
        self.gates: list = []
        self.alive: list[bool] = []
        self.stacks: list[list[int]] = [[] for _ in range(n_qubits)]

    def push(self, gate) -> None:
        if isinstance(gate, AxisRotation):
            stack = self.stacks[gate.qubit]
            if stack:
                prev = self.gates[stack[-1]]
                if isinstance(prev, AxisRotation) and prev.axis == gate.axis:
                    total = add_angles(prev.angle, gate.angle)
                    if total is not None:
                        idx = stack.pop()
                        self.alive[idx] = False
                        if isinstance(total, Constant) and _is_zero_mod_2pi(total.value):
                            return
                        gate = AxisRotation(gate.axis, gate.qubit, total)
            if isinstance(gate.angle, Constant) and _is_zero_mod_2pi(gate.angle.value):
                return
        idx = len(self.gates)
        self.gates.append(gate)
        self.alive.append(True)
        for q in gate.qubits:
            self.stacks[q].append(idx)

    def result(self) -> list:
        return [g for g, keep in zip(self.gates, self.alive) if keep]


def decompose_native(
    circuit: CircuitIR,
    entangler: str = "CNOT",
    basis: str = "xz",
    merge: bool = True,
) -> CircuitIR:
    """Lower every multi-qubit rotation to single-qubit gates plus ``entangler``.

    ``basis="xz"`` additionally rewrites R_Y as R_X R_Z R_X so the output uses
    only X and Z rotation axes; ``basis="xyz"`` keeps R_Y. With ``merge`` set,
    adjacent same-axis rotations on a wire fold into one gate and rotations by
    a multiple of 2 pi are dropped.
    """
    if entangler not in ("CNOT", "CZ"):
        raise ValueError(f"unknown entangler {entangler!r}")
    if basis not in ("xz", "xyz"):
        raise ValueError(f"unknown native basis {basis!r}")
    lowered = []
    for gate in circuit.gates:
        if isinstance(gate, PauliStringRotation):
            if gate.generator.weight == 1:
                (q, op), = gate.generator.support
                lowered.append(AxisRotation(op, q, gate.angle))
            else:
                lowered += lower_pauli_rotation(gate, entangler)
        elif isinstance(gate, CNOT) and entangler == "CZ":
            lowered += [H(gate.target), CZ(gate.control, gate.target), H(gate.target)]
        else:
            lowered.append(gate)
    if basis == "xz":
        expanded = []
        for gate in lowered:
            if isinstance(gate, AxisRotation) and gate.axis == "Y":
                expanded += _lower_ry(gate)
            else:
                expanded.append(gate)
        lowered = expanded
    if merge:
        merger = _Merger(circuit.n_qubits)
        for gate in lowered:
            merger.push(gate)
        lowered = merger.result()
    return CircuitIR(circuit.n_qubits, lowered, circuit.n_params, dict(circuit.metadata))


def merge_rotations(circuit: CircuitIR) -> CircuitIR:
    merger = _Merger(circuit.n_qubits)
    for gate in circuit.gates:
        merger.push(gate)
    return CircuitIR(circuit.n_qubits, merger.result(), circuit.n_params, dict(circuit.metadata))


# -- simulation ----------------------------------------------------------------


def _check_params(params, n_params: int) -> np.ndarray:
    values = np.asarray(params, dtype=np.float64).reshape(-1)
    if values.size != n_params:
        raise ValueError(f"expected {n_params} parameters, got {values.size}")
    return values


def apply_gate_inplace(amps: np.ndarray, n: int, gate, params) -> np.ndarray:
    """Apply one gate to little-endian amplitudes whose positions equal qubit indices."""
    if isinstance(gate, PauliStringRotation):
        gen = gate.generator
        return pauli_rotation_inplace(amps, n, gen.xmask, gen.zmask, gate.angle.resolve(params))
    if isinstance(gate, AxisRotation):
        theta = gate.angle.resolve(params)
        if gate.axis == "Z":
            return pauli_rotation_inplace(amps, n, 0, 1 << gate.qubit, theta)
        return _apply_matrix(amps, n, gate.qubit, rotation_matrix(gate.axis, theta))
    if isinstance(gate, H):
        return _apply_matrix(amps, n, gate.qubit, HADAMARD)
    if isinstance(gate, PauliGate):
        return _apply_matrix(amps, n, gate.qubit, PAULI_MATRICES[gate.pauli])
    if isinstance(gate, CZ):
        controlled_pauli_inplace(amps, n, gate.a, gate.b, "Z")
        return amps
    if isinstance(gate, CNOT):
        controlled_pauli_inplace(amps, n, gate.control, gate.target, "X")
        return amps
    raise TypeError(f"unsupported gate {gate!r}")


def simulate_amplitudes(circuit: CircuitIR, params, amps: np.ndarray) -> np.ndarray:
    values = _check_params(params, circuit.n_params)
    out = np.array(amps, dtype=np.complex128, copy=True)
    if out.size != 1 << circuit.n_qubits:
        raise ValueError("input size does not match the circuit")
    for gate in circuit.gates:
        out = apply_gate_inplace(out, circuit.n_qubits, gate, values)
    return out


def simulate_circuit(circuit: CircuitIR, params, input_state: StateVector) -> StateVector:
    """Run the circuit on ``input_state``; register position ``i`` is circuit qubit ``i``."""
    if input_state.n_qubits != circuit.n_qubits:
        raise ValueError(
            f"circuit has {circuit.n_qubits} qubits, input state has {input_state.n_qubits}"
        )
    amps = simulate_amplitudes(circuit, params, input_state.amplitudes)
    return StateVector(input_state.register, amps)


def circuit_unitary(circuit: CircuitIR, params=()) -> np.ndarray:
    """Dense unitary, column ``j`` = image of basis state ``j`` (small circuits only)."""
    dim = 1 << circuit.n_qubits
    cols = [simulate_amplitudes(circuit, params, np.eye(dim, dtype=np.complex128)[:, j]) for j in range(dim)]
    return np.stack(cols, axis=1)


# -- resources ---------------------------------------------------------------


@dataclass
class CircuitResources:
    single_qubit_rotations: int = 0
    hadamards: int = 0
    paulis: int = 0
    two_qubit_entanglers: int = 0
    multi_qubit_rotations: int = 0
    parameters: int = 0

    @property
    def single_qubit_gates(self) -> int:
        return self.single_qubit_rotations + self.hadamards + self.paulis

    @property
    def total(self) -> int:
        return self.single_qubit_gates + self.two_qubit_entanglers + self.multi_qubit_rotations

    def to_dict(self) -> dict:
        return {
            "single_qubit_rotations": self.single_qubit_rotations,
            "hadamards": self.hadamards,
            "paulis": self.paulis,
            "two_qubit_entanglers": self.two_qubit_entanglers,
            "multi_qubit_rotations": self.multi_qubit_rotations,
            "single_qubit_gates": self.single_qubit_gates,
            "total": self.total,
            "parameters": self.parameters,
        }


def count_circuit_resources(circuit: CircuitIR) -> CircuitResources:
    """Exact gate counts by class.

    Weight-1 Pauli-string rotations count as single-qubit rotations.
    """
    report = CircuitResources(parameters=circuit.n_params)
    for gate in circuit.gates:
        if isinstance(gate, AxisRotation):
            report.single_qubit_rotations += 1
        elif isinstance(gate, PauliStringRotation):
            if gate.generator.weight == 1:
                report.single_qubit_rotations += 1
            else:
                report.multi_qubit_rotations += 1
        elif isinstance(gate, H):
            report.hadamards += 1
        elif isinstance(gate, PauliGate):
            report.paulis += 1
        else:
            report.two_qubit_entanglers += 1
    return report


# -- JSON ----------------------------------------------------------------------


def gate_to_json(gate) -> dict:
    if isinstance(gate, AxisRotation):
        return {"kind": "rotation", "axis": gate.axis, "qubits": [gate.qubit], "angle": gate.angle.to_json()}
    if isinstance(gate, PauliStringRotation):
        return {
            "kind": "pauli_rotation",
            "qubits": list(gate.generator.qubits),
            "paulis": "".join(op for _, op in gate.generator.support),
            "angle": gate.angle.to_json(),
        }
    if isinstance(gate, H):
        return {"kind": "h", "qubits": [gate.qubit]}
    if isinstance(gate, PauliGate):
        return {"kind": "pauli", "pauli": gate.pauli, "qubits": [gate.qubit]}
    if isinstance(gate, CZ):
        return {"kind": "cz", "qubits": [gate.a, gate.b]}
    return {"kind": "cnot", "qubits": [gate.control, gate.target]}


def gate_from_json(data: dict):
    kind, qs = data["kind"], data["qubits"]
    if kind == "rotation":
        return AxisRotation(data["axis"], qs[0], angle_from_json(data["angle"]))
    if kind == "pauli_rotation":
        gen = PauliString.from_ops(dict(zip(qs, data["paulis"])))
        return PauliStringRotation(gen, angle_from_json(data["angle"]))
    if kind == "h":
        return H(qs[0])
    if kind == "pauli":
        return PauliGate(data["pauli"], qs[0])
    if kind == "cz":
        return CZ(qs[0], qs[1])
    if kind == "cnot":
        return CNOT(qs[0], qs[1])
    raise ValueError(f"unknown gate kind {kind!r}")


def circuit_to_json(circuit: CircuitIR) -> dict:
    return {
        "format": "mbvqe-circuit",
        "version": 1,
        "n_qubits": circuit.n_qubits,
        "n_params": circuit.n_params,
        "gates": [gate_to_json(g) for g in circuit.gates],
    }


def circuit_from_json(data: dict) -> CircuitIR:
    gates = [gate_from_json(g) for g in data["gates"]]
    return CircuitIR(int(data["n_qubits"]), gates, int(data["n_params"]))
