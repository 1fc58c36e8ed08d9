"""Dense statevector over a register of labelled qubits.

Register position ``i`` is bit ``i`` of the amplitude index (little-endian).
Every operation returns a new :class:`StateVector`; no operation promises a
particular global phase.
"""

from __future__ import annotations

import math
from collections.abc import Hashable, Sequence
from dataclasses import dataclass

import numpy as np

from .errors import MeasurementError, RegisterError
from .pauli import Hamiltonian, PauliString, apply_pauli_masks, parity_sign

NORM_TOL = 1e-12
FORCE_TOL = 1e-12

I2 = np.eye(2, dtype=np.complex128)
PAULI_MATRICES = {
    "I": I2,
    "X": np.array([[0, 1], [1, 0]], dtype=np.complex128),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    "Z": np.array([[1, 0], [0, -1]], dtype=np.complex128),
}
HADAMARD = np.array([[1, 1], [1, -1]], dtype=np.complex128) / math.sqrt(2)

PLANES = ("XY", "YZ")


def rotation_matrix(axis: str, theta: float) -> np.ndarray:
    """``exp(-i theta P / 2)`` for a single-qubit Pauli axis."""
    return math.cos(theta / 2) * I2 - 1j * math.sin(theta / 2) * PAULI_MATRICES[axis]


def plane_basis(plane: str, angle: float) -> tuple[np.ndarray, np.ndarray]:
    """Basis vectors (outcome 0, outcome 1) of a single-qubit measurement.

    ``XY`` at angle ``a`` is ``{R_Z(a)|+>, R_Z(a)|->}`` and ``YZ`` at angle ``a``
    is ``{R_X(a)|0>, R_X(a)|1>}``.
    """
    if plane == "XY":
        rot = rotation_matrix("Z", angle)
        plus = np.array([1, 1], dtype=np.complex128) / math.sqrt(2)
        minus = np.array([1, -1], dtype=np.complex128) / math.sqrt(2)
        return rot @ plus, rot @ minus
    if plane == "YZ":
        rot = rotation_matrix("X", angle)
        return rot[:, 0].copy(), rot[:, 1].copy()
    raise ValueError(f"unknown measurement plane {plane!r}")


def bloch_basis(theta: float, phi: float) -> tuple[np.ndarray, np.ndarray]:
    """The ``{|up(theta, phi)>, |down(theta, phi)>}`` basis on the Bloch sphere."""
    c, s, e = math.cos(theta / 2), math.sin(theta / 2), np.exp(1j * phi)
    up = np.array([c, e * s], dtype=np.complex128)
    down = np.array([-s, e * c], dtype=np.complex128)
    return up, down


@dataclass
class StateVector:
    """Amplitudes over an ordered register of hashable qubit labels."""

    register: tuple
    amplitudes: np.ndarray

    def __post_init__(self):
        self.register = tuple(self.register)
        if len(set(self.register)) != len(self.register):
            raise RegisterError(f"duplicate labels in register {self.register}")
        amps = np.asarray(self.amplitudes, dtype=np.complex128).reshape(-1)
        if amps.size != 1 << len(self.register):
            raise ValueError(
                f"{amps.size} amplitudes do not match a register of {len(self.register)} qubits"
            )
        self.amplitudes = amps

    @classmethod
    def zeros(cls, register: Sequence[Hashable]) -> StateVector:
        """The all-|0> state on ``register``."""
        amps = np.zeros(1 << len(register), dtype=np.complex128)
        amps[0] = 1.0
        return cls(tuple(register), amps)

    @classmethod
    def empty(cls) -> StateVector:
        return cls((), np.ones(1, dtype=np.complex128))

    @classmethod
    def from_bits(cls, register: Sequence[Hashable], bits: Sequence[int]) -> StateVector:
        """Computational basis state; ``bits[i]`` is the value of ``register[i]``."""
        index = sum(int(b) << i for i, b in enumerate(bits))
        amps = np.zeros(1 << len(register), dtype=np.complex128)
        amps[index] = 1.0
        return cls(tuple(register), amps)

    @classmethod
    def random(cls, register: Sequence[Hashable], rng: np.random.Generator) -> StateVector:
        dim = 1 << len(register)
        amps = rng.normal(size=dim) + 1j * rng.normal(size=dim)
        return cls(tuple(register), amps / np.linalg.norm(amps))

    @property
    def n_qubits(self) -> int:
        return len(self.register)

    def position(self, label) -> int:
        try:
            return self.register.index(label)
        except ValueError:
            raise RegisterError(f"qubit {label!r} is not in register {self.register}") from None

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def copy(self) -> StateVector:
        return StateVector(self.register, self.amplitudes.copy())

    def tensor(self) -> np.ndarray:
        """View of the amplitudes with one axis per qubit; axis ``k-1-i`` is position ``i``."""
        return self.amplitudes.reshape((2,) * self.n_qubits)

    def reordered(self, register: Sequence[Hashable]) -> StateVector:
        """The same state with qubits permuted into ``register`` order."""
        register = tuple(register)
        if sorted(map(repr, register)) != sorted(map(repr, self.register)):
            raise RegisterError(f"{register} is not a permutation of {self.register}")
        k = self.n_qubits
        if k == 0:
            return self.copy()
        # new axis j (position k-1-j) holds old position of register[k-1-j]
        axes = [k - 1 - self.position(register[k - 1 - j]) for j in range(k)]
        amps = np.transpose(self.tensor(), axes).reshape(-1).copy()
        return StateVector(register, amps)

    def relabeled(self, register: Sequence[Hashable]) -> StateVector:
        """Same amplitudes under new labels (position-wise)."""
        register = tuple(register)
        if len(register) != self.n_qubits:
            raise RegisterError("relabeling must keep the register size")
        return StateVector(register, self.amplitudes.copy())


def _apply_matrix(amps: np.ndarray, n_qubits: int, pos: int, mat: np.ndarray) -> np.ndarray:
    view = amps.reshape(1 << (n_qubits - 1 - pos), 2, 1 << pos)
    return np.einsum("ij,ajb->aib", mat, view).reshape(-1)


def apply_single_qubit(state: StateVector, qubit, matrix: np.ndarray) -> StateVector:
    """Apply an arbitrary 2x2 matrix to one qubit."""
    pos = state.position(qubit)
    return StateVector(state.register, _apply_matrix(state.amplitudes, state.n_qubits, pos, matrix))


def apply_axis_rotation(state: StateVector, qubit, axis: str, theta: float) -> StateVector:
    """Apply ``exp(-i theta P / 2)`` with ``P`` in ``{X, Y, Z}`` to ``qubit``."""
    if axis not in ("X", "Y", "Z"):
        raise ValueError(f"unknown rotation axis {axis!r}")
    if not math.isfinite(theta):
        raise ValueError("rotation angle must be finite")
    return apply_single_qubit(state, qubit, rotation_matrix(axis, theta))


def apply_pauli(state: StateVector, qubit, pauli: str) -> StateVector:
    return apply_single_qubit(state, qubit, PAULI_MATRICES[pauli])


def apply_hadamard(state: StateVector, qubit) -> StateVector:
    return apply_single_qubit(state, qubit, HADAMARD)


def controlled_pauli_inplace(amps: np.ndarray, n_qubits: int, cpos: int, tpos: int, pauli: str) -> None:
    if pauli == "Z":
        lo, hi = sorted((cpos, tpos))
        view = amps.reshape(1 << (n_qubits - 1 - hi), 2, 1 << (hi - 1 - lo), 2, 1 << lo)
        view[:, 1, :, 1, :] *= -1
        return
    tensor = amps.reshape((2,) * n_qubits)
    index = [slice(None)] * n_qubits
    index[n_qubits - 1 - cpos] = 1
    sub = tensor[tuple(index)]
    # removing the control axis shifts the target axis when the target sits below it
    taxis = n_qubits - 1 - tpos - (1 if tpos < cpos else 0)
    sub_moved = np.moveaxis(sub, taxis, 0)
    sub_moved[...] = np.tensordot(PAULI_MATRICES[pauli], sub_moved, axes=(1, 0))


def apply_controlled_pauli(state: StateVector, control, target, pauli: str = "Z") -> StateVector:
    """Apply controlled-``pauli`` (CZ is symmetric in control and target)."""
    if control == target:
        raise ValueError("control and target must differ")
    if pauli not in ("X", "Y", "Z"):
        raise ValueError(f"unknown Pauli {pauli!r}")
    cpos, tpos = state.position(control), state.position(target)
    amps = state.amplitudes.copy()
    controlled_pauli_inplace(amps, state.n_qubits, cpos, tpos, pauli)
    return StateVector(state.register, amps)


def pauli_rotation_inplace(amps: np.ndarray, n_qubits: int, xmask: int, zmask: int, theta: float) -> np.ndarray:
    """Return ``exp(-i theta P / 2) amps`` for the Pauli encoded by the masks."""
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    if not xmask:
        # diagonal: eigenvalue +-1 per basis state, up to the Y-free phase (none without X)
        sign = parity_sign(zmask, n_qubits)
        factor = c - 1j * s * sign
        amps *= factor
        return amps
    flipped = apply_pauli_masks(amps, xmask, zmask, n_qubits)
    amps *= c
    amps -= 1j * s * flipped
    return amps


def _positions_masks(state: StateVector, generator: PauliString) -> tuple[int, int]:
    x = z = 0
    for label, op in generator.support:
        pos = state.position(label)
        if op in "XY":
            x |= 1 << pos
        if op in "YZ":
            z |= 1 << pos
    return x, z


def apply_pauli_string_rotation(state: StateVector, generator: PauliString, theta: float) -> StateVector:
    """Apply ``exp(-i theta P / 2)`` for the full tensor product ``P``.

    The generator's qubit indices are read as register labels; its
    coefficient is ignored.
    """
    if not generator.support:
        raise ValueError("a rotation about the identity is only a global phase")
    if not math.isfinite(theta):
        raise ValueError("rotation angle must be finite")
    x, z = _positions_masks(state, generator)
    amps = pauli_rotation_inplace(state.amplitudes.copy(), state.n_qubits, x, z, theta)
    return StateVector(state.register, amps)


def attach_plus_qubit(state: StateVector, label) -> StateVector:
    """Tensor a fresh |+> onto the register as its new highest position."""
    if label in state.register:
        raise RegisterError(f"qubit {label!r} is already in the register")
    amps = np.concatenate([state.amplitudes, state.amplitudes]) / math.sqrt(2)
    return StateVector(state.register + (label,), amps)


def outcome_probabilities(state: StateVector, qubit, basis: tuple[np.ndarray, np.ndarray]) -> tuple[float, float]:
    pos = state.position(qubit)
    view = state.amplitudes.reshape(1 << (state.n_qubits - 1 - pos), 2, 1 << pos)
    probs = []
    for vec in basis:
        proj = np.einsum("j,ajb->ab", vec.conj(), view)
        probs.append(float(np.vdot(proj, proj).real))
    return probs[0], probs[1]


def measure_in_basis(
    state: StateVector,
    qubit,
    basis: tuple[np.ndarray, np.ndarray],
    forced: int | None = None,
    rng: np.random.Generator | None = None,
) -> tuple[int, StateVector, tuple[float, float]]:
    """Projectively measure ``qubit`` in an orthonormal basis and remove it.

    Returns ``(outcome, post_state, (p0, p1))``.
    """
    pos = state.position(qubit)
    n = state.n_qubits
    view = state.amplitudes.reshape(1 << (n - 1 - pos), 2, 1 << pos)
    projected = [np.einsum("j,ajb->ab", vec.conj(), view) for vec in basis]
    probs = tuple(float(np.vdot(p, p).real) for p in projected)
    if forced is None:
        if rng is None:
            raise ValueError("sampling a measurement needs a random generator")
        outcome = 0 if rng.random() < probs[0] / (probs[0] + probs[1]) else 1
    else:
        outcome = int(forced)
        if outcome not in (0, 1):
            raise ValueError("forced outcome must be 0 or 1")
        if probs[outcome] < FORCE_TOL:
            raise MeasurementError(qubit, outcome, probs)
    amps = projected[outcome].reshape(-1) / math.sqrt(probs[outcome])
    register = state.register[:pos] + state.register[pos + 1:]
    return outcome, StateVector(register, amps), probs


def measure_in_plane(
    state: StateVector,
    qubit,
    plane: str,
    angle: float,
    forced: int | None = None,
    rng: np.random.Generator | None = None,
) -> tuple[int, StateVector]:
    """Measure ``qubit`` in the ``XY`` or ``YZ`` plane at ``angle`` and remove it."""
    if plane not in PLANES:
        raise ValueError(f"unknown measurement plane {plane!r}")
    outcome, post, _ = measure_in_basis(state, qubit, plane_basis(plane, angle), forced, rng)
    return outcome, post


def expectation_and_variance(state: StateVector, h: Hamiltonian) -> tuple[float, float]:
    """``(<H>, <H^2> - <H>^2)``; a variance within 1e-10 below zero is reported as 0."""
    if h.n_qubits != state.n_qubits:
        raise ValueError(f"Hamiltonian acts on {h.n_qubits} qubits, state has {state.n_qubits}")
    return energy_and_variance(h, state.amplitudes)


def energy_and_variance(h: Hamiltonian, amps: np.ndarray) -> tuple[float, float]:
    h_psi = h.apply(amps)
    energy = float(np.vdot(amps, h_psi).real)
    variance = float(np.vdot(h_psi, h_psi).real) - energy**2
    if variance < 0.0:
        if variance < -1e-10 * max(1.0, energy**2):
            raise ArithmeticError(f"negative variance {variance:.3e}")
        variance = 0.0
    return energy, variance


def equal_up_to_global_phase(a: StateVector, b: StateVector, tol: float = 1e-10) -> bool:
    """True iff ``|<a|b>| >= 1 - tol``."""
    return global_phase_distance(a, b) <= tol


def global_phase_distance(a: StateVector, b: StateVector) -> float:
    """``1 - |<a|b>|`` for two normalized states of equal size."""
    if a.n_qubits != b.n_qubits:
        raise ValueError(f"register sizes differ: {a.n_qubits} vs {b.n_qubits}")
    return 1.0 - abs(np.vdot(a.amplitudes, b.amplitudes))
