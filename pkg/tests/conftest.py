"""Dense-matrix oracles shared by the test modules.

The matrix oracles are built from 2x2 matrices with ``np.kron`` and
``scipy.linalg.expm`` so they share no code with the package's
bit-twiddling kernels.
"""

from functools import reduce

import numpy as np
import pytest
from scipy.linalg import expm

from mbvqe.statevector import (
    StateVector,
    apply_controlled_pauli,
    apply_pauli,
    attach_plus_qubit,
    measure_in_basis,
    plane_basis,
)

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = {"I": I2, "X": X, "Y": Y, "Z": Z}


def dense_pauli(label: str) -> np.ndarray:
    """Matrix of a Pauli label; character ``i`` acts on qubit ``i`` (little-endian)."""
    # kron puts its first factor on the most significant bit
    return reduce(np.kron, [PAULI[c] for c in reversed(label)])


def dense_ops(ops: dict, n: int) -> np.ndarray:
    label = "".join(ops.get(q, "I") for q in range(n))
    return dense_pauli(label)


def dense_rotation(label: str, theta: float) -> np.ndarray:
    return expm(-0.5j * theta * dense_pauli(label))


def dense_hamiltonian(h) -> np.ndarray:
    n = h.n_qubits
    mat = h.constant * np.eye(1 << n, dtype=complex)
    for term in h.terms:
        mat = mat + term.coefficient * dense_ops(term.ops, n)
    return mat


def embed(u: np.ndarray, qubit: int, n: int) -> np.ndarray:
    factors = [u if q == qubit else I2 for q in range(n)]
    return reduce(np.kron, reversed(factors))


def random_state(n: int, rng) -> np.ndarray:
    v = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    return v / np.linalg.norm(v)


def phase_distance(a: np.ndarray, b: np.ndarray) -> float:
    return 1.0 - abs(np.vdot(a, b))


def proportional_matrices(a: np.ndarray, b: np.ndarray) -> float:
    """Distance between two unitaries modulo a global phase."""
    k = np.argmax(np.abs(b))
    phase = a.flat[k] / b.flat[k]
    phase /= abs(phase)
    return float(np.max(np.abs(a - phase * b)))


def fock_hubbard(p, t, U, periodic):
    """Hubbard matrix in the occupation basis, built from fermionic sign counting.

    Modes are numbered ``2 * site + spin``; basis index bit ``m`` is the
    occupation of mode ``m``.
    """
    n_modes = 2 * p
    dim = 1 << n_modes

    def annihilate(m, state):
        if not (state >> m) & 1:
            return None, 0
        sign = (-1) ** bin(state & ((1 << m) - 1)).count("1")
        return state ^ (1 << m), sign

    def create(m, state):
        if (state >> m) & 1:
            return None, 0
        sign = (-1) ** bin(state & ((1 << m) - 1)).count("1")
        return state | (1 << m), sign

    bonds = [(i, i + 1) for i in range(p - 1)]
    if periodic and p > 2:
        bonds.append((p - 1, 0))
    mat = np.zeros((dim, dim))
    for state in range(dim):
        for i, j in bonds:
            for spin in (0, 1):
                a, b = 2 * i + spin, 2 * j + spin
                for src, dst in ((b, a), (a, b)):
                    mid, s1 = annihilate(src, state)
                    if mid is None:
                        continue
                    out, s2 = create(dst, mid)
                    if out is None:
                        continue
                    mat[out, state] += -t * s1 * s2
        for i in range(p):
            if (state >> (2 * i)) & 1 and (state >> (2 * i + 1)) & 1:
                mat[state, state] += U
    return mat


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def execute_node_blocks(pattern, params, input_state, outcomes):
    """Eager oracle for the lazy executor.

    Before measuring a node, the node's whole subgraph is attached and
    entangled at once (every edge touching any of its qubits), instead of
    edge by edge per measurement. Only valid for CZ-only patterns, where
    edge order is irrelevant.
    """
    assert {p for _, _, p in pattern.edges} <= {"Z"}
    state = StateVector(pattern.inputs, input_state.amplitudes.copy())
    live = set(pattern.inputs)
    done = [False] * len(pattern.edges)
    commands = {c.qubit: c for c in pattern.commands}
    record = {}

    def entangle(qubits):
        nonlocal state
        for k, (a, b, _) in enumerate(pattern.edges):
            if done[k] or not ({a, b} & qubits):
                continue
            for q in (a, b):
                if q not in live:
                    state = attach_plus_qubit(state, q)
                    live.add(q)
            state = apply_controlled_pauli(state, a, b, "Z")
            done[k] = True

    for node in pattern.nodes:
        block = set(node.measured)
        entangle(block)
        for q in node.measured:
            cmd = commands[q]
            basis = plane_basis(cmd.plane, cmd.angle(params, record))
            record[q], state, _ = measure_in_basis(state, q, basis, outcomes[q])
            live.discard(q)
    entangle(set(pattern.output_map))
    for q in pattern.output_map:
        if q not in live:
            state = attach_plus_qubit(state, q)
    for corr in pattern.corrections:
        if sum(record[q] for q in corr.deps) & 1:
            state = apply_pauli(state, corr.target, corr.pauli)
    state = state.reordered(pattern.output_map)
    return StateVector(tuple(range(pattern.n_logical)), state.amplitudes)
