"""Exact ground energies by matrix-free Lanczos iteration."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse.linalg import ArpackNoConvergence, LinearOperator, eigsh

from .errors import CapacityError, ConvergenceError
from .pauli import Hamiltonian

MAX_ED_QUBITS = 20
DENSE_LIMIT = 6


@dataclass
class GroundState:
    energy: float
    vector: np.ndarray
    iterations: int
    residual: float


def _residual(h: Hamiltonian, energy: float, vec: np.ndarray) -> float:
    return float(np.linalg.norm(h.apply(vec) - energy * vec))


def ground_state(h: Hamiltonian, tol: float = 1e-8, max_iter: int = 5000, seed: int = 0) -> GroundState:
    """Lowest eigenpair of ``h``.

    Uses implicitly restarted Lanczos (ARPACK) on the Pauli-sum action of
    ``h``; ``iterations`` counts Hamiltonian applications. Registers of at
    most six qubits are diagonalized densely.
    """
    n = h.n_qubits
    if n > MAX_ED_QUBITS:
        raise CapacityError(f"exact diagonalization is capped at {MAX_ED_QUBITS} qubits, got {n}")
    if n <= DENSE_LIMIT:
        mat = h.to_sparse().toarray()
        vals, vecs = np.linalg.eigh(mat)
        vec = vecs[:, 0]
        return GroundState(float(vals[0]), vec, 1, _residual(h, float(vals[0]), vec))
    calls = 0

    def matvec(x):
        nonlocal calls
        calls += 1
        return h.apply(np.asarray(x, dtype=np.complex128).reshape(-1))

    op = LinearOperator((h.dim, h.dim), matvec=matvec, dtype=np.complex128)
    rng = np.random.default_rng(seed)
    v0 = rng.normal(size=h.dim) + 1j * rng.normal(size=h.dim)
    try:
        vals, vecs = eigsh(op, k=1, which="SA", tol=tol * 1e-2, maxiter=max_iter, v0=v0, ncv=min(h.dim - 1, 40))
    except ArpackNoConvergence as exc:
        residual = float("nan")
        if len(exc.eigenvalues):
            residual = _residual(h, float(exc.eigenvalues[0].real), exc.eigenvectors[:, 0])
        raise ConvergenceError("Lanczos iteration did not converge", residual, calls) from exc
    energy = float(vals[0].real)
    vec = vecs[:, 0] / np.linalg.norm(vecs[:, 0])
    residual = _residual(h, energy, vec)
    # energy error is bounded by residual**2 / gap; the residual itself is a safe check
    if residual > max(1e-4, np.sqrt(tol)):
        raise ConvergenceError("Lanczos residual above tolerance", residual, calls)
    return GroundState(energy, vec, calls, residual)


def exact_ground_energy(h: Hamiltonian, tol: float = 1e-8) -> float:
    return ground_state(h, tol).energy
