"""Pauli strings, qubit Hamiltonians and the dense kernels that apply them.

Amplitude vectors are little-endian: qubit ``q`` is bit ``q`` of the
amplitude index.
"""

from __future__ import annotations

import functools
import math
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field

import numpy as np

PAULI_OPS = ("X", "Y", "Z")


@functools.lru_cache(maxsize=32)
def basis_indices(n_qubits: int) -> np.ndarray:
    idx = np.arange(1 << n_qubits, dtype=np.int64)
    idx.setflags(write=False)
    return idx


@functools.lru_cache(maxsize=256)
def parity_sign(zmask: int, n_qubits: int) -> np.ndarray:
    """Return ``(-1)**popcount(i & zmask)`` for every basis index ``i``."""
    idx = basis_indices(n_qubits)
    bits = np.bitwise_count(idx & zmask) & 1
    sign = 1.0 - 2.0 * bits.astype(np.float64)
    sign.setflags(write=False)
    return sign


@functools.lru_cache(maxsize=256)
def flip_permutation(xmask: int, n_qubits: int) -> np.ndarray:
    perm = basis_indices(n_qubits) ^ xmask
    perm.setflags(write=False)
    return perm


def apply_pauli_masks(psi: np.ndarray, xmask: int, zmask: int, n_qubits: int) -> np.ndarray:
    """Apply the Pauli operator encoded by ``(xmask, zmask)`` to ``psi``.

    ``xmask`` marks qubits carrying X or Y, ``zmask`` qubits carrying Z or Y.
    With the sign taken at the output index, Y factors leave the phase ``(-i)**n_y``.
    """
    phase = (-1j) ** bin(xmask & zmask).count("1")
    psi = np.asarray(psi, dtype=np.complex128)
    if xmask:
        out = psi[flip_permutation(xmask, n_qubits)]
    else:
        out = psi.copy()
    if zmask:
        out *= parity_sign(zmask, n_qubits)
    if phase != 1:
        out *= phase
    return out


@dataclass(frozen=True)
class PauliString:
    """A real-weighted tensor product of single-qubit Pauli operators.

    ``support`` is a tuple of ``(qubit, op)`` pairs with strictly increasing
    qubit indices; identity factors are never stored.
    """

    support: tuple[tuple[int, str], ...]
    coefficient: float = 1.0

    def __post_init__(self):
        support = tuple((int(q), str(op)) for q, op in self.support)
        qubits = [q for q, _ in support]
        if any(b <= a for a, b in zip(qubits, qubits[1:])):
            raise ValueError(f"qubit indices must be strictly increasing: {qubits}")
        if qubits and qubits[0] < 0:
            raise ValueError("qubit indices must be non-negative")
        for _, op in support:
            if op not in PAULI_OPS:
                raise ValueError(f"unknown Pauli operator {op!r}")
        if not math.isfinite(self.coefficient):
            raise ValueError("coefficient must be finite")
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "coefficient", float(self.coefficient))

    @classmethod
    def from_ops(cls, ops: Mapping[int, str], coefficient: float = 1.0) -> PauliString:
        """Build from a ``{qubit: op}`` mapping; ``"I"`` entries are dropped."""
        items = sorted((q, op) for q, op in ops.items() if op != "I")
        return cls(tuple(items), coefficient)

    @classmethod
    def from_label(cls, label: str, coefficient: float = 1.0) -> PauliString:
        """Build from a label such as ``"XZIY"`` (character ``i`` acts on qubit ``i``)."""
        return cls.from_ops(dict(enumerate(label)), coefficient)

    @property
    def qubits(self) -> tuple[int, ...]:
        return tuple(q for q, _ in self.support)

    @property
    def ops(self) -> dict[int, str]:
        return dict(self.support)

    @property
    def weight(self) -> int:
        return len(self.support)

    @property
    def xmask(self) -> int:
        return sum(1 << q for q, op in self.support if op in "XY")

    @property
    def zmask(self) -> int:
        return sum(1 << q for q, op in self.support if op in "YZ")

    @property
    def key(self) -> tuple[tuple[int, str], ...]:
        """Coefficient-free identity of the operator product."""
        return self.support

    def with_coefficient(self, coefficient: float) -> PauliString:
        return PauliString(self.support, coefficient)

    def label(self, n_qubits: int) -> str:
        ops = self.ops
        return "".join(ops.get(q, "I") for q in range(n_qubits))

    def is_diagonal(self) -> bool:
        return all(op == "Z" for _, op in self.support)

    def apply(self, psi: np.ndarray, n_qubits: int) -> np.ndarray:
        """Return ``P psi`` (the coefficient is not applied)."""
        return apply_pauli_masks(psi, self.xmask, self.zmask, n_qubits)

    def __str__(self) -> str:
        body = " ".join(f"{op}{q}" for q, op in self.support) or "I"
        return f"{self.coefficient:+g}*{body}"


@dataclass(frozen=True)
class Hamiltonian:
    """A Hermitian operator ``constant + sum_k c_k P_k`` on ``n_qubits`` qubits."""

    n_qubits: int
    terms: tuple[PauliString, ...]
    constant: float = 0.0
    _groups: list = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValueError("n_qubits must be positive")
        terms = tuple(self.terms)
        for term in terms:
            if term.qubits and term.qubits[-1] >= self.n_qubits:
                raise ValueError(f"term {term} acts outside {self.n_qubits} qubits")
        object.__setattr__(self, "terms", terms)
        object.__setattr__(self, "constant", float(self.constant))

    @classmethod
    def from_terms(cls, n_qubits: int, terms: Iterable[PauliString], constant: float = 0.0) -> Hamiltonian:
        """Combine like terms (same operator product) and drop zeros."""
        merged: dict = {}
        for term in terms:
            if not term.support:
                constant += term.coefficient
                continue
            merged[term.key] = merged.get(term.key, 0.0) + term.coefficient
        kept = tuple(PauliString(k, c) for k, c in merged.items() if abs(c) > 1e-15)
        return cls(n_qubits, kept, constant)

    @property
    def dim(self) -> int:
        return 1 << self.n_qubits

    def _grouped(self):
        # terms sharing an X-mask differ only by a diagonal phase, so one gather serves all
        if self._groups is None:
            by_x: dict[int, np.ndarray] = {}
            for term in self.terms:
                x, z = term.xmask, term.zmask
                # (P psi)[c] = (-i)**n_y * sign_z[c] * psi[c ^ x]
                phase = term.coefficient * (-1j) ** bin(x & z).count("1")
                vec = phase * parity_sign(z, self.n_qubits)
                by_x[x] = by_x.get(x, 0) + vec
            groups = []
            for x, vec in sorted(by_x.items()):
                vec = np.asarray(vec, dtype=np.complex128)
                if np.allclose(vec.imag, 0.0):
                    vec = vec.real.copy()
                groups.append((x, vec))
            object.__setattr__(self, "_groups", groups)
        return self._groups

    def apply(self, psi: np.ndarray) -> np.ndarray:
        """Return ``H psi`` without forming a matrix."""
        out = self.constant * psi.astype(np.complex128)
        for x, vec in self._grouped():
            if x:
                out += vec * psi[flip_permutation(x, self.n_qubits)]
            else:
                out += vec * psi
        return out

    def expectation(self, psi: np.ndarray) -> float:
        return float(np.vdot(psi, self.apply(psi)).real)

    def to_sparse(self):
        """Sparse CSR matrix of the operator (for small systems and diagnostics)."""
        from scipy import sparse

        dim = self.dim
        idx = basis_indices(self.n_qubits)
        mat = sparse.csr_matrix((dim, dim), dtype=np.complex128)
        if self.constant:
            mat = mat + self.constant * sparse.identity(dim, format="csr")
        for x, vec in self._grouped():
            # row c picks column c ^ x
            mat = mat + sparse.csr_matrix((vec, (idx, idx ^ x)), shape=(dim, dim))
        return mat

    def generators(self) -> list[PauliString]:
        """Distinct Pauli products in order of first appearance, unit coefficient."""
        seen, out = set(), []
        for term in self.terms:
            if term.key not in seen:
                seen.add(term.key)
                out.append(term.with_coefficient(1.0))
        return out
