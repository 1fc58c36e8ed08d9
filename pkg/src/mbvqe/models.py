"""Lattice models, their qubit Hamiltonians, and reference initial states."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Literal, Union

import numpy as np

from .pauli import Hamiltonian, PauliString
from .statevector import StateVector

Boundary = Literal["open", "periodic"]


@dataclass(frozen=True)
class LatticeSpec:
    """A chain of ``extent`` sites or an ``extent x extent`` square lattice."""

    kind: Literal["chain", "square"]
    extent: int
    boundary: Boundary = "open"

    def __post_init__(self):
        if self.kind not in ("chain", "square"):
            raise ValueError(f"unknown lattice kind {self.kind!r}")
        if self.boundary not in ("open", "periodic"):
            raise ValueError(f"unknown boundary {self.boundary!r}")
        if self.extent < 2:
            raise ValueError("lattice extent must be at least 2")

    @property
    def n_sites(self) -> int:
        return self.extent if self.kind == "chain" else self.extent**2

    def site(self, row: int, col: int) -> int:
        """Row-major site index on the square lattice."""
        return row * self.extent + col

    def chain_bonds(self) -> list[tuple[int, int]]:
        n = self.extent
        bonds = [(i, i + 1) for i in range(n - 1)]
        if self.boundary == "periodic" and n > 2:
            bonds.append((n - 1, 0))
        return bonds

    def column_edges(self) -> list[tuple[int, int]]:
        """Vertical nearest-neighbour pairs ``(r, c)-(r+1, c)``, column by column."""
        n = self.extent
        rows = range(n) if self.boundary == "periodic" and n > 2 else range(n - 1)
        return [(self.site(r, c), self.site((r + 1) % n, c)) for c in range(n) for r in rows]

    def row_edges(self) -> list[tuple[int, int]]:
        """Horizontal nearest-neighbour pairs ``(r, c)-(r, c+1)``, row by row."""
        n = self.extent
        cols = range(n) if self.boundary == "periodic" and n > 2 else range(n - 1)
        return [(self.site(r, c), self.site(r, (c + 1) % n)) for r in range(n) for c in cols]

    def edges(self) -> list[tuple[int, int]]:
        if self.kind == "chain":
            return self.chain_bonds()
        return self.column_edges() + self.row_edges()


@dataclass(frozen=True)
class TFIM:
    """Transverse-field Ising chain ``-J sum Z_i Z_{i+1} - Gamma sum X_i``."""

    n_sites: int
    J: float = 1.0
    gamma: float = 1.0
    boundary: Boundary = "open"

    @property
    def n_qubits(self) -> int:
        return self.n_sites


@dataclass(frozen=True)
class Heisenberg2D:
    """Square-lattice Heisenberg model on ``side x side`` spins.

    ``sign_convention="as_written"`` uses coefficient ``-J`` on every
    ``XX``, ``YY`` and ``ZZ`` bond term; ``"antiferromagnetic"`` uses ``+|J|``.
    """

    side: int
    J: float = 1.0
    sign_convention: Literal["as_written", "antiferromagnetic"] = "antiferromagnetic"
    boundary: Boundary = "open"

    @property
    def n_qubits(self) -> int:
        return self.side**2


@dataclass(frozen=True)
class Hubbard:
    """Fermi-Hubbard chain of ``sites`` sites, mapped to ``2 * sites`` qubits."""

    sites: int
    t: float = 1.0
    U: float = 1.0
    boundary: Boundary = "periodic"
    ordering: Literal["interleaved", "blocked"] = "interleaved"

    @property
    def n_qubits(self) -> int:
        return 2 * self.sites


ModelSpec = Union[TFIM, Heisenberg2D, Hubbard]


def _check_finite(**values):
    for name, value in values.items():
        if not math.isfinite(value):
            raise ValueError(f"{name} must be finite")


def build_tfim(N: int, J: float = 1.0, gamma: float = 1.0, boundary: Boundary = "open") -> Hamiltonian:
    """``-J Z_i Z_{i+1}`` on every bond followed by ``-gamma X_i`` on every site."""
    if N < 2:
        raise ValueError("the Ising chain needs at least 2 sites")
    _check_finite(J=J, gamma=gamma)
    lattice = LatticeSpec("chain", N, boundary)
    terms = [PauliString.from_ops({i: "Z", j: "Z"}, -J) for i, j in lattice.chain_bonds()]
    terms += [PauliString.from_ops({i: "X"}, -gamma) for i in range(N)]
    return Hamiltonian(N, tuple(terms))


def build_heisenberg2d(
    n: int,
    J: float = 1.0,
    sign_convention: str = "antiferromagnetic",
    boundary: Boundary = "open",
) -> Hamiltonian:
    """Three Pauli terms per nearest-neighbour edge, column edges first, each ``XX, YY, ZZ``."""
    if n < 2:
        raise ValueError("the square lattice needs side >= 2")
    _check_finite(J=J)
    if sign_convention == "as_written":
        coeff = -J
    elif sign_convention == "antiferromagnetic":
        coeff = abs(J)
    else:
        raise ValueError(f"unknown sign convention {sign_convention!r}")
    lattice = LatticeSpec("square", n, boundary)
    terms = []
    for i, j in lattice.edges():
        for op in "XYZ":
            terms.append(PauliString.from_ops({i: op, j: op}, coeff))
    return Hamiltonian(n * n, tuple(terms))


def spin_orbital(site: int, spin: int, sites: int, ordering: str) -> int:
    """Qubit index of spin-orbital ``(site, spin)``; spin 0 is up, 1 is down."""
    if ordering == "interleaved":
        return 2 * site + spin
    if ordering == "blocked":
        return spin * sites + site
    raise ValueError(f"unknown Jordan-Wigner ordering {ordering!r}")


def hubbard_bonds(sites: int, boundary: Boundary) -> list[tuple[int, int]]:
    bonds = [(i, i + 1) for i in range(sites - 1)]
    if boundary == "periodic" and sites > 2:
        bonds.append((sites - 1, 0))
    return bonds


def hopping_strings(p: int, q: int, coeff: float) -> list[PauliString]:
    """Jordan-Wigner image of ``coeff (c_p^dag c_q + c_q^dag c_p)``.

    Equals ``coeff/2 (X_p Z...Z X_q + Y_p Z...Z Y_q)`` with the Z string on
    every qubit strictly between ``p`` and ``q``.
    """
    lo, hi = sorted((p, q))
    middle = {k: "Z" for k in range(lo + 1, hi)}
    return [
        PauliString.from_ops({lo: "X", hi: "X", **middle}, coeff / 2),
        PauliString.from_ops({lo: "Y", hi: "Y", **middle}, coeff / 2),
    ]


# Per-layer generator order used for the 3-site periodic chain under the
# interleaved ordering (label character k acts on qubit k). Basis-change
# nodes of neighbouring generators fuse in the measurement pattern, so the
# order fixes the pattern cost; this one gives 131 measurements per layer.
HUBBARD_P3_LAYER_ORDER = (
    "XZXIII", "YZYIII", "IXZZZX", "IYZZZY", "IIXZXI", "IZIIII", "IIYZYI",
    "IIIZII", "IIZZII", "XZZZXI", "YZZZYI", "ZIIIII", "ZZIIII", "IXZXII",
    "IIIYZY", "IIIXZX", "IIIIZI", "IYZYII", "IIZIII", "IIIIZZ", "IIIIIZ",
)


def _hubbard_generator_order(generators: list[PauliString], n_qubits: int) -> list[PauliString]:
    by_label = {g.label(n_qubits): g for g in generators}
    if set(by_label) == set(HUBBARD_P3_LAYER_ORDER):
        return [by_label[label] for label in HUBBARD_P3_LAYER_ORDER]
    return generators


def build_hubbard_jw(
    p: int,
    t: float = 1.0,
    U: float = 1.0,
    boundary: Boundary = "periodic",
    ordering: str = "interleaved",
) -> tuple[Hamiltonian, list[PauliString]]:
    """Jordan-Wigner Fermi-Hubbard chain and its deduplicated rotation generators.

    The returned Hamiltonian includes the scalar offset ``p U / 4`` from
    expanding ``U n_up n_down`` as ``Hamiltonian.constant``; the generators
    carry unit coefficients and exclude the offset.
    """
    if p < 2:
        raise ValueError("the Hubbard chain needs at least 2 sites")
    if ordering not in ("interleaved", "blocked"):
        raise ValueError(f"unknown Jordan-Wigner ordering {ordering!r}")
    _check_finite(t=t, U=U)
    n = 2 * p
    terms: list[PauliString] = []
    for i, j in hubbard_bonds(p, boundary):
        for spin in (0, 1):
            a = spin_orbital(i, spin, p, ordering)
            b = spin_orbital(j, spin, p, ordering)
            terms += hopping_strings(a, b, -t)
    constant = 0.0
    for i in range(p):
        up = spin_orbital(i, 0, p, ordering)
        down = spin_orbital(i, 1, p, ordering)
        # U n_up n_down = U/4 (1 - Z_up - Z_down + Z_up Z_down)
        constant += U / 4
        terms.append(PauliString.from_ops({up: "Z", down: "Z"}, U / 4))
        terms.append(PauliString.from_ops({up: "Z"}, -U / 4))
        terms.append(PauliString.from_ops({down: "Z"}, -U / 4))
    ham = Hamiltonian.from_terms(n, terms, constant)
    generators = _hubbard_generator_order(ham.generators(), n)
    return ham, generators


def support_histogram(generators) -> dict[int, int]:
    return dict(sorted(Counter(g.weight for g in generators).items()))


def hamiltonian_for(model: ModelSpec) -> Hamiltonian:
    if isinstance(model, TFIM):
        return build_tfim(model.n_sites, model.J, model.gamma, model.boundary)
    if isinstance(model, Heisenberg2D):
        return build_heisenberg2d(model.side, model.J, model.sign_convention, model.boundary)
    if isinstance(model, Hubbard):
        return build_hubbard_jw(model.sites, model.t, model.U, model.boundary, model.ordering)[0]
    raise ValueError(f"unsupported model {model!r}")


def hva_generators(model: ModelSpec) -> list[PauliString]:
    """Per-layer rotation generators, in application order, with unit coefficients."""
    if isinstance(model, TFIM):
        return build_tfim(model.n_sites, 1.0, 1.0, model.boundary).generators()
    if isinstance(model, Heisenberg2D):
        return build_heisenberg2d(model.side, 1.0, "as_written", model.boundary).generators()
    if isinstance(model, Hubbard):
        return build_hubbard_jw(model.sites, model.t, model.U, model.boundary, model.ordering)[1]
    raise ValueError(f"unsupported model {model!r}")


def bell_pair_initial_state(n_qubits: int, pairing=None) -> StateVector:
    """Product of ``(|01> - |10>)/sqrt(2)`` singlets over disjoint qubit pairs.

    The default pairing is ``(0, 1), (2, 3), ...``. In a pair ``(a, b)`` the
    positive component has qubit ``a`` in 1 and qubit ``b`` in 0, so a single
    pair has amplitudes ``(0, 1, -1, 0) / sqrt(2)``.
    """
    if n_qubits < 2 or n_qubits % 2:
        raise ValueError("a Bell-pair product needs an even number of qubits")
    if pairing is None:
        pairing = [(k, k + 1) for k in range(0, n_qubits, 2)]
    flat = [q for pair in pairing for q in pair]
    if any(len(pair) != 2 for pair in pairing) or sorted(flat) != list(range(n_qubits)):
        raise ValueError(f"pairing {pairing} must cover qubits 0..{n_qubits - 1} exactly once")
    amps = np.zeros(1 << n_qubits, dtype=np.complex128)
    for choice in range(1 << len(pairing)):
        index, sign = 0, 1.0
        for k, (a, b) in enumerate(pairing):
            if (choice >> k) & 1:
                index |= 1 << b
                sign = -sign
            else:
                index |= 1 << a
        amps[index] = sign
    amps /= math.sqrt(2) ** len(pairing)
    return StateVector(tuple(range(n_qubits)), amps)


def plus_state(n_qubits: int) -> StateVector:
    amps = np.full(1 << n_qubits, 1 / math.sqrt(1 << n_qubits), dtype=np.complex128)
    return StateVector(tuple(range(n_qubits)), amps)


def default_initial_state(model: ModelSpec) -> StateVector:
    """|+>^N for the Ising chain, the consecutive-pair singlet product otherwise."""
    if isinstance(model, TFIM):
        return plus_state(model.n_qubits)
    return bell_pair_initial_state(model.n_qubits)
