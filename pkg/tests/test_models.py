import math

import numpy as np
import pytest

from mbvqe.ed import exact_ground_energy, ground_state
from mbvqe.models import (
    Heisenberg2D,
    Hubbard,
    LatticeSpec,
    TFIM,
    bell_pair_initial_state,
    build_heisenberg2d,
    build_hubbard_jw,
    build_tfim,
    default_initial_state,
    hva_generators,
    support_histogram,
)
from mbvqe.pauli import Hamiltonian, PauliString
from mbvqe.statevector import StateVector, expectation_and_variance

from conftest import dense_hamiltonian, fock_hubbard


def test_lattice_edges():
    sq = LatticeSpec("square", 3)
    assert len(sq.edges()) == 12
    assert sq.column_edges()[:2] == [(0, 3), (3, 6)]
    assert LatticeSpec("chain", 3, "periodic").chain_bonds() == [(0, 1), (1, 2), (2, 0)]
    with pytest.raises(ValueError):
        LatticeSpec("square", 1)
    with pytest.raises(ValueError):
        LatticeSpec("hex", 3)


def test_tfim_terms():
    h = build_tfim(3, 0.7, 1.3)
    labels = [(t.label(3), t.coefficient) for t in h.terms]
    assert labels == [("ZZI", -0.7), ("IZZ", -0.7), ("XII", -1.3), ("IXI", -1.3), ("IIX", -1.3)]
    assert len(build_tfim(3, boundary="periodic").terms) == 6
    with pytest.raises(ValueError):
        build_tfim(1)


def test_tfim_two_sites_ground_energy():
    h = build_tfim(2, 1.0, 1.0)
    assert exact_ground_energy(h) == pytest.approx(-math.sqrt(5), abs=1e-8)
    assert np.linalg.eigvalsh(dense_hamiltonian(h))[0] == pytest.approx(-math.sqrt(5), abs=1e-12)


@pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
def test_heisenberg_edge_count_law(n):
    h = build_heisenberg2d(n, 1.0, "as_written", "open")
    assert len(h.terms) == 6 * n * (n - 1)
    assert len(LatticeSpec("square", n).edges()) == 2 * n * (n - 1)


def test_heisenberg_conventions():
    aw = build_heisenberg2d(2, 1.0, "as_written")
    af = build_heisenberg2d(2, 1.0, "antiferromagnetic")
    assert {t.coefficient for t in aw.terms} == {-1.0}
    assert {t.coefficient for t in af.terms} == {1.0}
    assert [t.label(4) for t in aw.terms[:3]] == ["XIXI", "YIYI", "ZIZI"]
    with pytest.raises(ValueError):
        build_heisenberg2d(1)
    with pytest.raises(ValueError):
        build_heisenberg2d(2, sign_convention="ferro")


def test_single_edge_singlet_energy():
    h = Hamiltonian(2, tuple(PauliString.from_label(p * 2) for p in "XYZ"))
    assert exact_ground_energy(h) == pytest.approx(-3.0, abs=1e-12)


def test_heisenberg_4x4_as_written_ground_energy():
    gs = ground_state(build_heisenberg2d(4, 1.0, "as_written"))
    assert gs.energy == pytest.approx(-24.0, abs=1e-8)
    assert gs.residual < 1e-6


def test_hubbard_histograms():
    _, gens = build_hubbard_jw(3, boundary="periodic", ordering="interleaved")
    assert support_histogram(gens) == {1: 6, 2: 3, 3: 8, 5: 4}
    _, gens = build_hubbard_jw(2, boundary="open", ordering="interleaved")
    assert support_histogram(gens) == {1: 4, 2: 2, 3: 4}
    _, gens = build_hubbard_jw(3, boundary="periodic", ordering="blocked")
    assert support_histogram(gens) != {1: 6, 2: 3, 3: 8, 5: 4}


def test_hubbard_zero_hopping_is_diagonal():
    h, _ = build_hubbard_jw(3, t=0.0, U=2.0)
    assert all(term.is_diagonal() for term in h.terms)


def test_hubbard_constant_and_real_coefficients():
    h, gens = build_hubbard_jw(3, t=1.0, U=2.0)
    assert h.constant == pytest.approx(3 * 2.0 / 4)
    assert all(isinstance(t.coefficient, float) for t in h.terms)
    assert all(g.coefficient == 1.0 for g in gens)
    with pytest.raises(ValueError):
        build_hubbard_jw(3, ordering="zigzag")


@pytest.mark.parametrize("p,periodic", [(2, False), (2, True), (3, False), (3, True)])
@pytest.mark.parametrize("ordering", ["interleaved", "blocked"])
def test_jw_spectrum_matches_fock_oracle(p, periodic, ordering):
    t, U = 0.8, 1.7
    h, _ = build_hubbard_jw(p, t, U, "periodic" if periodic else "open", ordering)
    jw = np.linalg.eigvalsh(dense_hamiltonian(h))
    fock = np.linalg.eigvalsh(fock_hubbard(p, t, U, periodic))
    assert np.allclose(jw, fock, atol=1e-10)


def test_orderings_share_spectrum():
    a, _ = build_hubbard_jw(3, 1.0, 1.0, "periodic", "interleaved")
    b, _ = build_hubbard_jw(3, 1.0, 1.0, "periodic", "blocked")
    assert np.allclose(np.linalg.eigvalsh(dense_hamiltonian(a)), np.linalg.eigvalsh(dense_hamiltonian(b)), atol=1e-10)


def test_bell_pair_state():
    v = bell_pair_initial_state(2)
    assert np.allclose(v.amplitudes, [0, 1 / math.sqrt(2), -1 / math.sqrt(2), 0])
    w = bell_pair_initial_state(4)
    assert w.norm() == pytest.approx(1.0)
    for q in range(4):
        h = Hamiltonian(4, (PauliString.from_ops({q: "Z"}),))
        assert expectation_and_variance(w, h)[0] == pytest.approx(0.0, abs=1e-14)
    for bad in ([(0, 1), (1, 2)], [(0, 1)], [(0, 1, 2), (3, 3)]):
        with pytest.raises(ValueError):
            bell_pair_initial_state(4, bad)
    with pytest.raises(ValueError):
        bell_pair_initial_state(3)


def test_bell_row_product_energy_matches_dense():
    h = build_heisenberg2d(2, 1.0, "antiferromagnetic")
    v = bell_pair_initial_state(4)
    dense = dense_hamiltonian(h)
    e = np.vdot(v.amplitudes, dense @ v.amplitudes).real
    var = np.vdot(v.amplitudes, dense @ dense @ v.amplitudes).real - e**2
    assert expectation_and_variance(v, h) == pytest.approx((e, var), abs=1e-10)


def test_bell_pairs_each_singlet():
    v = bell_pair_initial_state(4, [(0, 2), (1, 3)])
    for a, b in [(0, 2), (1, 3)]:
        h = Hamiltonian(4, tuple(PauliString.from_ops({a: p, b: p}) for p in "XYZ"))
        assert expectation_and_variance(v, h) == pytest.approx((-3.0, 0.0), abs=1e-12)


def test_default_initial_states():
    assert np.allclose(default_initial_state(TFIM(3)).amplitudes, np.full(8, 1 / math.sqrt(8)))
    assert np.allclose(default_initial_state(Heisenberg2D(2)).amplitudes, bell_pair_initial_state(4).amplitudes)


def test_hva_generators_unit_and_ordered():
    gens = hva_generators(Heisenberg2D(2))
    assert len(gens) == 12 and {g.coefficient for g in gens} == {1.0}
    assert len(hva_generators(Hubbard(3))) == 21
    assert [g.label(3) for g in hva_generators(TFIM(3))] == ["ZZI", "IZZ", "XII", "IXI", "IIX"]


def test_ed_capacity_and_convergence_errors():
    from mbvqe.errors import CapacityError, ConvergenceError

    with pytest.raises(CapacityError):
        ground_state(Hamiltonian(21, (PauliString.from_ops({20: "Z"}),)))
    with pytest.raises(ConvergenceError) as info:
        ground_state(build_tfim(10), tol=1e-14, max_iter=1)
    assert info.value.iterations is not None


def test_ed_ground_vector_has_zero_variance():
    for h in (build_tfim(4), build_heisenberg2d(3, 1.0, "antiferromagnetic"), build_hubbard_jw(3)[0]):
        gs = ground_state(h)
        e, var = expectation_and_variance(StateVector(range(h.n_qubits), gs.vector), h)
        assert e == pytest.approx(gs.energy, abs=1e-8)
        assert var < 1e-8
