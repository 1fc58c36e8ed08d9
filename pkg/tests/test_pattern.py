import itertools
import json
import math

import numpy as np
import pytest

from mbvqe.circuit import (
    CNOT,
    CZ,
    AxisRotation,
    CircuitIR,
    Constant,
    H,
    Param,
    PauliStringRotation,
    build_cbhva,
    decompose_native,
    simulate_circuit,
)
from mbvqe.execution import ExecutionMode, execute_pattern
from mbvqe.models import Heisenberg2D, Hubbard, TFIM
from mbvqe.pattern import (
    NODE_BUDGETS,
    CorrectionCommand,
    MeasurementCommand,
    PatternIR,
    compile_mbhea,
    compile_mbhva,
    count_pattern_resources,
    dumps_pattern,
    emit_dot,
    multi_qubit_rotation_pattern,
    node_target_unitary,
    pattern_from_json,
    pattern_to_json,
    single_qubit_node,
    translate_circuit_naive,
)
from mbvqe.pauli import PauliString
from mbvqe.statevector import StateVector, apply_controlled_pauli, attach_plus_qubit, outcome_probabilities, plane_basis

from conftest import PAULI, dense_pauli, dense_rotation, phase_distance, random_state

NODE_COLORS = ["green", "orange", "blue-", "blue+", "yellow", "red"]


def run_branch(pattern, params, psi, outcomes):
    out, record = execute_pattern(pattern, params, psi, ExecutionMode.forced(outcomes))
    return out.amplitudes, record


@pytest.mark.parametrize("N", [1, 2, 3, 4, 5])
@pytest.mark.parametrize("p", ["X", "Y", "Z"])
def test_ancilla_rotation_pattern_both_branches(N, p):
    rng = np.random.default_rng(100 * N + ord(p))
    theta = rng.uniform(-math.pi, math.pi)
    pattern = multi_qubit_rotation_pattern(range(N), p, Param(0))
    assert pattern.n_measurements == 1 and len(pattern.edges) == N
    psi = StateVector(range(N), random_state(N, rng))
    target = dense_rotation(p * N, theta) @ psi.amplitudes
    (cmd,) = pattern.commands
    for m in (0, 1):
        out, _ = run_branch(pattern, [theta], psi, {cmd.qubit: m})
        assert phase_distance(out, target) < 1e-10
    # probability of each branch at measurement time, from the full graph state
    state = StateVector(range(N), psi.amplitudes)
    state = attach_plus_qubit(state, cmd.qubit)
    for q in range(N):
        state = apply_controlled_pauli(state, cmd.qubit, q, p)
    probs = outcome_probabilities(state, cmd.qubit, plane_basis(cmd.plane, cmd.angle([theta], {})))
    assert probs == pytest.approx((0.5, 0.5), abs=1e-9)


def test_ancilla_rotation_examples():
    rng = np.random.default_rng(5)
    psi = StateVector(range(3), random_state(3, rng))
    zzz = multi_qubit_rotation_pattern([0, 1, 2], "Z", Constant(1.2))
    out, _ = execute_pattern(zzz, [], psi)
    assert phase_distance(out.amplitudes, dense_rotation("ZZZ", 1.2) @ psi.amplitudes) < 1e-10
    ident = multi_qubit_rotation_pattern([0, 1, 2], "Z", Constant(0.0))
    out, _ = execute_pattern(ident, [], psi)
    assert phase_distance(out.amplitudes, psi.amplitudes) < 1e-10
    with pytest.raises(ValueError):
        multi_qubit_rotation_pattern([0, 0], "Z", Constant(0.1))


@pytest.mark.parametrize("color", NODE_COLORS)
def test_node_templates_exhaustive(color):
    rng = np.random.default_rng(NODE_COLORS.index(color))
    angle = rng.uniform(-math.pi, math.pi) if color in ("green", "orange") else None
    pattern = single_qubit_node(color, angle)
    budget = NODE_BUDGETS[color.rstrip("+-")]
    assert pattern.n_measurements == budget
    target = node_target_unitary(color, angle)
    psi = StateVector([0], random_state(1, rng))
    expected = target @ psi.amplitudes
    labels = [c.qubit for c in pattern.commands]
    for bits in itertools.product((0, 1), repeat=len(labels)):
        out, record = run_branch(pattern, [], psi, dict(zip(labels, bits)))
        assert phase_distance(out, expected) < 1e-10, (color, bits)
        assert len(record) == budget


def test_orange_at_minus_half_pi_and_bad_colors():
    pattern = single_qubit_node("orange", -math.pi / 2)
    psi = StateVector([0], random_state(1, np.random.default_rng(2)))
    expected = dense_rotation("X", -math.pi / 2) @ psi.amplitudes
    labels = [c.qubit for c in pattern.commands]
    for bits in itertools.product((0, 1), repeat=2):
        out, _ = run_branch(pattern, [], psi, dict(zip(labels, bits)))
        assert phase_distance(out, expected) < 1e-10
    with pytest.raises(ValueError):
        single_qubit_node("purple")
    with pytest.raises(ValueError):
        single_qubit_node("orange")
    with pytest.raises(ValueError):
        single_qubit_node("blue", 0.3)


def test_composite_node_targets():
    rx = lambda a: dense_rotation("X", a)
    ry = lambda a: dense_rotation("Y", a)
    assert np.allclose(node_target_unitary("yellow"), rx(math.pi / 2) @ ry(math.pi / 2))
    assert np.allclose(node_target_unitary("red"), ry(-math.pi / 2) @ rx(-math.pi / 2))


@pytest.mark.parametrize("n", [2, 3, 4])
@pytest.mark.parametrize("depth", [1, 2])
def test_mbhva_budget_law(n, depth):
    pattern = compile_mbhva(Heisenberg2D(n), depth)
    report = count_pattern_resources(pattern)
    assert report.measurements == 46 * n * (n - 1) * depth
    budget = sum(NODE_BUDGETS[c] * k for c, k in report.nodes_by_color.items())
    assert budget == report.measurements
    assert report.nodes_by_color["green"] == pattern.n_params == 6 * n * (n - 1) * depth


def test_mbhva_hubbard_counts():
    one = count_pattern_resources(compile_mbhva(Hubbard(3), 1))
    assert one.measurements == 131
    colors = one.nodes_by_color
    assert colors["green"] == 21 and colors["orange"] == 7
    assert colors["blue"] + colors["yellow"] == 20 and colors["red"] == 4
    assert compile_mbhva(Hubbard(3), 2).n_measurements == 262


def test_mbhva_input_roles_and_signal_order():
    pattern = compile_mbhva(Heisenberg2D(2), 1)
    assert all(pattern.role(q) == "input" for q in pattern.inputs)
    assert len(pattern.inputs) == 4
    seen = set()
    for cmd in pattern.commands:
        assert (cmd.sign_deps | cmd.offset_deps) <= seen
        seen.add(cmd.qubit)
    with pytest.raises(ValueError):
        compile_mbhva(Heisenberg2D(2), 0)
    with pytest.raises(ValueError):
        compile_mbhva("not a model", 1)


def test_mbhea_counts_and_identity():
    pattern = compile_mbhea(2, 1)
    assert pattern.n_measurements == 11 and pattern.n_params == 7
    assert compile_mbhea(16, 2).n_params == 98
    zero = StateVector.zeros(range(2))
    out, _ = execute_pattern(pattern, np.zeros(7), zero)
    assert phase_distance(out.amplitudes, zero.amplitudes) < 1e-10


def test_naive_translation():
    assert translate_circuit_naive(CircuitIR(2, [CNOT(0, 1)])).n_measurements == 4
    cz = translate_circuit_naive(CircuitIR(2, [CZ(0, 1)]))
    assert cz.n_measurements == 0 and len(cz.edges) == 1
    for n, depth in ((2, 1), (3, 1), (4, 1), (2, 2)):
        circuit, _ = build_cbhva(Heisenberg2D(n), depth)
        assert translate_circuit_naive(decompose_native(circuit)).n_measurements == 94 * n * (n - 1) * depth
    with pytest.raises(ValueError):
        translate_circuit_naive(CircuitIR(2, [PauliStringRotation(PauliString.from_label("ZZ"), Constant(0.2))]))
    with pytest.raises(ValueError):
        translate_circuit_naive(CircuitIR(1, []), {"toffoli": 9})


def test_naive_translation_preserves_action():
    rng = np.random.default_rng(8)
    gates = [H(0), CNOT(0, 1), AxisRotation("Z", 1, Param(0)), AxisRotation("X", 0, Constant(0.4)), CNOT(1, 0), CZ(0, 1)]
    circuit = CircuitIR(2, gates, 1)
    pattern = translate_circuit_naive(circuit)
    psi = StateVector(range(2), random_state(2, rng))
    ref = simulate_circuit(circuit, [0.77], psi)
    for seed in range(5):
        out, _ = execute_pattern(pattern, [0.77], psi, ExecutionMode.sampled(seed))
        assert phase_distance(out.amplitudes, ref.amplitudes) < 1e-10


def test_pattern_validation():
    q = (("a", "input"), ("b", "output"))
    with pytest.raises(ValueError):
        PatternIR(q, (("a", "c", "Z"),), (), (), 0, ("a",), ("b",))
    with pytest.raises(ValueError):
        PatternIR(q, (), (MeasurementCommand("b", "XY", Constant(0.0)),), (), 0, ("a",), ("b",))
    with pytest.raises(ValueError):
        cmd = MeasurementCommand("a", "XY", Constant(0.0), frozenset({"b"}))
        PatternIR(q, (), (cmd,), (), 0, ("a",), ("b",))
    with pytest.raises(ValueError):
        PatternIR(q, (), (), (CorrectionCommand("X", "a", frozenset()),), 0, ("a",), ("b",))


def test_adaptive_angle_rule():
    cmd = MeasurementCommand(5, "XY", Param(0), frozenset({1}), frozenset({2}))
    assert cmd.angle([0.3], {1: 0, 2: 0}) == pytest.approx(0.3)
    assert cmd.angle([0.3], {1: 1, 2: 0}) == pytest.approx(-0.3)
    assert cmd.angle([0.3], {1: 1, 2: 1}) == pytest.approx(-(0.3 - math.pi))


def test_empty_pattern_report():
    empty = PatternIR((), (), (), (), 0, (), ())
    report = count_pattern_resources(empty)
    assert report.measurements == report.ancillas == report.entangling_edges == 0


def test_json_round_trip_and_dot():
    pattern = compile_mbhva(Hubbard(2, boundary="open"), 1)
    back = pattern_from_json(json.loads(dumps_pattern(pattern)))
    assert pattern_to_json(back) == pattern_to_json(pattern)
    assert back.commands == pattern.commands and back.edges == pattern.edges
    with pytest.raises(ValueError):
        pattern_from_json({"format": "other"})

    green = multi_qubit_rotation_pattern([0, 1], "Z", Constant(0.9))
    dot = emit_dot(green)
    assert dot.count("[label=") == 3
    assert dot.count("dir=none") == 2
    heis = compile_mbhva(Heisenberg2D(2), 1)
    text = emit_dot(heis)
    assert text == emit_dot(compile_mbhva(Heisenberg2D(2), 1))
    node_lines = [ln for ln in text.splitlines() if ln.lstrip().startswith("q") and "->" not in ln]
    assert len(node_lines) == len(heis.qubits)


def test_tfim_pattern_equals_circuit():
    rng = np.random.default_rng(4)
    model = TFIM(3)
    circuit, _ = build_cbhva(model, 2)
    pattern = compile_mbhva(model, 2)
    params = rng.uniform(-math.pi, math.pi, circuit.n_params)
    psi = StateVector(range(3), random_state(3, rng))
    out, _ = execute_pattern(pattern, params, psi)
    assert phase_distance(out.amplitudes, simulate_circuit(circuit, params, psi).amplitudes) < 1e-10


def test_pauli_oracle_sanity():
    assert np.allclose(dense_pauli("XZ"), np.kron(PAULI["Z"], PAULI["X"]))
