"""
Rotations as measurement patterns
=================================

A walk through the smallest building blocks: one multi-qubit Pauli rotation
driven by a single ancilla measurement, and the single-qubit nodes used to
change basis around it.
"""

import itertools

import numpy as np

from mbvqe.circuit import Constant
from mbvqe.execution import ExecutionMode, execute_pattern, execute_reference_full_graph
from mbvqe.pattern import NODE_BUDGETS, count_pattern_resources, multi_qubit_rotation_pattern, node_target_unitary, single_qubit_node
from mbvqe.pauli import PauliString
from mbvqe.statevector import StateVector, apply_pauli_string_rotation, global_phase_distance

rng = np.random.default_rng(0)

##############################################################################
# One ancilla, one measurement
# ----------------------------
#
# R_ZZZ(theta) on three qubits needs a single ancilla wired to each target by
# a CZ edge. Measuring the ancilla in the YZ plane applies the rotation; a 1
# outcome leaves a Pauli by-product which the pattern corrects.

theta = 0.83
pattern = multi_qubit_rotation_pattern([0, 1, 2], "Z", Constant(theta))
print(count_pattern_resources(pattern, with_width=True))

amps = rng.normal(size=8) + 1j * rng.normal(size=8)
psi = StateVector(range(3), amps / np.linalg.norm(amps))
target = apply_pauli_string_rotation(psi, PauliString.from_label("ZZZ"), theta)

(ancilla,) = [c.qubit for c in pattern.commands]
for outcome in (0, 1):
    out, _ = execute_pattern(pattern, [], psi, ExecutionMode.forced({ancilla: outcome}))
    print(f"outcome {outcome}: distance to R_ZZZ|psi> = {global_phase_distance(out, target):.1e}")

##############################################################################
# Single-qubit nodes
# ------------------
#
# X and Y strings reuse the Z pattern after a local basis change. Each node
# colour is a short chain of measured qubits. The table below checks every
# outcome branch of every node against its target unitary.

one = StateVector([0], np.array([0.6, 0.8j]))
for color in ("green", "orange", "blue-", "blue+", "yellow", "red"):
    angle = 0.4 if color in ("green", "orange") else None
    node = single_qubit_node(color, angle)
    expected = StateVector([0], node_target_unitary(color, angle) @ one.amplitudes)
    labels = [c.qubit for c in node.commands]
    worst = 0.0
    for bits in itertools.product((0, 1), repeat=len(labels)):
        out, _ = execute_pattern(node, [], one, ExecutionMode.forced(dict(zip(labels, bits))))
        worst = max(worst, global_phase_distance(out, expected))
    print(f"{color:7s} {node.n_measurements} measurements (budget {NODE_BUDGETS[color.rstrip('+-')]}), worst branch {worst:.1e}")

##############################################################################
# Lazy versus eager
# -----------------
#
# The executor only allocates a qubit when an edge first touches it and frees
# it once measured. The reference executor builds the whole graph state up
# front. On small patterns both must give the same output.

node = single_qubit_node("yellow")
labels = [c.qubit for c in node.commands]
forced = {q: int(b) for q, b in zip(labels, rng.integers(0, 2, len(labels)))}
lazy, _ = execute_pattern(node, [], one, ExecutionMode.forced(forced))
full = execute_reference_full_graph(node, [], one, forced)
print(f"lazy vs full graph: {np.max(np.abs(lazy.amplitudes - full.amplitudes)):.1e}")
