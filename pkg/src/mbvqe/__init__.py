"""Measurement-based variational quantum eigensolvers on statevectors.

Ansätze are built as circuits (``circuit``) or as measurement patterns on
graph states (``pattern``), executed (``execution``) and optimized
(``vqe``) against lattice Hamiltonians (``models``).
"""

__version__ = "0.1.0"

from .circuit import CircuitIR, build_cbhva, build_mbhea_reference_circuit, decompose_native, simulate_circuit
from .ed import ground_state
from .execution import ExecutionMode, execute_pattern, execute_reference_full_graph, peak_active_width
from .models import Heisenberg2D, Hubbard, TFIM, hamiltonian_for
from .pattern import PatternIR, compile_mbhea, compile_mbhva, translate_circuit_naive
from .pauli import Hamiltonian, PauliString
from .statevector import StateVector
from .vqe import Backend, ExperimentConfig, build_ansatz, energy, parameter_shift_gradient, run_experiment, v_score
