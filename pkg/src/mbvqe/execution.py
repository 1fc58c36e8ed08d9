"""Pattern execution: a lazy statevector executor and a full-graph reference."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CapacityError, ExecutionError, MeasurementError
from .pattern import PatternIR
from .statevector import (
    PAULI_MATRICES,
    StateVector,
    _apply_matrix,
    attach_plus_qubit,
    controlled_pauli_inplace,
    measure_in_basis,
    plane_basis,
)

REFERENCE_QUBIT_CAP = 14
UNIFORM_TOL = 1e-9


@dataclass(frozen=True)
class ExecutionMode:
    """``sampled`` (needs a seed), ``forced_zero``, or ``forced`` with explicit outcomes."""

    mode: str = "forced_zero"
    seed: int | None = None
    outcomes: dict | None = None
    check_uniform: bool = False

    def __post_init__(self):
        if self.mode not in ("sampled", "forced_zero", "forced"):
            raise ValueError(f"unknown execution mode {self.mode!r}")
        if self.mode == "sampled" and self.seed is None:
            raise ValueError("sampled mode needs a seed")
        if self.mode == "forced" and self.outcomes is None:
            raise ValueError("forced mode needs an outcome record")

    @classmethod
    def sampled(cls, seed: int, check_uniform: bool = False) -> ExecutionMode:
        return cls("sampled", seed=seed, check_uniform=check_uniform)

    @classmethod
    def forced_zero(cls) -> ExecutionMode:
        return cls("forced_zero")

    @classmethod
    def forced(cls, outcomes: dict) -> ExecutionMode:
        return cls("forced", outcomes=dict(outcomes))


def _check_inputs(pattern: PatternIR, params, input_state: StateVector) -> np.ndarray:
    values = np.asarray(params, dtype=np.float64).reshape(-1)
    if values.size != pattern.n_params:
        raise ValueError(f"pattern takes {pattern.n_params} parameters, got {values.size}")
    if input_state.n_qubits != pattern.n_logical:
        raise ValueError(f"pattern takes {pattern.n_logical} input qubits, got {input_state.n_qubits}")
    return values


def _apply_edge(state: StateVector, a, b, pauli: str) -> StateVector:
    amps = state.amplitudes
    controlled_pauli_inplace(amps, state.n_qubits, state.position(a), state.position(b), pauli)
    return state


def _apply_corrections(state: StateVector, pattern: PatternIR, outcomes: dict) -> StateVector:
    for corr in pattern.corrections:
        if corr.active(outcomes):
            pos = state.position(corr.target)
            amps = _apply_matrix(state.amplitudes, state.n_qubits, pos, PAULI_MATRICES[corr.pauli])
            state = StateVector(state.register, amps)
    return state


def _finish(state: StateVector, pattern: PatternIR, outcomes: dict) -> StateVector:
    state = _apply_corrections(state, pattern, outcomes)
    state = state.reordered(pattern.output_map)
    return StateVector(tuple(range(pattern.n_logical)), state.amplitudes)


def _measure(state, cmd, params, outcomes, mode: ExecutionMode, rng):
    angle = cmd.angle(params, outcomes)
    basis = plane_basis(cmd.plane, angle)
    if mode.mode == "sampled":
        forced = None
    elif mode.mode == "forced_zero":
        forced = 0
    else:
        if cmd.qubit not in mode.outcomes:
            raise ExecutionError(f"no forced outcome for qubit {cmd.qubit}")
        forced = mode.outcomes[cmd.qubit]
    try:
        outcome, post, probs = measure_in_basis(state, cmd.qubit, basis, forced, rng)
    except MeasurementError as exc:
        raise ExecutionError(f"malformed pattern: {exc}") from exc
    if mode.check_uniform and abs(probs[0] - 0.5) > UNIFORM_TOL:
        raise ExecutionError(f"outcome of qubit {cmd.qubit} is not uniform: p0={probs[0]:.12f}")
    return outcome, post


class _LazyGraph:
    """Attaches qubits and applies edges only when a measurement needs them."""

    def __init__(self, pattern: PatternIR, state: StateVector | None):
        # with state=None only the schedule is tracked
        self.state = state
        self.attached = set(pattern.inputs)
        self.pending: dict = {q: [] for q, _ in pattern.qubits}
        self.edges = list(pattern.edges)
        self.applied = [False] * len(self.edges)
        for k, (a, b, _) in enumerate(self.edges):
            self.pending[a].append(k)
            self.pending[b].append(k)
        self.peak = len(self.attached)

    def _attach(self, label) -> None:
        if label not in self.attached:
            if self.state is not None:
                self.state = attach_plus_qubit(self.state, label)
            self.attached.add(label)
            self.peak = max(self.peak, len(self.attached))

    def _apply(self, k: int) -> None:
        if self.applied[k]:
            return
        a, b, p = self.edges[k]
        if p != "Z":
            # a controlled-X/Y edge does not commute with earlier edges on its qubits
            for j in sorted(set(self.pending[a]) | set(self.pending[b])):
                if j < k and not self.applied[j]:
                    self._apply(j)
        self._attach(a)
        self._attach(b)
        if self.state is not None:
            self.state = _apply_edge(self.state, a, b, p)
        self.applied[k] = True

    def prepare(self, q) -> None:
        self._attach(q)
        for k in self.pending[q]:
            self._apply(k)

    def drop(self, q) -> None:
        self.attached.discard(q)

    def close(self, outputs) -> None:
        for q in outputs:
            self._attach(q)
        for k in range(len(self.edges)):
            self._apply(k)


def execute_pattern(
    pattern: PatternIR,
    params,
    input_state: StateVector,
    mode: ExecutionMode | None = None,
) -> tuple[StateVector, dict]:
    """Run the pattern measuring in command order, attaching qubits only when needed.

    Returns the corrected output state, with register ``0..N-1`` in logical
    order, and the outcome record.
    """
    mode = mode or ExecutionMode.forced_zero()
    values = _check_inputs(pattern, params, input_state)
    rng = np.random.default_rng(mode.seed) if mode.mode == "sampled" else None
    state = StateVector(pattern.inputs, input_state.amplitudes.copy())
    graph = _LazyGraph(pattern, state)
    outcomes: dict = {}
    for cmd in pattern.commands:
        graph.prepare(cmd.qubit)
        outcome, graph.state = _measure(graph.state, cmd, values, outcomes, mode, rng)
        graph.drop(cmd.qubit)
        outcomes[cmd.qubit] = outcome
    graph.close(pattern.output_map)
    return _finish(graph.state, pattern, outcomes), outcomes


def execute_reference_full_graph(pattern: PatternIR, params, input_state: StateVector, forced_outcomes: dict | None = None) -> StateVector:
    """Build the whole graph state first, then measure; an oracle for :func:`execute_pattern`."""
    if len(pattern.qubits) > REFERENCE_QUBIT_CAP:
        raise CapacityError(f"reference executor is capped at {REFERENCE_QUBIT_CAP} qubits, pattern has {len(pattern.qubits)}")
    values = _check_inputs(pattern, params, input_state)
    forced_outcomes = dict(forced_outcomes or {})
    state = StateVector(pattern.inputs, input_state.amplitudes.copy())
    for label, _ in pattern.qubits:
        if label not in state.register:
            state = attach_plus_qubit(state, label)
    for a, b, p in pattern.edges:
        state = _apply_edge(state, a, b, p)
    outcomes: dict = {}
    mode = ExecutionMode.forced({c.qubit: forced_outcomes.get(c.qubit, 0) for c in pattern.commands})
    for cmd in pattern.commands:
        outcome, state = _measure(state, cmd, values, outcomes, mode, None)
        outcomes[cmd.qubit] = outcome
    return _finish(state, pattern, outcomes)


def peak_active_width(pattern: PatternIR) -> int:
    """Largest register the lazy schedule of :func:`execute_pattern` ever holds."""

    graph = _LazyGraph(pattern, None)
    for cmd in pattern.commands:
        graph.prepare(cmd.qubit)
        graph.drop(cmd.qubit)
    graph.close(pattern.output_map)
    return graph.peak
