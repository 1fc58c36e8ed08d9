"""Energy evaluation over circuit or pattern backends, gradients, Adam, V-score, experiments."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .circuit import (
    AxisRotation,
    CircuitIR,
    Param,
    PauliStringRotation,
    apply_gate_inplace,
    build_cbhva,
    build_mbhea_reference_circuit,
    simulate_amplitudes,
)
from .errors import CapacityError, UndefinedVScoreError, UnsupportedParameterizationError
from .execution import ExecutionMode, execute_pattern
from .models import Hubbard, ModelSpec, default_initial_state, hamiltonian_for
from .pattern import MeasurementCommand, PatternIR, compile_mbhea, compile_mbhva
from .pauli import Hamiltonian, apply_pauli_masks
from .statevector import StateVector, energy_and_variance, pauli_rotation_inplace

MAX_STATE_QUBITS = 24
BACKENDS = ("circuit", "mbqc_forced_zero", "mbqc_sampled")
ANSATZ_KINDS = ("cbhva", "mbhva", "mbhea")


@dataclass(frozen=True)
class Backend:
    kind: str = "circuit"
    seed: int | None = None

    def __post_init__(self):
        if self.kind not in BACKENDS:
            raise ValueError(f"unknown backend {self.kind!r}")
        if self.kind == "mbqc_sampled" and self.seed is None:
            raise ValueError("the sampled backend needs a seed")


class Ansatz:
    """A parametrized circuit together with its measurement-pattern counterpart.

    Both act on ``n_qubits`` logical qubits with the same parameter vector.
    The pattern is compiled on first use.
    """

    def __init__(self, kind: str, circuit: CircuitIR, pattern_factory, initial_state: StateVector, label: str = ""):
        self.kind = kind
        self.circuit = circuit
        self._pattern_factory = pattern_factory
        self._pattern: PatternIR | None = None
        self.initial_state = initial_state
        self.label = label

    @property
    def n_params(self) -> int:
        return self.circuit.n_params

    @property
    def n_qubits(self) -> int:
        return self.circuit.n_qubits

    @property
    def pattern(self) -> PatternIR:
        if self._pattern is None:
            self._pattern = self._pattern_factory()
        return self._pattern


def build_ansatz(model: ModelSpec, kind: str, depth: int, parameter_sharing: bool = False, initial_state: StateVector | None = None) -> Ansatz:
    if kind not in ANSATZ_KINDS:
        raise ValueError(f"unknown ansatz {kind!r}")
    if model.n_qubits > MAX_STATE_QUBITS:
        raise CapacityError(f"statevector simulation is capped at {MAX_STATE_QUBITS} qubits, model needs {model.n_qubits}")
    init = initial_state if initial_state is not None else default_initial_state(model)
    if kind == "mbhea":
        n = model.n_qubits
        circuit = build_mbhea_reference_circuit(n, depth)
        return Ansatz(kind, circuit, lambda: compile_mbhea(n, depth), init, f"mbhea D={depth}")
    circuit, _ = build_cbhva(model, depth, parameter_sharing)
    return Ansatz(kind, circuit, lambda: compile_mbhva(model, depth, parameter_sharing), init, f"{kind} D={depth}")


def prepare_state(backend: Backend, ansatz: Ansatz, params, input_state: StateVector | None = None) -> StateVector:
    state = input_state if input_state is not None else ansatz.initial_state
    if backend.kind == "circuit":
        amps = simulate_amplitudes(ansatz.circuit, params, state.amplitudes)
        return StateVector(tuple(range(ansatz.n_qubits)), amps)
    mode = ExecutionMode.forced_zero() if backend.kind == "mbqc_forced_zero" else ExecutionMode.sampled(backend.seed)
    out, _ = execute_pattern(ansatz.pattern, params, state, mode)
    return out


def energy(backend: Backend, ansatz: Ansatz, params, h: Hamiltonian, input_state: StateVector | None = None) -> tuple[float, float]:
    """``(E, VarE)`` of the prepared state."""
    state = prepare_state(backend, ansatz, params, input_state)
    if h.n_qubits != state.n_qubits:
        raise ValueError(f"Hamiltonian acts on {h.n_qubits} qubits, ansatz on {state.n_qubits}")
    return energy_and_variance(h, state.amplitudes)


# -- gradients -------------------------------------------------------------------


def _shift_circuit_gate(gate, delta: float):
    angle = gate.angle
    shifted = Param(angle.index, angle.scale, angle.offset + delta)
    return replace(gate, angle=shifted)


def _circuit_occurrences(circuit: CircuitIR):
    """``(gate position, parameter index, scale)`` for every parametrized gate."""
    out = []
    for pos, gate in enumerate(circuit.gates):
        angle = getattr(gate, "angle", None)
        if isinstance(angle, Param):
            out.append((pos, angle.index, angle.scale))
    return out


def _pattern_occurrences(pattern: PatternIR):
    # measurement angles enter as minus the rotation angle they implement
    out = []
    for pos, cmd in enumerate(pattern.commands):
        if isinstance(cmd.base_angle, Param):
            out.append((pos, cmd.base_angle.index, -cmd.base_angle.scale))
    return out


def _check_scales(occurrences) -> None:
    for _, index, scale in occurrences:
        if not math.isclose(abs(scale), 1.0, abs_tol=1e-12):
            raise UnsupportedParameterizationError(
                f"parameter {index} enters with scale {scale}; the shift rule needs unit scale"
            )


def parameter_shift_gradient(backend: Backend, ansatz: Ansatz, params, h: Hamiltonian, input_state: StateVector | None = None) -> np.ndarray:
    """Gradient by the two-term shift rule, one pair of evaluations per parameter occurrence."""
    values = np.asarray(params, dtype=np.float64)
    grad = np.zeros(ansatz.n_params)
    shift = math.pi / 2
    if backend.kind == "circuit":
        circuit = ansatz.circuit
        occurrences = _circuit_occurrences(circuit)
        _check_scales(occurrences)
        for pos, index, scale in occurrences:
            gates = list(circuit.gates)
            diff = 0.0
            for sign in (1, -1):
                gates[pos] = _shift_circuit_gate(circuit.gates[pos], sign * shift)
                shifted = Ansatz(ansatz.kind, CircuitIR(circuit.n_qubits, gates, circuit.n_params), None, ansatz.initial_state)
                diff += sign * energy(backend, shifted, values, h, input_state)[0]
            grad[index] += scale * diff / 2
        return grad
    pattern = ansatz.pattern
    occurrences = _pattern_occurrences(pattern)
    _check_scales(occurrences)
    for pos, index, scale in occurrences:
        commands = list(pattern.commands)
        cmd = pattern.commands[pos]
        diff = 0.0
        for sign in (1, -1):
            base = cmd.base_angle
            # rotation angle +delta means measurement angle -delta
            moved = Param(base.index, base.scale, base.offset - sign * shift)
            commands[pos] = MeasurementCommand(cmd.qubit, cmd.plane, moved, cmd.sign_deps, cmd.offset_deps)
            shifted_pattern = replace(pattern, commands=tuple(commands))
            shifted = Ansatz(ansatz.kind, ansatz.circuit, lambda p=shifted_pattern: p, ansatz.initial_state)
            diff += sign * energy(backend, shifted, values, h, input_state)[0]
        grad[index] += scale * diff / 2
    return grad


def _gate_generator_masks(gate) -> tuple[int, int]:
    if isinstance(gate, PauliStringRotation):
        return gate.generator.xmask, gate.generator.zmask
    bit = 1 << gate.qubit
    return (bit if gate.axis in "XY" else 0), (bit if gate.axis in "YZ" else 0)


def _undo_gate(amps: np.ndarray, n: int, gate, params) -> np.ndarray:
    if isinstance(gate, (PauliStringRotation, AxisRotation)):
        x, z = _gate_generator_masks(gate)
        return pauli_rotation_inplace(amps, n, x, z, -gate.angle.resolve(params))
    # H, Pauli gates, CZ and CNOT are their own inverses
    return apply_gate_inplace(amps, n, gate, params)


def circuit_energy_and_gradient(circuit: CircuitIR, params, input_amps: np.ndarray, h: Hamiltonian) -> tuple[float, float, np.ndarray]:
    """``(E, VarE, grad)`` where ``grad`` equals the shift-rule gradient exactly.

    For a rotation ``exp(-i t P / 2)`` acting on ``phi`` the shift rule gives
    ``(E(t + pi/2) - E(t - pi/2)) / 2 = -Im <P phi | A phi>`` with ``A`` the
    Hamiltonian pulled back through the later gates. One forward and one
    backward sweep produce every term.
    """
    values = np.asarray(params, dtype=np.float64)
    occurrences = _circuit_occurrences(circuit)
    _check_scales(occurrences)
    n = circuit.n_qubits
    phi = simulate_amplitudes(circuit, values, input_amps)
    lam = h.apply(phi)
    e = float(np.vdot(phi, lam).real)
    var = max(float(np.vdot(lam, lam).real) - e * e, 0.0)
    grad = np.zeros(circuit.n_params)
    for gate in reversed(circuit.gates):
        angle = getattr(gate, "angle", None)
        if isinstance(angle, Param):
            x, z = _gate_generator_masks(gate)
            p_phi = apply_pauli_masks(phi, x, z, n)
            grad[angle.index] += angle.scale * -np.vdot(p_phi, lam).imag
        phi = _undo_gate(phi, n, gate, values)
        lam = _undo_gate(lam, n, gate, values)
    return e, var, grad


# -- optimizer -------------------------------------------------------------------


@dataclass(frozen=True)
class AdamConfig:
    lr: float = 0.1
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    def __post_init__(self):
        if not self.lr > 0:
            raise ValueError("learning rate must be positive")
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1):
            raise ValueError("Adam betas must lie in [0, 1)")
        if not self.eps > 0:
            raise ValueError("eps must be positive")


@dataclass
class AdamState:
    m: np.ndarray
    v: np.ndarray
    t: int = 0

    @classmethod
    def zeros(cls, size: int) -> AdamState:
        return cls(np.zeros(size), np.zeros(size), 0)


def adam_step(state: AdamState, params, grad, config: AdamConfig = AdamConfig()) -> tuple[np.ndarray, AdamState]:
    """One bias-corrected Adam descent step; inputs are not modified."""
    params = np.asarray(params, dtype=np.float64)
    grad = np.asarray(grad, dtype=np.float64)
    if params.shape != grad.shape or params.shape != state.m.shape:
        raise ValueError(f"shape mismatch: params {params.shape}, grad {grad.shape}, moments {state.m.shape}")
    t = state.t + 1
    m = config.beta1 * state.m + (1 - config.beta1) * grad
    v = config.beta2 * state.v + (1 - config.beta2) * grad**2
    m_hat = m / (1 - config.beta1**t)
    v_hat = v / (1 - config.beta2**t)
    new = params - config.lr * m_hat / (np.sqrt(v_hat) + config.eps)
    return new, AdamState(m, v, t)


# -- V-score ---------------------------------------------------------------------


@dataclass(frozen=True)
class VScoreParams:
    n_sites: int
    e_inf: float = 0.0

    def __post_init__(self):
        if self.n_sites < 1:
            raise ValueError("n_sites must be at least 1")


def v_score(e: float, var_e: float, p: VScoreParams) -> float:
    """``N * VarE / (E - E_inf)**2``."""
    denom = (e - p.e_inf) ** 2
    if denom == 0:
        raise UndefinedVScoreError("V-score is undefined when E equals E_inf")
    return p.n_sites * var_e / denom


def default_n_sites(model: ModelSpec) -> int:
    if isinstance(model, Hubbard):
        return model.sites
    return model.n_qubits


# -- experiments -------------------------------------------------------------------


@dataclass(frozen=True)
class ExperimentConfig:
    model: ModelSpec
    ansatz: str = "cbhva"
    depth: int = 1
    parameter_sharing: bool = False
    backend: str = "circuit"
    seed: int = 0
    steps: int = 200
    restarts: int = 1
    adam: AdamConfig = AdamConfig()
    e_inf: float = 0.0
    n_sites: int | None = None
    gradient: str = "auto"
    plateau_threshold: float = 1e-3
    plateau_window: int = 30
    exclude_plateaued: bool = False
    workers: int = 1
    initial_state: StateVector | None = None

    def __post_init__(self):
        if self.steps < 0 or self.restarts < 1 or self.depth < 1:
            raise ValueError("steps >= 0, restarts >= 1 and depth >= 1 are required")
        if self.gradient not in ("auto", "parameter_shift"):
            raise ValueError(f"unknown gradient method {self.gradient!r}")
        if self.backend not in BACKENDS:
            raise ValueError(f"unknown backend {self.backend!r}")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")


@dataclass
class RunRecord:
    run_id: int
    seed: int
    steps: list  # rows (step, energy, variance, vscore)
    final_params: np.ndarray
    initial_params: np.ndarray
    wall_time: float
    grad_inf_norms: list = field(default_factory=list)
    plateaued: bool = False
    backend_seed: int | None = None

    @property
    def energies(self) -> np.ndarray:
        return np.array([row[1] for row in self.steps])

    @property
    def vscores(self) -> np.ndarray:
        return np.array([row[3] for row in self.steps])


@dataclass
class RunStats:
    steps: np.ndarray
    energy_mean: np.ndarray
    energy_min: np.ndarray
    energy_max: np.ndarray
    energy_var: np.ndarray
    vscore_mean: np.ndarray
    vscore_min: np.ndarray
    vscore_max: np.ndarray
    vscore_var: np.ndarray
    n_runs: int
    excluded_runs: list

    def to_dict(self) -> dict:
        out = {"n_runs": self.n_runs, "excluded_runs": list(self.excluded_runs), "steps": self.steps.tolist()}
        for name in ("energy", "vscore"):
            for stat in ("mean", "min", "max", "var"):
                out[f"{name}_{stat}"] = getattr(self, f"{name}_{stat}").tolist()
        return out


def restart_seeds(master_seed: int, restarts: int) -> list[int]:
    return [int(s) for s in np.random.SeedSequence(master_seed).generate_state(restarts)]


def plateau_flag(grad_norms, threshold: float, window: int) -> bool:
    """True when ``window`` consecutive gradient infinity-norms stay below ``threshold``."""
    run = 0
    for g in grad_norms:
        run = run + 1 if g < threshold else 0
        if run >= window:
            return True
    return False


def _safe_vscore(e, var, vp: VScoreParams) -> float:
    try:
        return v_score(e, var, vp)
    except UndefinedVScoreError:
        return float("nan")


def run_single(config: ExperimentConfig, run_id: int, seed: int, ansatz: Ansatz | None = None, h: Hamiltonian | None = None) -> RunRecord:
    """One optimization run from parameters drawn uniformly in [-pi, pi)."""
    ansatz = ansatz or _config_ansatz(config)
    h = h or hamiltonian_for(config.model)
    vp = VScoreParams(config.n_sites or default_n_sites(config.model), config.e_inf)
    rng = np.random.default_rng(seed)
    params = rng.uniform(-math.pi, math.pi, ansatz.n_params)
    initial = params.copy()
    backend_seed = int(rng.integers(2**31)) if config.backend == "mbqc_sampled" else None
    fast = config.backend == "circuit" and config.gradient == "auto"
    state = AdamState.zeros(ansatz.n_params)
    rows, norms = [], []
    start = time.perf_counter()
    for step in range(config.steps + 1):
        backend = Backend(config.backend, None if backend_seed is None else backend_seed + step)
        if fast:
            e, var, grad = circuit_energy_and_gradient(ansatz.circuit, params, ansatz.initial_state.amplitudes, h)
        else:
            e, var = energy(backend, ansatz, params, h)
            grad = None
        rows.append((step, e, var, _safe_vscore(e, var, vp)))
        if step == config.steps:
            break
        if grad is None:
            grad = parameter_shift_gradient(backend, ansatz, params, h)
        norms.append(float(np.max(np.abs(grad))) if grad.size else 0.0)
        params, state = adam_step(state, params, grad, config.adam)
    wall = time.perf_counter() - start
    return RunRecord(
        run_id,
        seed,
        rows,
        params,
        initial,
        wall,
        norms,
        plateau_flag(norms, config.plateau_threshold, config.plateau_window),
        backend_seed,
    )


def aggregate(records: list[RunRecord], exclude_plateaued: bool = False) -> RunStats:
    excluded = [r.run_id for r in records if exclude_plateaued and r.plateaued]
    kept = [r for r in records if r.run_id not in excluded] or records
    energies = np.array([r.energies for r in kept])
    vscores = np.array([r.vscores for r in kept])
    steps = np.array([row[0] for row in kept[0].steps])
    return RunStats(
        steps,
        energies.mean(axis=0),
        energies.min(axis=0),
        energies.max(axis=0),
        energies.var(axis=0),
        np.nanmean(vscores, axis=0) if np.isfinite(vscores).any() else vscores.mean(axis=0),
        np.nanmin(vscores, axis=0) if np.isfinite(vscores).any() else vscores.min(axis=0),
        np.nanmax(vscores, axis=0) if np.isfinite(vscores).any() else vscores.max(axis=0),
        np.nanvar(vscores, axis=0) if np.isfinite(vscores).any() else vscores.var(axis=0),
        len(kept),
        excluded,
    )


def _config_ansatz(config: ExperimentConfig) -> Ansatz:
    return build_ansatz(config.model, config.ansatz, config.depth, config.parameter_sharing, config.initial_state)


def _run_task(args):
    config, run_id, seed = args
    try:
        return run_single(config, run_id, seed)
    except Exception as exc:
        exc.args = (f"run {run_id} (seed {seed}): {exc}",)
        raise


def run_experiment(config: ExperimentConfig, progress=None) -> tuple[list[RunRecord], RunStats]:
    """All restarts of one configuration plus per-step statistics across them.

    Restart ``k`` draws its initial parameters from seed ``k`` of
    ``SeedSequence(config.seed)``, so results do not depend on
    ``config.workers``. ``progress``, if given, is called with each
    finished record.
    """
    seeds = restart_seeds(config.seed, config.restarts)
    records = []
    if config.workers > 1 and config.restarts > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=min(config.workers, config.restarts)) as pool:
            for record in pool.map(_run_task, [(config, k, s) for k, s in enumerate(seeds)]):
                records.append(record)
                if progress is not None:
                    progress(record)
    else:
        ansatz = _config_ansatz(config)
        h = hamiltonian_for(config.model)
        for run_id, seed in enumerate(seeds):
            try:
                record = run_single(config, run_id, seed, ansatz, h)
            except Exception as exc:
                exc.args = (f"run {run_id} (seed {seed}): {exc}",)
                raise
            records.append(record)
            if progress is not None:
                progress(record)
    return records, aggregate(records, config.exclude_plateaued)
