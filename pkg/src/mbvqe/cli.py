"""Command-line entry point: ``mbvqe {compile,resources,run,ed,equiv} --config FILE --out DIR``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .circuit import simulate_circuit
from .config import ConfigError, RunConfig, dumps_resolved, load_config
from .ed import MAX_ED_QUBITS, ground_state
from .errors import (
    CapacityError,
    ConvergenceError,
    ExecutionError,
    MeasurementError,
    UndefinedVScoreError,
    UnsupportedParameterizationError,
)
from .execution import ExecutionMode, execute_pattern
from .models import hamiltonian_for
from .pattern import dumps_pattern, emit_dot
from .resources import resource_report
from .statevector import global_phase_distance
from .vqe import ExperimentConfig, AdamConfig, build_ansatz, run_experiment

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_CAPACITY = 0, 2, 3, 4

log = logging.getLogger("mbvqe")


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _dumps(data) -> str:
    return json.dumps(data, indent=2, sort_keys=True, allow_nan=True) + "\n"


def _ansatz_for(cfg: RunConfig):
    a = cfg.ansatz
    return build_ansatz(cfg.build_model(), a.kind, a.depth, a.parameter_sharing, cfg.build_initial_state())


def cmd_compile(cfg: RunConfig, out: Path) -> dict:
    pattern = _ansatz_for(cfg).pattern
    _write(out / "pattern.json", dumps_pattern(pattern))
    if cfg.output.emit_dot:
        _write(out / "pattern.dot", emit_dot(pattern))
    return {"measurements": pattern.n_measurements, "qubits": len(pattern.qubits)}


def cmd_resources(cfg: RunConfig, out: Path) -> dict:
    a = cfg.ansatz
    report = resource_report(cfg.build_model(), a.kind, a.depth, a.parameter_sharing)
    _write(out / "resources.json", _dumps(report))
    return report


def _baseline(cfg: RunConfig) -> dict:
    gs = ground_state(hamiltonian_for(cfg.build_model()), cfg.ed.tol, cfg.ed.max_iter)
    return {"energy": gs.energy, "iterations": gs.iterations, "residual": gs.residual}


def cmd_ed(cfg: RunConfig, out: Path) -> dict:
    baseline = _baseline(cfg)
    _write(out / "baseline.json", _dumps(baseline))
    return baseline


def experiment_config(cfg: RunConfig) -> ExperimentConfig:
    opt = cfg.optimizer
    return ExperimentConfig(
        model=cfg.build_model(),
        ansatz=cfg.ansatz.kind,
        depth=cfg.ansatz.depth,
        parameter_sharing=cfg.ansatz.parameter_sharing,
        backend=cfg.backend.kind,
        seed=cfg.backend.seed,
        steps=opt.steps,
        restarts=opt.restarts,
        adam=AdamConfig(opt.lr, opt.beta1, opt.beta2, opt.eps),
        e_inf=cfg.vscore.e_inf,
        n_sites=cfg.vscore.n_sites,
        gradient=opt.gradient,
        exclude_plateaued=opt.exclude_plateaued,
        workers=opt.workers,
        initial_state=cfg.build_initial_state(),
    )


def _runs_csv(records) -> str:
    lines = ["run_id,step,energy,variance,vscore"]
    for rec in records:
        for step, e, var, vs in rec.steps:
            lines.append(f"{rec.run_id},{step},{float(e)!r},{float(var)!r},{float(vs)!r}")
    return "\n".join(lines) + "\n"


def cmd_run(cfg: RunConfig, out: Path) -> dict:
    exp = experiment_config(cfg)
    baseline = _baseline(cfg) if exp.model.n_qubits <= MAX_ED_QUBITS else None

    def progress(rec):
        log.info("run %d: final energy %.6f, %.1fs", rec.run_id, rec.steps[-1][1], rec.wall_time)

    records, stats = run_experiment(exp, progress)
    _write(out / "runs.csv", _runs_csv(records))
    final_e = np.array([r.steps[-1][1] for r in records])
    final_v = np.array([r.steps[-1][3] for r in records])
    summary = {
        "config": cfg.resolved(),
        "n_parameters": int(records[0].final_params.size),
        "ed_baseline": baseline,
        "seeds": [r.seed for r in records],
        "plateaued_runs": [r.run_id for r in records if r.plateaued],
        "final": {
            "energy_mean": float(final_e.mean()),
            "energy_min": float(final_e.min()),
            "energy_max": float(final_e.max()),
            "vscore_mean": float(np.nanmean(final_v)) if np.isfinite(final_v).any() else float("nan"),
            "vscore_min": float(np.nanmin(final_v)) if np.isfinite(final_v).any() else float("nan"),
            "best_run": int(np.argmin(final_e)),
        },
        "per_step": stats.to_dict(),
        "final_params": [r.final_params.tolist() for r in records],
    }
    _write(out / "summary.json", _dumps(summary))
    if exp.backend != "circuit":
        ansatz = _ansatz_for(cfg)
        for rec in records:
            if exp.backend == "mbqc_sampled":
                mode = ExecutionMode.sampled(rec.backend_seed + exp.steps)
            else:
                mode = ExecutionMode.forced_zero()
            _, outcomes = execute_pattern(ansatz.pattern, rec.final_params, ansatz.initial_state, mode)
            record = {"run_id": rec.run_id, "mode": mode.mode, "seed": mode.seed, "outcomes": {str(k): v for k, v in outcomes.items()}}
            _write(out / f"outcomes_run{rec.run_id}.json", _dumps(record))
    return summary["final"]


def cmd_equiv(cfg: RunConfig, out: Path) -> dict:
    ansatz = _ansatz_for(cfg)
    eq = cfg.equivalence
    rng = np.random.default_rng(cfg.backend.seed)
    rows = []
    for k in range(eq.samples):
        params = rng.uniform(-np.pi, np.pi, ansatz.n_params)
        ref = simulate_circuit(ansatz.circuit, params, ansatz.initial_state)
        forced, _ = execute_pattern(ansatz.pattern, params, ansatz.initial_state, ExecutionMode.forced_zero())
        devs = {"forced_zero": global_phase_distance(ref, forced)}
        for s in range(eq.sampled_seeds):
            seed = int(rng.integers(2**31))
            sampled, _ = execute_pattern(ansatz.pattern, params, ansatz.initial_state, ExecutionMode.sampled(seed))
            devs[f"sampled_{seed}"] = global_phase_distance(ref, sampled)
        rows.append({"sample": k, "max_deviation": max(devs.values()), "deviations": devs})
    worst = max(r["max_deviation"] for r in rows)
    report = {"samples": rows, "max_deviation": worst, "tol": eq.tol, "pass": bool(worst <= eq.tol)}
    _write(out / "equiv.json", _dumps(report))
    return {"max_deviation": worst, "pass": report["pass"]}


COMMANDS = {
    "compile": (cmd_compile, "compile the ansatz to a measurement pattern (pattern.json, pattern.dot)"),
    "resources": (cmd_resources, "count resources and compare to reference formulas (resources.json)"),
    "run": (cmd_run, "optimize with Adam over restarts (runs.csv, summary.json)"),
    "ed": (cmd_ed, "exact ground energy by Lanczos (baseline.json)"),
    "equiv": (cmd_equiv, "compare circuit and pattern output states (equiv.json)"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mbvqe", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, type=Path, help="YAML run configuration")
        p.add_argument("--out", type=Path, default=None, help="output directory (default: output.directory)")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        for path, msg in exc.problems:
            print(f"config error: {path}: {msg}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = args.out if args.out is not None else Path(cfg.output.directory)
    func = COMMANDS[args.command][0]
    try:
        result = func(cfg, out)
    except CapacityError as exc:
        print(f"capacity error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except (ConvergenceError, ExecutionError, MeasurementError, UndefinedVScoreError, UnsupportedParameterizationError, FloatingPointError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    if args.command in ("compile", "ed", "equiv", "run"):
        print(json.dumps(result, sort_keys=True))
    else:
        print(json.dumps({k: result[k] for k in ("mbhva_measurements", "naive_translation_measurements", "deviations")}, sort_keys=True))
    if args.command == "equiv" and not result["pass"]:
        return EXIT_NUMERICAL
    (out / "config.resolved.json").write_text(dumps_resolved(cfg) + "\n", encoding="utf-8")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
