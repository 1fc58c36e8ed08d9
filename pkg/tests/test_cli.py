import json
import math
import subprocess
import sys

import pytest

from mbvqe.cli import main


def write(tmp_path, text, name="run.yaml"):
    path = tmp_path / name
    path.write_text(text)
    return path


HEIS2 = """
model: {kind: heisenberg, size: 2}
ansatz: {kind: mbhva, depth: 1}
backend: {kind: circuit, seed: 3}
optimizer: {steps: 5, restarts: 2}
"""


def run_cli(*args):
    return main([str(a) for a in args])


def test_compile(tmp_path, capsys):
    cfg = write(tmp_path, HEIS2)
    assert run_cli("compile", "--config", cfg, "--out", tmp_path / "c") == 0
    pattern = json.loads((tmp_path / "c" / "pattern.json").read_text())
    assert len(pattern["commands"]) == 92
    dot = (tmp_path / "c" / "pattern.dot").read_text()
    assert dot.startswith("digraph")
    resolved = json.loads((tmp_path / "c" / "config.resolved.json").read_text())
    assert resolved["ansatz"]["depth"] == 1
    assert json.loads(capsys.readouterr().out)["measurements"] == 92


def test_compile_without_dot(tmp_path):
    cfg = write(tmp_path, HEIS2 + "output: {emit_dot: false}\n")
    assert run_cli("compile", "--config", cfg, "--out", tmp_path / "c") == 0
    assert not (tmp_path / "c" / "pattern.dot").exists()


def test_resources(tmp_path):
    cfg = write(tmp_path, "model: {kind: heisenberg, size: 4}\nansatz: {depth: 2}\n")
    assert run_cli("resources", "--config", cfg, "--out", tmp_path / "r") == 0
    report = json.loads((tmp_path / "r" / "resources.json").read_text())
    assert report["mbhva_measurements"] == 1104 == report["paper_formula_values"]["mbhva_measurements"]
    for key in (
        "cbhva_gates_pre_decomposition",
        "cbhva_native_single",
        "cbhva_native_two",
        "naive_translation_measurements",
        "parameters",
        "peak_active_qubits",
        "deviations",
    ):
        assert key in report
    cfg = write(tmp_path, "model: {kind: hubbard, size: 3}\n", "hub.yaml")
    assert run_cli("resources", "--config", cfg, "--out", tmp_path / "h") == 0
    report = json.loads((tmp_path / "h" / "resources.json").read_text())
    assert report["mbhva_measurements"] == 131
    assert any(d["quantity"] == "cbhva_native_single" for d in report["deviations"])


@pytest.mark.parametrize(
    "text,expected",
    [
        ("model: {kind: tfim, size: 2}", -math.sqrt(5)),
        ("model: {kind: heisenberg, size: 4, sign_convention: as_written}", -24.0),
    ],
    ids=["tfim2", "heis4"],
)
def test_ed(tmp_path, text, expected):
    cfg = write(tmp_path, text)
    assert run_cli("ed", "--config", cfg, "--out", tmp_path / "e") == 0
    baseline = json.loads((tmp_path / "e" / "baseline.json").read_text())
    assert baseline["energy"] == pytest.approx(expected, abs=1e-8)
    assert set(baseline) == {"energy", "iterations", "residual"}


def test_run_outputs_are_deterministic(tmp_path):
    cfg = write(tmp_path, HEIS2)
    assert run_cli("run", "--config", cfg, "--out", tmp_path / "a") == 0
    assert run_cli("run", "--config", cfg, "--out", tmp_path / "b") == 0
    a = (tmp_path / "a" / "runs.csv").read_bytes()
    assert a == (tmp_path / "b" / "runs.csv").read_bytes()
    assert (tmp_path / "a" / "summary.json").read_bytes() == (tmp_path / "b" / "summary.json").read_bytes()
    lines = a.decode().splitlines()
    assert lines[0] == "run_id,step,energy,variance,vscore"
    assert len(lines) == 1 + 2 * 6
    summary = json.loads((tmp_path / "a" / "summary.json").read_text())
    # four-site Heisenberg ring with Pauli couplings
    assert summary["ed_baseline"]["energy"] == pytest.approx(-8.0, abs=1e-8)
    assert len(summary["seeds"]) == 2 and summary["config"]["optimizer"]["steps"] == 5
    assert len(summary["per_step"]["energy_mean"]) == 6


def test_run_zero_steps(tmp_path):
    cfg = write(tmp_path, "model: {kind: tfim, size: 2}\noptimizer: {steps: 0, restarts: 1}\n")
    assert run_cli("run", "--config", cfg, "--out", tmp_path / "z") == 0
    assert len((tmp_path / "z" / "runs.csv").read_text().splitlines()) == 2


def test_run_sampled_backend_writes_outcomes(tmp_path):
    cfg = write(tmp_path, "model: {kind: tfim, size: 2}\nbackend: {kind: mbqc_sampled, seed: 1}\noptimizer: {steps: 2, restarts: 1}\n")
    assert run_cli("run", "--config", cfg, "--out", tmp_path / "s") == 0
    record = json.loads((tmp_path / "s" / "outcomes_run0.json").read_text())
    assert record["mode"] == "sampled" and set(record["outcomes"].values()) <= {0, 1}


def test_equiv(tmp_path):
    cfg = write(tmp_path, HEIS2 + "equivalence: {samples: 3, sampled_seeds: 2}\n")
    assert run_cli("equiv", "--config", cfg, "--out", tmp_path / "q") == 0
    report = json.loads((tmp_path / "q" / "equiv.json").read_text())
    assert report["pass"] and report["max_deviation"] <= 1e-8 and len(report["samples"]) == 3


def test_exit_codes(tmp_path, capsys):
    bad = write(tmp_path, "modle: {kind: tfim, size: 2}\n", "bad.yaml")
    assert run_cli("ed", "--config", bad) == 2
    assert "did you mean 'model'" in capsys.readouterr().err
    assert run_cli("ed", "--config", tmp_path / "missing.yaml") == 2
    big = write(tmp_path, "model: {kind: heisenberg, size: 5}\n", "big.yaml")
    assert run_cli("ed", "--config", big, "--out", tmp_path / "x") == 4
    slow = write(tmp_path, "model: {kind: tfim, size: 10}\ned: {tol: 1.0e-14, max_iter: 1}\n", "slow.yaml")
    assert run_cli("ed", "--config", slow, "--out", tmp_path / "y") == 3


def test_console_script_entry_point(tmp_path):
    cfg = write(tmp_path, "model: {kind: tfim, size: 2}\n")
    done = subprocess.run(
        [sys.executable, "-m", "mbvqe.cli", "ed", "--config", str(cfg), "--out", str(tmp_path / "m")],
        capture_output=True,
        text=True,
    )
    assert done.returncode == 0
    assert json.loads(done.stdout)["energy"] == pytest.approx(-math.sqrt(5), abs=1e-8)
