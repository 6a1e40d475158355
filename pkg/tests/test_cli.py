"""CLI contracts: sweeps, verdicts, density tabulation, validation suites,
exit codes, and byte-identical reruns."""

import json
import math
import os
import subprocess
import sys

import numpy as np
import pytest

import oracles
from eslinc.cli import main
from eslinc.orderstats import max_order_statistic_pdf


def run_cli(args, tmp_path):
    env = dict(os.environ, ESLINC_OUT_DIR=str(tmp_path))
    proc = subprocess.run([sys.executable, "-m", "eslinc.cli", *args],
                          capture_output=True, text=True, env=env)
    return proc


def read_csv(path):
    meta, columns, rows = {}, None, []
    with open(path) as fh:
        for line in fh:
            line = line.rstrip("\n")
            if line.startswith("#"):
                key, _, val = line[2:].partition("=")
                meta[key] = val
            elif columns is None:
                columns = line.split(",")
            else:
                rows.append(line.split(","))
    return meta, columns, rows


# ------------------------------------------------------------- sweeps

def test_progress_rate_sweep(tmp_path):
    args = ["progress-rate", "--theta-grid", "0.4,0.9", "--lambda-grid", "5,10",
            "--steps", "4000", "--seed", "3", "--workers", "1",
            "--out", "pr.csv"]
    proc = run_cli(args, tmp_path)
    assert proc.returncode == 0, proc.stderr
    meta, columns, rows = read_csv(tmp_path / "pr.csv")
    assert columns == ["theta", "lambda", "phi_star", "phi_star_over_lambda",
                       "se", "steps", "seed"]
    assert len(rows) == 4
    assert meta["seed"] == "3"
    for row in rows:
        assert float(row[2]) > 0
        assert float(row[3]) == float(row[2]) / float(row[1])


def test_sweep_parallel_matches_serial(tmp_path):
    base = ["progress-rate", "--theta-grid", "0.5,1.1", "--lambda-grid", "2,5",
            "--steps", "3000", "--seed", "9"]
    p1 = run_cli(base + ["--workers", "1", "--out", "a.csv"], tmp_path)
    p2 = run_cli(base + ["--workers", "2", "--out", "b.csv"], tmp_path)
    assert p1.returncode == 0 and p2.returncode == 0, p1.stderr + p2.stderr
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_stationary_delta_sweep(tmp_path):
    proc = run_cli(["stationary-delta", "--theta-grid", "0.8", "--lambda-grid",
                    "5,10", "--steps", "4000", "--workers", "1", "--out", "sd.csv"],
                   tmp_path)
    assert proc.returncode == 0, proc.stderr
    _, columns, rows = read_csv(tmp_path / "sd.csv")
    assert columns == ["theta", "lambda", "mean_delta", "se", "steps", "seed"]
    assert float(rows[0][2]) > float(rows[1][2])  # smaller lambda sits farther out


def test_empty_grid_is_usage_error(tmp_path):
    proc = run_cli(["progress-rate", "--theta-grid", "", "--lambda-grid", "5",
                    "--steps", "1000"], tmp_path)
    assert proc.returncode == 2
    assert "grid" in proc.stderr


def test_invalid_theta_is_usage_error(tmp_path):
    proc = run_cli(["progress-rate", "--theta-grid", "2.0", "--lambda-grid", "5",
                    "--steps", "1000"], tmp_path)
    assert proc.returncode == 2
    assert "pi/2" in proc.stderr


# ------------------------------------------------------------- diverge

def test_diverge_constant_json(tmp_path):
    proc = run_cli(["diverge", "--rule", "constant", "--theta", "0.785398",
                    "--lambda", "10", "--sigma", "1.0", "--steps", "20000",
                    "--seed", "5", "--out", "d.json"], tmp_path)
    assert proc.returncode == 0, proc.stderr
    payload = json.loads((tmp_path / "d.json").read_text())
    assert payload["verdict"] == "diverges"
    assert payload["value"] > 0
    assert payload["config"]["lambda"] == 10
    assert payload["config"]["sigma"] == 1.0
    assert payload["seed"] == 5


def test_diverge_csa_requires_c(tmp_path):
    proc = run_cli(["diverge", "--rule", "csa", "--theta", "0.7", "--lambda", "10",
                    "--steps", "1000"], tmp_path)
    assert proc.returncode == 2
    assert "--c" in proc.stderr


def test_diverge_csa_json_and_trace(tmp_path):
    proc = run_cli(["diverge", "--rule", "csa", "--theta", "0.785398",
                    "--lambda", "20", "--dim", "10", "--c", "1.0",
                    "--d-sigma", "1.0", "--steps", "20000", "--seed", "5",
                    "--out", "c.json", "--trace", "t.csv", "--trace-every", "50"],
                   tmp_path)
    assert proc.returncode == 0, proc.stderr
    payload = json.loads((tmp_path / "c.json").read_text())
    assert payload["config"]["csa"]["c"] == 1.0
    assert payload["verdict"] in ("diverges", "converges", "inconclusive")
    _, columns, rows = read_csv(tmp_path / "t.csv")
    assert columns == ["t", "delta", "g_dot_n", "g1", "g2", "log_sigma", "f_value"]
    assert all(float(r[1]) >= 0 for r in rows)


def test_diverge_inconclusive_gate(tmp_path):
    # a short memoryless run leaves the slope inside the 3-SE noise band
    proc = run_cli(["diverge", "--rule", "csa", "--theta", "0.785398",
                    "--lambda", "10", "--dim", "10", "--c", "1.0",
                    "--d-sigma", "1.0", "--steps", "300", "--seed", "11",
                    "--out", "i.json"], tmp_path)
    assert proc.returncode == 0, proc.stderr
    payload = json.loads((tmp_path / "i.json").read_text())
    assert payload["verdict"] == "inconclusive"


# ------------------------------------------------------------- density

def test_density_unknown_name(tmp_path):
    proc = run_cli(["density", "--name", "bogus", "--theta", "0.5", "--lambda",
                    "5", "--delta", "1"], tmp_path)
    assert proc.returncode == 2
    assert "feasible2d" in proc.stderr  # lists the choices


def test_density_zero_resolution(tmp_path):
    proc = run_cli(["density", "--name", "feasible1", "--theta", "0.5",
                    "--lambda", "5", "--delta", "1", "--resolution", "0"], tmp_path)
    assert proc.returncode == 2


def test_density_selected1_far_field_curve(tmp_path):
    proc = run_cli(["density", "--name", "selected1", "--theta", "0.785398",
                    "--lambda", "5", "--delta", "30", "--range=-5:5",
                    "--resolution", "101", "--out", "s1.csv"], tmp_path)
    assert proc.returncode == 0, proc.stderr
    _, _, rows = read_csv(tmp_path / "s1.csv")
    worst = max(abs(float(pdf) - max_order_statistic_pdf(5, float(x)))
                for x, pdf in rows)
    assert worst < 1e-6


def test_density_feasible1_self_integrates(tmp_path):
    proc = run_cli(["density", "--name", "feasible1", "--theta", "0.9",
                    "--lambda", "5", "--delta", "1", "--range=-8:8",
                    "--resolution", "1601", "--out", "f1.csv"], tmp_path)
    assert proc.returncode == 0, proc.stderr
    _, _, rows = read_csv(tmp_path / "f1.csv")
    xs = np.array([float(r[0]) for r in rows])
    ps = np.array([float(r[1]) for r in rows])
    assert np.trapezoid(ps, xs) == pytest.approx(1.0, abs=1e-4)


def test_density_2d_grid(tmp_path):
    proc = run_cli(["density", "--name", "selected2d", "--theta", "0.785398",
                    "--lambda", "2", "--delta", "1", "--range=-3:3",
                    "--resolution", "21", "--out", "g.csv"], tmp_path)
    assert proc.returncode == 0, proc.stderr
    _, columns, rows = read_csv(tmp_path / "g.csv")
    assert columns == ["x", "y", "pdf"] and len(rows) == 441


# ------------------------------------------------------------- validate

def test_validate_filtered_suite(tmp_path):
    proc = run_cli(["validate", "--suite", "lemma4", "--seed", "4",
                    "--out", "v.json"], tmp_path)
    assert proc.returncode == 0, proc.stderr
    payload = json.loads((tmp_path / "v.json").read_text())
    assert payload["passed"] is True
    assert set(payload["suites"]) == {"lemma4"}
    assert "PASS" in proc.stderr


def test_validate_full_suite_passes(tmp_path):
    proc = run_cli(["validate", "--seed", "42", "--out", "full.json"], tmp_path)
    assert proc.returncode == 0, proc.stderr
    payload = json.loads((tmp_path / "full.json").read_text())
    assert payload["passed"] is True
    assert set(payload["suites"]) == {"oracle-equivalence", "stationarity",
                                      "drift", "lemma4"}
    assert "FAIL" not in proc.stderr


def test_validate_unknown_suite(tmp_path):
    proc = run_cli(["validate", "--suite", "nonesuch"], tmp_path)
    assert proc.returncode == 2


def test_validate_self_test_detects_shift(tmp_path):
    proc = run_cli(["validate", "--suite", "oracle", "--self-test",
                    "--seed", "4", "--out", "st.json"], tmp_path)
    assert proc.returncode == 0, proc.stderr
    payload = json.loads((tmp_path / "st.json").read_text())
    assert payload["self_test_detected_shift"] is True


def test_validate_self_test_without_oracle_suite_fails(tmp_path):
    proc = run_cli(["validate", "--suite", "lemma4", "--self-test"], tmp_path)
    assert proc.returncode == 1


# ------------------------------------------------------------- determinism

@pytest.mark.parametrize("args,name", [
    (["progress-rate", "--theta-grid", "0.6,1.2", "--lambda-grid", "2,5",
      "--steps", "2500", "--seed", "21", "--workers", "2"], "progress_rate.csv"),
    (["stationary-delta", "--theta-grid", "0.6", "--lambda-grid", "5",
      "--steps", "2500", "--seed", "21", "--workers", "1"], "stationary_delta.csv"),
    (["density", "--name", "selected2", "--theta", "0.9", "--lambda", "5",
      "--delta", "0.5", "--range=-3:3", "--resolution", "41"],
     "density_selected2.csv"),
    (["diverge", "--rule", "constant", "--theta", "0.9", "--lambda", "5",
      "--steps", "4000", "--seed", "21", "--out", "diverge.json",
      "--trace", "trace.csv", "--trace-every", "10"], "diverge.json"),
])
def test_reruns_are_byte_identical(tmp_path, args, name):
    d1, d2 = tmp_path / "one", tmp_path / "two"
    d1.mkdir(), d2.mkdir()
    p1 = run_cli(args, d1)
    p2 = run_cli(args, d2)
    assert p1.returncode == 0 and p2.returncode == 0, p1.stderr + p2.stderr
    assert (d1 / name).read_bytes() == (d2 / name).read_bytes()
    if "--trace" in args:
        assert (d1 / "trace.csv").read_bytes() == (d2 / "trace.csv").read_bytes()
