#!/usr/bin/env python3
"""Regenerate the committed reference outputs in data/reference/.

Everything is produced through the CLI with the default seed, so a rerun on
the same install is byte-identical to the committed files.
"""

import pathlib
import subprocess
import sys

ROOT = pathlib.Path(__file__).resolve().parent.parent
OUT = ROOT / "data" / "reference"

THETA_GRID = ",".join(f"{t / 10:.1f}" for t in range(1, 16))


def run(args):
    print("+ eslinc", " ".join(args))
    subprocess.run([sys.executable, "-m", "eslinc.cli", *args], check=True)


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    run(["progress-rate",
         "--theta-grid", THETA_GRID, "--lambda-grid", "5,10,20",
         "--steps", "1000000", "--seed", "42",
         "--out", str(OUT / "fig2_progress_rate.csv")])
    run(["stationary-delta",
         "--theta-grid", THETA_GRID, "--lambda-grid", "5,10,20",
         "--steps", "1000000", "--seed", "42",
         "--out", str(OUT / "fig3_stationary_delta.csv")])
    run(["diverge", "--rule", "constant", "--theta", "0.785398", "--lambda", "10",
         "--sigma", "1.0", "--steps", "100000", "--seed", "42",
         "--out", str(OUT / "diverge_constant.json"),
         "--trace", str(OUT / "trace_constant.csv"), "--trace-every", "100"])
    run(["diverge", "--rule", "csa", "--theta", "0.785398", "--lambda", "20",
         "--dim", "10", "--c", "1.0", "--d-sigma", "1.0", "--steps", "100000",
         "--seed", "42",
         "--out", str(OUT / "diverge_csa.json"),
         "--trace", str(OUT / "trace_csa.csv"), "--trace-every", "100"])


if __name__ == "__main__":
    main()
