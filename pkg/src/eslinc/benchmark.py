"""Timing comparison of the compiled and pure-Python chain kernels.

Run as ``python -m eslinc.benchmark [--steps N] [--lambda L] [--dim D]``.
Also verifies on the way that both backends produce bit-identical
trajectories for the benchmarked configuration.
"""

import argparse
import math
import time

import numpy as np

from ._kernels import get_backend
from .chain import chi_norm
from .rng import RngStream


def _time(fn, repeat=3):
    best = math.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def run(steps: int, lam: int, dim: int, theta: float = math.pi / 4,
        seed: int = 42) -> dict:
    rows = {}
    outputs = {}
    for name in ("compiled", "python"):
        try:
            mod = get_backend(name)
        except ImportError:
            rows[name] = None
            continue
        t_const, out_c = _time(lambda m=mod: m.run_const_sigma_kernel(
            RngStream(seed, 0).bit_generator, theta, lam, 1.0, steps))
        t_csa, out_s = _time(lambda m=mod: m.run_csa_kernel(
            RngStream(seed, 1).bit_generator, theta, lam, dim, 0.5, 5.0,
            chi_norm(dim), 0, 1.0, 0.0, np.zeros(2), np.zeros(dim - 2), steps))
        rows[name] = {"const_sigma_s": t_const, "csa_s": t_csa}
        outputs[name] = (out_c, out_s)
    if len(outputs) == 2:
        (ac, as_), (bc, bs) = outputs["compiled"], outputs["python"]
        same = (all(np.array_equal(x, y) for x, y in zip(ac[:3], bc[:3]))
                and all(np.array_equal(np.asarray(x), np.asarray(y))
                        for x, y in zip(as_[:6], bs[:6])))
        rows["bit_identical"] = same
    return rows


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--steps", type=int, default=100_000)
    ap.add_argument("--lambda", dest="lam", type=int, default=10)
    ap.add_argument("--dim", type=int, default=10)
    args = ap.parse_args(argv)
    rows = run(args.steps, args.lam, args.dim)
    print(f"steps={args.steps} lambda={args.lam} dim={args.dim}")
    for name in ("compiled", "python"):
        r = rows.get(name)
        if r is None:
            print(f"{name:>9}: not available")
        else:
            print(f"{name:>9}: const-sigma {r['const_sigma_s']:8.3f}s   "
                  f"csa {r['csa_s']:8.3f}s")
    if "bit_identical" in rows:
        both = rows["compiled"], rows["python"]
        if all(both):
            speedup = both[1]["const_sigma_s"] / both[0]["const_sigma_s"]
            print(f"bit-identical trajectories: {rows['bit_identical']}   "
                  f"const-sigma speedup: {speedup:.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
