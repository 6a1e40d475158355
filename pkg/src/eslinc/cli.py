"""Command-line experiment runner.

Subcommands
-----------
progress-rate    sweep (theta, lambda) cells, CSV of sigma*E[G1] per cell
stationary-delta sweep (theta, lambda) cells, CSV of E[delta] per cell
diverge          one run (constant sigma or CSA), JSON verdict + optional trace
density          tabulate any of the five analytic densities to CSV
validate         run the distributional cross-check suites, JSON report

Every output embeds its full configuration and seed in a '#'-prefixed
metadata block (CSV) or in the JSON body, and reruns with identical flags
are byte-identical.  Exit codes: 0 success, 1 check failure, 2 usage or
configuration error.  ESLINC_OUT_DIR provides the default output directory
for relative paths.
"""

import argparse
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__, backend_name
from .chain import ConstantSigma, CsaConfig, run_csa, run_full_es
from .densities import (feasible_step_marginal1_pdf, feasible_step_pdf,
                        selected_step_marginal1_pdf, selected_step_marginal2_pdf,
                        selected_step_pdf)
from .errors import ConfigurationError
from .estimators import (drift_probe, ks_two_sample, log_sigma_slope,
                         progress_rate, stationary_delta_mean)
from .geometry import ProblemConfig, Step2
from .rng import RngStream
from .sampling import rejection_select_block, select_block

DENSITY_NAMES = ("feasible2d", "feasible1", "selected2d", "selected1", "selected2")


# ---------------------------------------------------------------- helpers

def _out_path(path, default_name):
    base = os.environ.get("ESLINC_OUT_DIR", "")
    path = path or default_name
    if base and not os.path.isabs(path):
        os.makedirs(base, exist_ok=True)
        return os.path.join(base, path)
    return path


def _parse_grid(text, kind=float):
    try:
        vals = [kind(tok) for tok in text.split(",") if tok.strip() != ""]
    except ValueError as exc:
        raise ConfigurationError(f"bad grid {text!r}: {exc}") from None
    if not vals:
        raise ConfigurationError(f"empty grid {text!r}")
    return vals


def _fmt(x):
    if isinstance(x, float):
        return repr(float(x))  # builtin repr: shortest round-trip, no numpy prefix
    return str(x)


def _write_csv(path, meta, columns, rows):
    lines = [f"# {k}={v}" for k, v in meta.items()]
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def _write_json(path, payload):
    text = json.dumps(payload, indent=2) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _common_meta(args, extra=None):
    meta = {"tool": f"eslinc {__version__}", "command": args.command,
            "backend": backend_name()}
    meta.update(extra or {})
    return meta


# ---------------------------------------------------------------- sweeps

def _sweep_cell(task):
    """One (theta, lambda) cell of a sweep; runs in a worker process."""
    kind, theta, lam, dim, sigma, steps, burn_in, seed, stream = task
    cfg = ProblemConfig(theta=theta, lam=lam, dim=dim)
    rng = RngStream(seed, stream)
    if kind == "progress_rate":
        rep = progress_rate(cfg, sigma, steps, burn_in=burn_in, rng=rng)
        return (theta, lam, rep.value, rep.value / lam, rep.std_error, steps, seed)
    rep = stationary_delta_mean(cfg, steps, burn_in=burn_in, rng=rng)
    return (theta, lam, rep.value, rep.std_error, steps, seed)


def _run_sweep(kind, args):
    thetas = _parse_grid(args.theta_grid) if args.theta_grid else [args.theta]
    lams = _parse_grid(args.lambda_grid, int) if args.lambda_grid else [args.lam]
    if any(t is None for t in thetas) or any(l is None for l in lams):
        raise ConfigurationError("provide --theta/--theta-grid and --lambda/--lambda-grid")
    tasks = []
    stream = args.stream
    for theta in thetas:
        for lam in lams:
            ProblemConfig(theta=theta, lam=lam, dim=args.dim)  # validate early
            tasks.append((kind, theta, lam, args.dim, args.sigma, args.steps,
                          args.burn_in, args.seed, stream))
            stream += 1
    workers = args.workers or min(len(tasks), os.cpu_count() or 1)
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_cell, tasks))
    else:
        rows = [_sweep_cell(t) for t in tasks]
    return rows


def cmd_progress_rate(args):
    rows = _run_sweep("progress_rate", args)
    out = _out_path(args.out, "progress_rate.csv")
    meta = _common_meta(args, {
        "sigma": args.sigma, "dim": args.dim, "steps": args.steps,
        "burn_in": "auto" if args.burn_in is None else args.burn_in,
        "seed": args.seed, "stream_base": args.stream})
    _write_csv(out, meta, ("theta", "lambda", "phi_star", "phi_star_over_lambda",
                           "se", "steps", "seed"), rows)
    print(out)
    return 0


def cmd_stationary_delta(args):
    rows = _run_sweep("stationary_delta", args)
    out = _out_path(args.out, "stationary_delta.csv")
    meta = _common_meta(args, {
        "dim": args.dim, "steps": args.steps,
        "burn_in": "auto" if args.burn_in is None else args.burn_in,
        "seed": args.seed, "stream_base": args.stream})
    _write_csv(out, meta, ("theta", "lambda", "mean_delta", "se", "steps", "seed"), rows)
    print(out)
    return 0


# ---------------------------------------------------------------- diverge

def cmd_diverge(args):
    if args.theta is None or args.lam is None:
        raise ConfigurationError("diverge needs --theta and --lambda")
    cfg = ProblemConfig(theta=args.theta, lam=args.lam, dim=args.dim)
    rng = RngStream(args.seed, args.stream)
    if args.rule == "constant":
        rep = progress_rate(cfg, args.sigma, args.steps, burn_in=args.burn_in, rng=rng)
    else:
        if args.c is None:
            raise ConfigurationError("rule=csa needs --c (and optionally --d-sigma)")
        csa = CsaConfig(cfg, c=args.c, d_sigma=args.d_sigma, sigma_rule=args.sigma_rule)
        rep = log_sigma_slope(csa, args.steps, burn_in=args.burn_in, rng=rng)
    payload = rep.to_json_dict()
    payload["stream"] = args.stream

    if args.trace:
        trace_rng = RngStream(args.seed, args.stream)
        rule = ConstantSigma(args.sigma) if args.rule == "constant" else \
            CsaConfig(cfg, c=args.c, d_sigma=args.d_sigma, sigma_rule=args.sigma_rule)
        res = run_full_es(cfg, rule, args.steps, rng=trace_rng, burn_in=args.burn_in)
        tpath = _out_path(args.trace, "trace.csv")
        meta = _common_meta(args, {"rule": args.rule, "seed": args.seed,
                                   "stream": args.stream, "steps": args.steps,
                                   "trace_every": args.trace_every})
        _write_csv(tpath, meta, res.trace_columns, res.trace_rows(args.trace_every))

    if args.format == "csv":
        out = _out_path(args.out, "diverge.csv")
        cols = ("quantity", "value", "std_error", "n_samples", "burn_in", "seed", "verdict")
        _write_csv(out, _common_meta(args, {"config": json.dumps(payload["config"])}),
                   cols, [tuple(payload.get(c) for c in cols)])
        print(out)
    else:
        _write_json(_out_path(args.out, "diverge.json") if args.out else None, payload)
    return 0


# ---------------------------------------------------------------- density

def _density_fn(name):
    two_d = name in ("feasible2d", "selected2d")
    table = {
        "feasible2d": lambda cfg, d, x, y: feasible_step_pdf(cfg, d, Step2(x, y)),
        "selected2d": lambda cfg, d, x, y: selected_step_pdf(cfg, d, Step2(x, y)),
        "feasible1": lambda cfg, d, x: feasible_step_marginal1_pdf(cfg, d, x),
        "selected1": lambda cfg, d, x: selected_step_marginal1_pdf(cfg, d, x),
        "selected2": lambda cfg, d, x: selected_step_marginal2_pdf(cfg, d, x),
    }
    return table[name], two_d


def cmd_density(args):
    if args.name not in DENSITY_NAMES:
        raise ConfigurationError(
            f"unknown density {args.name!r}; choices: {', '.join(DENSITY_NAMES)}")
    if args.resolution <= 0:
        raise ConfigurationError(f"resolution must be >= 1, got {args.resolution}")
    if args.theta is None or args.lam is None:
        raise ConfigurationError("density needs --theta and --lambda")
    if args.delta is None or args.delta < 0:
        raise ConfigurationError("density needs --delta >= 0")
    try:
        lo, hi = (float(v) for v in args.range.split(":"))
    except ValueError:
        raise ConfigurationError(f"bad --range {args.range!r}, expected 'lo:hi'") from None
    if not hi > lo:
        raise ConfigurationError(f"empty range {args.range!r}")
    cfg = ProblemConfig(theta=args.theta, lam=args.lam, dim=args.dim)
    fn, two_d = _density_fn(args.name)
    grid = np.linspace(lo, hi, args.resolution)
    rows = []
    if two_d:
        for x in grid:
            for y in grid:
                rows.append((float(x), float(y), float(fn(cfg, args.delta, x, y))))
        columns = ("x", "y", "pdf")
    else:
        for x in grid:
            rows.append((float(x), float(fn(cfg, args.delta, x))))
        columns = ("x", "pdf")
    out = _out_path(args.out, f"density_{args.name}.csv")
    meta = _common_meta(args, {"density": args.name, "theta": args.theta,
                               "lambda": args.lam, "delta": args.delta,
                               "range": args.range, "resolution": args.resolution})
    _write_csv(out, meta, columns, rows)
    print(out)
    return 0


# ---------------------------------------------------------------- validate

def _check(name, passed, **stats):
    return {"name": name, "passed": bool(passed), **stats}


def _suite_oracle_equivalence(seed, corrupt=False):
    """Both-coordinate two-sample KS between the finite-driver sampler and
    the argmax-over-rejection construction."""
    checks = []
    n = 20000
    stream = 0
    for delta in (0.0, 1.0):
        for theta in (0.3, math.pi / 4):
            for lam in (2, 10):
                cfg = ProblemConfig(theta=theta, lam=lam)
                c1g, c2g, _ = select_block(cfg, delta, n, RngStream(seed, stream))
                # corrupted-seed injection: shift the oracle's distance
                delta_oracle = delta + 0.5 if corrupt else delta
                c1r, c2r = rejection_select_block(
                    cfg, delta_oracle, n, RngStream(seed, stream + 1))
                stream += 2
                for coord, a, b in (("c1", c1g, c1r), ("c2", c2g, c2r)):
                    ks = ks_two_sample(a, b, significance=0.001)
                    checks.append(_check(
                        f"prop1_ks_{coord}_delta{delta}_theta{theta:.3f}_lam{lam}",
                        ks.passed, statistic=ks.statistic, pvalue=ks.pvalue))
    return checks


def _suite_stationarity(seed):
    """Post-burn-in stationarity identities of the distance chain."""
    from .chain import run_const_sigma
    from .estimators import batch_means_se
    cfg = ProblemConfig(theta=math.pi / 4, lam=10)
    res = run_const_sigma(cfg, 1.0, 200000, rng=RngStream(seed, 101))
    gdn = res.post_burn_in(res.g_dot_n)
    c1 = res.post_burn_in(res.c1)
    c2 = res.post_burn_in(res.c2)
    se_g = batch_means_se(gdn)
    combo = c1 + math.tan(cfg.theta) * c2
    se_c = batch_means_se(combo)
    checks = [
        _check("stationary_mean_g_dot_n_zero", abs(gdn.mean()) < 3 * se_g,
               value=float(gdn.mean()), se=se_g),
        _check("stationary_tan_theta_identity", abs(combo.mean()) < 3 * se_c,
               value=float(combo.mean()), se=se_c),
    ]
    return checks


def _suite_drift(seed):
    """Negative drift ratio of exp(alpha*delta) for distances past the core."""
    cfg = ProblemConfig(theta=math.pi / 4, lam=10)
    probe = drift_probe(cfg, alpha=0.05, delta_grid=(5.0, 10.0, 20.0),
                        samples_per_point=50000, rng=RngStream(seed, 201))
    checks = []
    for d, r, s in zip(probe.delta_grid, probe.ratio, probe.std_errors):
        checks.append(_check(f"drift_ratio_negative_delta{d:g}", r < -3 * s,
                             ratio=r, se=s))
    return checks


def _suite_lemma4(seed):
    """Large-distance factorization of E[exp(a*G1 + b*G2)]."""
    from .orderstats import max_order_statistic_mgf
    checks = []
    n = 200000
    stream = 301
    for lam in (2, 10):
        cfg = ProblemConfig(theta=math.pi / 4, lam=lam)
        c1, c2, _ = select_block(cfg, 30.0, n, RngStream(seed, stream))
        stream += 1
        for label, series, target in (
                ("g1", np.exp(0.5 * c1), max_order_statistic_mgf(lam, 0.5)),
                ("g2", np.exp(0.5 * c2), math.exp(0.125))):
            mean = float(series.mean())
            se = float(series.std(ddof=1) / math.sqrt(n))
            checks.append(_check(f"lemma4_{label}_lam{lam}", abs(mean - target) < 3 * se,
                                 value=mean, target=target, se=se))
    return checks


SUITES = {
    "oracle-equivalence": _suite_oracle_equivalence,
    "stationarity": _suite_stationarity,
    "drift": _suite_drift,
    "lemma4": _suite_lemma4,
}


def cmd_validate(args):
    names = [n for n in SUITES if args.suite is None or args.suite in n]
    if not names:
        raise ConfigurationError(
            f"no suite matches {args.suite!r}; choices: {', '.join(SUITES)}")
    report = {"tool": f"eslinc {__version__}", "backend": backend_name(),
              "seed": args.seed, "self_test": args.self_test, "suites": {}}
    all_checks = []
    for name in names:
        if name == "oracle-equivalence":
            checks = SUITES[name](args.seed, corrupt=args.self_test)
        else:
            checks = SUITES[name](args.seed)
        report["suites"][name] = checks
        all_checks.extend(checks)
    failures = [c for c in all_checks if not c["passed"]]
    if args.self_test:
        # the harness must notice the injected distribution shift
        ok = any(not c["passed"] for c in report["suites"].get("oracle-equivalence", []))
        report["self_test_detected_shift"] = ok
    else:
        ok = not failures
    report["passed"] = ok
    _write_json(_out_path(args.out, "validate.json") if args.out else None, report)
    for c in all_checks:
        print(("PASS" if c["passed"] else "FAIL"), c["name"], file=sys.stderr)
    return 0 if ok else 1


# ---------------------------------------------------------------- parser

def build_parser():
    parser = argparse.ArgumentParser(
        prog="eslinc",
        description="(1,lambda)-ES with resampling on a constrained linear "
                    "problem: simulators and estimators")
    parser.add_argument("--version", action="version", version=f"eslinc {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, sigma=True):
        p.add_argument("--theta", type=float, default=None, help="constraint angle (rad)")
        p.add_argument("--lambda", dest="lam", type=int, default=None, help="offspring count")
        p.add_argument("--dim", type=int, default=2, help="search-space dimension")
        if sigma:
            p.add_argument("--sigma", type=float, default=1.0, help="constant step-size")
        p.add_argument("--steps", type=int, default=10**6)
        p.add_argument("--burn-in", dest="burn_in", type=int, default=None,
                       help="default: 10%% of steps")
        p.add_argument("--seed", type=int, default=42)
        p.add_argument("--stream", type=int, default=0)
        p.add_argument("--out", default=None)

    p = sub.add_parser("progress-rate", help="sweep sigma*E[G1] over (theta, lambda)")
    add_common(p)
    p.add_argument("--theta-grid", default=None, help="comma-separated angles")
    p.add_argument("--lambda-grid", default=None, help="comma-separated offspring counts")
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(fn=cmd_progress_rate)

    p = sub.add_parser("stationary-delta", help="sweep E[delta] over (theta, lambda)")
    add_common(p, sigma=False)
    p.add_argument("--theta-grid", default=None)
    p.add_argument("--lambda-grid", default=None)
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(fn=cmd_stationary_delta, sigma=1.0)

    p = sub.add_parser("diverge", help="divergence verdict for one configuration")
    add_common(p)
    p.add_argument("--rule", choices=("constant", "csa"), default="constant")
    p.add_argument("--c", type=float, default=None, help="CSA cumulation parameter")
    p.add_argument("--d-sigma", dest="d_sigma", type=float, default=1.0)
    p.add_argument("--sigma-rule", dest="sigma_rule", choices=("norm2", "norm"),
                   default="norm2")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--trace", default=None, help="also write a trajectory CSV here")
    p.add_argument("--trace-every", dest="trace_every", type=int, default=1)
    p.set_defaults(fn=cmd_diverge)

    p = sub.add_parser("density", help="tabulate an analytic density to CSV")
    p.add_argument("--name", required=True,
                   help=f"one of: {', '.join(DENSITY_NAMES)}")
    p.add_argument("--theta", type=float, default=None)
    p.add_argument("--lambda", dest="lam", type=int, default=None)
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--delta", type=float, default=None)
    p.add_argument("--range", default="-5:5", help="'lo:hi'")
    p.add_argument("--resolution", type=int, default=201, help="grid points per axis")
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_density, command="density")

    p = sub.add_parser("validate", help="run the distributional cross-check suites")
    p.add_argument("--suite", default=None, help="substring filter on suite names")
    p.add_argument("--self-test", dest="self_test", action="store_true",
                   help="inject a distribution shift; the KS harness must flag it")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_validate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
