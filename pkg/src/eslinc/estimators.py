"""Monte Carlo estimators over chain trajectories, with honest uncertainty.

Scalar results come back as an EstimateReport: point estimate, batch-means
standard error, sample counts and (where meaningful) a sign verdict that is
only issued outside the 3-SE noise band.  Batch means is the default
uncertainty method because the distance chain is geometrically ergodic, so
means over long disjoint blocks decorrelate quickly.
"""

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.stats import ks_2samp

from .chain import CsaConfig, run_const_sigma, run_csa
from .errors import ConfigurationError
from .geometry import ProblemConfig
from .rng import RngStream
from .sampling import select_block

DEFAULT_BATCH_COUNT = 100


def batch_means_se(series, batch_count: int = DEFAULT_BATCH_COUNT) -> float:
    """Standard error of the mean of a correlated series from
    ``batch_count`` nonoverlapping batch means (trailing remainder dropped)."""
    series = np.asarray(series, dtype=np.float64)
    if batch_count < 2:
        raise ConfigurationError(f"need at least 2 batches, got {batch_count}")
    if len(series) < 2 * batch_count:
        raise ConfigurationError(
            f"series of length {len(series)} too short for {batch_count} batches")
    width = len(series) // batch_count
    means = series[:width * batch_count].reshape(batch_count, width).mean(axis=1)
    return float(means.std(ddof=1) / math.sqrt(batch_count))


def sign_verdict(value: float, std_error: float,
                 positive: str = "diverges", negative: str = "converges") -> str:
    """Sign call gated at 3 SE; inside the band the verdict is withheld."""
    if value > 3.0 * std_error:
        return positive
    if value < -3.0 * std_error:
        return negative
    return "inconclusive"


@dataclass
class EstimateReport:
    """A point estimate with its uncertainty and provenance."""

    value: float
    std_error: float
    n_samples: int
    burn_in: int
    batch_count: int
    quantity: str = ""
    config: dict = field(default_factory=dict)
    seed: Optional[int] = None
    verdict: Optional[str] = None

    def __post_init__(self):
        if self.std_error < 0:
            raise ConfigurationError("standard error cannot be negative")
        if self.std_error > 0 and self.batch_count < 2:
            raise ConfigurationError("a reported SE needs at least 2 batches")

    def to_json_dict(self) -> dict:
        out = {
            "quantity": self.quantity,
            "config": self.config,
            "value": self.value,
            "std_error": self.std_error,
            "n_samples": self.n_samples,
            "burn_in": self.burn_in,
            "seed": self.seed,
        }
        if self.verdict is not None:
            out["verdict"] = self.verdict
        return out


def _problem_config_dict(cfg: ProblemConfig) -> dict:
    return {"theta": cfg.theta, "lambda": cfg.lam, "n": cfg.dim}


def progress_rate(cfg: ProblemConfig, sigma: float, steps: int,
                  burn_in: Optional[int] = None, rng: Optional[RngStream] = None,
                  batch_count: int = DEFAULT_BATCH_COUNT) -> EstimateReport:
    """Per-generation objective gain sigma * E[selected step's first
    coordinate] under the stationary distance distribution."""
    rng = rng if rng is not None else RngStream()
    seed = rng.seed
    res = run_const_sigma(cfg, sigma, steps, burn_in=burn_in, rng=rng)
    post = res.post_burn_in(res.c1)
    value = sigma * float(post.mean())
    se = sigma * batch_means_se(post, batch_count)
    config = _problem_config_dict(cfg) | {"sigma": sigma}
    return EstimateReport(value=value, std_error=se, n_samples=len(post),
                          burn_in=res.burn_in, batch_count=batch_count,
                          quantity="progress_rate", config=config, seed=seed,
                          verdict=sign_verdict(value, se))


def stationary_delta_mean(cfg: ProblemConfig, steps: int,
                          burn_in: Optional[int] = None,
                          rng: Optional[RngStream] = None,
                          batch_count: int = DEFAULT_BATCH_COUNT) -> EstimateReport:
    """Time-average normalized distance to the constraint after burn-in."""
    rng = rng if rng is not None else RngStream()
    seed = rng.seed
    res = run_const_sigma(cfg, 1.0, steps, burn_in=burn_in, rng=rng)
    post = res.delta[res.burn_in:res.steps]
    value = float(post.mean())
    se = batch_means_se(post, batch_count)
    return EstimateReport(value=value, std_error=se, n_samples=len(post),
                          burn_in=res.burn_in, batch_count=batch_count,
                          quantity="stationary_delta_mean",
                          config=_problem_config_dict(cfg), seed=seed)


def log_sigma_slope(cfg: CsaConfig, steps: int, burn_in: Optional[int] = None,
                    rng: Optional[RngStream] = None,
                    batch_count: int = DEFAULT_BATCH_COUNT) -> EstimateReport:
    """Per-generation drift of ln sigma under CSA; the sign carries the
    geometric divergence/convergence verdict."""
    rng = rng if rng is not None else RngStream()
    seed = rng.seed
    res = run_csa(cfg, steps, burn_in=burn_in, rng=rng)
    lo, hi = res.slope_window()
    increments = np.diff(res.log_sigma[lo:hi + 1])
    value = res.slope
    config = _problem_config_dict(cfg.problem) | {
        "csa": {"c": cfg.c, "d_sigma": cfg.d_sigma, "sigma_rule": cfg.sigma_rule}}
    if res.guard_triggered:
        # |ln sigma| hit the overflow guard: the sign is definitive
        verdict = "diverges" if res.log_sigma[hi] > 0 else "converges"
        return EstimateReport(value=value, std_error=0.0, n_samples=hi - lo,
                              burn_in=lo, batch_count=0, quantity="log_sigma_slope",
                              config=config, seed=seed, verdict=verdict)
    se = batch_means_se(increments, batch_count)
    return EstimateReport(value=value, std_error=se, n_samples=hi - lo,
                          burn_in=lo, batch_count=batch_count,
                          quantity="log_sigma_slope", config=config, seed=seed,
                          verdict=sign_verdict(value, se))


@dataclass
class DriftProbeResult:
    """Monte Carlo estimates of E[exp(-alpha * step.n)] - 1 on a distance grid.

    Negative values witness the geometric drift of exp(alpha * delta) toward
    the constraint region; they plateau for large delta."""

    alpha: float
    delta_grid: list
    ratio: list
    std_errors: list

    def __post_init__(self):
        if not (len(self.delta_grid) == len(self.ratio) == len(self.std_errors)):
            raise ConfigurationError("drift probe grids must be aligned")


def drift_probe(cfg: ProblemConfig, alpha: float, delta_grid: Sequence[float],
                samples_per_point: int, rng: Optional[RngStream] = None) -> DriftProbeResult:
    """Estimate the drift ratio pointwise in delta (i.i.d. sampling, no chain)."""
    if alpha <= 0:
        raise ConfigurationError(f"alpha must be > 0, got {alpha}")
    rng = rng if rng is not None else RngStream()
    ratios, ses = [], []
    for delta in delta_grid:
        if delta < 0:
            raise ConfigurationError(f"delta grid must be >= 0, got {delta}")
        _, _, t_sel = select_block(cfg, float(delta), samples_per_point, rng)
        vals = np.exp(-alpha * t_sel)
        ratios.append(float(vals.mean()) - 1.0)
        ses.append(float(vals.std(ddof=1) / math.sqrt(samples_per_point)))
    return DriftProbeResult(alpha=alpha, delta_grid=list(delta_grid),
                            ratio=ratios, std_errors=ses)


@dataclass(frozen=True)
class KsDecision:
    passed: bool
    statistic: float
    pvalue: float
    significance: float


def ks_two_sample(a, b, significance: float = 0.001) -> KsDecision:
    """Two-sample Kolmogorov-Smirnov decision at the given significance."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if len(a) == 0 or len(b) == 0:
        raise ConfigurationError("KS test needs nonempty samples")
    if not (0.0 < significance < 1.0):
        raise ConfigurationError(f"significance must lie in (0,1), got {significance}")
    res = ks_2samp(a, b)
    return KsDecision(passed=bool(res.pvalue >= significance),
                      statistic=float(res.statistic),
                      pvalue=float(res.pvalue), significance=significance)
