"""Markov chain simulators.

Three views of the same process:

* the constant-sigma normalized-distance chain
  delta' = delta - (selected step).n, which lives on [0, inf);
* the CSA chain (delta, path), where the evolution path is an exponentially
  weighted recombination of past selected steps and ln sigma moves by
  (|path|^2 - n) / (2 d_sigma n) per step (default rule);
* the full ES trajectory (f-value, constraint distance, sigma), reconstructed
  from either chain since only the first two coordinates feel the constraint.

``const_sigma_step``/``csa_step`` are the single-step reference
implementations; the ``run_*`` functions execute the same recursion through
the selected backend kernel (compiled or numpy) and return the whole
trajectory, which the estimators consume.

The update delta' = delta - t uses the selected step's component along the
constraint normal t exactly as produced by the truncated inverse (clamped at
delta), so delta >= 0 holds in floating point, not just in expectation.
"""

import math
from dataclasses import dataclass, field, replace
from typing import Iterator, Optional, Union

import numpy as np

from . import _kernels
from .errors import ConfigurationError
from .geometry import ProblemConfig, Step2
from .normal import trunc_normal_inverse
from .rng import RngStream
from .sampling import draw_batch, select

DEFAULT_SIGMA_GUARD = 700.0


def chi_norm(dim: int) -> float:
    """E|N(0, I_dim)| = sqrt(2) Gamma((dim+1)/2) / Gamma(dim/2)."""
    return math.sqrt(2.0) * math.exp(math.lgamma((dim + 1) / 2) - math.lgamma(dim / 2))


@dataclass(frozen=True)
class CsaConfig:
    """Cumulative step-size adaptation parameters on top of the geometry.

    ``sigma_rule`` selects the ln-sigma update: "norm2" (default) moves by
    (|p|^2 - n)/(2 d_sigma n); "norm" is the classic c/d_sigma *
    (|p|/E|N(0,I)| - 1) variant, kept for comparison.
    """

    problem: ProblemConfig
    c: float
    d_sigma: float = 1.0
    sigma_rule: str = "norm2"

    def __post_init__(self):
        if not (0.0 < self.c <= 1.0):
            raise ConfigurationError(f"cumulation parameter must lie in (0,1], got {self.c}")
        if self.d_sigma <= 0.0:
            raise ConfigurationError(f"damping must be > 0, got {self.d_sigma}")
        if self.sigma_rule not in ("norm2", "norm"):
            raise ConfigurationError(f"sigma_rule must be 'norm2' or 'norm', got {self.sigma_rule!r}")

    @property
    def theta(self):
        return self.problem.theta

    @property
    def lam(self):
        return self.problem.lam

    @property
    def dim(self):
        return self.problem.dim

    @property
    def rule_id(self) -> int:
        return _kernels.SIGMA_RULE_NORM2 if self.sigma_rule == "norm2" else _kernels.SIGMA_RULE_NORM


@dataclass(frozen=True)
class ConstSigmaState:
    delta: float
    t: int = 0
    x1_sum: float = 0.0


@dataclass(frozen=True)
class CsaState:
    delta: float
    path: np.ndarray
    log_sigma: float = 0.0
    t: int = 0


def _selected_with_normal_component(cfg: ProblemConfig, delta: float, batch):
    step, idx = select(cfg, delta, batch)
    t_sel = float(trunc_normal_inverse(delta, float(batch.us[idx])))
    return step, t_sel


def const_sigma_step(cfg: ProblemConfig, state: ConstSigmaState,
                     rng: RngStream) -> ConstSigmaState:
    """One generation of the constant-sigma distance chain."""
    batch = draw_batch(rng, cfg.lam)
    step, t_sel = _selected_with_normal_component(cfg, state.delta, batch)
    return ConstSigmaState(delta=state.delta - t_sel, t=state.t + 1,
                           x1_sum=state.x1_sum + step.c1)


def csa_step(cfg: CsaConfig, state: CsaState, rng: RngStream) -> CsaState:
    """One generation of the (delta, path) CSA chain.

    Consumes 2*lam + (dim-2) words: the batch drivers, then the selected
    offspring's tail coordinates.  The sigma guard is enforced by the runner,
    not here.
    """
    pb = cfg.problem
    batch = draw_batch(rng, pb.lam)
    step, t_sel = _selected_with_normal_component(pb, state.delta, batch)
    z_tail = rng.normals(pb.dim - 2) if pb.dim > 2 else np.empty(0)

    keep = 1.0 - cfg.c
    mix = math.sqrt(cfg.c * (2.0 - cfg.c))
    s_full = np.concatenate(([step.c1, step.c2], z_tail))
    path = keep * state.path + mix * s_full
    pn2 = float(np.dot(path, path))
    if cfg.sigma_rule == "norm2":
        ls_new = state.log_sigma + (pn2 - pb.dim) / (2.0 * cfg.d_sigma * pb.dim)
    else:
        ls_new = state.log_sigma + (cfg.c / cfg.d_sigma) * (
            math.sqrt(pn2) / chi_norm(pb.dim) - 1.0)
    delta_new = (state.delta - t_sel) * math.exp(state.log_sigma - ls_new)
    return CsaState(delta=delta_new, path=path, log_sigma=ls_new, t=state.t + 1)


def _check_horizon(steps: int, burn_in: int):
    if steps < 0 or burn_in < 0:
        raise ConfigurationError("steps and burn_in must be >= 0")
    if steps and burn_in >= steps:
        raise ConfigurationError(f"burn_in ({burn_in}) must be < steps ({steps})")


def default_burn_in(steps: int) -> int:
    """10% of the horizon; geometric ergodicity makes this conservative."""
    return steps // 10


@dataclass
class ConstSigmaResult:
    """Trajectory of one constant-sigma run.

    delta has ``steps + 1`` entries (states), c1/c2 have ``steps`` (the
    selected step taken from each state).
    """

    cfg: ProblemConfig
    sigma: float
    steps: int
    burn_in: int
    delta: np.ndarray
    c1: np.ndarray
    c2: np.ndarray

    @property
    def g_dot_n(self) -> np.ndarray:
        return self.delta[:-1] - self.delta[1:]

    @property
    def final_state(self) -> ConstSigmaState:
        return ConstSigmaState(delta=float(self.delta[-1]), t=self.steps,
                               x1_sum=float(self.c1.sum()))

    def post_burn_in(self, series: np.ndarray) -> np.ndarray:
        return series[self.burn_in:]

    def trace_rows(self, every: int = 1) -> Iterator[tuple]:
        g = self.g_dot_n
        for t in range(0, self.steps, max(int(every), 1)):
            yield (t, self.delta[t], g[t], self.c1[t], self.c2[t])

    trace_columns = ("t", "delta", "g_dot_n", "g1", "g2")


def run_const_sigma(cfg: ProblemConfig, sigma: float, steps: int, burn_in: Optional[int] = None,
                    rng: Optional[RngStream] = None, delta0: float = 1.0) -> ConstSigmaResult:
    """Run the constant-sigma chain from delta0 (paper initialization: 1)."""
    if sigma <= 0:
        raise ConfigurationError(f"sigma must be > 0, got {sigma}")
    if burn_in is None:
        burn_in = default_burn_in(steps)
    _check_horizon(steps, burn_in)
    if delta0 < 0:
        raise ConfigurationError(f"delta0 must be >= 0, got {delta0}")
    rng = rng if rng is not None else RngStream()
    delta, c1, c2, n_draws = _kernels.run_const_sigma_kernel(
        rng.bit_generator, cfg.theta, cfg.lam, delta0, steps)
    rng.note_raw_draws(n_draws)
    return ConstSigmaResult(cfg=cfg, sigma=sigma, steps=steps, burn_in=burn_in,
                            delta=delta, c1=c1, c2=c2)


@dataclass
class CsaResult:
    """Trajectory of one CSA run, plus the log-step-size slope estimate."""

    cfg: CsaConfig
    steps: int
    burn_in: int
    delta: np.ndarray
    c1: np.ndarray
    c2: np.ndarray
    log_sigma: np.ndarray
    final_state: CsaState
    status: int
    steps_done: int

    @property
    def guard_triggered(self) -> bool:
        return self.status == _kernels.STATUS_SIGMA_GUARD

    @property
    def g_norm2_2d(self) -> np.ndarray:
        return self.c1 ** 2 + self.c2 ** 2

    def slope_window(self) -> tuple:
        lo = min(self.burn_in, self.steps_done // 2)
        return lo, self.steps_done

    @property
    def slope(self) -> float:
        lo, hi = self.slope_window()
        return (self.log_sigma[hi] - self.log_sigma[lo]) / (hi - lo)

    def trace_rows(self, every: int = 1) -> Iterator[tuple]:
        g = self.delta[:-1] - self.delta[1:]  # sigma-rescaled; diagnostic only
        for t in range(0, self.steps_done, max(int(every), 1)):
            yield (t, self.delta[t], g[t], self.c1[t], self.c2[t], self.log_sigma[t])

    trace_columns = ("t", "delta", "g_dot_n", "g1", "g2", "log_sigma")


def run_csa(cfg: CsaConfig, steps: int, burn_in: Optional[int] = None,
            rng: Optional[RngStream] = None, delta0: float = 1.0,
            guard: float = DEFAULT_SIGMA_GUARD) -> CsaResult:
    """Run the CSA chain from (delta0, p=0, sigma=1).

    If |ln sigma| crosses ``guard`` the run stops early with a definitive
    divergence/convergence verdict (the estimators read it off ``status`` and
    the sign of ln sigma).
    """
    if burn_in is None:
        burn_in = default_burn_in(steps)
    _check_horizon(steps, burn_in)
    pb = cfg.problem
    rng = rng if rng is not None else RngStream()
    delta, c1, c2, log_sigma, p_head, p_tail, status, done, n_draws = _kernels.run_csa_kernel(
        rng.bit_generator, pb.theta, pb.lam, pb.dim, cfg.c, cfg.d_sigma,
        chi_norm(pb.dim), cfg.rule_id, delta0, 0.0,
        np.zeros(2), np.zeros(pb.dim - 2), steps, guard)
    rng.note_raw_draws(n_draws)
    final = CsaState(delta=float(delta[-1]), path=np.concatenate((p_head, p_tail)),
                     log_sigma=float(log_sigma[-1]), t=done)
    return CsaResult(cfg=cfg, steps=steps, burn_in=burn_in, delta=delta, c1=c1,
                     c2=c2, log_sigma=log_sigma, final_state=final, status=status,
                     steps_done=done)


@dataclass(frozen=True)
class ConstantSigma:
    """Step-size rule sigma_t = sigma (xi_t = 1)."""

    sigma: float = 1.0

    def __post_init__(self):
        if self.sigma <= 0:
            raise ConfigurationError(f"sigma must be > 0, got {self.sigma}")


StepSizeRule = Union[ConstantSigma, CsaConfig]


@dataclass
class FullEsResult:
    """Full-trajectory view: objective value, constraint distance and sigma
    per iterate, on top of the underlying chain trajectory."""

    cfg: ProblemConfig
    rule: StepSizeRule
    steps: int
    f_value: np.ndarray    # steps+1: f(X_t) = [X_t]_1
    g_value: np.ndarray    # steps+1: g(X_t) = sigma_t * delta_t >= 0
    sigma: np.ndarray      # steps+1
    delta: np.ndarray
    c1: np.ndarray
    c2: np.ndarray
    log_sigma: Optional[np.ndarray] = None
    chain_result: Optional[object] = None

    def trace_rows(self, every: int = 1) -> Iterator[tuple]:
        g = self.delta[:-1] - self.delta[1:]
        csa = self.log_sigma is not None
        n = len(self.c1)
        for t in range(0, n, max(int(every), 1)):
            row = [t, self.delta[t], g[t], self.c1[t], self.c2[t]]
            if csa:
                row.append(self.log_sigma[t])
            row.append(self.f_value[t])
            yield tuple(row)

    @property
    def trace_columns(self):
        base = ["t", "delta", "g_dot_n", "g1", "g2"]
        if self.log_sigma is not None:
            base.append("log_sigma")
        return tuple(base + ["f_value"])


def run_full_es(cfg: ProblemConfig, rule: StepSizeRule, steps: int,
                rng: Optional[RngStream] = None,
                burn_in: Optional[int] = None) -> FullEsResult:
    """Simulate the ES from X_0 = -n (so f(X_0) = -cos theta, g(X_0) = 1).

    The trajectory is reconstructed in the 2-D reduced coordinates from the
    matching chain run: X_{t+1} = X_t + sigma_t * step_t and
    g(X_t) = sigma_t * delta_t, with delta following the exact chain
    recursion.  Every iterate is feasible by construction.
    """
    f0 = -math.cos(cfg.theta)
    if isinstance(rule, ConstantSigma):
        sigma = rule.sigma
        chain = run_const_sigma(cfg, sigma, steps, burn_in=burn_in, rng=rng,
                                delta0=1.0 / sigma)
        f = f0 + sigma * np.concatenate(([0.0], np.cumsum(chain.c1)))
        sig = np.full(steps + 1, sigma)
        g = sig * chain.delta
        result = FullEsResult(cfg=cfg, rule=rule, steps=steps, f_value=f, g_value=g,
                              sigma=sig, delta=chain.delta, c1=chain.c1, c2=chain.c2,
                              chain_result=chain)
    elif isinstance(rule, CsaConfig):
        chain = run_csa(rule, steps, burn_in=burn_in, rng=rng, delta0=1.0)
        sig = np.exp(chain.log_sigma)
        f = f0 + np.concatenate(([0.0], np.cumsum(sig[:-1] * chain.c1)))
        g = sig * chain.delta
        result = FullEsResult(cfg=cfg, rule=rule, steps=chain.steps_done, f_value=f,
                              g_value=g, sigma=sig, delta=chain.delta, c1=chain.c1,
                              c2=chain.c2, log_sigma=chain.log_sigma, chain_result=chain)
    else:
        raise ConfigurationError(f"unknown step-size rule {rule!r}")
    if not np.all(result.g_value >= 0.0):
        raise AssertionError("infeasible iterate: g(X_t) < 0")
    return result
