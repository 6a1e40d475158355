"""Analytic densities of the feasible step and the selected step.

With n = (cos t, sin t) the constraint normal and delta >= 0 the normalized
distance, the feasible step is a 2-D standard normal truncated to the
half-plane x . n <= delta; the selected step is the best of lam i.i.d.
feasible steps under the objective's first coordinate.  The five densities
here are, in order: the truncated 2-D density, its first marginal, that
marginal's CDF, the selected-step 2-D density, and the two selected-step
marginals.

The marginal CDF F is the inner-loop quantity (the selected densities raise
it to the power lam-1).  It reduces to a bivariate-normal orthant
probability with correlation cos t,

    F(x) = P(U <= x, V <= delta) / Phi(delta),   corr(U, V) = cos t,

which is evaluated in closed form through Owen's T function.  No caching is
needed and every function here is pure, so unrestricted concurrent use is
safe.
"""

import math
import warnings
from typing import Callable, NamedTuple

import numpy as np
from scipy.integrate import IntegrationWarning, quad
from scipy.special import ndtr, owens_t

from .errors import QuadratureError
from .geometry import ProblemConfig, Step2

__all__ = [
    "ProblemConfig", "Step2", "QuadratureResult",
    "feasible_step_pdf", "feasible_step_marginal1_pdf", "feasible_step_marginal1_cdf",
    "selected_step_pdf", "selected_step_marginal1_pdf", "selected_step_marginal2_pdf",
    "quadrature_expectation",
]

_SQRT_2PI = 2.5066282746310005024
_TWO_PI = 2.0 * math.pi
# beyond this slope Owen's T is numerically its a -> inf limit
_OWENS_T_A_MAX = 1e14


def _phi(x):
    return np.exp(-0.5 * np.square(x)) / _SQRT_2PI


def _owens_t_sat(x, a):
    """Owen's T with the large-|a| limit T(x, +-inf) = +-Phi(-|x|)/2 spliced in."""
    x = np.asarray(x, dtype=np.float64)
    a = np.asarray(a, dtype=np.float64)
    big = np.abs(a) >= _OWENS_T_A_MAX
    out = owens_t(x, np.where(big, 0.0, a))
    if np.any(big):
        limit = 0.5 * ndtr(-np.abs(x)) * np.sign(a)
        out = np.where(big, limit, out)
    return out


def _bvn_cdf(h, k: float, rho: float, s: float):
    """P(U <= h, V <= k) for standard normal (U, V) with corr rho; s = sqrt(1-rho^2).

    Owen (1956): Phi2(h,k) = (Phi(h)+Phi(k))/2 - T(h,a_h) - T(k,a_k) - c with
    a_h = (k-rho*h)/(h*s), a_k = (h-rho*k)/(k*s) and c = 1/2 iff hk < 0 or
    (hk = 0 and h + k < 0).  ``h`` may be an array; ``k`` is scalar.
    """
    h = np.asarray(h, dtype=np.float64)
    scalar = h.ndim == 0
    h = np.atleast_1d(h).astype(np.float64)

    with np.errstate(divide="ignore", invalid="ignore"):
        a_h = np.where(h != 0.0, (k - rho * h) / (h * s), 0.0)
    t_h = np.where(h != 0.0, _owens_t_sat(h, a_h), 0.25 * np.sign(k))

    if k != 0.0:
        a_k = (h - rho * k) / (k * s)
        t_k = _owens_t_sat(k, a_k)
    else:
        t_k = 0.25 * np.sign(h)

    c = np.where((h * k < 0.0) | ((h * k == 0.0) & (h + k < 0.0)), 0.5, 0.0)
    out = 0.5 * (ndtr(h) + ndtr(k)) - t_h - t_k - c

    both_zero = (h == 0.0) & (k == 0.0)
    if np.any(both_zero):
        out = np.where(both_zero, 0.25 + math.asin(rho) / _TWO_PI, out)
    out = np.clip(out, 0.0, 1.0)
    return float(out[0]) if scalar else out


def _split(x) -> tuple:
    c1, c2 = (x.c1, x.c2) if isinstance(x, Step2) else (x[0], x[1])
    return np.asarray(c1, dtype=np.float64), np.asarray(c2, dtype=np.float64)


def feasible_step_pdf(cfg: ProblemConfig, delta: float, x) -> float:
    """Density of the resampled (feasible) step at ``x`` given distance ``delta``:
    2-D standard normal mass restricted to x.n <= delta and renormalized."""
    c1, c2 = _split(x)
    feasible = cfg.dot_n(c1, c2) <= delta
    out = _phi(c1) * _phi(c2) / ndtr(delta) * feasible
    return float(out) if out.ndim == 0 else out


def feasible_step_marginal1_pdf(cfg: ProblemConfig, delta: float, x1) -> float:
    """First-coordinate marginal of the feasible step."""
    x1 = np.asarray(x1, dtype=np.float64)
    out = _phi(x1) * ndtr((delta - x1 * cfg.cos_theta) / cfg.sin_theta) / ndtr(delta)
    return float(out) if out.ndim == 0 else out


def feasible_step_marginal1_cdf(cfg: ProblemConfig, delta: float, x1) -> float:
    """CDF of the feasible step's first coordinate (closed form via Owen's T)."""
    out = _bvn_cdf(x1, float(delta), cfg.cos_theta, cfg.sin_theta)
    out = np.asarray(out) / ndtr(delta)
    out = np.clip(out, 0.0, 1.0)
    return float(out) if out.ndim == 0 else out


def selected_step_pdf(cfg: ProblemConfig, delta: float, x) -> float:
    """Density of the best-of-lam feasible step at ``x``."""
    c1, _ = _split(x)
    cdf_pow = feasible_step_marginal1_cdf(cfg, delta, c1) ** (cfg.lam - 1)
    out = cfg.lam * feasible_step_pdf(cfg, delta, x) * cdf_pow
    return float(out) if np.ndim(out) == 0 else out


def selected_step_marginal1_pdf(cfg: ProblemConfig, delta: float, x1) -> float:
    """First-coordinate marginal of the selected step."""
    cdf_pow = feasible_step_marginal1_cdf(cfg, delta, x1) ** (cfg.lam - 1)
    out = cfg.lam * feasible_step_marginal1_pdf(cfg, delta, x1) * cdf_pow
    return float(out) if np.ndim(out) == 0 else out


def selected_step_marginal2_pdf(cfg: ProblemConfig, delta: float, x2: float) -> float:
    """Second-coordinate marginal of the selected step (one adaptive quadrature
    over the feasible range of the first coordinate)."""
    upper = (delta - x2 * cfg.sin_theta) / cfg.cos_theta

    def integrand(u):
        return _phi(u) * feasible_step_marginal1_cdf(cfg, delta, u) ** (cfg.lam - 1)

    lo = min(-9.0, upper - 1.0)
    val, _ = quad(integrand, lo, upper, epsabs=1e-12, epsrel=1e-10, limit=200)
    return cfg.lam * _phi(x2) / ndtr(delta) * val


class QuadratureResult(NamedTuple):
    value: float
    error_bound: float


def quadrature_expectation(f: Callable[[Step2], float], cfg: ProblemConfig,
                           delta: float, tol: float = 1e-8) -> QuadratureResult:
    """E[f(selected step)] by iterated adaptive quadrature.

    Integrates in the rotated coordinates (t, v) = (x.n, x.n_perp), where the
    support is the smooth half-line t <= delta.  ``f`` must be piecewise
    continuous with sub-Gaussian growth.  Raises QuadratureError (carrying the
    best estimate and its bound) if the requested tolerance is not certified.
    """
    cos_t, sin_t = cfg.cos_theta, cfg.sin_theta
    lam = cfg.lam
    scale = lam / ndtr(delta)
    t_hi = min(delta, 10.0)
    t_lo, v_lo, v_hi = -10.0, -10.0, 10.0

    # budget: outer tol/2, inner errors amount to at most tol/8 after the
    # phi(t)*scale weighting (phi <= 0.4)
    inner_tol = tol / (8.0 * (t_hi - t_lo) * scale * 0.4)
    worst_inner = 0.0

    def inner(t):
        nonlocal worst_inner
        weight = scale * float(_phi(t))

        def g(v):
            c1 = t * cos_t + v * sin_t
            c2 = t * sin_t - v * cos_t
            w = feasible_step_marginal1_cdf(cfg, delta, c1) ** (lam - 1)
            return f(Step2(c1, c2)) * float(_phi(v)) * w

        val, err = quad(g, v_lo, v_hi, epsabs=inner_tol, epsrel=1e-12, limit=200)
        worst_inner = max(worst_inner, weight * err)
        return weight * val

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        value, outer_err = quad(inner, t_lo, t_hi, epsabs=tol / 2.0, epsrel=1e-12,
                                limit=200)
    bound = outer_err + (t_hi - t_lo) * worst_inner
    if not math.isfinite(value) or bound > tol:
        raise QuadratureError(
            f"expectation quadrature reached error bound {bound:.3e} > tol {tol:.3e}",
            estimate=value, error_bound=bound)
    return QuadratureResult(value, bound)
