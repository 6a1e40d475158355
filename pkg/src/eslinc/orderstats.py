"""Moments of the maximum of lam i.i.d. standard normals.

The selected step's first coordinate converges to this order statistic as
the constraint recedes, so these quadratures are the reference values for
the large-distance checks.  Density: lam * phi(x) * Phi(x)^(lam-1).
"""

import math

from scipy.integrate import quad
from scipy.special import ndtr

from .errors import ConfigurationError

_SQRT_2PI = 2.5066282746310005024


def _pdf(lam: int, x: float) -> float:
    return lam * math.exp(-0.5 * x * x) / _SQRT_2PI * ndtr(x) ** (lam - 1)


def max_order_statistic_pdf(lam: int, x: float) -> float:
    if lam < 1:
        raise ConfigurationError(f"need lam >= 1, got {lam}")
    return _pdf(lam, x)


def max_order_statistic_mean(lam: int) -> float:
    """E[max of lam standard normals]; e.g. 1/sqrt(pi) for lam = 2."""
    if lam < 1:
        raise ConfigurationError(f"need lam >= 1, got {lam}")
    val, _ = quad(lambda x: x * _pdf(lam, x), -9.0, 9.0 + math.log(max(lam, 2)),
                  epsabs=1e-12, limit=200)
    return val


def max_order_statistic_mgf(lam: int, a: float) -> float:
    """E[exp(a * max of lam standard normals)]."""
    if lam < 1:
        raise ConfigurationError(f"need lam >= 1, got {lam}")
    lo, hi = -9.0 + min(a, 0.0), 9.0 + max(a, 0.0) + math.log(max(lam, 2))
    val, _ = quad(lambda x: math.exp(a * x) * _pdf(lam, x), lo, hi,
                  epsabs=1e-13, limit=200)
    return val
