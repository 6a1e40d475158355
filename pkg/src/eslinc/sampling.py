"""Exact samplers for the feasible and selected steps.

One generation consumes lam driver pairs (u, z) ~ (Uniform(0,1), N(0,1)).
The feasible step is assembled without any rejection loop: the component
along the constraint normal is the truncated-normal inverse at u, the
orthogonal component is z, i.e.

    step = trunc_normal_inverse(delta, u) * n + z * n_perp .

Selection picks the candidate with the largest first coordinate (the
objective is the first coordinate).  A plain resample-until-feasible sampler
is kept alongside as the independence oracle: the two constructions must be
indistinguishable in distribution, and the test suite holds them to that
with two-sample KS checks.
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr, ndtri

from .errors import ConfigurationError
from .geometry import ProblemConfig, Step2
from .normal import trunc_normal_inverse
from .rng import RngStream

_MAX_REJECTION_TRIALS = 10**6


@dataclass(frozen=True)
class ResampleBatch:
    """The lam driver pairs of one generation: us[i] in (0,1), zs[i] ~ N(0,1)."""

    us: np.ndarray
    zs: np.ndarray

    def __post_init__(self):
        if self.us.shape != self.zs.shape or self.us.ndim != 1:
            raise ConfigurationError("batch drivers must be two equal-length vectors")
        if len(self.us) < 2:
            raise ConfigurationError("a batch needs lam >= 2 pairs")

    def __len__(self):
        return len(self.us)

    @property
    def pairs(self):
        return list(zip(self.us.tolist(), self.zs.tolist()))


def draw_batch(rng: RngStream, lam: int) -> ResampleBatch:
    """Draw the lam (u, z) pairs of one generation.

    Consumes 2*lam words interleaved as u_1, z_1, u_2, z_2, ...; the chain
    kernels replicate exactly this order.
    """
    if lam < 2:
        raise ConfigurationError(f"offspring count must be >= 2, got {lam}")
    flat = rng.uniforms(2 * lam)
    return ResampleBatch(us=flat[0::2], zs=ndtri(flat[1::2]))


def g_tilde(cfg: ProblemConfig, delta: float, w) -> Step2:
    """Map one driver pair to a feasible step (the finite-driver construction)."""
    u, z = w
    t = trunc_normal_inverse(delta, u)
    return Step2(t * cfg.cos_theta + z * cfg.sin_theta,
                 t * cfg.sin_theta - z * cfg.cos_theta)


def select(cfg: ProblemConfig, delta: float, batch: ResampleBatch):
    """Best-of-batch feasible step and its index (argmax of the first
    coordinate, ties broken by lowest index)."""
    if len(batch) != cfg.lam:
        raise ConfigurationError(f"batch has {len(batch)} pairs, config wants lam={cfg.lam}")
    t = trunc_normal_inverse(delta, batch.us)
    c1 = t * cfg.cos_theta + batch.zs * cfg.sin_theta
    idx = int(np.argmax(c1))
    c2 = t[idx] * cfg.sin_theta - batch.zs[idx] * cfg.cos_theta
    return Step2(float(c1[idx]), float(c2)), idx


def rejection_sample(cfg: ProblemConfig, delta: float, rng: RngStream) -> Step2:
    """Resample a 2-D standard normal until it satisfies x.n <= delta.

    The expected number of trials is 1/Phi(delta) <= 2 for delta >= 0; the
    trial cap only guards against misuse with invalid state.
    """
    if delta < 0:
        raise ConfigurationError(f"normalized distance must be >= 0, got {delta}")
    for _ in range(_MAX_REJECTION_TRIALS):
        z = ndtri(rng.uniforms(2))
        if cfg.dot_n(z[0], z[1]) <= delta:
            return Step2(float(z[0]), float(z[1]))
    raise RuntimeError(f"no feasible sample within {_MAX_REJECTION_TRIALS} trials "
                       f"(delta={delta})")


def select_block(cfg: ProblemConfig, delta: float, n_samples: int, rng: RngStream):
    """``n_samples`` i.i.d. selected steps at a pinned distance, vectorized.

    Returns (c1, c2, t_sel) arrays, t_sel being the component along the
    constraint normal of each selected step.  Word consumption and argmax
    semantics match ``draw_batch`` + ``select`` sample by sample.
    """
    lam = cfg.lam
    flat = rng.uniforms(2 * lam * n_samples).reshape(n_samples, 2 * lam)
    us, zs = flat[:, 0::2], ndtri(flat[:, 1::2])
    t = _trunc_inverse_block(delta, us)
    c1 = t * cfg.cos_theta + zs * cfg.sin_theta
    idx = np.argmax(c1, axis=1)
    rows = np.arange(n_samples)
    t_sel = t[rows, idx]
    z_sel = zs[rows, idx]
    return c1[rows, idx], t_sel * cfg.sin_theta - z_sel * cfg.cos_theta, t_sel


def rejection_select_block(cfg: ProblemConfig, delta: float, n_samples: int,
                           rng: RngStream):
    """Best-of-lam over rejection-sampled feasible steps, vectorized: the
    distributional oracle for ``select_block``.  Returns (c1, c2) arrays."""
    lam = cfg.lam
    need = lam * n_samples
    acc1 = np.empty(need)
    acc2 = np.empty(need)
    got = 0
    while got < need:
        chunk = max(4096, int(1.5 * (need - got) / max(ndtr(delta), 1e-3)))
        z = ndtri(rng.uniforms(2 * chunk)).reshape(chunk, 2)
        keep = z[:, 0] * cfg.cos_theta + z[:, 1] * cfg.sin_theta <= delta
        zk = z[keep]
        take = min(len(zk), need - got)
        acc1[got:got + take] = zk[:take, 0]
        acc2[got:got + take] = zk[:take, 1]
        got += take
    c1 = acc1.reshape(n_samples, lam)
    c2 = acc2.reshape(n_samples, lam)
    idx = np.argmax(c1, axis=1)
    rows = np.arange(n_samples)
    return c1[rows, idx], c2[rows, idx]


def _trunc_inverse_block(delta: float, u: np.ndarray) -> np.ndarray:
    """trunc_normal_inverse for a full array of open-interval uniforms
    (skips the argument validation of the public op)."""
    cdf_d = ndtr(delta)
    sf_d = ndtr(-delta)
    p = u * cdf_d
    out = np.empty_like(p)
    lo = p <= 0.5
    if np.any(lo):
        out[lo] = _newton(ndtri(p[lo]), p[lo])
    hi = ~lo
    if np.any(hi):
        q = (1.0 - u[hi]) + u[hi] * sf_d
        out[hi] = -_newton(ndtri(q), q)
    np.minimum(out, delta, out=out)
    return out


def _newton(x, p):
    pdf = np.exp(-0.5 * x * x - 0.9189385332046727418)
    return x - (ndtr(x) - p) / pdf
