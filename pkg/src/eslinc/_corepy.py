"""Pure-Python (numpy) chain kernels: the fallback backend.

These loops are the reference semantics for the compiled kernels in
``_core.pyx`` and produce bit-identical trajectories: both consume the same
Philox words in the same order, use the same cephes ndtr/ndtri, and route
every ``exp`` in the per-step arithmetic through libm (``math.exp``; numpy's
SIMD ``np.exp`` rounds differently in the last ulp).

Kernel contract (shared with the compiled backend)
---------------------------------------------------
* one constant-sigma step consumes 2*lam words: u_1, z_1, ..., u_lam, z_lam;
* one CSA step consumes 2*lam + (dim-2) words, the tail normals last;
* normals come from ndtri(u); the truncated component from the two-branch
  inverse with one Newton polish, clamped at delta; argmax ties go to the
  lowest index;
* delta stays >= 0 by construction and the kernels verify it every step.
"""

import math

import numpy as np
from scipy.special import ndtr, ndtri

_INV_2_53 = 1.0 / 9007199254740992.0
_HALF_LOG_2PI = 0.9189385332046727418
_BLOCK_STEPS = 4096

STATUS_OK = 0
STATUS_SIGMA_GUARD = 1

SIGMA_RULE_NORM2 = 0  # ln sigma += (|p|^2 - n) / (2 d_sigma n)
SIGMA_RULE_NORM = 1   # ln sigma += c/d_sigma * (|p| / E|N(0,I_n)| - 1)


def _to_uniform(raw):
    return ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * _INV_2_53


def _trunc_inv_row(delta, us, cdf_d, sf_d):
    """Truncated-normal inverse for one generation's uniforms (lam-vector)."""
    p = us * cdf_d
    lo = p <= 0.5
    hi = ~lo
    x = np.empty_like(p)
    q = np.empty_like(p)
    if lo.any():
        x[lo] = ndtri(p[lo])
    if hi.any():
        q[hi] = (1.0 - us[hi]) + us[hi] * sf_d
        x[hi] = -ndtri(q[hi])
    # cd[i] = Phi(x_i) on the lower branch, Phi(-x_i) on the complementary one
    cd = ndtr(np.where(lo, x, -x))
    for i in range(len(x)):
        xi = x[i]
        pdf = math.exp(-0.5 * xi * xi - _HALF_LOG_2PI)
        if lo[i]:
            xi -= (cd[i] - p[i]) / pdf
        else:
            xi += (cd[i] - q[i]) / pdf
        if xi > delta:
            xi = delta
        x[i] = xi
    return x


def run_const_sigma_kernel(bitgen, theta, lam, delta0, steps):
    """Iterate delta' = delta - (selected step).n for ``steps`` generations.

    Returns (delta[steps+1], c1[steps], c2[steps], n_draws).
    """
    cos_t, sin_t = math.cos(theta), math.sin(theta)
    delta = np.empty(steps + 1)
    c1_out = np.empty(steps)
    c2_out = np.empty(steps)
    d = float(delta0)
    delta[0] = d
    per = 2 * lam
    done = 0
    while done < steps:
        nb = min(_BLOCK_STEPS, steps - done)
        rows = _to_uniform(bitgen.random_raw(nb * per)).reshape(nb, per)
        for i in range(nb):
            row = rows[i]
            us = row[0::2]
            zs = ndtri(row[1::2])
            cdf_d = float(ndtr(d))
            sf_d = float(ndtr(-d))
            t = _trunc_inv_row(d, us, cdf_d, sf_d)
            c1 = t * cos_t + zs * sin_t
            j = int(np.argmax(c1))
            k = done + i
            c1_out[k] = c1[j]
            c2_out[k] = t[j] * sin_t - zs[j] * cos_t
            d = d - t[j]
            if d < 0.0:
                raise AssertionError("normalized distance went negative")
            delta[k + 1] = d
        done += nb
    return delta, c1_out, c2_out, steps * per


def run_csa_kernel(bitgen, theta, lam, dim, cumulation, d_sigma, chi_n, sigma_rule,
                   delta0, log_sigma0, p_head0, p_tail0, steps, guard=700.0):
    """Iterate the (delta, path) chain with cumulative step-size adaptation.

    Words are drawn per step so an early guard stop leaves the stream exactly
    where the compiled kernel would.  Returns (delta[k+1], c1[k], c2[k],
    log_sigma[k+1], p_head, p_tail, status, k, n_draws) with k = steps
    actually executed (k < steps only if |ln sigma| crossed ``guard``).
    """
    cos_t, sin_t = math.cos(theta), math.sin(theta)
    n_tail = dim - 2
    per = 2 * lam + n_tail
    keep = 1.0 - cumulation
    mix = math.sqrt(cumulation * (2.0 - cumulation))
    two_dn = 2.0 * d_sigma * dim
    cd_rule = cumulation / d_sigma

    delta = np.empty(steps + 1)
    c1_out = np.empty(steps)
    c2_out = np.empty(steps)
    log_sigma = np.empty(steps + 1)
    d = float(delta0)
    ls = float(log_sigma0)
    p1, p2 = float(p_head0[0]), float(p_head0[1])
    tail = [float(v) for v in p_tail0]
    delta[0] = d
    log_sigma[0] = ls
    status = STATUS_OK
    k = 0
    while k < steps:
        row = _to_uniform(bitgen.random_raw(per))
        us = row[0:2 * lam:2]
        zs = ndtri(row[1:2 * lam:2])
        cdf_d = float(ndtr(d))
        sf_d = float(ndtr(-d))
        t = _trunc_inv_row(d, us, cdf_d, sf_d)
        c1 = t * cos_t + zs * sin_t
        j = int(np.argmax(c1))
        s1 = float(c1[j])
        s2 = t[j] * sin_t - zs[j] * cos_t
        c1_out[k] = s1
        c2_out[k] = s2

        p1 = keep * p1 + mix * s1
        p2 = keep * p2 + mix * s2
        pn2 = p1 * p1 + p2 * p2
        if n_tail:
            z_tail = ndtri(row[2 * lam:])
            for m in range(n_tail):
                pm = keep * tail[m] + mix * float(z_tail[m])
                tail[m] = pm
                pn2 += pm * pm

        if sigma_rule == SIGMA_RULE_NORM2:
            ls_new = ls + (pn2 - dim) / two_dn
        else:
            ls_new = ls + cd_rule * (math.sqrt(pn2) / chi_n - 1.0)
        d = (d - t[j]) * math.exp(ls - ls_new)
        ls = ls_new
        if d < 0.0:
            raise AssertionError("normalized distance went negative")
        k += 1
        delta[k] = d
        log_sigma[k] = ls
        if abs(ls) > guard:
            status = STATUS_SIGMA_GUARD
            break
    return (delta[:k + 1], c1_out[:k], c2_out[:k], log_sigma[:k + 1],
            np.array([p1, p2]), np.array(tail), status, k, k * per)
