# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled chain kernels.

Bit-for-bit equivalent to the pure-Python backend in ``_corepy``; that module
documents the shared word-consumption and arithmetic contract.  Keep the two
in lockstep: any change here must be mirrored there and is guarded by the
backend parity tests.
"""

import numpy as np

from cpython.pycapsule cimport PyCapsule_GetPointer, PyCapsule_IsValid
from libc.math cimport cos, exp, fabs, sin, sqrt
from numpy.random cimport bitgen_t
from scipy.special.cython_special cimport ndtr, ndtri

cdef double INV_2_53 = 1.0 / 9007199254740992.0
cdef double HALF_LOG_2PI = 0.9189385332046727418

STATUS_OK = 0
STATUS_SIGMA_GUARD = 1

SIGMA_RULE_NORM2 = 0
SIGMA_RULE_NORM = 1

cdef int _RULE_NORM2 = 0
cdef int _STATUS_GUARD = 1


cdef bitgen_t *_get_bitgen(object bit_generator) except NULL:
    capsule = bit_generator.capsule
    if not PyCapsule_IsValid(capsule, "BitGenerator"):
        raise ValueError("invalid BitGenerator capsule")
    return <bitgen_t *> PyCapsule_GetPointer(capsule, "BitGenerator")


cdef inline double _unif(bitgen_t *rng) noexcept nogil:
    return (<double> (rng.next_uint64(rng.state) >> 11) + 0.5) * INV_2_53


cdef inline double _trunc_inv(double delta, double u, double cdf_d, double sf_d) noexcept nogil:
    cdef double p = u * cdf_d
    cdef double q, x, pdf
    if p <= 0.5:
        x = ndtri(p)
        pdf = exp(-0.5 * x * x - HALF_LOG_2PI)
        x = x - (ndtr(x) - p) / pdf
    else:
        q = (1.0 - u) + u * sf_d
        x = -ndtri(q)
        pdf = exp(-0.5 * x * x - HALF_LOG_2PI)
        x = x + (ndtr(-x) - q) / pdf
    if x > delta:
        x = delta
    return x


def run_const_sigma_kernel(object bit_generator, double theta, int lam,
                           double delta0, long steps):
    """Mirror of _corepy.run_const_sigma_kernel (same returns)."""
    cdef bitgen_t *rng = _get_bitgen(bit_generator)
    cdef double cos_t = cos(theta)
    cdef double sin_t = sin(theta)
    delta_arr = np.empty(steps + 1)
    c1_arr = np.empty(steps)
    c2_arr = np.empty(steps)
    cdef double[::1] delta = delta_arr
    cdef double[::1] c1_out = c1_arr
    cdef double[::1] c2_out = c2_arr

    cdef double d = delta0, cdf_d, sf_d, u, z, t, c1, best, best_t, best_z
    cdef long k
    cdef int i, fail = 0
    delta[0] = d
    with nogil:
        for k in range(steps):
            cdf_d = ndtr(d)
            sf_d = ndtr(-d)
            best = -1e308
            best_t = 0.0
            best_z = 0.0
            for i in range(lam):
                u = _unif(rng)
                z = ndtri(_unif(rng))
                t = _trunc_inv(d, u, cdf_d, sf_d)
                c1 = t * cos_t + z * sin_t
                if c1 > best:
                    best = c1
                    best_t = t
                    best_z = z
            c1_out[k] = best
            c2_out[k] = best_t * sin_t - best_z * cos_t
            d = d - best_t
            if d < 0.0:
                fail = 1
                break
            delta[k + 1] = d
    if fail:
        raise AssertionError("normalized distance went negative")
    return delta_arr, c1_arr, c2_arr, steps * 2 * lam


def run_csa_kernel(object bit_generator, double theta, int lam, int dim,
                   double cumulation, double d_sigma, double chi_n, int sigma_rule,
                   double delta0, double log_sigma0, p_head0, p_tail0,
                   long steps, double guard=700.0):
    """Mirror of _corepy.run_csa_kernel (same returns)."""
    cdef bitgen_t *rng = _get_bitgen(bit_generator)
    cdef double cos_t = cos(theta)
    cdef double sin_t = sin(theta)
    cdef int n_tail = dim - 2
    cdef double keep = 1.0 - cumulation
    cdef double mix = sqrt(cumulation * (2.0 - cumulation))
    cdef double two_dn = 2.0 * d_sigma * dim
    cdef double cd_rule = cumulation / d_sigma

    delta_arr = np.empty(steps + 1)
    c1_arr = np.empty(steps)
    c2_arr = np.empty(steps)
    ls_arr = np.empty(steps + 1)
    # own copy: the kernel evolves the tail in place
    tail_arr = np.array(p_tail0, dtype=np.float64)
    if tail_arr.shape != (n_tail,):
        raise ValueError(f"tail path must have length dim-2={n_tail}")
    cdef double[::1] delta = delta_arr
    cdef double[::1] c1_out = c1_arr
    cdef double[::1] c2_out = c2_arr
    cdef double[::1] log_sigma = ls_arr
    cdef double[::1] tail = tail_arr

    cdef double d = delta0, ls = log_sigma0
    cdef double p1 = float(p_head0[0]), p2 = float(p_head0[1])
    cdef double cdf_d, sf_d, u, z, t, c1, best, best_t, best_z
    cdef double s1, s2, pn2, pm, ls_new
    cdef long k = 0
    cdef int i, m, status = 0, fail = 0
    delta[0] = d
    log_sigma[0] = ls
    with nogil:
        while k < steps:
            cdf_d = ndtr(d)
            sf_d = ndtr(-d)
            best = -1e308
            best_t = 0.0
            best_z = 0.0
            for i in range(lam):
                u = _unif(rng)
                z = ndtri(_unif(rng))
                t = _trunc_inv(d, u, cdf_d, sf_d)
                c1 = t * cos_t + z * sin_t
                if c1 > best:
                    best = c1
                    best_t = t
                    best_z = z
            s1 = best
            s2 = best_t * sin_t - best_z * cos_t
            c1_out[k] = s1
            c2_out[k] = s2

            p1 = keep * p1 + mix * s1
            p2 = keep * p2 + mix * s2
            pn2 = p1 * p1 + p2 * p2
            for m in range(n_tail):
                pm = keep * tail[m] + mix * ndtri(_unif(rng))
                tail[m] = pm
                pn2 += pm * pm

            if sigma_rule == _RULE_NORM2:
                ls_new = ls + (pn2 - dim) / two_dn
            else:
                ls_new = ls + cd_rule * (sqrt(pn2) / chi_n - 1.0)
            d = (d - best_t) * exp(ls - ls_new)
            ls = ls_new
            if d < 0.0:
                fail = 1
                break
            k += 1
            delta[k] = d
            log_sigma[k] = ls
            if fabs(ls) > guard:
                status = _STATUS_GUARD
                break
    if fail:
        raise AssertionError("normalized distance went negative")
    return (delta_arr[:k + 1], c1_arr[:k], c2_arr[:k], ls_arr[:k + 1],
            np.array([p1, p2]), tail_arr, status, k,
            k * (2 * lam + n_tail))
