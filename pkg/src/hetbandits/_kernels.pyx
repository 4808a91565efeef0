# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled OFUL kernels over a bank of ridge learners.

Mirrors ``hetbandits._kernels_py`` exactly in signature and semantics.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, log
from libc.stdlib cimport malloc, free

cnp.import_array()

BACKEND = "cython"


cdef int _cholesky(double* a, int d) noexcept nogil:
    # In-place lower Cholesky of a row-major d x d matrix; returns -1 if not SPD.
    cdef int i, j, k
    cdef double s
    for j in range(d):
        s = a[j * d + j]
        for k in range(j):
            s -= a[j * d + k] * a[j * d + k]
        if s <= 0.0:
            return -1
        s = sqrt(s)
        a[j * d + j] = s
        for i in range(j + 1, d):
            for k in range(j):
                a[i * d + j] -= a[i * d + k] * a[j * d + k]
            a[i * d + j] /= s
    return 0


cdef void _forward(const double* low, const double* b, double* out, int d) noexcept nogil:
    cdef int i, k
    cdef double s
    for i in range(d):
        s = b[i]
        for k in range(i):
            s -= low[i * d + k] * out[k]
        out[i] = s / low[i * d + i]


cdef void _backward(const double* low, const double* b, double* out, int d) noexcept nogil:
    # Solves L^T out = b.
    cdef int i, k
    cdef double s
    for i in range(d - 1, -1, -1):
        s = b[i]
        for k in range(i + 1, d):
            s -= low[k * d + i] * out[k]
        out[i] = s / low[i * d + i]


cdef int _scores_one(
    const double[:, ::1] v,
    const double[::1] xty,
    const double[:, ::1] contexts,
    double noise_scale,
    double log_inv_delta,
    double norm_bound,
    double lam,
    double* work,
    double[::1] out,
) noexcept nogil:
    cdef int d = v.shape[0]
    cdef int n_arms = contexts.shape[0]
    cdef double* low = work
    cdef double* tmp = work + d * d
    cdef double* theta = work + d * d + d
    cdef double* z = work + d * d + 2 * d
    cdef int i, j, a
    cdef double logdet = 0.0, radius, width, mean, inner
    for i in range(d):
        for j in range(d):
            low[i * d + j] = v[i, j]
    if _cholesky(low, d) != 0:
        return -1
    for i in range(d):
        logdet += 2.0 * log(low[i * d + i])
    _forward(low, &xty[0], tmp, d)
    _backward(low, tmp, theta, d)
    inner = 2.0 * log_inv_delta + logdet - d * log(lam)
    if inner < 0.0:
        inner = 0.0
    radius = noise_scale * sqrt(inner) + sqrt(lam) * norm_bound
    for a in range(n_arms):
        _forward(low, &contexts[a, 0], z, d)
        width = 0.0
        mean = 0.0
        for i in range(d):
            width += z[i] * z[i]
            mean += contexts[a, i] * theta[i]
        out[a] = mean + radius * sqrt(width)
    return 0


def ucb_scores(
    const double[:, :, ::1] v,
    const double[:, ::1] xty,
    const double[:, ::1] contexts,
    const double[::1] noise_scale,
    const double[::1] log_inv_delta,
    const double[::1] norm_bound,
    const double[::1] lam,
):
    """Optimistic scores ``<x, theta_hat> + radius * ||x||_{V^-1}`` per learner and arm."""
    cdef Py_ssize_t n = v.shape[0]
    cdef int d = v.shape[1]
    cdef Py_ssize_t k = contexts.shape[0]
    if contexts.shape[1] != d or xty.shape[0] != n or xty.shape[1] != d or lam.shape[0] != n:
        raise ValueError("dimension mismatch")
    out_arr = np.empty((n, k), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef double* work = <double*> malloc((d * d + 3 * d) * sizeof(double))
    cdef Py_ssize_t idx
    cdef int bad = 0
    try:
        with nogil:
            for idx in range(n):
                if _scores_one(v[idx], xty[idx], contexts, noise_scale[idx],
                               log_inv_delta[idx], norm_bound[idx], lam[idx], work, out[idx]) != 0:
                    bad = 1
                    break
    finally:
        free(work)
    if bad:
        raise np.linalg.LinAlgError("design matrix is not positive definite")
    return out_arr


def select_arms(
    const double[:, :, ::1] v,
    const double[:, ::1] xty,
    const double[:, ::1] contexts,
    const double[::1] noise_scale,
    const double[::1] log_inv_delta,
    const double[::1] norm_bound,
    const double[::1] lam,
):
    """Index of the highest optimistic score per learner; ties go to the lowest index."""
    if contexts.shape[0] == 0:
        raise ValueError("empty context batch")
    scores = ucb_scores(v, xty, contexts, noise_scale, log_inv_delta, norm_bound, lam)
    cdef double[:, ::1] s = scores
    cdef Py_ssize_t n = s.shape[0], k = s.shape[1], i, a
    arms_arr = np.empty(n, dtype=np.int64)
    cdef cnp.int64_t[::1] arms = arms_arr
    cdef double best
    cdef cnp.int64_t arg
    with nogil:
        for i in range(n):
            best = s[i, 0]
            arg = 0
            for a in range(1, k):
                if s[i, a] > best:
                    best = s[i, a]
                    arg = a
            arms[i] = arg
    return arms_arr


def rank_one_updates(
    double[:, :, ::1] v,
    double[:, ::1] xty,
    const double[:, ::1] xs,
    const double[::1] ys,
):
    """In place: ``v[i] += x_i x_i^T`` and ``xty[i] += y_i x_i`` for every learner."""
    cdef Py_ssize_t n = v.shape[0], i
    cdef int d = v.shape[1], r, c
    if xs.shape[0] != n or ys.shape[0] != n or xs.shape[1] != d:
        raise ValueError("dimension mismatch")
    with nogil:
        for i in range(n):
            for r in range(d):
                xty[i, r] += ys[i] * xs[i, r]
                for c in range(d):
                    v[i, r, c] += xs[i, r] * xs[i, c]
