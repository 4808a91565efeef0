"""Pure numpy implementation of the OFUL bank kernels.

Used when the compiled ``hetbandits._kernels`` extension is unavailable or
when ``HETBANDITS_PURE_PYTHON`` is set. Signatures match the Cython module.
"""
from __future__ import annotations

import numpy as np

BACKEND = "numpy"


def ucb_scores(v, xty, contexts, noise_scale, log_inv_delta, norm_bound, lam):
    """Optimistic scores ``<x, theta_hat> + radius * ||x||_{V^-1}`` per learner and arm."""
    v = np.asarray(v, dtype=float)
    xty = np.asarray(xty, dtype=float)
    contexts = np.asarray(contexts, dtype=float)
    n, d, _ = v.shape
    if contexts.shape[1] != d or xty.shape != (n, d) or np.shape(lam) != (n,):
        raise ValueError("dimension mismatch")
    low = np.linalg.cholesky(v)
    logdet = 2.0 * np.log(np.diagonal(low, axis1=1, axis2=2)).sum(axis=1)
    theta = np.linalg.solve(v, xty[:, :, None])[:, :, 0]
    rhs = np.broadcast_to(contexts.T, (n, d, contexts.shape[0]))
    z = np.linalg.solve(low, rhs)
    width = np.sqrt(np.einsum("ndk,ndk->nk", z, z))
    lam = np.asarray(lam, dtype=float)
    inner = np.maximum(2.0 * np.asarray(log_inv_delta) + logdet - d * np.log(lam), 0.0)
    radius = np.asarray(noise_scale) * np.sqrt(inner) + np.sqrt(lam) * np.asarray(norm_bound)
    return theta @ contexts.T + radius[:, None] * width


def select_arms(v, xty, contexts, noise_scale, log_inv_delta, norm_bound, lam):
    """Index of the highest optimistic score per learner; ties go to the lowest index."""
    if len(contexts) == 0:
        raise ValueError("empty context batch")
    scores = ucb_scores(v, xty, contexts, noise_scale, log_inv_delta, norm_bound, lam)
    return np.argmax(scores, axis=1).astype(np.int64)


def rank_one_updates(v, xty, xs, ys):
    """In place: ``v[i] += x_i x_i^T`` and ``xty[i] += y_i x_i`` for every learner."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.shape != xty.shape or ys.shape[0] != v.shape[0]:
        raise ValueError("dimension mismatch")
    v += xs[:, :, None] * xs[:, None, :]
    xty += ys[:, None] * xs
