"""Dense symmetric positive-definite helpers used by every learner.

All functions take and return plain numpy arrays and never mutate their
inputs.
"""
from __future__ import annotations

import numpy as np
from scipy import linalg as sla


class NotPositiveDefinite(np.linalg.LinAlgError):
    """Raised when a Cholesky factorization of a supposedly SPD matrix fails."""


def _cholesky(m: np.ndarray) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    try:
        return sla.cholesky(m, lower=True, check_finite=True)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NotPositiveDefinite(str(exc)) from exc


def is_symmetric(m: np.ndarray, rtol: float = 1e-9) -> bool:
    m = np.asarray(m, dtype=float)
    scale = max(1.0, float(np.max(np.abs(m)))) if m.size else 1.0
    return bool(np.all(np.abs(m - m.T) <= rtol * scale))


def solve(m: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve ``m x = b`` for SPD ``m`` through a fresh Cholesky factorization."""
    b = np.asarray(b, dtype=float)
    factor = _cholesky(m)
    if b.shape[0] != factor.shape[0]:
        raise ValueError(f"dimension mismatch: matrix {factor.shape}, rhs {b.shape}")
    return sla.cho_solve((factor, True), b)


def rank_one_update(m: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Return ``m + x x^T``."""
    m = np.asarray(m, dtype=float)
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.shape[0] != m.shape[0]:
        raise ValueError(f"dimension mismatch: matrix {m.shape}, vector {x.shape}")
    return m + np.outer(x, x)


def log_det(m: np.ndarray) -> float:
    factor = _cholesky(m)
    return float(2.0 * np.sum(np.log(np.diag(factor))))


def min_eigenvalue(m: np.ndarray) -> float:
    m = np.asarray(m, dtype=float)
    return float(sla.eigvalsh(m, subset_by_index=[0, 0])[0])


def ridge_matrix(dim: int, lam: float, xs: np.ndarray | None = None) -> np.ndarray:
    """Build ``lam * I + sum_i x_i x_i^T`` for the rows of ``xs``."""
    v = lam * np.eye(dim)
    if xs is not None and len(xs):
        xs = np.asarray(xs, dtype=float)
        v = v + xs.T @ xs
    return v
