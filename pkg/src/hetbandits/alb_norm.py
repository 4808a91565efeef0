"""Adaptive-norm linear bandit: doubling epochs of norm-bounded OFUL.

Epoch ``i`` runs a fresh OFUL learner whose radius uses the current norm
estimate ``b_i`` and confidence ``delta_i``. At the epoch boundary the
estimate is refined to an upper bound on the largest norm inside the
confidence ellipsoid, the epoch length doubles and ``delta`` halves.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import bandit, linalg
from .bandit import RidgeBank, RidgeState


def first_epoch_len(horizon: int) -> int:
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    return math.isqrt(horizon - 1) + 1


def epoch_schedule(horizon: int, delta1: float) -> list[tuple[int, int, float]]:
    """``(start, length, delta_i)`` for each epoch; the last one is truncated at the horizon."""
    out = []
    start, length, delta = 0, first_epoch_len(horizon), delta1
    while start < horizon:
        out.append((start, min(length, horizon - start), delta))
        start += length
        length *= 2
        delta /= 2.0
    return out


def ellipsoid_norm_bound(theta_hat: np.ndarray, radius: float, min_eig: float) -> float:
    """Upper bound on ``max ||theta||`` over ``{theta : ||theta - theta_hat||_V <= radius}``."""
    return float(np.linalg.norm(theta_hat) + radius / math.sqrt(min_eig))


@dataclass(frozen=True)
class AlbState:
    epoch: int
    b: float
    epoch_len: int
    delta_i: float
    inner: RidgeState
    steps: int = 0

    @property
    def epoch_done(self) -> bool:
        return self.steps >= self.epoch_len


def alb_init(horizon: int, delta1: float, dim: int, lam: float = 1.0,
             noise_scale: float = 1.0) -> AlbState:
    if not 0 < delta1 < 1:
        raise ValueError("delta1 must lie in (0, 1)")
    inner = RidgeState.fresh(dim, lam, noise_scale, delta1, norm_bound=1.0)
    return AlbState(1, 1.0, first_epoch_len(horizon), delta1, inner)


def alb_step(state: AlbState, batch) -> tuple[int, AlbState]:
    return bandit.select_arm(state.inner, batch), state


def alb_observe(state: AlbState, context, reward: float) -> AlbState:
    return replace(state, inner=bandit.update(state.inner, context, reward), steps=state.steps + 1)


def alb_epoch_boundary(state: AlbState) -> AlbState:
    inner = state.inner
    b_next = ellipsoid_norm_bound(bandit.estimate(inner), bandit.confidence_radius(inner),
                                  linalg.min_eigenvalue(inner.v))
    delta_next = state.delta_i / 2.0
    fresh = RidgeState.fresh(inner.dim, inner.lam, inner.noise_scale, delta_next, norm_bound=b_next)
    return AlbState(state.epoch + 1, b_next, 2 * state.epoch_len, delta_next, fresh)


class AlbBank:
    """``n`` ALB-Norm instances sharing one epoch schedule."""

    def __init__(self, n: int, dim: int, horizon: int, delta1: float, lam: float = 1.0,
                 noise_scale=1.0, reset_each_epoch: bool = True):
        if not 0 < delta1 < 1:
            raise ValueError("delta1 must lie in (0, 1)")
        self.horizon = horizon
        self.epoch = 1
        self.epoch_len = first_epoch_len(horizon)
        self.delta_i = delta1
        self.steps = 0
        self.reset_each_epoch = reset_each_epoch
        self.inner = RidgeBank(n, dim, lam, noise_scale, delta1, norm_bound=1.0)
        self.b_history = [np.ones(n)]

    @property
    def b(self) -> np.ndarray:
        return self.inner.norm_bound

    def select(self, contexts, offsets=None) -> np.ndarray:
        return self.inner.select(contexts, offsets)

    def observe(self, xs, ys) -> None:
        self.inner.update(xs, ys)
        self.steps += 1
        if self.steps >= self.epoch_len:
            self._boundary()

    def _boundary(self) -> None:
        inner = self.inner
        theta_hat = inner.estimates()
        min_eig = np.linalg.eigvalsh(inner.v)[:, 0]
        b_next = np.linalg.norm(theta_hat, axis=1) + inner.radii() / np.sqrt(min_eig)
        self.epoch += 1
        self.epoch_len *= 2
        self.delta_i /= 2.0
        self.steps = 0
        if self.reset_each_epoch:
            inner.reset()
        inner.delta[:] = self.delta_i
        inner.norm_bound[:] = b_next
        self.b_history.append(b_next.copy())
