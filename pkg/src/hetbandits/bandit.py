"""OFUL learners on ridge-regression sufficient statistics.

``RidgeState`` is the single-learner value type used by the public API;
``RidgeBank`` stacks many learners so a whole population can select and
update in one kernel call per round. Both share the same kernels, so a bank
of one behaves exactly like a ``RidgeState``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from . import kernels, linalg
from .env import ContextBatch, _contexts_of


@dataclass(frozen=True)
class RidgeState:
    dim: int
    lam: float
    v: np.ndarray
    xty: np.ndarray
    t: int = 0
    noise_scale: float = 1.0
    delta: float = 0.1
    norm_bound: float = 1.0

    @classmethod
    def fresh(cls, dim: int, lam: float = 1.0, noise_scale: float = 1.0,
              delta: float = 0.1, norm_bound: float = 1.0) -> "RidgeState":
        if lam <= 0:
            raise ValueError("lam must be > 0")
        if not 0 < delta < 1:
            raise ValueError("delta must lie in (0, 1)")
        return cls(dim, float(lam), lam * np.eye(dim), np.zeros(dim), 0,
                   float(noise_scale), float(delta), float(norm_bound))


def confidence_radius(state: RidgeState) -> float:
    """Self-normalized ellipsoid radius plus the ridge-bias term ``sqrt(lam) * S``."""
    inner = (2.0 * math.log(1.0 / state.delta) + linalg.log_det(state.v)
             - state.dim * math.log(state.lam))
    return state.noise_scale * math.sqrt(max(inner, 0.0)) + math.sqrt(state.lam) * state.norm_bound


def estimate(state: RidgeState) -> np.ndarray:
    return linalg.solve(state.v, state.xty)


def _as_bank_args(state: RidgeState):
    return (state.v[None], state.xty[None], np.array([state.noise_scale]),
            np.array([math.log(1.0 / state.delta)]), np.array([state.norm_bound]),
            np.array([state.lam]))


def ucb_scores(state: RidgeState, batch) -> np.ndarray:
    contexts = np.ascontiguousarray(_contexts_of(batch))
    if contexts.ndim != 2 or contexts.shape[1] != state.dim:
        raise ValueError(f"context dim mismatch: expected {state.dim}, got {contexts.shape}")
    v, xty, ns, lid, nb, lam = _as_bank_args(state)
    return kernels.ucb_scores(v, xty, contexts, ns, lid, nb, lam)[0]


def select_arm(state: RidgeState, batch) -> int:
    contexts = np.ascontiguousarray(_contexts_of(batch))
    if contexts.shape[0] == 0:
        raise ValueError("empty context batch")
    return int(np.argmax(ucb_scores(state, contexts)))


def update(state: RidgeState, context, reward: float) -> RidgeState:
    if not math.isfinite(reward):
        raise ValueError(f"non-finite reward {reward!r}")
    x = np.asarray(context, dtype=float)
    return replace(state, v=linalg.rank_one_update(state.v, x),
                   xty=state.xty + reward * x, t=state.t + 1)


# -- batched learners --------------------------------------------------------

class RidgeBank:
    """``n`` independent OFUL learners stored as stacked arrays.

    ``lam``, ``noise_scale``, ``delta`` and ``norm_bound`` are scalars or
    per-learner arrays.
    """

    def __init__(self, n: int, dim: int, lam=1.0, noise_scale=1.0,
                 delta=0.1, norm_bound=1.0):
        self.n = n
        self.dim = dim
        self.lam = np.broadcast_to(np.asarray(lam, dtype=float), (n,)).copy()
        if np.any(self.lam <= 0):
            raise ValueError("lam must be > 0")
        self.v = self.lam[:, None, None] * np.eye(dim)
        self.xty = np.zeros((n, dim))
        self.t = np.zeros(n, dtype=np.int64)
        self.noise_scale = np.broadcast_to(np.asarray(noise_scale, dtype=float), (n,)).copy()
        self.norm_bound = np.broadcast_to(np.asarray(norm_bound, dtype=float), (n,)).copy()
        self.delta = np.broadcast_to(np.asarray(delta, dtype=float), (n,)).copy()
        if np.any((self.delta <= 0) | (self.delta >= 1)):
            raise ValueError("delta must lie in (0, 1)")

    def _args(self, contexts):
        contexts = np.ascontiguousarray(contexts, dtype=float)
        return (self.v, self.xty, contexts, self.noise_scale,
                np.log(1.0 / self.delta), self.norm_bound, self.lam)

    def scores(self, contexts) -> np.ndarray:
        return kernels.ucb_scores(*self._args(contexts))

    def select(self, contexts, offsets=None) -> np.ndarray:
        """Optimistic arm per learner; ``offsets`` (shape ``(n, K)``) are added to the scores first."""
        if offsets is None:
            return kernels.select_arms(*self._args(contexts))
        return np.argmax(self.scores(contexts) + offsets, axis=1)

    def update(self, xs: np.ndarray, ys: np.ndarray) -> None:
        ys = np.asarray(ys, dtype=float)
        if not np.all(np.isfinite(ys)):
            raise ValueError("non-finite reward")
        kernels.rank_one_updates(self.v, self.xty, np.ascontiguousarray(xs, dtype=float), ys)
        self.t += 1

    def estimates(self) -> np.ndarray:
        return np.linalg.solve(self.v, self.xty[:, :, None])[:, :, 0]

    def radii(self) -> np.ndarray:
        _, logdet = np.linalg.slogdet(self.v)
        inner = np.maximum(2.0 * np.log(1.0 / self.delta) + logdet - self.dim * np.log(self.lam), 0.0)
        return self.noise_scale * np.sqrt(inner) + np.sqrt(self.lam) * self.norm_bound

    def reset(self, idx=None) -> None:
        idx = slice(None) if idx is None else idx
        self.v[idx] = self.lam[idx, None, None] * np.eye(self.dim)
        self.xty[idx] = 0.0
        self.t[idx] = 0

    def state(self, i: int) -> RidgeState:
        return RidgeState(self.dim, float(self.lam[i]), self.v[i].copy(), self.xty[i].copy(), int(self.t[i]),
                          float(self.noise_scale[i]), float(self.delta[i]), float(self.norm_bound[i]))


# -- reward shifting -----------------------------------------------------------

def shifted_reward(y: float, context, shift) -> float:
    """Reward with the shift's prediction removed: ``y - <context, shift>``."""
    return float(y - np.dot(np.asarray(context, dtype=float), np.asarray(shift, dtype=float)))


def shifted_regret_decomposition(theta, gamma, batches: Sequence, actions: Sequence[int]):
    """Return ``(r_true, r_shifted, cross_term)`` for a played action sequence.

    ``r_shifted`` is the regret of the same actions against ``theta - gamma``
    and ``cross_term = sum_t <beta*_t - X_t, gamma>`` with ``beta*_t`` the
    ``theta``-optimal context, so that ``r_true <= r_shifted + cross_term``.
    """
    if len(batches) != len(actions):
        raise ValueError("batches and actions must have equal length")
    theta = np.asarray(theta, dtype=float)
    gamma = np.asarray(gamma, dtype=float)
    r_true = r_shifted = cross = 0.0
    for batch, a in zip(batches, actions):
        ctx = _contexts_of(batch)
        if not 0 <= a < ctx.shape[0]:
            raise IndexError(f"arm {a} out of range for K={ctx.shape[0]}")
        played = ctx[a]
        best = ctx[int(np.argmax(ctx @ theta))]
        r_true += float(np.max((ctx - played) @ theta))
        r_shifted += float(np.max((ctx - played) @ (theta - gamma)))
        cross += float((best - played) @ gamma)
    return r_true, r_shifted, cross


def argmax_invariant(theta, gamma, batch) -> bool:
    ctx = _contexts_of(batch)
    return int(np.argmax(ctx @ np.asarray(theta, float))) == int(np.argmax(ctx @ np.asarray(gamma, float)))


def gap_hypothesis(theta, gamma, batch) -> bool:
    """Whether contexts have norm <= 2 and every pairwise gap is >= 4 ||theta - gamma||."""
    ctx = _contexts_of(batch)
    theta = np.asarray(theta, float)
    if np.any(np.linalg.norm(ctx, axis=1) > 2.0):
        return False
    means = ctx @ theta
    gaps = np.abs(means[:, None] - means[None, :])
    off = ~np.eye(len(means), dtype=bool)
    return bool(np.all(gaps[off] >= 4.0 * np.linalg.norm(theta - np.asarray(gamma, float))))


__all__ = [
    "ContextBatch", "RidgeState", "RidgeBank", "confidence_radius", "estimate", "ucb_scores",
    "select_arm", "update", "shifted_reward", "shifted_regret_decomposition",
    "argmax_invariant", "gap_hypothesis",
]
