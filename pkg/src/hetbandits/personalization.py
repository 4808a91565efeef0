"""Personalized multi-agent learner: common model first, per-agent residuals after.

For ``ceil(sqrt(T))`` rounds one shared OFUL learner picks a single arm for
everybody and learns from the population-averaged reward. Its estimate is
then frozen and every agent runs its own ALB-Norm instance on rewards with
the frozen estimate's prediction subtracted. By default the per-agent
learners keep their statistics across ALB-Norm epochs; only the norm
bound and confidence level change at a boundary.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .alb_norm import AlbBank
from .bandit import RidgeBank
from .trace import RegretTrace


@dataclass
class PmlbConfig:
    horizon: int
    delta: float = 0.4
    noise_sigma: float = 1.0
    lam: float = 1.0
    pool_ridge: bool = True
    # add <x, theta_common> back into each agent's arm scores
    offset_play: bool = True
    # True restarts each agent's ridge statistics at every ALB-Norm epoch
    alb_reset: bool = False

    def validate(self) -> None:
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")
        if not 0 < self.delta < 1:
            raise ValueError("delta must lie in (0, 1)")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be >= 0")


@dataclass(frozen=True)
class CommonEstimate:
    theta_hat: np.ndarray
    rounds_used: int


def common_phase_len(t: int) -> int:
    if t < 1:
        raise ValueError("horizon must be >= 1")
    return min(math.isqrt(t - 1) + 1, t)


def common_rep_factor(thetas) -> np.ndarray:
    """Distance of every agent's parameter from the population mean."""
    thetas = np.asarray(thetas, dtype=float)
    return np.linalg.norm(thetas - thetas.mean(axis=0), axis=1)


def pmlb_run(config: PmlbConfig, env, t0: int = 0) -> RegretTrace:
    config.validate()
    n, d, horizon = env.n_agents, env.dim, config.horizon
    agents = np.arange(n)
    trace = RegretTrace.empty(n, horizon, algo="pmlb")
    n_common = common_phase_len(horizon)

    common_lam = config.lam / n if config.pool_ridge else config.lam
    common = RidgeBank(1, d, common_lam, config.noise_sigma / math.sqrt(n), config.delta)
    for s in range(n_common):
        t = t0 + s
        ctx = env.contexts_at(t)
        arm = common.select(ctx)
        arms = np.full(n, arm[0])
        ys = env.rewards(t, agents, arms)
        common.update(ctx[arm], np.array([ys.mean()]))
        trace.record(s, arms, env.regrets(t, arms), "common")
    shift = CommonEstimate(common.estimates()[0].copy(), n_common)

    rest = horizon - n_common
    if rest > 0:
        alb = AlbBank(n, d, rest, config.delta, config.lam, config.noise_sigma,
                      reset_each_epoch=config.alb_reset)
        for s in range(n_common, horizon):
            t = t0 + s
            ctx = env.contexts_at(t)
            predicted = ctx @ shift.theta_hat
            offsets = np.broadcast_to(predicted, (n, len(ctx))) if config.offset_play else None
            arms = alb.select(ctx, offsets)
            ys = env.rewards(t, agents, arms)
            alb.observe(ctx[arms], ys - predicted[arms])
            trace.record(s, arms, env.regrets(t, arms), "personal")
        trace.meta["b_history"] = [b.tolist() for b in alb.b_history]
    trace.meta.update(common_rounds=n_common, theta_common=shift.theta_hat.tolist())
    return trace
