"""No-collaboration and uniform-random reference policies."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bandit import RidgeBank
from .env import StreamKind, Streams
from .trace import RegretTrace


@dataclass
class BaselineConfig:
    horizon: int
    delta: float = 0.4
    noise_sigma: float = 1.0
    lam: float = 1.0


def independent_oful_run(config: BaselineConfig, env, t0: int = 0) -> RegretTrace:
    """One OFUL learner per agent, each fed only its own agent's rewards."""
    n, d = env.n_agents, env.dim
    agents = np.arange(n)
    trace = RegretTrace.empty(n, config.horizon, algo="linucb-ind")
    bank = RidgeBank(n, d, config.lam, config.noise_sigma, config.delta)
    for s in range(config.horizon):
        t = t0 + s
        ctx = env.contexts_at(t)
        arms = bank.select(ctx)
        bank.update(ctx[arms], env.rewards(t, agents, arms))
        trace.record(s, arms, env.regrets(t, arms), "individual")
    return trace


def random_arms(streams: Streams, n_agents: int, horizon: int, k_arms: int) -> np.ndarray:
    """Uniform arm choices, shape ``(n_agents, horizon)``, one policy stream per agent."""
    if k_arms < 1:
        raise ValueError("need at least one arm")
    return np.stack([streams.rng(StreamKind.POLICY, i).integers(0, k_arms, size=horizon)
                     for i in range(n_agents)]) if n_agents else np.zeros((0, horizon), dtype=np.int64)


def uniform_random_run(config: BaselineConfig, env, streams: Streams, t0: int = 0) -> RegretTrace:
    n = env.n_agents
    trace = RegretTrace.empty(n, config.horizon, algo="random")
    choices = random_arms(streams, n, config.horizon, env.n_arms)
    for s in range(config.horizon):
        arms = choices[:, s]
        trace.record(s, arms, env.regrets(t0 + s, arms), "random")
    return trace
