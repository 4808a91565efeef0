"""Threshold-graph clustering of agents and the clustered multi-agent learners.

``cmlb_run`` explores with one OFUL learner per agent, clusters the
resulting estimates, then runs one OFUL learner per cluster on rewards
averaged over the cluster's members. ``sclb_run`` restarts it over dyadic
phases with shrinking threshold, confidence level and size parameter.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial.distance import pdist, squareform

from .bandit import RidgeBank
from .trace import RegretTrace


@dataclass(frozen=True)
class Partition:
    blocks: tuple[tuple[int, ...], ...]
    collapsed_block: int | None = None

    @property
    def n_agents(self) -> int:
        return sum(len(b) for b in self.blocks)

    def labels(self) -> np.ndarray:
        out = np.empty(self.n_agents, dtype=np.int64)
        for j, block in enumerate(self.blocks):
            out[list(block)] = j
        return out

    def as_sets(self) -> set[frozenset[int]]:
        return {frozenset(b) for b in self.blocks}

    def matches(self, blocks) -> bool:
        return self.as_sets() == {frozenset(b) for b in blocks}


def threshold_components(estimates: np.ndarray, gamma: float) -> list[tuple[int, ...]]:
    """Connected components of the graph joining agents whose estimates are within ``gamma``."""
    est = np.asarray(estimates, dtype=float)
    if est.ndim == 1:
        est = est[:, None]
    n = est.shape[0]
    if n == 1:
        return [(0,)]
    adj = squareform(pdist(est)) <= gamma
    _, labels = connected_components(csr_matrix(adj), directed=False)
    comps: dict[int, list[int]] = {}
    for i, lab in enumerate(labels):
        comps.setdefault(int(lab), []).append(i)
    return sorted((tuple(c) for c in comps.values()), key=lambda c: c[0])


def maximal_cluster(estimates, gamma: float, p_star: float) -> Partition:
    """Cluster agents by threshold-graph components; components smaller than ``p_star * N`` merge."""
    if len(estimates) == 0:
        raise ValueError("no estimates to cluster")
    if gamma < 0 or not 0 <= p_star <= 1:
        raise ValueError("need gamma >= 0 and 0 <= p_star <= 1")
    comps = threshold_components(estimates, gamma)
    cutoff = p_star * len(estimates)
    big = [c for c in comps if len(c) >= cutoff]
    small = [c for c in comps if len(c) < cutoff]
    if not small:
        return Partition(tuple(big))
    collapsed = tuple(sorted(i for c in small for i in c))
    return Partition(tuple(big) + (collapsed,), collapsed_block=len(big))


@dataclass
class CmlbConfig:
    horizon: int
    alpha: float = 0.2
    c_explore: float = 0.2
    delta: float = 0.4
    gamma: float | None = None
    p_star: float = 0.0
    noise_sigma: float = 1.0
    lam: float = 1.0
    # ridge of an m-member averaged learner is lam / m (same arms as pooling every member's data)
    pool_ridge: bool = True

    def validate(self) -> None:
        # alpha = 1/2 is allowed for the offline defaults; exploration then fills the horizon
        if not 0 < self.alpha <= 0.5:
            raise ValueError("alpha must lie in (0, 1/2]")
        if self.c_explore <= 0:
            raise ValueError("c_explore must be > 0")
        if not 0 < self.delta < 1:
            raise ValueError("delta must lie in (0, 1)")
        if self.gamma is not None and self.gamma < 0:
            raise ValueError("gamma must be >= 0")
        if not 0 <= self.p_star <= 1:
            raise ValueError("p_star must lie in [0, 1]")
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")

    def resolved_gamma(self, n_agents: int) -> float:
        if self.gamma is not None:
            return self.gamma
        return 3.0 / (n_agents * self.horizon) ** self.alpha


@dataclass
class SclbConfig:
    horizon: int
    alpha: float = 0.2
    c_explore: float = 0.2
    delta: float = 0.4
    noise_sigma: float = 1.0
    lam: float = 1.0
    pool_ridge: bool = True

    def validate(self) -> None:
        CmlbConfig(self.horizon, self.alpha, self.c_explore, self.delta).validate()


def cmlb_explore_len(config: CmlbConfig, n_agents: int, dim: int) -> int:
    raw = config.c_explore * dim * (n_agents * config.horizon) ** (2 * config.alpha) * math.log(1 / config.delta)
    return min(math.ceil(raw), config.horizon)


def cmlb_run(config: CmlbConfig, env, t0: int = 0, label: str = "") -> tuple[RegretTrace, Partition]:
    """Run the explore / cluster / collaborate learner on rounds ``t0 .. t0 + horizon - 1``."""
    config.validate()
    n, d, horizon = env.n_agents, env.dim, config.horizon
    if t0 + horizon > env.horizon:
        raise ValueError("run exceeds the environment horizon")
    agents = np.arange(n)
    trace = RegretTrace.empty(n, horizon)
    n_explore = cmlb_explore_len(config, n, d)

    solo = RidgeBank(n, d, config.lam, config.noise_sigma, config.delta)
    for s in range(n_explore):
        t = t0 + s
        ctx = env.contexts_at(t)
        arms = solo.select(ctx)
        solo.update(ctx[arms], env.rewards(t, agents, arms))
        trace.record(s, arms, env.regrets(t, arms), label + "explore")

    partition = maximal_cluster(solo.estimates(), config.resolved_gamma(n), config.p_star)
    block_of = partition.labels()
    sizes = np.array([len(b) for b in partition.blocks], dtype=float)
    lam = config.lam / sizes if config.pool_ridge else config.lam
    shared = RidgeBank(len(sizes), d, lam, config.noise_sigma / np.sqrt(sizes), config.delta)
    for s in range(n_explore, horizon):
        t = t0 + s
        ctx = env.contexts_at(t)
        block_arms = shared.select(ctx)
        arms = block_arms[block_of]
        ys = env.rewards(t, agents, arms)
        shared.update(ctx[block_arms], np.bincount(block_of, ys, minlength=len(sizes)) / sizes)
        trace.record(s, arms, env.regrets(t, arms), label + "collab")

    trace.algo = "cmlb"
    trace.meta.update(t_explore=n_explore, gamma=config.resolved_gamma(n),
                      partition=[list(b) for b in partition.blocks])
    return trace, partition


@dataclass(frozen=True)
class SclbPhase:
    index: int
    start: int
    length: int
    gamma: float
    delta: float
    p_star: float


def sclb_schedule(config: SclbConfig, n_agents: int) -> list[SclbPhase]:
    """Phase ``i`` covers ``2**i`` rounds (the last one truncated at the horizon)."""
    phases, start, i = [], 0, 1
    while start < config.horizon:
        length = min(2**i, config.horizon - start)
        phases.append(SclbPhase(i, start, length, 3.0 / (n_agents * 2**i) ** config.alpha,
                                config.delta / 2**i, 1.0 / i**2))
        start += length
        i += 1
    return phases


def sclb_run(config: SclbConfig, env) -> RegretTrace:
    config.validate()
    n = env.n_agents
    trace = RegretTrace.empty(n, config.horizon, algo="sclb")
    ledger = []
    for ph in sclb_schedule(config, n):
        sub = CmlbConfig(ph.length, config.alpha, config.c_explore, ph.delta, ph.gamma,
                         ph.p_star, config.noise_sigma, config.lam, config.pool_ridge)
        part_trace, partition = cmlb_run(sub, env, t0=ph.start, label=f"p{ph.index}-")
        trace.splice(part_trace, ph.start)
        ledger.append({"phase": ph.index, "start": ph.start, "length": ph.length,
                       "gamma": ph.gamma, "delta": ph.delta, "p_star": ph.p_star,
                       "t_explore": part_trace.meta["t_explore"], "n_blocks": len(partition.blocks)})
    trace.meta["phases"] = ledger
    return trace


def cluster_gaps(centers: np.ndarray) -> np.ndarray:
    """Distance from each cluster center to its nearest other center (inf for a single cluster)."""
    centers = np.asarray(centers, dtype=float)
    if len(centers) == 1:
        return np.array([np.inf])
    dist = squareform(pdist(centers))
    np.fill_diagonal(dist, np.inf)
    return dist.min(axis=1)


def separability(deltas, n: int, t: int, alpha: float) -> list[bool]:
    threshold = 5.0 / (n * t) ** alpha
    return [bool(g >= threshold) for g in np.asarray(deltas, dtype=float)]

