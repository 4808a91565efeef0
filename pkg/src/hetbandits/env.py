"""Ground-truth populations, context batches, noisy rewards and regret.

Randomness is organised as named streams derived from a master seed with
``numpy.random.SeedSequence`` spawn keys ``(rep, kind, agent)``. Every
agent owns its own noise stream and consumes exactly one draw per round,
so adding agents or repetitions never perturbs existing streams, and every
algorithm run under the same ``(master_seed, rep)`` sees identical contexts
and noise round for round.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np


class InvalidSpec(ValueError):
    pass


class PopulationKind(str, enum.Enum):
    CLUSTERED = "clustered"
    PERSONALIZED = "personalized"
    EXPLICIT = "explicit"


class ContextMode(str, enum.Enum):
    UNIT_BALL = "unit-ball"
    CUBE = "cube"


@dataclass(frozen=True)
class PopulationSpec:
    """How the ``n_agents`` preference vectors are generated.

    ``center_mode`` only applies to clustered populations: ``"sphere"`` draws
    each center uniformly on the unit sphere, ``"orthogonal"`` draws a random
    orthonormal set (requires ``n_clusters <= dim``).
    """

    kind: PopulationKind
    n_agents: int
    dim: int
    n_clusters: int = 1
    zipf_z: float = 0.0
    sigma: float = 0.0
    vectors: tuple = ()
    center_mode: str = "sphere"

    @classmethod
    def clustered(cls, n_agents, dim, n_clusters, zipf_z=0.0, center_mode="sphere"):
        return cls(PopulationKind.CLUSTERED, n_agents, dim, n_clusters=n_clusters,
                   zipf_z=zipf_z, center_mode=center_mode)

    @classmethod
    def personalized(cls, n_agents, dim, sigma):
        return cls(PopulationKind.PERSONALIZED, n_agents, dim, sigma=sigma)

    @classmethod
    def explicit(cls, vectors):
        vecs = tuple(tuple(float(x) for x in v) for v in vectors)
        if not vecs:
            raise InvalidSpec("explicit population needs at least one vector")
        return cls(PopulationKind.EXPLICIT, len(vecs), len(vecs[0]), vectors=vecs)

    def validate(self) -> None:
        if self.n_agents < 1 or self.dim < 1:
            raise InvalidSpec("n_agents and dim must be positive")
        if self.kind is PopulationKind.CLUSTERED:
            if not 1 <= self.n_clusters <= self.n_agents:
                raise InvalidSpec(f"need 1 <= L <= N, got L={self.n_clusters}, N={self.n_agents}")
            if self.zipf_z < 0:
                raise InvalidSpec("zipf_z must be >= 0")
            if self.center_mode not in ("sphere", "orthogonal"):
                raise InvalidSpec(f"unknown center_mode {self.center_mode!r}")
            if self.center_mode == "orthogonal" and self.n_clusters > self.dim:
                raise InvalidSpec("orthogonal centers need n_clusters <= dim")
        elif self.kind is PopulationKind.PERSONALIZED:
            if self.sigma < 0:
                raise InvalidSpec("sigma must be >= 0")
        else:
            if not self.vectors:
                raise InvalidSpec("explicit population needs at least one vector")
            if any(len(v) != self.dim for v in self.vectors):
                raise InvalidSpec("explicit vectors have inconsistent dimensions")
            if any(np.linalg.norm(v) > 1 + 1e-12 for v in self.vectors):
                raise InvalidSpec("explicit vectors must have norm <= 1")


@dataclass
class Population:
    thetas: np.ndarray
    labels: np.ndarray | None = None
    centers: np.ndarray | None = None

    @property
    def n_agents(self) -> int:
        return self.thetas.shape[0]

    @property
    def dim(self) -> int:
        return self.thetas.shape[1]

    def true_blocks(self) -> list[tuple[int, ...]]:
        """Ground-truth partition of agent indices, ordered by smallest member."""
        if self.labels is None:
            raise ValueError("population has no cluster labels")
        groups: dict[int, list[int]] = {}
        for i, lab in enumerate(self.labels):
            groups.setdefault(int(lab), []).append(i)
        return sorted((tuple(g) for g in groups.values()), key=lambda b: b[0])


def zipf_cluster_sizes(n_clusters: int, zipf_z: float, n_agents: int) -> list[int]:
    """Cluster sizes proportional to ``c**-z`` by largest-remainder rounding.

    Any cluster rounded to zero takes one agent from the highest-index
    cluster among the largest ones, so every cluster is non-empty and sizes
    stay non-increasing.
    """
    if not 1 <= n_clusters <= n_agents:
        raise InvalidSpec(f"need 1 <= L <= N, got L={n_clusters}, N={n_agents}")
    weights = np.arange(1, n_clusters + 1, dtype=float) ** (-zipf_z)
    quotas = n_agents * weights / weights.sum()
    sizes = np.floor(quotas).astype(int)
    short = n_agents - int(sizes.sum())
    # stable sort keeps lower cluster index first among equal remainders
    order = np.argsort(-(quotas - sizes), kind="stable")
    sizes[order[:short]] += 1
    for c in range(n_clusters):
        if sizes[c] == 0:
            sizes[int(np.flatnonzero(sizes == sizes.max())[-1])] -= 1
            sizes[c] = 1
    return [int(s) for s in sizes]


def _project_unit_ball(x: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(x, axis=-1, keepdims=True)
    return np.where(norms > 1.0, x / np.maximum(norms, 1e-300), x)


def build_population(spec: PopulationSpec, seed) -> Population:
    spec.validate()
    rng = np.random.default_rng(seed)
    n, d = spec.n_agents, spec.dim
    if spec.kind is PopulationKind.CLUSTERED:
        sizes = zipf_cluster_sizes(spec.n_clusters, spec.zipf_z, n)
        if spec.center_mode == "orthogonal":
            q, r = np.linalg.qr(rng.standard_normal((d, spec.n_clusters)))
            centers = (q * np.sign(np.diag(r))).T
        else:
            g = rng.standard_normal((spec.n_clusters, d))
            centers = g / np.linalg.norm(g, axis=1, keepdims=True)
        labels = np.repeat(np.arange(spec.n_clusters), sizes)
        return Population(centers[labels].copy(), labels, centers)
    if spec.kind is PopulationKind.PERSONALIZED:
        mu = rng.standard_normal(d)
        mu /= np.linalg.norm(mu)
        thetas = mu + spec.sigma * rng.standard_normal((n, d))
        return Population(_project_unit_ball(thetas), None, mu[None, :])
    thetas = np.array(spec.vectors, dtype=float)
    _, labels = np.unique(thetas, axis=0, return_inverse=True)
    return Population(thetas, np.asarray(labels).ravel(), None)


class ContextBatch(NamedTuple):
    round: int
    contexts: np.ndarray


def _draw_contexts(mode: ContextMode, shape: tuple, dim: int, rng: np.random.Generator) -> np.ndarray:
    mode = ContextMode(mode)
    if mode is ContextMode.CUBE:
        half = 1.0 / math.sqrt(dim)
        return rng.uniform(-half, half, size=shape + (dim,))
    g = rng.standard_normal(shape + (dim,))
    g /= np.linalg.norm(g, axis=-1, keepdims=True)
    radius = rng.random(shape + (1,)) ** (1.0 / dim)
    return g * radius


def sample_contexts(mode: ContextMode, k: int, dim: int, rng: np.random.Generator,
                    round: int = 1) -> ContextBatch:
    if k < 1 or dim < 1:
        raise ValueError("k and dim must be >= 1")
    return ContextBatch(round, _draw_contexts(mode, (k,), dim, rng))


def sample_context_block(mode: ContextMode, horizon: int, k: int, dim: int,
                         rng: np.random.Generator) -> np.ndarray:
    """All contexts of a run at once, shape ``(horizon, k, dim)``."""
    return _draw_contexts(mode, (horizon, k), dim, rng)


def reward(theta, context, noise_sigma: float, rng: np.random.Generator) -> float:
    theta = np.asarray(theta, dtype=float)
    context = np.asarray(context, dtype=float)
    if theta.shape != context.shape:
        raise ValueError(f"dimension mismatch: {theta.shape} vs {context.shape}")
    if noise_sigma < 0:
        raise ValueError("noise_sigma must be >= 0")
    noise = noise_sigma * rng.standard_normal() if noise_sigma > 0 else 0.0
    return float(theta @ context + noise)


def _contexts_of(batch) -> np.ndarray:
    return np.asarray(batch.contexts if isinstance(batch, ContextBatch) else batch, dtype=float)


def instantaneous_regret(theta, batch, chosen: int) -> float:
    contexts = _contexts_of(batch)
    if not 0 <= chosen < contexts.shape[0]:
        raise IndexError(f"arm {chosen} out of range for K={contexts.shape[0]}")
    means = contexts @ np.asarray(theta, dtype=float)
    return float(max(means.max() - means[chosen], 0.0))


def tau_min(delta: float, d: int, T: int, rho_min: float) -> float:
    """Warm-up length after which empirical context covariances concentrate."""
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    if rho_min <= 0 or d < 1 or T < 1:
        raise ValueError("rho_min, d and T must be positive")
    return (16.0 / rho_min**2 + 8.0 / (3.0 * rho_min)) * math.log(2.0 * d * T / delta)


# -- seeded streams --------------------------------------------------------

class StreamKind(enum.IntEnum):
    POPULATION = 0
    CONTEXTS = 1
    NOISE = 2
    POLICY = 3
    CANDIDATES = 4
    REFERENCE = 5


@dataclass(frozen=True)
class Streams:
    """Splittable seed tree ``master -> rep -> kind -> agent``."""

    master_seed: int
    rep: int = 0

    def seed(self, kind: StreamKind, agent: int = 0) -> np.random.SeedSequence:
        return np.random.SeedSequence(self.master_seed, spawn_key=(self.rep, int(kind), agent))

    def rng(self, kind: StreamKind, agent: int = 0) -> np.random.Generator:
        return np.random.Generator(np.random.PCG64(self.seed(kind, agent)))


# -- environments ------------------------------------------------------------

@dataclass
class LinearEnvironment:
    """Synthetic environment: shared context batches, per-agent Gaussian noise.

    ``noise[i, t]`` is the noise agent ``i`` receives in round ``t`` whatever
    arm it plays.
    """

    thetas: np.ndarray
    contexts: np.ndarray
    noise: np.ndarray
    noise_sigma: float = 1.0
    labels: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    @classmethod
    def generate(cls, population: Population, horizon: int, k_arms: int,
                 streams: Streams, mode: ContextMode = ContextMode.CUBE,
                 noise_sigma: float = 1.0) -> "LinearEnvironment":
        n, d = population.thetas.shape
        contexts = sample_context_block(mode, horizon, k_arms, d, streams.rng(StreamKind.CONTEXTS))
        noise = np.empty((n, horizon))
        for i in range(n):
            noise[i] = streams.rng(StreamKind.NOISE, i).standard_normal(horizon)
        return cls(population.thetas, contexts, noise_sigma * noise, noise_sigma,
                   population.labels, {"context_mode": ContextMode(mode).value})

    @property
    def n_agents(self) -> int:
        return self.thetas.shape[0]

    @property
    def dim(self) -> int:
        return self.thetas.shape[1]

    @property
    def horizon(self) -> int:
        return self.contexts.shape[0]

    @property
    def n_arms(self) -> int:
        return self.contexts.shape[1]

    def contexts_at(self, t: int) -> np.ndarray:
        return self.contexts[t]

    def rewards(self, t: int, agents: np.ndarray, arms: np.ndarray) -> np.ndarray:
        ctx = self.contexts[t][arms]
        return np.einsum("nd,nd->n", ctx, self.thetas[agents]) + self.noise[agents, t]

    def regrets(self, t: int, arms: np.ndarray) -> np.ndarray:
        """Instantaneous regret of every agent given one arm per agent."""
        means = self.thetas @ self.contexts[t].T
        got = means[np.arange(self.n_agents), arms]
        return np.maximum(means.max(axis=1) - got, 0.0)

    def agent_subset(self, agents: Sequence[int]) -> "LinearEnvironment":
        idx = np.asarray(agents, dtype=int)
        labels = None if self.labels is None else self.labels[idx]
        return LinearEnvironment(self.thetas[idx], self.contexts, self.noise[idx],
                                 self.noise_sigma, labels, dict(self.meta))
