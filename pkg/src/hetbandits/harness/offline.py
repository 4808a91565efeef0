"""Offline replay of implicit-feedback logs.

Items carry pre-computed embeddings; a user's positives are the items it
interacted with. Each round ``K`` candidate items are drawn without
replacement, every user is recommended one of them and earns 1 if it is
among their positives.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..env import StreamKind, Streams
from ..trace import RegretTrace
from .traces import ParseError


class MissingItem(KeyError):
    def __init__(self, item_id: str, path=None, line: int | None = None):
        where = f"{path}:{line}: " if path is not None else ""
        super().__init__(f"{where}interaction references unknown item {item_id!r}")
        self.item_id = item_id


@dataclass
class OfflineDataset:
    items: dict[str, np.ndarray]
    positives: dict[str, set[str]]

    def validate(self) -> None:
        dims = {len(v) for v in self.items.values()}
        if len(dims) > 1:
            raise ValueError(f"embeddings have mixed dimensions {sorted(dims)}")
        for item_id, emb in self.items.items():
            if not np.all(np.isfinite(emb)):
                raise ValueError(f"non-finite embedding for item {item_id!r}")
        for pos in self.positives.values():
            for item_id in pos:
                if item_id not in self.items:
                    raise MissingItem(item_id)

    @property
    def dim(self) -> int:
        return len(next(iter(self.items.values()))) if self.items else 0


def load_offline(items_path, interactions_path) -> OfflineDataset:
    """Read ``id,f1,...,fd`` item rows and ``user,item`` interaction rows (no headers)."""
    items: dict[str, np.ndarray] = {}
    dim = None
    for lineno, line in enumerate(Path(items_path).read_text().splitlines(), 1):
        if not line.strip():
            continue
        parts = [p.strip() for p in line.split(",")]
        if len(parts) < 2 or not parts[0]:
            raise ParseError(items_path, lineno, "expected 'id,f1,...,fd'")
        try:
            emb = np.array([float(p) for p in parts[1:]])
        except ValueError as exc:
            raise ParseError(items_path, lineno, str(exc)) from exc
        if not np.all(np.isfinite(emb)):
            raise ParseError(items_path, lineno, "non-finite embedding")
        if dim is None:
            dim = len(emb)
        elif len(emb) != dim:
            raise ParseError(items_path, lineno, f"expected {dim} features, got {len(emb)}")
        if parts[0] in items:
            raise ParseError(items_path, lineno, f"duplicate item id {parts[0]!r}")
        items[parts[0]] = emb

    positives: dict[str, set[str]] = {}
    for lineno, line in enumerate(Path(interactions_path).read_text().splitlines(), 1):
        if not line.strip():
            continue
        parts = [p.strip() for p in line.split(",")]
        if len(parts) != 2 or not all(parts):
            raise ParseError(interactions_path, lineno, "expected 'user,item'")
        user, item = parts
        if item not in items:
            raise MissingItem(item, interactions_path, lineno)
        positives.setdefault(user, set()).add(item)
    return OfflineDataset(items, positives)


class OfflineEnvironment:
    """Replay environment with the same interface as ``LinearEnvironment``."""

    def __init__(self, dataset: OfflineDataset, horizon: int, k_arms: int, streams: Streams):
        dataset.validate()
        ids = sorted(dataset.items)
        if k_arms > len(ids):
            raise ValueError(f"K={k_arms} exceeds the {len(ids)} available items")
        self.item_ids = ids
        self.users = sorted(dataset.positives)
        index = {item: j for j, item in enumerate(ids)}
        self.features = np.stack([dataset.items[i] for i in ids]) if ids else np.zeros((0, 0))
        self.liked = np.zeros((len(self.users), len(ids)))
        for u, user in enumerate(self.users):
            self.liked[u, [index[i] for i in dataset.positives[user]]] = 1.0
        rng = streams.rng(StreamKind.CANDIDATES)
        self.candidates = np.stack([rng.choice(len(ids), size=k_arms, replace=False)
                                    for _ in range(horizon)]) if horizon else np.zeros((0, k_arms), int)

    @property
    def n_agents(self) -> int:
        return len(self.users)

    @property
    def dim(self) -> int:
        return self.features.shape[1]

    @property
    def horizon(self) -> int:
        return self.candidates.shape[0]

    @property
    def n_arms(self) -> int:
        return self.candidates.shape[1]

    def contexts_at(self, t: int) -> np.ndarray:
        return self.features[self.candidates[t]]

    def rewards(self, t: int, agents: np.ndarray, arms: np.ndarray) -> np.ndarray:
        return self.liked[agents, self.candidates[t][arms]]

    def regrets(self, t: int, arms: np.ndarray) -> np.ndarray:
        got = self.liked[:, self.candidates[t]]
        return got.max(axis=1) - got[np.arange(self.n_agents), arms]


def regret_ratio(alg_cum: np.ndarray, ref_cum: np.ndarray) -> np.ndarray:
    """Elementwise ``alg / ref`` with ``0 / 0`` defined as 1."""
    alg_cum = np.asarray(alg_cum, dtype=float)
    ref_cum = np.asarray(ref_cum, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = alg_cum / ref_cum
    out[(alg_cum == 0) & (ref_cum == 0)] = 1.0
    return out


@dataclass
class ReplayResult:
    algorithm: RegretTrace
    reference: RegretTrace
    ratio: np.ndarray

    @property
    def final_ratio(self) -> float:
        return float(self.ratio[-1]) if len(self.ratio) else math.nan


def reference_random_run(env, streams: Streams) -> RegretTrace:
    """Uniform-random policy on a stream kept apart from the algorithm's own."""
    trace = RegretTrace.empty(env.n_agents, env.horizon, algo="random-reference")
    choices = np.stack([streams.rng(StreamKind.REFERENCE, i).integers(0, env.n_arms, size=env.horizon)
                        for i in range(env.n_agents)])
    for s in range(env.horizon):
        trace.record(s, choices[:, s], env.regrets(s, choices[:, s]), "reference")
    return trace


def offline_replay(dataset: OfflineDataset, algorithm, config, streams: Streams) -> ReplayResult:
    """Run ``algorithm(env)`` and a random reference on one candidate sequence.

    ``algorithm`` maps an environment to a ``RegretTrace``; the ratio is the
    running total regret of the algorithm over that of the reference.
    """
    env = OfflineEnvironment(dataset, config.horizon, config.k_arms, streams)
    trace = algorithm(env)
    ref = reference_random_run(env, streams)
    ratio = regret_ratio(trace.inst.sum(axis=0).cumsum(), ref.inst.sum(axis=0).cumsum())
    return ReplayResult(trace, ref, ratio)


def synthetic_dataset(n_items: int, n_users: int, dim: int, like_prob: float,
                      rng: np.random.Generator) -> OfflineDataset:
    """Random unit-norm item embeddings with independent ``Bernoulli(like_prob)`` positives."""
    emb = rng.standard_normal((n_items, dim))
    emb /= np.linalg.norm(emb, axis=1, keepdims=True)
    ids = [f"i{j}" for j in range(n_items)]
    liked = rng.random((n_users, n_items)) < like_prob
    return OfflineDataset({i: e for i, e in zip(ids, emb)},
                          {f"u{u}": {ids[j] for j in np.flatnonzero(liked[u])} for u in range(n_users)})


def write_dataset(dataset: OfflineDataset, items_path, interactions_path) -> None:
    Path(items_path).write_text("".join(
        f"{i}," + ",".join(repr(float(x)) for x in e) + "\n" for i, e in dataset.items.items()))
    Path(interactions_path).write_text("".join(
        f"{u},{i}\n" for u in sorted(dataset.positives) for i in sorted(dataset.positives[u])))
