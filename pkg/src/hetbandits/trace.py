"""Per-agent regret traces produced by every algorithm."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class RegretTrace:
    """Instantaneous regret and chosen arm per ``(agent, round)``.

    ``phases`` holds one label per round; every agent is in the same phase
    in a given round.
    """

    inst: np.ndarray
    arms: np.ndarray
    phases: list[str]
    rep: int = 0
    algo: str = ""
    meta: dict = field(default_factory=dict)

    @classmethod
    def empty(cls, n_agents: int, horizon: int, **kw) -> "RegretTrace":
        return cls(np.zeros((n_agents, horizon)), np.zeros((n_agents, horizon), dtype=np.int64),
                   [""] * horizon, **kw)

    @property
    def n_agents(self) -> int:
        return self.inst.shape[0]

    @property
    def horizon(self) -> int:
        return self.inst.shape[1]

    @property
    def cum(self) -> np.ndarray:
        return np.cumsum(self.inst, axis=1)

    def mean_cum(self) -> np.ndarray:
        """Cumulative regret averaged over agents, one value per round."""
        return self.cum.mean(axis=0)

    def final_mean(self) -> float:
        return float(self.inst.sum(axis=1).mean())

    def record(self, s: int, arms: np.ndarray, regrets: np.ndarray, phase: str) -> None:
        self.arms[:, s] = arms
        self.inst[:, s] = regrets
        self.phases[s] = phase

    def splice(self, other: "RegretTrace", start: int) -> None:
        stop = start + other.horizon
        self.inst[:, start:stop] = other.inst
        self.arms[:, start:stop] = other.arms
        self.phases[start:stop] = other.phases

    def same_as(self, other: "RegretTrace") -> bool:
        return (self.rep == other.rep and self.phases == other.phases
                and np.array_equal(self.inst, other.inst) and np.array_equal(self.arms, other.arms))
