"""Experiment configuration: defaults, flat key-value files and validation."""
from __future__ import annotations

import os
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

SCENARIOS = ("cluster", "personal", "offline")
ALGORITHMS = ("sclb", "cmlb", "pmlb", "linucb-ind", "random")

# CLI flag name -> ExperimentConfig attribute
FLAG_TO_FIELD = {
    "agents": "n_agents",
    "horizon": "horizon",
    "arms": "k_arms",
    "dim": "dim",
    "clusters": "n_clusters",
    "zipf-z": "zipf_z",
    "sigma-spread": "sigma_spread",
    "alpha": "alpha",
    "c-explore": "c_explore",
    "delta": "delta",
    "p-star": "p_star",
    "gamma": "gamma",
    "noise-sigma": "noise_sigma",
    "reps": "repetitions",
    "seed": "master_seed",
    "algo": "algorithms",
    "out": "output_path",
    "jobs": "jobs",
    "context-mode": "context_mode",
    "centers": "center_mode",
    "items": "items_path",
    "interactions": "interactions_path",
}


class ConfigError(ValueError):
    pass


def _default_seed() -> int:
    raw = os.environ.get("HETBANDITS_SEED")
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError as exc:
        raise ConfigError(f"HETBANDITS_SEED must be an integer, got {raw!r}") from exc


@dataclass
class ExperimentConfig:
    scenario: str = "cluster"
    algorithms: tuple[str, ...] = ("cmlb",)
    n_agents: int = 40
    horizon: int = 1000
    k_arms: int = 25
    dim: int = 15
    n_clusters: int = 4
    zipf_z: float = 0.0
    sigma_spread: float = 0.1
    alpha: float = 0.2
    c_explore: float = 0.2
    delta: float = 0.4
    gamma: float | None = None
    p_star: float = 0.0
    noise_sigma: float = 1.0
    repetitions: int = 30
    master_seed: int = field(default_factory=_default_seed)
    output_path: str = "results"
    jobs: int = 1
    context_mode: str = "cube"
    center_mode: str = "sphere"
    items_path: str | None = None
    interactions_path: str | None = None

    @classmethod
    def for_scenario(cls, scenario: str, **overrides) -> "ExperimentConfig":
        base: dict = {"scenario": scenario}
        if scenario == "personal":
            base.update(algorithms=("pmlb",), n_agents=50)
        elif scenario == "offline":
            base.update(dim=25, k_arms=25, horizon=10000, delta=0.3, alpha=0.5, c_explore=0.5,
                        repetitions=1)
        base.update(overrides)
        return cls(**base)

    def validate(self) -> None:
        errs = []
        if self.scenario not in SCENARIOS:
            errs.append(f"scenario must be one of {SCENARIOS}")
        if not self.algorithms:
            errs.append("at least one algorithm is required")
        for algo in self.algorithms:
            if algo not in ALGORITHMS:
                errs.append(f"unknown algorithm {algo!r}; choose from {ALGORITHMS}")
        for name in ("n_agents", "horizon", "k_arms", "dim", "n_clusters", "repetitions", "jobs"):
            if getattr(self, name) < 1:
                errs.append(f"{name} must be >= 1")
        if self.scenario == "cluster" and self.n_clusters > self.n_agents:
            errs.append("clusters must not exceed agents")
        if self.center_mode == "orthogonal" and self.n_clusters > self.dim:
            errs.append("orthogonal centers need clusters <= dim")
        if self.zipf_z < 0:
            errs.append("zipf-z must be >= 0")
        if self.sigma_spread < 0:
            errs.append("sigma-spread must be >= 0")
        if not 0 < self.alpha <= 0.5:
            errs.append("alpha must lie in (0, 1/2]")
        if self.c_explore <= 0:
            errs.append("c-explore must be > 0")
        if not 0 < self.delta < 1:
            errs.append("delta must lie in (0, 1)")
        if self.gamma is not None and self.gamma < 0:
            errs.append("gamma must be >= 0")
        if not 0 <= self.p_star <= 1:
            errs.append("p-star must lie in [0, 1]")
        if self.noise_sigma < 0:
            errs.append("noise-sigma must be >= 0")
        if self.context_mode not in ("cube", "unit-ball"):
            errs.append("context-mode must be 'cube' or 'unit-ball'")
        if self.center_mode not in ("sphere", "orthogonal"):
            errs.append("centers must be 'sphere' or 'orthogonal'")
        if self.scenario == "offline" and not (self.items_path and self.interactions_path):
            errs.append("offline scenario needs --items and --interactions")
        if errs:
            raise ConfigError("; ".join(errs))

    def as_dict(self) -> dict:
        out = asdict(self)
        out["algorithms"] = list(self.algorithms)
        return out


def _coerce(name: str, raw: str):
    kinds = {f.name: f.type for f in fields(ExperimentConfig)}
    kind = kinds[name]
    raw = raw.strip()
    try:
        if name == "algorithms":
            return tuple(a.strip() for a in raw.split(",") if a.strip())
        if name == "gamma":
            return None if raw.lower() in ("", "none", "auto") else float(raw)
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
    except ValueError as exc:
        raise ConfigError(f"bad value for {name}: {raw!r}") from exc
    return raw


def parse_kv_file(path: str | Path) -> dict:
    """Read ``flag = value`` lines (``#`` comments allowed) into config overrides."""
    out = {}
    try:
        text = Path(path).read_text()
    except OSError:
        raise
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (p.strip() for p in line.split("=", 1))
        key = key.lstrip("-").replace("_", "-")
        if key not in FLAG_TO_FIELD:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        out[FLAG_TO_FIELD[key]] = _coerce(FLAG_TO_FIELD[key], value)
    return out


def coerce_overrides(raw: dict) -> dict:
    """Convert CLI string values keyed by flag name into typed config fields."""
    return {FLAG_TO_FIELD[k]: _coerce(FLAG_TO_FIELD[k], v) for k, v in raw.items() if v is not None}
