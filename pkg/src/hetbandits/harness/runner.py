"""Seeded repetitions, trace persistence and summary statistics."""
from __future__ import annotations

import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..baselines import BaselineConfig, independent_oful_run, uniform_random_run
from ..clustering import CmlbConfig, SclbConfig, cmlb_run, sclb_run
from ..env import ContextMode, LinearEnvironment, PopulationSpec, StreamKind, Streams, build_population, tau_min
from ..personalization import PmlbConfig, pmlb_run
from ..trace import RegretTrace
from . import traces as tio
from .config import FLAG_TO_FIELD, ExperimentConfig
from .offline import load_offline, offline_replay

log = logging.getLogger("hetbandits")


def build_environment(config: ExperimentConfig, streams: Streams) -> LinearEnvironment:
    if config.scenario == "cluster":
        spec = PopulationSpec.clustered(config.n_agents, config.dim, config.n_clusters,
                                        config.zipf_z, config.center_mode)
    elif config.scenario == "personal":
        spec = PopulationSpec.personalized(config.n_agents, config.dim, config.sigma_spread)
    else:
        raise ValueError(f"no synthetic environment for scenario {config.scenario!r}")
    population = build_population(spec, streams.seed(StreamKind.POPULATION))
    return LinearEnvironment.generate(population, config.horizon, config.k_arms, streams,
                                      ContextMode(config.context_mode), config.noise_sigma)


def run_algorithm(name: str, config: ExperimentConfig, env, streams: Streams) -> RegretTrace:
    horizon = env.horizon
    if name == "cmlb":
        trace, _ = cmlb_run(CmlbConfig(horizon, config.alpha, config.c_explore, config.delta,
                                       config.gamma, config.p_star, config.noise_sigma), env)
    elif name == "sclb":
        trace = sclb_run(SclbConfig(horizon, config.alpha, config.c_explore, config.delta,
                                    config.noise_sigma), env)
    elif name == "pmlb":
        trace = pmlb_run(PmlbConfig(horizon, config.delta, config.noise_sigma), env)
    elif name == "linucb-ind":
        trace = independent_oful_run(BaselineConfig(horizon, config.delta, config.noise_sigma), env)
    elif name == "random":
        trace = uniform_random_run(BaselineConfig(horizon), env, streams)
    else:
        raise ValueError(f"unknown algorithm {name!r}")
    trace.algo = name
    return trace


def rho_min(mode: str, dim: int) -> float:
    """Smallest eigenvalue of the context second-moment matrix."""
    return 1.0 / (3.0 * dim) if mode == "cube" else 1.0 / (dim + 2.0)


@dataclass
class RepResult:
    rep: int
    traces: list[RegretTrace]
    ratios: dict[str, np.ndarray] = field(default_factory=dict)


def run_rep(config: ExperimentConfig, rep: int, dataset=None) -> RepResult:
    """Every algorithm in ``config`` on one shared environment (paired comparison)."""
    streams = Streams(config.master_seed, rep)
    out = RepResult(rep, [])
    if config.scenario == "offline":
        dataset = dataset if dataset is not None else load_offline(config.items_path, config.interactions_path)
        for name in config.algorithms:
            start = time.perf_counter()
            res = offline_replay(dataset, lambda env, n=name: run_algorithm(n, config, env, streams),
                                 config, streams)
            res.algorithm.rep = rep
            res.algorithm.meta["wall_clock"] = time.perf_counter() - start
            out.traces.append(res.algorithm)
            out.ratios[name] = res.ratio
        return out
    env = build_environment(config, streams)
    for name in config.algorithms:
        start = time.perf_counter()
        trace = run_algorithm(name, config, env, streams)
        trace.rep = rep
        trace.meta["wall_clock"] = time.perf_counter() - start
        out.traces.append(trace)
    return out


def _run_rep_job(args):
    return run_rep(*args)


def format_config(config: ExperimentConfig) -> str:
    """Flat ``flag = value`` text that ``--config`` reads back."""
    lines = []
    for flag, name in FLAG_TO_FIELD.items():
        value = getattr(config, name)
        if value is None:
            continue
        if name == "algorithms":
            value = ",".join(value)
        lines.append(f"{flag} = {value}")
    return "\n".join(lines) + "\n"


def summarize(traces) -> list[dict]:
    """Per algorithm: final mean per-agent cumulative regret, band half-width, wall-clock."""
    rows = []
    for algo, group in tio.group_by_algo(traces).items():
        finals = np.array([t.final_mean() for t in group])
        lo, hi = np.percentile(finals, [2.5, 97.5])
        rows.append({"algo": algo, "final_mean": float(finals.mean()),
                     "band_half_width": float((hi - lo) / 2.0),
                     "wall_clock": float(sum(t.meta.get("wall_clock", 0.0) for t in group)),
                     "reps": len(group)})
    return rows


def format_table(rows: list[dict]) -> str:
    lines = [f"{'algo':<12} {'reps':>5} {'final_mean':>12} {'band_hw':>10} {'wall_s':>8}"]
    for r in rows:
        lines.append(f"{r['algo']:<12} {r['reps']:>5} {r['final_mean']:>12.4f} "
                     f"{r['band_half_width']:>10.4f} {r['wall_clock']:>8.2f}")
    return "\n".join(lines)


def _warn_if_cold(config: ExperimentConfig) -> None:
    if config.scenario == "offline":
        return
    warm = tau_min(config.delta, config.dim, config.horizon, rho_min(config.context_mode, config.dim))
    if config.scenario == "personal":
        warm = warm**2
    if config.horizon < warm:
        log.warning("horizon %d is below the warm-up length %.0f; guarantees are not in force",
                    config.horizon, warm)


def run_experiment(config: ExperimentConfig) -> list[dict]:
    """Run all repetitions, write one trace CSV per (algorithm, rep) plus a summary CSV."""
    config.validate()
    _warn_if_cold(config)
    out = Path(config.output_path)
    (out / "traces").mkdir(parents=True, exist_ok=True)
    (out / "config.txt").write_text(format_config(config))

    dataset = None
    if config.scenario == "offline":
        dataset = load_offline(config.items_path, config.interactions_path)
    jobs = [(config, rep, dataset) for rep in range(config.repetitions)]
    if config.jobs > 1 and config.repetitions > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            results = list(pool.map(_run_rep_job, jobs))
    else:
        results = [_run_rep_job(j) for j in jobs]

    all_traces = []
    for res in results:
        for trace in res.traces:
            tio.write_trace(trace, out / "traces" / f"{trace.algo}_rep{res.rep:03d}.csv")
            all_traces.append(trace)
    (out / "summary.csv").write_text(tio.format_summary(tio.group_by_algo(all_traces)))
    if config.scenario == "offline":
        (out / "ratio.csv").write_text(format_ratios(results))
    return summarize(all_traces)


RATIO_HEADER = "algo,round,mean_ratio,lo95,hi95"


def format_ratios(results: list[RepResult]) -> str:
    lines = [RATIO_HEADER]
    for name in results[0].ratios:
        mean, lo, hi = (a.tolist() for a in tio.band(np.stack([r.ratios[name] for r in results])))
        lines += [f"{name},{s + 1},{mean[s]!r},{lo[s]!r},{hi[s]!r}" for s in range(len(mean))]
    return "\n".join(lines) + "\n"
