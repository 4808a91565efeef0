"""Command-line entry point.

Exit codes: 0 success, 2 configuration error, 3 I/O error.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .config import ConfigError, ExperimentConfig, coerce_overrides, parse_kv_file
from .runner import format_table, run_experiment, summarize
from .traces import ParseError, read_trace

EXIT_OK, EXIT_CONFIG, EXIT_IO = 0, 2, 3

SUBCOMMANDS = {
    "simulate-cluster": "cluster",
    "simulate-personal": "personal",
    "replay-offline": "offline",
}


def _add_experiment_flags(p: argparse.ArgumentParser) -> None:
    # every value stays a string here so config-file values are only overridden when given
    add = p.add_argument
    add("--config", help="flat 'flag = value' file; command-line flags override it")
    add("--agents", help="number of agents N")
    add("--horizon", help="rounds T")
    add("--arms", help="contexts per round K")
    add("--dim", help="feature dimension d")
    add("--clusters", help="number of clusters L")
    add("--zipf-z", help="Zipf exponent of cluster sizes (0 = equal)")
    add("--sigma-spread", help="spread of personal parameters around the common one")
    add("--alpha", help="exploration exponent, in (0, 1/2]")
    add("--c-explore", help="exploration constant C")
    add("--delta", help="confidence level")
    add("--p-star", help="minimum cluster fraction p*")
    add("--gamma", help="clustering threshold override ('auto' for 3/(NT)^alpha)")
    add("--noise-sigma", help="reward noise standard deviation")
    add("--reps", help="independent repetitions")
    add("--seed", help="master seed (falls back to $HETBANDITS_SEED, then 0)")
    add("--algo", help="comma-separated algorithms: sclb,cmlb,pmlb,linucb-ind,random")
    add("--out", help="output directory")
    add("--jobs", help="repetitions run in parallel")
    add("--context-mode", help="'cube' or 'unit-ball'")
    add("--centers", help="cluster centers: 'sphere' or 'orthogonal'")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hetbandits",
                                     description="Multi-agent linear bandit simulations.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, scenario in SUBCOMMANDS.items():
        p = sub.add_parser(name, help=f"run the {scenario} scenario")
        _add_experiment_flags(p)
        if scenario == "offline":
            p.add_argument("--items", help="item embeddings: 'id,f1,...,fd' per line")
            p.add_argument("--interactions", help="positives: 'user,item' per line")
    p = sub.add_parser("summarize", help="summarize trace CSV files")
    p.add_argument("paths", nargs="+", help="trace files or directories containing them")
    return parser


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    scenario = SUBCOMMANDS[args.command]
    overrides = {}
    if args.config:
        overrides.update(parse_kv_file(args.config))
    flags = {k.replace("_", "-"): v for k, v in vars(args).items()
             if k not in ("command", "config", "verbose")}
    overrides.update(coerce_overrides(flags))
    try:
        config = ExperimentConfig.for_scenario(scenario, **overrides)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
    config.validate()
    return config


def _trace_files(paths) -> list[Path]:
    files = []
    for p in map(Path, paths):
        files.extend(sorted(p.rglob("*_rep*.csv")) if p.is_dir() else [p])
    return files


def _algo_of(path: Path) -> str:
    stem = path.stem
    return stem.rsplit("_rep", 1)[0] if "_rep" in stem else stem


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        if args.command == "summarize":
            files = _trace_files(args.paths)
            if not files:
                print("no trace files found", file=sys.stderr)
                return EXIT_IO
            rows = summarize([read_trace(f, _algo_of(f)) for f in files])
        else:
            config = config_from_args(args)
            rows = run_experiment(config)
            print(f"wrote traces and summary to {config.output_path}")
    except (ConfigError, ValueError) as exc:
        if isinstance(exc, ParseError):
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_IO
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, KeyError) as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    print(format_table(rows))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
