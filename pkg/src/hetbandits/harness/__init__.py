"""Experiment harness: configuration, repetitions, trace files, offline replay."""
from .config import ConfigError, ExperimentConfig
from .offline import MissingItem, OfflineDataset, load_offline, offline_replay
from .runner import run_experiment, summarize
from .traces import ParseError, parse_trace, read_trace, write_trace

__all__ = ["ConfigError", "ExperimentConfig", "MissingItem", "OfflineDataset", "ParseError",
           "load_offline", "offline_replay", "parse_trace", "read_trace", "run_experiment",
           "summarize", "write_trace"]
