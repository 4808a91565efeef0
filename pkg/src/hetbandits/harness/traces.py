"""CSV persistence for regret traces and per-round summaries."""
from __future__ import annotations

import io
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from ..trace import RegretTrace

TRACE_HEADER = "rep,agent,round,phase,arm,inst_regret,cum_regret"
SUMMARY_HEADER = "algo,round,mean_cum_regret,lo95,hi95"


class ParseError(ValueError):
    def __init__(self, path, line: int, msg: str):
        super().__init__(f"{path}:{line}: {msg}")
        self.path = path
        self.line = line


def format_trace(trace: RegretTrace) -> str:
    """Rows ordered by agent then round; floats use ``repr`` so parsing is exact."""
    if any("," in p or "\n" in p for p in trace.phases):
        raise ValueError("phase labels must not contain commas or newlines")
    cum = trace.cum
    buf = io.StringIO()
    buf.write(TRACE_HEADER + "\n")
    rep = trace.rep
    for i in range(trace.n_agents):
        inst_i, cum_i, arms_i = trace.inst[i].tolist(), cum[i].tolist(), trace.arms[i].tolist()
        for s in range(trace.horizon):
            buf.write(f"{rep},{i},{s + 1},{trace.phases[s]},{arms_i[s]},"
                      f"{inst_i[s]!r},{cum_i[s]!r}\n")
    return buf.getvalue()


def write_trace(trace: RegretTrace, path: str | Path) -> None:
    Path(path).write_text(format_trace(trace))


def parse_trace(text: str, path="<string>", algo: str = "") -> RegretTrace:
    lines = text.splitlines()
    if not lines or lines[0] != TRACE_HEADER:
        raise ParseError(path, 1, f"expected header {TRACE_HEADER!r}")
    rows = []
    for lineno, line in enumerate(lines[1:], 2):
        parts = line.split(",")
        if len(parts) != 7:
            raise ParseError(path, lineno, f"expected 7 fields, got {len(parts)}")
        try:
            rows.append((int(parts[0]), int(parts[1]), int(parts[2]), parts[3], int(parts[4]),
                         float(parts[5]), float(parts[6]), lineno))
        except ValueError as exc:
            raise ParseError(path, lineno, str(exc)) from exc
    if not rows:
        raise ParseError(path, 1, "trace has no rows")
    n = max(r[1] for r in rows) + 1
    horizon = max(r[2] for r in rows)
    if len(rows) != n * horizon:
        raise ParseError(path, len(lines), f"expected {n * horizon} rows, got {len(rows)}")
    trace = RegretTrace.empty(n, horizon, rep=rows[0][0], algo=algo)
    cum = np.zeros((n, horizon))
    seen = np.zeros((n, horizon), dtype=bool)
    for rep, agent, rnd, phase, arm, inst, c, lineno in rows:
        s = rnd - 1
        if rep != trace.rep or not 0 <= s < horizon or seen[agent, s]:
            raise ParseError(path, lineno, "inconsistent rep or duplicate (agent, round)")
        if inst < 0:
            raise ParseError(path, lineno, "negative instantaneous regret")
        if agent > 0 and trace.phases[s] != phase:
            raise ParseError(path, lineno, "phase differs across agents in one round")
        seen[agent, s] = True
        trace.inst[agent, s] = inst
        trace.arms[agent, s] = arm
        trace.phases[s] = phase
        cum[agent, s] = c
    if not np.allclose(trace.cum, cum, rtol=1e-9, atol=1e-9):
        raise ParseError(path, 2, "cum_regret is not the running sum of inst_regret")
    return trace


def read_trace(path: str | Path, algo: str = "") -> RegretTrace:
    return parse_trace(Path(path).read_text(), path, algo)


def band(per_rep: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Mean and 2.5 / 97.5 percentiles across reps (axis 0)."""
    per_rep = np.asarray(per_rep, dtype=float)
    lo, hi = np.percentile(per_rep, [2.5, 97.5], axis=0)
    return per_rep.mean(axis=0), lo, hi


def format_summary(groups: dict[str, Sequence[RegretTrace]]) -> str:
    buf = io.StringIO()
    buf.write(SUMMARY_HEADER + "\n")
    for algo, traces in groups.items():
        mean, lo, hi = (a.tolist() for a in band(np.stack([t.mean_cum() for t in traces])))
        for s in range(len(mean)):
            buf.write(f"{algo},{s + 1},{mean[s]!r},{lo[s]!r},{hi[s]!r}\n")
    return buf.getvalue()


def group_by_algo(traces: Iterable[RegretTrace]) -> dict[str, list[RegretTrace]]:
    out: dict[str, list[RegretTrace]] = {}
    for t in traces:
        out.setdefault(t.algo, []).append(t)
    return out
