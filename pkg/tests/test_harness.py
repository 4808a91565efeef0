import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hetbandits.env import Streams
from hetbandits.harness import cli
from hetbandits.harness.config import ConfigError, ExperimentConfig, parse_kv_file
from hetbandits.harness.offline import (MissingItem, OfflineDataset, OfflineEnvironment, load_offline,
                                        offline_replay, regret_ratio, synthetic_dataset, write_dataset)
from hetbandits.harness.runner import run_algorithm, run_experiment, summarize
from hetbandits.harness.traces import (SUMMARY_HEADER, TRACE_HEADER, ParseError, format_summary,
                                       format_trace, parse_trace, read_trace)
from hetbandits.trace import RegretTrace


# -- configuration -----------------------------------------------------------

def test_cluster_defaults():
    c = ExperimentConfig()
    assert (c.dim, c.k_arms, c.horizon, c.repetitions) == (15, 25, 1000, 30)
    assert (c.delta, c.alpha, c.c_explore, c.p_star) == (0.4, 0.2, 0.2, 0.0)


def test_offline_defaults():
    c = ExperimentConfig.for_scenario("offline")
    assert (c.dim, c.k_arms, c.horizon, c.delta, c.alpha, c.c_explore) == (25, 25, 10000, 0.3, 0.5, 0.5)


def test_seed_env_fallback(monkeypatch):
    monkeypatch.setenv("HETBANDITS_SEED", "77")
    assert ExperimentConfig().master_seed == 77
    monkeypatch.delenv("HETBANDITS_SEED")
    assert ExperimentConfig().master_seed == 0


@pytest.mark.parametrize("bad", [
    {"alpha": 0.7}, {"delta": 0.0}, {"n_agents": 0}, {"n_clusters": 50}, {"p_star": 1.5},
    {"algorithms": ("club",)}, {"scenario": "weird"}, {"context_mode": "sphere"}, {"gamma": -1.0},
])
def test_validation_rejects(bad):
    with pytest.raises(ConfigError):
        ExperimentConfig(**bad).validate()


def test_offline_needs_paths():
    with pytest.raises(ConfigError):
        ExperimentConfig.for_scenario("offline").validate()


def test_kv_file(tmp_path):
    path = tmp_path / "c.txt"
    path.write_text("# comment\nagents = 12\nzipf-z=0.5\nalgo = cmlb, linucb-ind\ngamma = auto\n\n")
    assert parse_kv_file(path) == {"n_agents": 12, "zipf_z": 0.5,
                                   "algorithms": ("cmlb", "linucb-ind"), "gamma": None}
    path.write_text("unknown = 3\n")
    with pytest.raises(ConfigError, match=":1:"):
        parse_kv_file(path)
    path.write_text("agents = many\n")
    with pytest.raises(ConfigError):
        parse_kv_file(path)


def test_cli_flags_override_file(tmp_path):
    path = tmp_path / "c.txt"
    path.write_text("agents = 12\nhorizon = 30\n")
    args = cli.build_parser().parse_args(["simulate-cluster", "--config", str(path), "--agents", "6"])
    cfg = cli.config_from_args(args)
    assert (cfg.n_agents, cfg.horizon) == (6, 30)


# -- trace files -------------------------------------------------------------

def _trace(seed, n=3, horizon=5):
    rng = np.random.default_rng(seed)
    t = RegretTrace(rng.exponential(size=(n, horizon)), rng.integers(0, 9, (n, horizon)),
                    [f"ph{s % 2}" for s in range(horizon)], rep=seed % 7, algo="x")
    t.inst[0, 0] = 0.0
    return t


def test_trace_header_and_cumulative():
    text = format_trace(_trace(1))
    lines = text.splitlines()
    assert lines[0] == TRACE_HEADER
    assert len(lines) == 1 + 3 * 5
    assert lines[1].startswith("1,0,1,ph0,")


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 5), st.integers(1, 12))
def test_trace_round_trip(seed, n, horizon):
    t = _trace(seed, n, horizon)
    back = parse_trace(format_trace(t), algo="x")
    assert back.same_as(t)
    assert format_trace(back) == format_trace(t)


def test_trace_parse_errors(tmp_path):
    with pytest.raises(ParseError):
        parse_trace("rep,agent\n")
    good = format_trace(_trace(2)).splitlines()
    bad = good[:3] + ["0,0,3,ph0,1,abc,1.0"] + good[4:]
    with pytest.raises(ParseError, match=":4:"):
        parse_trace("\n".join(bad))
    wrong_cum = good[:2] + [good[2].rsplit(",", 1)[0] + ",999.0"] + good[3:]
    with pytest.raises(ParseError):
        parse_trace("\n".join(wrong_cum))
    path = tmp_path / "t.csv"
    path.write_text("\n".join(good) + "\n")
    assert read_trace(path).same_as(_trace(2))


def _const(value, n=2, horizon=4, algo="a"):
    return RegretTrace(np.full((n, horizon), float(value)), np.zeros((n, horizon), dtype=np.int64),
                       [""] * horizon, algo=algo)


def test_summarize_examples():
    assert summarize([_const(0.0)])[0]["final_mean"] == 0.0
    assert summarize([_const(0.0)])[0]["band_half_width"] == 0.0
    rows = summarize([_const(1.0), _const(3.0)])
    assert rows[0]["final_mean"] == pytest.approx((4.0 + 12.0) / 2)


def test_summary_band_matches_percentiles():
    values = np.random.default_rng(3).uniform(0, 1, 30)
    traces = [_const(v, horizon=1) for v in values]
    lines = format_summary({"a": traces}).splitlines()
    assert lines[0] == SUMMARY_HEADER
    _, _, mean, lo, hi = lines[1].split(",")
    assert float(mean) == pytest.approx(values.mean())
    assert float(lo) == pytest.approx(np.percentile(values, 2.5))
    assert float(hi) == pytest.approx(np.percentile(values, 97.5))
    row = summarize(traces)[0]
    assert row["band_half_width"] == pytest.approx((np.percentile(values, 97.5) - np.percentile(values, 2.5)) / 2)


# -- experiments -------------------------------------------------------------

def _small(tmp_path, name, **kw):
    base = dict(n_agents=4, horizon=30, k_arms=5, dim=3, n_clusters=2, repetitions=2,
                master_seed=11, output_path=str(tmp_path / name))
    base.update(kw)
    return ExperimentConfig(**base)


def test_random_single_arm_summary_is_zero(tmp_path):
    cfg = _small(tmp_path, "z", algorithms=("random",), k_arms=1, repetitions=1)
    rows = run_experiment(cfg)
    assert rows[0]["final_mean"] == 0.0
    body = (tmp_path / "z" / "summary.csv").read_text().splitlines()[1:]
    assert all(line.split(",")[2:] == ["0.0", "0.0", "0.0"] for line in body)


def test_experiment_is_byte_deterministic(tmp_path):
    algos = ("cmlb", "sclb", "linucb-ind", "random")
    run_experiment(_small(tmp_path, "a", algorithms=algos))
    run_experiment(_small(tmp_path, "b", algorithms=algos, jobs=2))
    files = sorted(p.name for p in (tmp_path / "a" / "traces").iterdir())
    assert len(files) == 8
    for name in files + ["../summary.csv"]:
        assert (tmp_path / "a" / "traces" / name).read_bytes() == (tmp_path / "b" / "traces" / name).read_bytes()


def test_paired_environments(tmp_path):
    cfg = _small(tmp_path, "p", algorithms=("linucb-ind", "linucb-ind"), repetitions=1)
    rows = run_experiment(cfg)
    assert rows[0]["reps"] == 2 and rows[0]["band_half_width"] == 0.0


def test_personal_experiment_writes_traces(tmp_path):
    cfg = _small(tmp_path, "pers", scenario="personal", algorithms=("pmlb",), repetitions=1)
    run_experiment(cfg)
    trace = read_trace(tmp_path / "pers" / "traces" / "pmlb_rep000.csv")
    assert trace.phases[0] == "common" and trace.phases[-1] == "personal"


# -- offline replay ----------------------------------------------------------

def _write(tmp_path, items, interactions):
    ip, xp = tmp_path / "items.csv", tmp_path / "inter.csv"
    ip.write_text(items)
    xp.write_text(interactions)
    return ip, xp


def test_load_offline_examples(tmp_path):
    row = "a7," + ",".join(["0.1"] * 25) + "\n"
    ds = load_offline(*_write(tmp_path, row, ""))
    assert ds.positives == {} and ds.items["a7"].shape == (25,)
    ds = load_offline(*_write(tmp_path, row + "b," + ",".join(["0.2"] * 25) + "\n", "u1,a7\nu1,b\nu2,b\n"))
    assert ds.positives == {"u1": {"a7", "b"}, "u2": {"b"}}
    with pytest.raises(MissingItem, match="zz"):
        load_offline(*_write(tmp_path, row, "u1,zz\n"))


def test_load_offline_parse_errors(tmp_path):
    with pytest.raises(ParseError, match=":2:"):
        load_offline(*_write(tmp_path, "a,0.1,0.2\nb,0.1,x\n", ""))
    with pytest.raises(ParseError, match=":2:"):
        load_offline(*_write(tmp_path, "a,0.1,0.2\nb,0.1\n", ""))
    with pytest.raises(ParseError, match=":1:"):
        load_offline(*_write(tmp_path, "a,0.1\n", "only-one-field\n"))
    with pytest.raises(ParseError):
        load_offline(*_write(tmp_path, "a,nan\n", ""))


def test_dataset_write_load_round_trip(tmp_path):
    ds = synthetic_dataset(20, 5, 3, 0.3, np.random.default_rng(0))
    write_dataset(ds, tmp_path / "i.csv", tmp_path / "x.csv")
    back = load_offline(tmp_path / "i.csv", tmp_path / "x.csv")
    assert back.positives == {u: p for u, p in ds.positives.items() if p}
    for k, v in ds.items.items():
        np.testing.assert_array_equal(back.items[k], v)


def _ds(pos):
    items = {f"i{j}": np.array([float(j), 1.0]) for j in range(6)}
    return OfflineDataset(items, pos)


def test_regret_ratio_conventions():
    np.testing.assert_array_equal(regret_ratio([0, 1, 2], [0, 2, 2]), [1.0, 0.5, 1.0])
    assert regret_ratio([1.0], [0.0])[0] == np.inf


def test_all_positive_user_gives_unit_ratio():
    cfg = ExperimentConfig(horizon=50, k_arms=3)
    ds = _ds({"u": {f"i{j}" for j in range(6)}})
    res = offline_replay(ds, lambda env: run_algorithm("random", cfg, env, Streams(0)), cfg, Streams(0))
    assert res.algorithm.inst.sum() == 0.0 and np.all(res.ratio == 1.0)


def test_no_positive_user_has_no_regret():
    env = OfflineEnvironment(_ds({"u": set(), "v": {"i1"}}), 40, 3, Streams(1))
    for t in range(40):
        assert env.regrets(t, np.array([0, 0]))[0] == 0.0


def test_candidates_without_replacement():
    env = OfflineEnvironment(_ds({"u": {"i1"}}), 200, 6, Streams(2))
    assert all(len(set(row)) == 6 for row in env.candidates)
    with pytest.raises(ValueError):
        OfflineEnvironment(_ds({}), 10, 7, Streams(2))


def test_offline_replay_deterministic():
    ds = synthetic_dataset(30, 6, 4, 0.2, np.random.default_rng(1))
    cfg = ExperimentConfig(horizon=200, k_arms=5, dim=4)
    runs = [offline_replay(ds, lambda env: run_algorithm("linucb-ind", cfg, env, Streams(3)), cfg, Streams(3))
            for _ in range(2)]
    assert runs[0].algorithm.same_as(runs[1].algorithm)
    np.testing.assert_array_equal(runs[0].ratio, runs[1].ratio)


# -- command line ------------------------------------------------------------

def test_cli_exit_codes(tmp_path, capsys):
    out = str(tmp_path / "run")
    assert cli.main(["simulate-cluster", "--agents", "3", "--clusters", "1", "--horizon", "10", "--reps", "1",
                     "--dim", "2", "--arms", "3", "--algo", "cmlb,random", "--out", out]) == 0
    assert "cmlb" in capsys.readouterr().out
    assert cli.main(["summarize", out]) == 0
    assert cli.main(["simulate-cluster", "--alpha", "0.9", "--out", out]) == 2
    assert cli.main(["simulate-cluster", "--agents", "lots"]) == 2
    assert cli.main(["simulate-cluster", "--config", str(tmp_path / "missing.txt")]) == 3
    assert cli.main(["summarize", str(tmp_path / "nothing-here")]) == 3
    blocked = tmp_path / "file"
    blocked.write_text("x")
    assert cli.main(["simulate-cluster", "--horizon", "5", "--reps", "1", "--out", str(blocked / "sub")]) == 3


def test_cli_offline(tmp_path):
    ds = synthetic_dataset(40, 4, 3, 0.2, np.random.default_rng(0))
    write_dataset(ds, tmp_path / "i.csv", tmp_path / "x.csv")
    code = cli.main(["replay-offline", "--items", str(tmp_path / "i.csv"), "--interactions",
                     str(tmp_path / "x.csv"), "--horizon", "100", "--arms", "5", "--dim", "3",
                     "--algo", "cmlb,random", "--out", str(tmp_path / "o")])
    assert code == 0
    lines = (tmp_path / "o" / "ratio.csv").read_text().splitlines()
    assert lines[0] == "algo,round,mean_ratio,lo95,hi95" and len(lines) == 1 + 2 * 100
    (tmp_path / "bad.csv").write_text("u,missing\n")
    assert cli.main(["replay-offline", "--items", str(tmp_path / "i.csv"), "--interactions",
                     str(tmp_path / "bad.csv"), "--out", str(tmp_path / "o2")]) == 3
