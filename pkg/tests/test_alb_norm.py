import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hetbandits import alb_norm, bandit
from hetbandits.alb_norm import AlbBank, AlbState, alb_epoch_boundary, alb_init, alb_observe, alb_step
from hetbandits.bandit import RidgeState


@pytest.mark.parametrize("horizon,expected", [(100, 10), (1, 1), (50, 8), (2, 2), (101, 11)])
def test_first_epoch_len(horizon, expected):
    assert alb_norm.first_epoch_len(horizon) == expected
    assert alb_init(horizon, 0.1, 3).epoch_len == expected


def test_init_state():
    s = alb_init(100, 0.2, 3)
    assert (s.epoch, s.b, s.delta_i, s.steps) == (1, 1.0, 0.2, 0)
    assert s.inner.norm_bound == 1.0 and s.inner.delta == 0.2
    with pytest.raises(ValueError):
        alb_init(100, 1.5, 3)


def test_boundary_zero_radius_gives_estimate_norm():
    inner = RidgeState(2, 1.0, np.diag([2.0, 2.0]), np.array([0.6, 0.8]), t=3, noise_scale=0.0, norm_bound=0.0)
    state = AlbState(1, 0.0, 10, 0.1, inner, steps=10)
    assert bandit.confidence_radius(inner) == 0.0
    assert math.isclose(alb_epoch_boundary(state).b, 0.5)


def test_boundary_fresh_inner_gives_radius_over_sqrt_lam():
    state = alb_init(100, 0.1, 3, lam=4.0)
    r = bandit.confidence_radius(state.inner)
    assert math.isclose(r, math.sqrt(2 * math.log(10)) + 2.0)
    assert math.isclose(alb_epoch_boundary(state).b, r / 2.0)


def test_boundary_doubles_and_halves():
    s = alb_init(100, 0.4, 2)
    s1 = alb_epoch_boundary(s)
    s2 = alb_epoch_boundary(s1)
    assert [s.epoch_len, s1.epoch_len, s2.epoch_len] == [10, 20, 40]
    assert [s1.delta_i, s2.delta_i] == [0.2, 0.1]
    assert s2.epoch == 3 and s2.inner.t == 0
    assert s2.inner.norm_bound == s2.b and s2.inner.delta == s2.delta_i


def test_step_matches_plain_oful_and_single_arm(rng):
    s = alb_init(100, 0.1, 3)
    ctx = rng.standard_normal((5, 3))
    arm, same = alb_step(s, ctx)
    assert same is s
    assert arm == bandit.select_arm(RidgeState.fresh(3, 1.0, 1.0, 0.1, 1.0), ctx)
    assert alb_step(s, ctx[:1])[0] == 0


def test_step_invariant_to_b_on_equal_norm_arms():
    ctx = np.array([[0.6, 0.8], [0.8, -0.6], [-1.0, 0.0]])
    for b in (0.1, 1.0, 10.0):
        s = alb_init(100, 0.1, 2)
        s = AlbState(1, b, s.epoch_len, s.delta_i, RidgeState.fresh(2, norm_bound=b))
        assert alb_step(s, ctx)[0] == 0


def test_observe_counts_steps():
    s = alb_init(4, 0.1, 2)
    s = alb_observe(s, np.array([1.0, 0.0]), 1.0)
    s = alb_observe(s, np.array([0.0, 1.0]), 0.0)
    assert s.steps == 2 and s.epoch_done and s.inner.t == 2


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 10_000), st.floats(0.01, 0.99), st.integers(0, 6))
def test_schedule_closed_forms(horizon, delta, k):
    s = alb_init(horizon, delta, 2)
    for _ in range(k):
        s = alb_epoch_boundary(s)
    assert s.epoch_len == 2**k * math.ceil(math.sqrt(horizon))
    assert s.delta_i == delta / 2**k
    sched = alb_norm.epoch_schedule(horizon, delta)
    assert sum(length for _, length, _ in sched) == horizon
    assert sched[0][1] == min(math.ceil(math.sqrt(horizon)), horizon)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 5), st.integers(1, 30))
def test_refined_norm_at_least_estimate_norm(seed, d, n):
    rng = np.random.default_rng(seed)
    s = alb_init(100, 0.1, d)
    for _ in range(n):
        s = alb_observe(s, rng.standard_normal(d), float(rng.standard_normal()))
    assert alb_epoch_boundary(s).b >= np.linalg.norm(bandit.estimate(s.inner))


def test_bank_matches_single_state_functions():
    rng = np.random.default_rng(8)
    n, d, horizon = 3, 3, 40
    bank = AlbBank(n, d, horizon, 0.3)
    states = [alb_init(horizon, 0.3, d) for _ in range(n)]
    for _ in range(horizon):
        ctx = rng.standard_normal((4, d)) / 2
        ys = rng.standard_normal(n)
        arms = bank.select(ctx)
        single = [alb_step(s, ctx)[0] for s in states]
        assert list(arms) == single
        bank.observe(ctx[arms], ys)
        states = [alb_observe(s, ctx[a], y) for s, a, y in zip(states, arms, ys)]
        states = [alb_epoch_boundary(s) if s.epoch_done else s for s in states]
    assert bank.epoch == states[0].epoch
    np.testing.assert_allclose(bank.b, [s.b for s in states], rtol=1e-9)
    assert len(bank.b_history) == bank.epoch


def test_bank_without_reset_keeps_statistics():
    bank = AlbBank(1, 2, 9, 0.3, reset_each_epoch=False)
    for _ in range(3):
        bank.observe(np.array([[1.0, 0.0]]), np.array([1.0]))
    assert bank.epoch == 2 and bank.inner.t[0] == 3
    reset = AlbBank(1, 2, 9, 0.3)
    for _ in range(3):
        reset.observe(np.array([[1.0, 0.0]]), np.array([1.0]))
    assert reset.inner.t[0] == 0
