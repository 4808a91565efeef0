import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hetbandits import linalg
from hetbandits.linalg import NotPositiveDefinite

from conftest import random_spd


def test_solve_examples():
    np.testing.assert_allclose(linalg.solve(np.eye(2), [3, 4]), [3, 4])
    np.testing.assert_allclose(linalg.solve(np.diag([2.0, 4.0]), [2, 4]), [1, 1])
    np.testing.assert_allclose(linalg.solve(np.array([[2.0, 1], [1, 2]]), [3, 3]), [1, 1])


def test_solve_rejects_indefinite():
    with pytest.raises(NotPositiveDefinite):
        linalg.solve(np.array([[1.0, 2], [2, 1]]), [1, 1])
    with pytest.raises(ValueError):
        linalg.solve(np.eye(2), [1, 2, 3])


def test_rank_one_update_examples():
    np.testing.assert_array_equal(linalg.rank_one_update(np.eye(2), [0, 0]), np.eye(2))
    np.testing.assert_array_equal(linalg.rank_one_update(np.eye(2), [1, 0]), np.diag([2.0, 1]))
    np.testing.assert_array_equal(linalg.rank_one_update(np.eye(2), [1, 1]), [[2, 1], [1, 2]])
    with pytest.raises(ValueError):
        linalg.rank_one_update(np.eye(2), [1, 0, 0])


def test_rank_one_update_does_not_mutate():
    m = np.eye(3)
    linalg.rank_one_update(m, [1.0, 2.0, 3.0])
    np.testing.assert_array_equal(m, np.eye(3))


def test_log_det_examples():
    assert linalg.log_det(np.eye(3)) == 0.0
    assert math.isclose(linalg.log_det(np.diag([math.e, math.e])), 2.0, rel_tol=1e-12)
    assert math.isclose(linalg.log_det(np.array([[2.0, 1], [1, 2]])), math.log(3), rel_tol=1e-12)
    with pytest.raises(NotPositiveDefinite):
        linalg.log_det(-np.eye(2))


def test_min_eigenvalue_examples():
    assert abs(linalg.min_eigenvalue(np.eye(4)) - 1) < 1e-12
    assert abs(linalg.min_eigenvalue(np.diag([5, 0.5])) - 0.5) < 1e-12
    assert abs(linalg.min_eigenvalue(np.array([[2.0, 1], [1, 2]])) - 1) < 1e-12


def test_ridge_matrix_matches_sequential_updates(rng):
    xs = rng.standard_normal((7, 3))
    v = 0.5 * np.eye(3)
    for x in xs:
        v = linalg.rank_one_update(v, x)
    np.testing.assert_allclose(linalg.ridge_matrix(3, 0.5, xs), v, rtol=1e-12)
    np.testing.assert_array_equal(linalg.ridge_matrix(2, 2.0), 2 * np.eye(2))


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 8), st.integers(0, 2**32 - 1))
def test_solve_reproduces_rhs(d, seed):
    rng = np.random.default_rng(seed)
    m = random_spd(rng, d)
    b = rng.standard_normal(d)
    x = linalg.solve(m, b)
    assert np.linalg.norm(m @ x - b) <= 1e-8 * (1 + np.linalg.norm(b))


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 8), st.integers(0, 2**32 - 1))
def test_determinant_lemma(d, seed):
    rng = np.random.default_rng(seed)
    m = random_spd(rng, d)
    x = rng.standard_normal(d)
    lhs = linalg.log_det(linalg.rank_one_update(m, x))
    rhs = linalg.log_det(m) + math.log1p(x @ np.linalg.solve(m, x))
    assert math.isclose(lhs, rhs, rel_tol=1e-8, abs_tol=1e-8)


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 6), st.floats(0.01, 10), st.integers(0, 30), st.integers(0, 2**32 - 1))
def test_min_eigenvalue_at_least_ridge(d, lam, n, seed):
    xs = np.random.default_rng(seed).standard_normal((n, d))
    v = linalg.ridge_matrix(d, lam, xs)
    assert linalg.is_symmetric(v)
    assert linalg.min_eigenvalue(v) >= lam - 1e-9 * max(1.0, np.abs(v).max())
