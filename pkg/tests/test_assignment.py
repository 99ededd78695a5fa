import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from scipy.optimize import linear_sum_assignment

from gedkit.ged import assignment_cost, hungarian, lapjv

SOLVERS = [hungarian, lapjv]


def optimum(cost):
    r, c = linear_sum_assignment(cost)
    return cost[r, c].sum()


@st.composite
def square_matrices(draw, integer=False):
    n = draw(st.integers(1, 9))
    elements = st.integers(0, 5).map(float) if integer else st.floats(0, 100, allow_nan=False)
    return draw(arrays(np.float64, (n, n), elements=elements))


@pytest.mark.parametrize("solver", SOLVERS)
@settings(max_examples=150, deadline=None)
@given(cost=st.one_of(square_matrices(), square_matrices(integer=True)))
def test_matches_scipy(solver, cost):
    col = solver(cost)
    assert sorted(col.tolist()) == list(range(len(cost)))
    assert assignment_cost(cost, col) == pytest.approx(optimum(cost), abs=1e-9)


@pytest.mark.parametrize("solver", SOLVERS)
def test_degenerate_matrices(solver):
    for cost in (np.zeros((5, 5)), np.ones((4, 4)), np.array([[7.0]]), np.eye(6), 1 - np.eye(6)):
        assert assignment_cost(cost, solver(cost)) == pytest.approx(optimum(cost))


@pytest.mark.parametrize("solver", SOLVERS)
def test_large_forbidden_entries(solver, rng):
    cost = rng.random((12, 12))
    cost[rng.random((12, 12)) < 0.5] = 1e9
    np.fill_diagonal(cost, rng.random(12))
    assert assignment_cost(cost, solver(cost)) == pytest.approx(optimum(cost))


def test_hungarian_and_vj_agree_on_value(rng):
    for _ in range(50):
        cost = rng.integers(0, 3, size=(8, 8)).astype(float)
        assert assignment_cost(cost, hungarian(cost)) == assignment_cost(cost, lapjv(cost))


@pytest.mark.parametrize("solver", SOLVERS)
def test_rejects_non_square(solver):
    with pytest.raises(ValueError):
        solver(np.ones((2, 3)))
