import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from helpers import random_strategy_rows
from rsgame.matrix_game import MatrixGame, game_value
from rsgame.model import StationaryStrategy, uniform_strategy
from rsgame.oracle import (exact_exp_cost, exact_exp_cost_path, grid_maximin, grid_minimax,
                           perron_growth, spectral_radius)
from rsgame.transform import CostTable, build_cost_table


def test_exp_cost_trivial(models):
    t1 = models["t1"]
    u1, u2 = uniform_strategy(t1, 1), uniform_strategy(t1, 2)
    table = CostTable((np.array([[0.3]]),))
    assert exact_exp_cost(t1, table, u1, u2, 0, 0) == 0.0
    assert exact_exp_cost(t1, table, u1, u2, 0, 37) == pytest.approx(37 * t1.theta * 0.3, rel=1e-13)
    with pytest.raises(ValueError):
        exact_exp_cost(t1, table, u1, u2, 0, 10_001)


@pytest.mark.parametrize("name", ["t3", "t4"])
def test_growth_converges_to_perron(models, name):
    m = models[name]
    table = build_cost_table(m, 1, 0.4)
    u1, u2 = uniform_strategy(m, 1), uniform_strategy(m, 2)
    logs = exact_exp_cost_path(m, table, u1, u2, 0, 201)
    rate = (logs[201] - logs[200]) / m.theta
    assert rate == pytest.approx(perron_growth(m, table, u1, u2), abs=1e-9)
    assert logs[200] == pytest.approx(exact_exp_cost(m, table, u1, u2, 0, 200), abs=1e-12)


def test_spectral_radius_examples():
    assert spectral_radius(np.eye(3)) == pytest.approx(1.0, abs=1e-13)
    assert spectral_radius([[0, 2], [2, 0]]) == pytest.approx(2.0, abs=1e-12)
    assert spectral_radius(np.diag([1.0, 2.0]) @ np.full((2, 2), 0.5)) == pytest.approx(1.5, abs=1e-12)
    with pytest.raises(ValueError):
        spectral_radius(np.zeros((2, 2)))
    with pytest.raises(ValueError):
        spectral_radius([[1.0, -1.0], [0.0, 1.0]])


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 6))
def test_spectral_radius_random_positive(seed, n):
    A = np.random.default_rng(seed).uniform(0.01, 3.0, size=(n, n))
    assert spectral_radius(A) == pytest.approx(max(abs(np.linalg.eigvals(A))), rel=1e-11)


def test_grid_examples():
    assert abs(grid_minimax(MatrixGame([[1, -1], [-1, 1]]), 1001)) <= 2e-3
    assert grid_minimax(MatrixGame([[1, 2], [3, 4]]), 101) == 2.0
    assert grid_minimax(MatrixGame([[0, 2], [3, 1]]), 1001) == pytest.approx(1.5, abs=2e-3)


def test_grid_guards():
    with pytest.raises(ValueError):
        grid_minimax(MatrixGame(np.ones((5, 2))), 101)
    with pytest.raises(ValueError):
        grid_minimax(MatrixGame(np.ones((2, 2))), 100)
    with pytest.raises(ValueError):
        grid_maximin(MatrixGame(np.ones((1, 2))), 101)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 4), st.integers(2, 4))
def test_grid_sandwich(seed, m, n):
    M = np.random.default_rng(seed).uniform(-1, 1, size=(m, n))
    game = MatrixGame(M)
    points = 101
    hi, lo, v = grid_minimax(game, points), grid_maximin(game, points), game_value(game)
    assert lo - 1e-12 <= v <= hi + 1e-12
    step = 1.0 / (points - 1)
    assert hi - v <= (m - 1) * step * np.ptp(M) + 1e-12
    assert v - lo <= (n - 1) * step * np.ptp(M) + 1e-12


def test_perron_growth_random_pairs(models):
    m = models["t3"]
    rng = np.random.default_rng(0)
    table = build_cost_table(m, 1, 1.0)
    for _ in range(5):
        s1 = StationaryStrategy(tuple(random_strategy_rows(rng, [2, 2])))
        s2 = StationaryStrategy(tuple(random_strategy_rows(rng, [2, 2])))
        logs = exact_exp_cost_path(m, table, s1, s2, 1, 400)
        assert (logs[-1] - logs[-2]) / m.theta == pytest.approx(perron_growth(m, table, s1, s2), abs=1e-9)
