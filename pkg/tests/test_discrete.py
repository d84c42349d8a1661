import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import linprog

from helpers import random_model
from rsgame.discrete import (SolverFailure, discounted_fixed_point, evaluate_strategies,
                             optimality_residual, solve_discrete_game, solve_discrete_mdp)
from rsgame.evaluation import evaluation_mu
from rsgame.matrix_game import MatrixGame, game_value
from rsgame.model import StationaryStrategy, model_from_dict, uniform_strategy
from rsgame.oracle import grid_minimax, perron_growth, pure_strategies, spectral_radius
from rsgame.transform import CostTable, build_cost_table


def const_table(model, c):
    return CostTable(tuple(np.full(model.shape(i), c) for i in range(model.n_states)))


def random_table(model, rng, scale=1.0):
    return CostTable(tuple(rng.uniform(-scale, scale, size=model.shape(i)) for i in range(model.n_states)))


def lp_value(M):
    """Value of min-row/max-column game via HiGHS (independent of the in-house simplex)."""
    m, n = M.shape
    c = np.r_[np.zeros(m), 1.0]
    A = np.c_[M.T, -np.ones(n)]
    res = linprog(c, A_ub=A, b_ub=np.zeros(n), A_eq=[np.r_[np.ones(m), 0.0]], b_eq=[1.0],
                  bounds=[(0, None)] * m + [(None, None)], method="highs")
    return res.fun


def test_discounted_constant(models):
    m = models["t3"]
    for beta in (0.3, 0.9):
        V = discounted_fixed_point(m, const_table(m, 0.7), beta)
        assert np.allclose(V, 0.7 / (1 - beta), rtol=1e-11)
    t1 = models["t1"]
    V = discounted_fixed_point(t1, const_table(t1, -1.25), 0.5)
    assert V[0] == pytest.approx(-2.5, rel=1e-12)
    with pytest.raises(ValueError):
        discounted_fixed_point(t1, const_table(t1, 0.0), 1.0)


def _lp_operator(m, table, W):
    out = []
    for i in range(m.n_states):
        L = m.theta * table[i] + np.log(m.transition[i] @ np.exp(m.theta * W))
        off = L.max()
        out.append((math.log(lp_value(np.exp(L - off))) + off) / m.theta)
    return np.array(out)


def test_discounted_matches_independent_iteration(models):
    m = models["t3"]
    table = build_cost_table(m, 1, 0.0)
    beta = 0.9
    V = discounted_fixed_point(m, table, beta)
    W = np.zeros(m.n_states)
    for _ in range(10_000):
        new = _lp_operator(m, table, beta * W)
        done = np.max(np.abs(new - W)) < 1e-12
        W = new
        if done:
            break
    assert np.allclose(V, W, atol=1e-10)


def test_discounted_fixed_point_residual(models):
    # Contraction: |V - V*| <= |T(beta V) - V| / (1 - beta).
    m = models["t3"]
    table = build_cost_table(m, 1, 0.0)
    beta = 0.99
    V = discounted_fixed_point(m, table, beta)
    defect = np.max(np.abs(_lp_operator(m, table, beta * V) - V))
    assert defect / (1 - beta) < 1e-8
    assert np.max(np.abs(V)) <= table.sup_norm() / (1 - beta) + 1e-9


def test_game_constant(models):
    m = models["t3"]
    sol = solve_discrete_game(m, const_table(m, 1.3))
    assert sol.mu == pytest.approx(1.3, abs=1e-12)
    assert np.allclose(sol.h, 0.0, atol=1e-12)


def test_game_action_independent_is_perron(models):
    m = models["t3"]
    d = np.array([0.4, -0.3])
    table = CostTable(tuple(np.full(m.shape(i), d[i]) for i in range(m.n_states)))
    u1, u2 = uniform_strategy(m, 1), uniform_strategy(m, 2)
    # action-independent costs but action-dependent transitions: pin transitions per state first
    P = np.array([m.transition[i][0, 0] for i in range(m.n_states)])
    fixed = model_from_dict({
        "states": list(m.states), "theta": m.theta, "horizon_bound": m.horizon_bound,
        "actions1": {s: list(m.actions1[i]) for i, s in enumerate(m.states)},
        "actions2": {s: list(m.actions2[i]) for i, s in enumerate(m.states)},
        "running_cost1": {s: {a: {b: [0.0] for b in m.actions2[i]} for a in m.actions1[i]}
                          for i, s in enumerate(m.states)},
        "sojourn": {s: {a: {b: {"kind": "atoms", "atoms": [[1.0, 1.0]]} for b in m.actions2[i]}
                        for a in m.actions1[i]} for i, s in enumerate(m.states)},
        "transition": {s: {a: {b: {t: float(P[i, j]) for j, t in enumerate(m.states)}
                               for b in m.actions2[i]} for a in m.actions1[i]}
                       for i, s in enumerate(m.states)},
    })
    sol = solve_discrete_game(fixed, table)
    Q = np.exp(m.theta * d)[:, None] * P
    assert sol.mu == pytest.approx(math.log(spectral_radius(Q)) / m.theta, abs=1e-9)
    assert sol.mu == pytest.approx(perron_growth(fixed, table, u1, u2), abs=1e-9)


def test_one_state_game_is_log_value(models):
    t2 = models["t2"]
    sol = solve_discrete_game(t2, build_cost_table(t2, 1, 0.0))
    E = MatrixGame(np.exp([[0.0, 2.0], [3.0, 1.0]]))
    assert sol.mu == pytest.approx(math.log(game_value(E)), abs=1e-12)
    assert abs(math.exp(sol.mu) - grid_minimax(E, 1001)) < 2e-3 * np.ptp(E.entries)


def test_mdp_singleton_opponent_matches_game(models):
    t1 = models["t1"]
    table = build_cost_table(t1, 1, 1.0)
    a = solve_discrete_mdp(t1, table, uniform_strategy(t1, 2), 1)
    b = solve_discrete_game(t1, table)
    assert a.mu == pytest.approx(b.mu, abs=1e-12)
    assert a.strategy1.is_pure() and a.strategy2 is None


def test_mdp_constant(models):
    m = models["t3"]
    sol = solve_discrete_mdp(m, const_table(m, -0.4), uniform_strategy(m, 1), 2)
    assert sol.mu == pytest.approx(-0.4, abs=1e-12)
    assert np.allclose(sol.h, 0.0, atol=1e-12)


@pytest.mark.parametrize("player", [1, 2])
@pytest.mark.parametrize("g", [0.0, 2.0])
def test_mdp_matches_enumeration(models, player, g):
    m = models["t3"]
    table = build_cost_table(m, 1, g)
    opp = uniform_strategy(m, 3 - player)
    sol = solve_discrete_mdp(m, table, opp, player)
    rates = []
    for s in pure_strategies(m, player):
        pair = (s, opp) if player == 1 else (opp, s)
        rates.append(perron_growth(m, table, *pair))
    assert sol.mu == pytest.approx(min(rates), abs=1e-9)
    chosen = sol.strategy1 if player == 1 else sol.strategy2
    pair = (chosen, opp) if player == 1 else (opp, chosen)
    assert perron_growth(m, table, *pair) == pytest.approx(min(rates), abs=1e-9)
    assert sol.h[m.reference_state] == 0.0
    top = solve_discrete_mdp(m, table, opp, player, maximize=True)
    assert top.mu == pytest.approx(max(rates), abs=1e-9)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(-3, 3))
def test_shift_equivariance(seed, c):
    rng = np.random.default_rng(seed)
    m = random_model(rng, n_states=3)
    D = random_table(m, rng)
    a, b = solve_discrete_game(m, D), solve_discrete_game(m, D.shift(c))
    assert abs(b.mu - a.mu - c) <= 1e-8
    assert np.allclose(a.h, b.h, atol=1e-8)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_nonexpansive_and_monotone(seed):
    rng = np.random.default_rng(seed)
    m = random_model(rng, n_states=3)
    D = random_table(m, rng)
    bump = CostTable(tuple(D[i] + rng.uniform(0, 0.5, size=D[i].shape) for i in range(m.n_states)))
    other = random_table(m, rng)
    mu_D = solve_discrete_game(m, D).mu
    assert mu_D <= solve_discrete_game(m, bump).mu + 1e-9
    assert abs(mu_D - solve_discrete_game(m, other).mu) <= D.distance(other) + 1e-9


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_saddle_strategies_evaluate_to_mu(seed):
    rng = np.random.default_rng(seed)
    m = random_model(rng, n_states=2, m=3, n=2)
    D = random_table(m, rng)
    sol = solve_discrete_game(m, D)
    assert evaluation_mu(m, D, sol.strategy1, sol.strategy2) == pytest.approx(sol.mu, abs=1e-7)
    assert sol.residual <= 1e-8
    assert optimality_residual(m, D, sol.mu, sol.h) <= 1e-8
    assert sol.h.max() == 0.0


def test_vanishing_discount_agrees_with_rvi(models):
    m = models["t3"]
    table = build_cost_table(m, 1, 1.0)
    a = solve_discrete_game(m, table, method="rvi")
    b = solve_discrete_game(m, table, method="vanishing_discount", tol=1e-9)
    assert b.method == "vanishing_discount"
    assert b.mu == pytest.approx(a.mu, abs=1e-7)
    assert np.allclose(a.h, b.h, atol=1e-5)


def periodic_model():
    return model_from_dict({
        "states": ["p", "q"], "theta": 0.5, "horizon_bound": 1.0,
        "actions1": {"p": ["a"], "q": ["a"]}, "actions2": {"p": ["b"], "q": ["b"]},
        "running_cost1": {"p": {"a": {"b": [1.0]}}, "q": {"a": {"b": [0.0]}}},
        "sojourn": {s: {"a": {"b": {"kind": "atoms", "atoms": [[1.0, 1.0]]}}} for s in "pq"},
        "transition": {"p": {"a": {"b": {"q": 1.0}}}, "q": {"a": {"b": {"p": 1.0}}}},
    })


def test_periodic_chain_converges():
    m = periodic_model()
    table = CostTable((np.array([[1.0]]), np.array([[0.0]])))
    sol = solve_discrete_game(m, table)
    assert sol.mu == pytest.approx(0.5, abs=1e-9)
    assert sol.residual <= 1e-8
    ev = evaluate_strategies(m, table, uniform_strategy(m, 1), uniform_strategy(m, 2))
    assert ev.mu == pytest.approx(0.5, abs=1e-9)


def test_rvi_only_reports_failure():
    m = periodic_model()
    table = CostTable((np.array([[1.0]]), np.array([[0.0]])))
    with pytest.raises(SolverFailure) as err:
        solve_discrete_game(m, table, method="rvi", max_sweeps=5)
    assert "last_span" in err.value.diagnostics


def test_evaluate_strategies_matches_perron(models):
    m = models["t3"]
    rng = np.random.default_rng(7)
    table = build_cost_table(m, 1, 1.5)
    s1 = StationaryStrategy(tuple(rng.dirichlet([1, 1]) for _ in range(2)))
    s2 = StationaryStrategy(tuple(rng.dirichlet([1, 1]) for _ in range(2)))
    ev = evaluate_strategies(m, table, s1, s2)
    assert ev.mu == pytest.approx(perron_growth(m, table, s1, s2), abs=1e-9)
    assert ev.h[m.reference_state] == 0.0
