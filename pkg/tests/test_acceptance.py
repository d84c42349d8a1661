"""Acceptance gate: nine end-to-end criteria, each printed as one PASS/FAIL line.

Run standalone with ``python3 tests/test_acceptance.py``.
"""
import contextlib
import dataclasses
import json
import math
import sys
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from helpers import random_model, random_strategy_rows
from rsgame import catalog
from rsgame.cli import main
from rsgame.discrete import evaluate_strategies, solve_discrete_game
from rsgame.matrix_game import MatrixGame
from rsgame.model import StationaryStrategy, uniform_strategy
from rsgame.nash import HittingTimeDivergence, best_response, hitting_time_h, solve_nash, verify_nash
from rsgame.oracle import exact_exp_cost_path, grid_minimax, perron_growth, smdp_value_by_enumeration
from rsgame.simulator import estimate_J, simulate_trajectory, tail_diagnostic
from rsgame.transform import CostTable, build_cost_table
from rsgame.zero_sum import solve_zero_sum, verify_saddle


@pytest.fixture(scope="module")
def m():
    return {name: catalog.load(name) for name in catalog.names()}


@pytest.fixture(scope="module")
def zs(m):
    return {name: solve_zero_sum(m[name]) for name in ("t2", "t3")}


@contextlib.contextmanager
def criterion(number, title, budget=None):
    """Time the block, then record one summary line whatever the outcome."""
    notes = []
    start = time.perf_counter()
    ok = False
    try:
        yield notes
        elapsed = time.perf_counter() - start
        if budget is not None:
            notes.append(f"{elapsed:.2f}s of {budget:g}s")
            assert elapsed < budget, f"took {elapsed:.2f}s, budget {budget}s"
        else:
            notes.append(f"{elapsed:.2f}s")
        ok = True
    finally:
        line = f"[{'PASS' if ok else 'FAIL'}] {number}. {title}: " + "; ".join(notes)
        ACCEPTANCE_LINES.append(line)
        print(line)


def shift_mass(strategy, amount=0.2):
    """Move ``amount`` of probability from the likeliest to the least likely action in every state."""
    rows = []
    for p in strategy.probs:
        q = p.copy()
        hi, lo = int(np.argmax(p)), int(np.argmin(p))
        q[hi] -= amount
        q[lo] += amount
        rows.append(q)
    return StationaryStrategy(tuple(rows))


def test_1_closed_form(capsys):
    with criterion(1, "closed-form value on T1", budget=1.0) as notes:
        code = main(["solve-zs", "t1"])
        doc = json.loads(capsys.readouterr().out)
        assert code == 0
        notes.append(f"g={doc['g']!r} residual={doc['residual']:.1e}")
        assert abs(doc["g"] - 4.0) <= 1e-9
        assert all(abs(v) <= 1e-9 for v in doc["h"].values())
        assert doc["residual"] <= 1e-8


def test_2_deterministic_reduction(capsys, m):
    with criterion(2, "deterministic-sojourn reduction on T2", budget=5.0) as notes:
        t2 = m["t2"]
        assert main(["solve-zs", "t2"]) == 0
        g = json.loads(capsys.readouterr().out)["g"]
        C = np.array([[0.0, 2.0], [3.0, 1.0]])
        mu_C = solve_discrete_game(t2, CostTable((C,))).mu
        grid = math.log(grid_minimax(MatrixGame(np.exp(t2.theta * C)), 1001)) / t2.theta
        notes.append(f"g={g:.10f} mu_C={mu_C:.10f} grid={grid:.6f}")
        assert abs(g - mu_C) <= 1e-8
        assert abs(g - grid) <= 2e-3
        assert abs(mu_C - grid) <= 2e-3


def test_3_saddle_certificate(m, zs):
    with criterion(3, "saddle certificates on T2 and T3", budget=30.0) as notes:
        for name in ("t2", "t3"):
            model, rep = m[name], zs[name]
            gap1, gap2 = verify_saddle(model, rep)
            notes.append(f"{name} gaps=({gap1:.1e}, {gap2:.1e})")
            assert -1e-7 <= gap1 <= 1e-7 and -1e-7 <= gap2 <= 1e-7
            # a perturbed strategy hands the opponent a profitable deviation (negative gap)
            s1, s2 = shift_mass(rep.strategy1), shift_mass(rep.strategy2)
            assert s1.distance(rep.strategy1) == pytest.approx(0.2, abs=1e-12)
            assert s2.distance(rep.strategy2) == pytest.approx(0.2, abs=1e-12)
            _, p2 = verify_saddle(model, dataclasses.replace(rep, strategy1=s1))
            p1, _ = verify_saddle(model, dataclasses.replace(rep, strategy2=s2))
            notes.append(f"{name} perturbed=({p1:.1e}, {p2:.1e})")
            assert p2 < -1e-4 and p1 < -1e-4


def test_4_policy_evaluation_routes(m, zs):
    with criterion(4, "policy evaluation: iteration vs recursion vs Perron on T3") as notes:
        t3 = m["t3"]
        rng = np.random.default_rng(4)
        worst = 0.0
        for k in range(20):
            s1 = StationaryStrategy(tuple(random_strategy_rows(rng, [2, 2])))
            s2 = StationaryStrategy(tuple(random_strategy_rows(rng, [2, 2])))
            g = zs["t3"].g if k % 2 == 0 else float(rng.uniform(-1.0, 4.0))
            table = build_cost_table(t3, 1, g, immediate=True)
            it = evaluate_strategies(t3, table, s1, s2).mu
            logs = exact_exp_cost_path(t3, table, s1, s2, t3.reference_state, 2000)
            rec = (logs[2000] - logs[1999]) / t3.theta
            per = perron_growth(t3, table, s1, s2)
            worst = max(worst, abs(it - rec), abs(it - per), abs(rec - per))
        notes.append(f"20 pairs, max disagreement {worst:.1e}")
        assert worst <= 1e-7


def test_5_monte_carlo(m, zs):
    with criterion(5, "Monte-Carlo consistency on T3 and T1", budget=60.0) as notes:
        t3, rep = m["t3"], zs["t3"]
        est = estimate_J(t3, rep.strategy1, rep.strategy2, t3.reference_state, 200.0, 100_000,
                         seed=0, player=1, zero_sum=True)
        lo, hi = est.ci99
        notes.append(f"T3 g={rep.g:.6f} ci99=[{lo:.6f}, {hi:.6f}]")
        assert lo <= rep.g <= hi
        t1 = m["t1"]
        u1, u2 = uniform_strategy(t1, 1), uniform_strategy(t1, 2)
        for t in (50.0, 7.3, 0.25):
            n_t = simulate_trajectory(t1, u1, u2, 0, t, seed=0).n_t
            assert n_t == math.floor(t / 0.5)
            point = estimate_J(t1, u1, u2, 0, t, 100, seed=0, zero_sum=True).point
            assert point == (n_t + 1) * 2 / t
        notes.append("T1 point estimates exact")


def test_6_transform_and_operator_properties():
    with criterion(6, "Lipschitz / shift / monotone suite, 200 cases") as notes:
        rng = np.random.default_rng(6)
        lip = shift = mono = 0
        for _ in range(200):
            model = random_model(rng, n_states=int(rng.integers(1, 4)), m=int(rng.integers(1, 4)),
                                 n=int(rng.integers(1, 4)))
            g, g2 = rng.uniform(-3, 3, size=2)
            D, D2 = build_cost_table(model, 1, g), build_cost_table(model, 1, g2)
            if D.distance(D2) > model.horizon_bound * abs(g - g2) + 1e-9:
                lip += 1
            c = float(rng.uniform(-5, 5))
            mu = solve_discrete_game(model, D).mu
            if abs(solve_discrete_game(model, D.shift(c)).mu - mu - c) > 1e-8:
                shift += 1
            bump = CostTable(tuple(D[i] + rng.uniform(0, 1, size=D[i].shape) * (rng.random() < 0.7)
                                   for i in range(model.n_states)))
            if solve_discrete_game(model, bump).mu < mu - 1e-12:
                mono += 1
        notes.append(f"violations: lipschitz={lip} shift={shift} monotone={mono}")
        assert lip == shift == mono == 0


def test_7_nash(m):
    with criterion(7, "Nash certificates on T4 and its decoupled variant", budget=120.0) as notes:
        t4 = m["t4"]
        rep = solve_nash(t4, damping=0.5, max_iters=500)
        notes.append(f"T4 iters={rep.iterations} gaps=({rep.gap1:.1e}, {rep.gap2:.1e})")
        assert rep.converged and rep.iterations <= 500
        assert abs(rep.gap1) <= 1e-6 and abs(rep.gap2) <= 1e-6
        _, _, v1, v2 = verify_nash(t4, rep.strategy1, rep.strategy2)
        assert abs(v1) <= 1e-6 and abs(v2) <= 1e-6

        dec = m["t4_decoupled"]
        rep = solve_nash(dec, damping=0.5, max_iters=500)
        assert rep.converged and rep.iterations <= 2
        diff = 0.0
        for opp2 in (rep.strategy2, uniform_strategy(dec, 2)):
            diff = max(diff, abs(rep.g1 - smdp_value_by_enumeration(dec, opp2, 1)[0]))
        for opp1 in (rep.strategy1, uniform_strategy(dec, 1)):
            diff = max(diff, abs(rep.g2 - smdp_value_by_enumeration(dec, opp1, 2)[0]))
        notes.append(f"decoupled iters={rep.iterations} |g - enumeration|={diff:.1e}")
        assert diff <= 1e-7


def test_8_hitting_time(m, zs):
    with criterion(8, "hitting-time representation on T3 and T4") as notes:
        t3, t4 = m["t3"], m["t4"]
        nash = solve_nash(t4)
        cases = [(t3, zs["t3"].strategy2, 1), (t4, nash.strategy2, 1), (t4, nash.strategy1, 2)]
        worst = 0.0
        for model, opp, player in cases:
            br = best_response(model, opp, player)
            W = hitting_time_h(model, opp, player, br.g)
            keep = np.arange(model.n_states) != model.reference_state
            worst = max(worst, float(np.max(np.abs(W[keep] - br.h[keep]))))
        notes.append(f"max |h_hit - h| = {worst:.1e}")
        assert worst <= 1e-6
        raised = 0
        for model, opp, player in cases:
            br = best_response(model, opp, player)
            with pytest.raises(HittingTimeDivergence, match="hitting-time representation unavailable"):
                hitting_time_h(model.with_theta(50 * model.theta), opp, player, br.g)
            raised += 1
        notes.append(f"theta x50 diverges in {raised}/{len(cases)} cases")


def test_9_tail_bound(m):
    with criterion(9, "jump-count tail bound on T3") as notes:
        rep = tail_diagnostic(m["t3"], alpha=0.5, t=20.0, n_paths=10_000, seed=0)
        notes.append(f"r_alpha={rep.r_alpha} rows={len(rep.rows)} violations={rep.violations}")
        assert rep.violations == 0


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
