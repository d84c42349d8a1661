"""
Jump counts and policy evaluation
=================================

How many jumps fit in ``[0, t]``, and three ways to score a fixed pair.
"""
import numpy as np

from rsgame import catalog
from rsgame.discrete import evaluate_strategies
from rsgame.model import uniform_strategy
from rsgame.oracle import exact_exp_cost_path, perron_growth
from rsgame.simulator import tail_diagnostic
from rsgame.transform import build_cost_table

t3 = catalog.load("t3")
rep = tail_diagnostic(t3, alpha=0.5, t=20.0, n_paths=10_000, seed=0)
print("r_alpha =", rep.r_alpha, " violations =", rep.violations)
for row in rep.rows[:: max(1, len(rep.rows) // 8)]:
    print(f"  n={row['n']:3d}  P[N_t >= n] ~ {row['empirical']:.4f}  bound {row['bound']:.3g}")

###############################################################################
# Iteration, the finite-horizon recursion and the Perron root agree.

u1, u2 = uniform_strategy(t3, 1), uniform_strategy(t3, 2)
table = build_cost_table(t3, 1, 2.0)
logs = exact_exp_cost_path(t3, table, u1, u2, 0, 2000)
print("iteration", evaluate_strategies(t3, table, u1, u2).mu)
print("recursion", (logs[-1] - logs[-2]) / t3.theta)
print("perron   ", perron_growth(t3, table, u1, u2))
print("early increments", np.round(np.diff(logs[:6]) / t3.theta, 5))
