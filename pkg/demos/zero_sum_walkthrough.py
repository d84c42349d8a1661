"""
Zero-sum walkthrough
====================

Solve a two-state game, check the saddle pair, then confirm the value by
simulation.
"""
import numpy as np

from rsgame import catalog
from rsgame.oracle import grid_minimax
from rsgame.matrix_game import MatrixGame
from rsgame.simulator import estimate_J
from rsgame.zero_sum import mu_of_g, solve_zero_sum, verify_saddle

###############################################################################
# The one-state warm-up. With a unit deterministic sojourn the value is the
# log of an ordinary matrix game on ``exp(theta * C)``.

t2 = catalog.load("t2")
rep = solve_zero_sum(t2)
C = np.array([[0.0, 2.0], [3.0, 1.0]])
print("T2 value          ", rep.g)
print("grid minimax      ", np.log(grid_minimax(MatrixGame(np.exp(C)), 1001)))

###############################################################################
# ``mu(D_g)`` falls as ``g`` grows; the value is where it crosses zero.

t3 = catalog.load("t3")
for g in np.linspace(1.0, 3.0, 5):
    print(f"g = {g:4.2f}   mu = {mu_of_g(t3, g):+.6f}")

rep = solve_zero_sum(t3)
print("T3 value", rep.g, "residual", rep.residual)
for name, p in zip(t3.states, rep.strategy1.probs):
    print("  player 1 at", name, np.round(p, 4))

###############################################################################
# Neither player gains from a stationary deviation.

print("gaps", verify_saddle(t3, rep))

###############################################################################
# A Monte-Carlo run at a moderate horizon lands close to the value.

est = estimate_J(t3, rep.strategy1, rep.strategy2, 0, 100.0, 20_000, seed=0)
print(f"J ~ {est.point:.4f}  99% CI [{est.ci99[0]:.4f}, {est.ci99[1]:.4f}]")
