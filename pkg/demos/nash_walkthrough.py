"""
Nash walkthrough
================

Damped best-response iteration on a coordination-type game, and the
first-passage form of each player's bias.
"""
import numpy as np

from rsgame import catalog
from rsgame.nash import HittingTimeDivergence, best_response, hitting_time_h, solve_nash

t4 = catalog.load("t4")
rep = solve_nash(t4)
print("converged", rep.converged, "after", rep.iterations, "iteration(s)")
print("g1 =", rep.g1, " g2 =", rep.g2)
print("gaps", rep.gap1, rep.gap2)

###############################################################################
# Each bias vector can be rebuilt from first passages to the reference state.

for player, opp in ((1, rep.strategy2), (2, rep.strategy1)):
    br = best_response(t4, opp, player)
    W = hitting_time_h(t4, opp, player, br.g)
    print(f"player {player}: h = {np.round(br.h, 8)}  first-passage h = {np.round(W, 8)}")

###############################################################################
# Crank up the risk parameter and the first-passage series no longer sums.

br = best_response(t4, rep.strategy2, 1)
try:
    hitting_time_h(t4.with_theta(50 * t4.theta), rep.strategy2, 1, br.g)
except HittingTimeDivergence as exc:
    print("theta x50:", exc)
