"""Non-zero-sum game: best responses, damped best-response iteration, certificates.

Each player pays only its own running cost (no immediate cost). A stationary
best response to a fixed opponent is the root ``g`` of the single-controller
discrete problem built on ``D^m_g``; the pair iteration mixes both players
toward their pure best responses until neither can gain.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .discrete import _Operator, SolverFailure, solve_discrete_mdp
from .evaluation import evaluate_pair
from .model import (SCHEMA_VERSION, GameModel, StationaryStrategy, check_strategy, has_choice,
                    strategy_to_dict, uniform_strategy)
from .roots import find_decreasing_root
from .transform import build_cost_table

log = logging.getLogger(__name__)

NASH_TOL = 1e-6
HITTING_TOL = 1e-12
HITTING_MAX_ITER = 1_000_000


class HittingTimeDivergence(SolverFailure):
    pass


@dataclass
class BestResponse:
    g: float
    h: np.ndarray
    strategy: StationaryStrategy
    residual: float
    player: int


@dataclass
class NashReport:
    strategy1: StationaryStrategy
    strategy2: StationaryStrategy
    g1: float
    g2: float
    h1: np.ndarray
    h2: np.ndarray
    gap1: float
    gap2: float
    iterations: int
    converged: bool
    damping: float
    residual1: float = math.nan
    residual2: float = math.nan
    init: str = "uniform"
    history: list[tuple[float, float]] = field(default_factory=list, repr=False)

    def to_dict(self, model: GameModel) -> dict[str, Any]:
        states = model.states
        return {
            "schema_version": SCHEMA_VERSION,
            "g1": self.g1,
            "g2": self.g2,
            "h1": {s: float(v) for s, v in zip(states, self.h1)},
            "h2": {s: float(v) for s, v in zip(states, self.h2)},
            "strategy1": strategy_to_dict(model, self.strategy1, 1),
            "strategy2": strategy_to_dict(model, self.strategy2, 2),
            "gap1": self.gap1,
            "gap2": self.gap2,
            "residual1": self.residual1,
            "residual2": self.residual2,
            "converged": self.converged,
            "iterations": self.iterations,
            "damping": self.damping,
            "init": self.init,
            "certificate": "stationary deviations only",
            "model_hash": model.fingerprint(),
        }


def _player_table(model: GameModel, player: int, g: float):
    return build_cost_table(model, player, g, immediate=False)


def best_response(model: GameModel, opponent: StationaryStrategy, player: int,
                  g_hint: float = 0.0) -> BestResponse:
    """Optimal stationary reply of ``player`` (a cost minimizer) to ``opponent``."""
    check_strategy(model, opponent, 3 - player)
    state = {"h": None}

    def mu(g: float) -> float:
        sol = solve_discrete_mdp(model, _player_table(model, player, g), opponent, player,
                                 h0=state["h"])
        state["h"] = sol.h
        return sol.mu

    g = find_decreasing_root(mu, center=g_hint).root
    sol = solve_discrete_mdp(model, _player_table(model, player, g), opponent, player)
    strategy = sol.strategy1 if player == 1 else sol.strategy2
    op = _Operator(model, _player_table(model, player, g), "mdp", opponent=opponent,
                   controlled=player)
    residual = float(np.max(np.abs(op(sol.h) - sol.h)))
    return BestResponse(g, sol.h, strategy, residual, player)


def _gap(model: GameModel, g: float, opponent: StationaryStrategy, player: int) -> float:
    if not has_choice(model, player):
        return 0.0  # the only stationary strategy cannot deviate
    return g - best_response(model, opponent, player, g_hint=g).g


def verify_nash(model: GameModel, strategy1: StationaryStrategy,
                strategy2: StationaryStrategy) -> tuple[float, float, float, float]:
    """``(g1, g2, gap1, gap2)``; ``gap_m > 0`` means player ``m`` has a profitable deviation."""
    g1 = evaluate_pair(model, strategy1, strategy2, 1)
    g2 = evaluate_pair(model, strategy1, strategy2, 2)
    return g1, g2, _gap(model, g1, strategy2, 1), _gap(model, g2, strategy1, 2)


def coupled_residuals(model: GameModel, strategy1: StationaryStrategy,
                      strategy2: StationaryStrategy, br1: BestResponse,
                      br2: BestResponse) -> tuple[float, float]:
    """Defects of the coupled equations at ``(g^m, h^m, phi1, phi2)``.

    Each covers both the infimum equation and the requirement that the
    equilibrium strategy attains it.
    """
    out = []
    for player, br, own, other in ((1, br1, strategy1, strategy2), (2, br2, strategy2, strategy1)):
        table = _player_table(model, player, br.g)
        inf_op = _Operator(model, table, "mdp", opponent=other, controlled=player)
        fixed = (own, other) if player == 1 else (other, own)
        at_op = _Operator(model, table, "eval", fixed=fixed)
        out.append(max(float(np.max(np.abs(inf_op(br.h) - br.h))),
                       float(np.max(np.abs(at_op(br.h) - br.h)))))
    return out[0], out[1]


def solve_nash(model: GameModel, init1: StationaryStrategy | None = None,
               init2: StationaryStrategy | None = None, damping: float = 0.5,
               max_iters: int = 500, tol: float = NASH_TOL) -> NashReport:
    """Damped simultaneous best-response iteration.

    Each round computes both pure best responses to the current pair. If the
    current pair already has both gaps within ``tol`` it is returned; if the
    pure best-response pair itself certifies as an equilibrium it is adopted;
    otherwise both players move a fraction ``damping`` toward their best
    response. Non-convergence is reported, not raised.
    """
    if not 0.0 < damping <= 1.0:
        raise ValueError(f"damping must be in (0, 1], got {damping!r}")
    init = "uniform" if init1 is None and init2 is None else "user"
    phi1 = init1 if init1 is not None else uniform_strategy(model, 1)
    phi2 = init2 if init2 is not None else uniform_strategy(model, 2)
    check_strategy(model, phi1, 1)
    check_strategy(model, phi2, 2)
    history: list[tuple[float, float]] = []
    converged = False
    it = 0
    for it in range(1, max_iters + 1):
        g1 = evaluate_pair(model, phi1, phi2, 1)
        g2 = evaluate_pair(model, phi1, phi2, 2)
        br1 = best_response(model, phi2, 1, g_hint=g1)
        br2 = best_response(model, phi1, 2, g_hint=g2)
        gap1 = g1 - br1.g if has_choice(model, 1) else 0.0
        gap2 = g2 - br2.g if has_choice(model, 2) else 0.0
        history.append((gap1, gap2))
        log.info("iteration %d: gaps %.3e %.3e", it, gap1, gap2)
        if max(gap1, gap2) <= tol:
            converged = True
            break
        c1, c2 = br1.strategy, br2.strategy
        cg1, cg2, cgap1, cgap2 = verify_nash(model, c1, c2)
        if max(cgap1, cgap2) <= tol:
            phi1, phi2 = c1, c2
            g1, g2, gap1, gap2 = cg1, cg2, cgap1, cgap2
            converged = True
            break
        phi1 = phi1.mix(c1, damping)
        phi2 = phi2.mix(c2, damping)
    br1 = best_response(model, phi2, 1, g_hint=g1)
    br2 = best_response(model, phi1, 2, g_hint=g2)
    r1, r2 = coupled_residuals(model, phi1, phi2, br1, br2)
    return NashReport(phi1, phi2, g1, g2, br1.h, br2.h, gap1, gap2, it, converged, damping,
                      r1, r2, init, history)


def hitting_time_h(model: GameModel, opponent: StationaryStrategy, player: int,
                   g: float) -> np.ndarray:
    """Bias through first passage to the reference state.

    Iterates ``W(i) <- min_a sum_b phi(b|i) exp(theta D_g(i,a,b)) [p(i, i*) +
    sum_{j != i*} p(i, j) W(j)]`` from ``W = 0`` and returns ``(1/theta) ln W``.
    """
    check_strategy(model, opponent, 3 - player)
    theta = model.theta
    table = _player_table(model, player, g)
    ref = model.reference_state
    n = model.n_states
    W = np.zeros(n)
    prev_change = math.inf
    slow = 0
    for _ in range(HITTING_MAX_ITER):
        target = W.copy()
        target[ref] = 1.0
        new = np.empty(n)
        for i in range(n):
            E = np.exp(theta * table[i]) * (model.transition[i] @ target)
            q = opponent[i]
            vals = E @ q if player == 1 else q @ E
            new[i] = vals.min()
        if not np.all(np.isfinite(new)):
            raise HittingTimeDivergence("hitting-time representation unavailable: overflow",
                                        g=g, theta=theta)
        change = float(np.max(np.abs(new - W)))
        W = new
        if change < HITTING_TOL * max(1.0, float(W.max())):
            return np.log(W) / theta
        # Increments that stop shrinking mean the taboo operator has spectral radius >= 1.
        slow = slow + 1 if change >= prev_change * (1.0 - 1e-9) and change > 0 else 0
        if slow >= 50:
            raise HittingTimeDivergence(
                "hitting-time representation unavailable: first-passage iteration diverges",
                g=g, theta=theta, last_change=change)
        prev_change = change
    raise HittingTimeDivergence("hitting-time representation unavailable: no convergence",
                                g=g, theta=theta)
