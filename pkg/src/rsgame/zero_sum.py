"""Zero-sum semi-Markov game: value, saddle-point strategies and certificates."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .discrete import SolverFailure, optimality_residual, solve_discrete_game, solve_discrete_mdp
from .model import (SCHEMA_VERSION, GameModel, StationaryStrategy, has_choice, strategy_to_dict,
                    validate)
from .roots import F_TOL, X_TOL, find_decreasing_root
from .transform import build_cost_table


@dataclass
class ZeroSumReport:
    g: float
    h: np.ndarray
    strategy1: StationaryStrategy
    strategy2: StationaryStrategy
    residual: float
    bracket: tuple[float, float]
    gap1: float = math.nan
    gap2: float = math.nan
    mu_trace: list[tuple[float, float]] = field(default_factory=list)
    status: str = "ok"

    def to_dict(self, model: GameModel) -> dict[str, Any]:
        return {
            "schema_version": SCHEMA_VERSION,
            "g": self.g,
            "h": {s: float(v) for s, v in zip(model.states, self.h)},
            "strategy1": strategy_to_dict(model, self.strategy1, 1),
            "strategy2": strategy_to_dict(model, self.strategy2, 2),
            "residual": self.residual,
            "bracket": list(self.bracket),
            "gap1": self.gap1,
            "gap2": self.gap2,
            "certificate": "stationary deviations only",
            "status": self.status,
            "mu_trace": [list(p) for p in self.mu_trace],
            "model_hash": model.fingerprint(),
        }


def mu_of_g(model: GameModel, g: float, h0=None) -> float:
    """Discrete game value of the transformed table ``D_g`` (player-1 costs, immediate cost included)."""
    table = build_cost_table(model, 1, g, immediate=True)
    try:
        return solve_discrete_game(model, table, h0=h0).mu
    except SolverFailure as exc:
        exc.diagnostics["g"] = g
        raise


def _warm(solver):
    """Wrap ``solver(g, h0) -> DiscreteSolution`` into ``g -> mu`` reusing the last bias."""
    state = {"h": None}

    def fn(g: float) -> float:
        try:
            sol = solver(g, state["h"])
        except SolverFailure as exc:
            exc.diagnostics["g"] = g
            raise
        state["h"] = sol.h
        return sol.mu

    return fn


def solve_zero_sum(model: GameModel, xtol: float = X_TOL, ftol: float = F_TOL,
                   certify: bool = True) -> ZeroSumReport:
    """Find ``g`` with ``mu(D_g) = 0`` and read off ``h`` and the saddle pair.

    ``mu(D_g)`` is nonincreasing in ``g``; its root is bracketed by doubling
    around 0 and refined by bisection.
    """

    def solver(g, h0):
        return solve_discrete_game(model, build_cost_table(model, 1, g, immediate=True), h0=h0)

    root = find_decreasing_root(_warm(solver), xtol=xtol, ftol=ftol)
    g = root.root
    table = build_cost_table(model, 1, g, immediate=True)
    sol = solve_discrete_game(model, table)
    # h solves the semi-Markov equation when mu(D_g) = 0; report its defect with mu forced to 0.
    residual = optimality_residual(model, table, 0.0, sol.h)
    report = ZeroSumReport(g, sol.h, sol.strategy1, sol.strategy2, residual, root.bracket,
                           mu_trace=root.trace)
    checks = validate(model)
    if checks.irreducibility_status != "pass":
        report.status = "unsupported-assumptions"
    if certify:
        report.gap1, report.gap2 = verify_saddle(model, report)
    return report


def best_reply_value(model: GameModel, opponent: StationaryStrategy, player: int,
                     g_hint: float = 0.0) -> float:
    """Zero-sum value of player ``player``'s best stationary reply to ``opponent``.

    Player 1 minimizes, player 2 maximizes, both on the player-1 table.
    """

    def solver(g, h0):
        table = build_cost_table(model, 1, g, immediate=True)
        return solve_discrete_mdp(model, table, opponent, player, maximize=(player == 2), h0=h0)

    return find_decreasing_root(_warm(solver), center=g_hint).root


def verify_saddle(model: GameModel, report: ZeroSumReport) -> tuple[float, float]:
    """Saddle certificates; both are ``>= 0`` up to tolerance at a saddle point.

    ``gap1 = g_BR1 - g`` where ``g_BR1`` is player 1's best reply to
    ``strategy2``; ``gap2 = g - g_BR2`` with ``g_BR2`` player 2's best reply
    to ``strategy1``. A negative gap is a profitable stationary deviation.
    """
    g = report.g
    g1 = best_reply_value(model, report.strategy2, 1, g_hint=g) if has_choice(model, 1) else g
    g2 = best_reply_value(model, report.strategy1, 2, g_hint=g) if has_choice(model, 2) else g
    return g1 - g, g - g2
