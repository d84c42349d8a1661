"""Risk-sensitive average-cost solvers for the embedded discrete-time game.

Given a one-step cost table ``D`` the optimality equation reads::

    exp(theta * (mu + h(i))) = val_i[ exp(theta D(i,a,b)) * sum_j p_ij(a,b) exp(theta h(j)) ]

where ``val_i`` is the value of the local matrix game (game mode), the
minimum/maximum over the controlled player's pure actions against a fixed
opponent (MDP mode), or a plain average under two fixed strategies
(evaluation mode). All three are solved by relative value iteration on the
log-transformed operator, with a damped variant for periodic chains and a
vanishing-discount fallback.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .matrix_game import MatrixGame, local_log_matrix, solve_matrix_game
from .model import GameModel, StationaryStrategy, check_strategy
from .transform import CostTable

log = logging.getLogger(__name__)

SPAN_TOL = 1e-10
MAX_SWEEPS = 100_000
PLAIN_SWEEPS = 2_000
DAMPING = 0.5
DISCOUNT_TOL = 1e-12
DISCOUNT_MAX_ITER = 1_000_000


class SolverFailure(RuntimeError):
    """Iteration did not converge; ``diagnostics`` carries what is known."""

    def __init__(self, message: str, **diagnostics):
        super().__init__(message)
        self.diagnostics = diagnostics


@dataclass
class DiscreteSolution:
    mu: float
    h: np.ndarray
    strategy1: StationaryStrategy | None
    strategy2: StationaryStrategy | None
    iterations: int
    residual: float
    method: str = "rvi"
    span_history: list[float] = field(default_factory=list, repr=False)


class _Operator:
    """Log-domain one-step operator ``h -> (1/theta) ln val_i(h)`` for all states."""

    def __init__(self, model: GameModel, table: CostTable, mode: str,
                 opponent: StationaryStrategy | None = None, controlled: int = 1,
                 maximize: bool = False, fixed: tuple | None = None):
        self.model = model
        self.theta = model.theta
        self.table = table
        self.mode = mode
        self.opponent = opponent
        self.controlled = controlled
        self.maximize = maximize
        self.fixed = fixed

    def local(self, h: np.ndarray, i: int) -> np.ndarray:
        return local_log_matrix(self.theta, self.table[i], self.model.transition[i], h)

    def __call__(self, h: np.ndarray) -> np.ndarray:
        out = np.empty(self.model.n_states)
        for i in range(self.model.n_states):
            out[i] = self._state_value(h, i)[0]
        return out / self.theta

    def _state_value(self, h: np.ndarray, i: int):
        L = self.local(h, i)
        off = float(L.max())
        E = np.exp(L - off)
        if self.mode == "game":
            sol = solve_matrix_game(MatrixGame(E))
            return off + np.log(sol.value), sol
        if self.mode == "mdp":
            q = self.opponent[i]
            vals = E @ q if self.controlled == 1 else q @ E
            logs = off + np.log(vals)
            best = logs.max() if self.maximize else logs.min()
            return best, logs
        psi, phi = self.fixed[0][i], self.fixed[1][i]
        return off + np.log(psi @ E @ phi), None

    def strategies(self, h: np.ndarray):
        """Optimal local selectors at ``h`` (lowest-index ties in MDP mode)."""
        if self.mode == "game":
            rows, cols = [], []
            for i in range(self.model.n_states):
                sol = self._state_value(h, i)[1]
                rows.append(sol.row_mix)
                cols.append(sol.col_mix)
            return StationaryStrategy(tuple(rows)), StationaryStrategy(tuple(cols))
        if self.mode == "mdp":
            rows = []
            for i in range(self.model.n_states):
                logs = self._state_value(h, i)[1]
                best = logs.max() if self.maximize else logs.min()
                tol = 1e-12 * max(1.0, abs(best))
                hits = logs >= best - tol if self.maximize else logs <= best + tol
                row = np.zeros(len(logs))
                row[int(np.argmax(hits))] = 1.0
                rows.append(row)
            return StationaryStrategy(tuple(rows))
        return None


def _relative_iteration(step: Callable, n: int, h0, ref: int | None, tol: float,
                        max_sweeps: int, plain_sweeps: int = PLAIN_SWEEPS):
    """Relative value iteration; ``ref=None`` normalizes ``max h = 0``.

    After ``plain_sweeps`` the update is averaged with the previous iterate,
    which converges on periodic chains where the plain scheme oscillates.
    """
    h = np.zeros(n) if h0 is None else np.array(h0, dtype=float)
    h -= h.max() if ref is None else h[ref]
    spans = []
    offset = 0.0
    for k in range(1, max_sweeps + 1):
        th = step(h)
        diff = th - h
        span = float(diff.max() - diff.min())
        spans.append(span)
        offset = float(th.max() if ref is None else th[ref])
        h_new = th - offset
        if span < tol:
            return offset, h_new, k, spans
        if k > plain_sweeps:
            h_new = (1.0 - DAMPING) * h + DAMPING * h_new
            h_new -= h_new.max() if ref is None else h_new[ref]
        h = h_new
    raise SolverFailure("relative value iteration did not converge",
                        iterations=max_sweeps, last_span=spans[-1], span_history=spans[-50:])


def discounted_fixed_point(model: GameModel, table: CostTable, beta: float,
                           opponent: tuple[StationaryStrategy, int] | None = None,
                           v0=None, tol: float = DISCOUNT_TOL,
                           max_iter: int = DISCOUNT_MAX_ITER) -> np.ndarray:
    """Fixed point of ``V -> (1/theta) ln val(M(beta V))``.

    ``opponent=(strategy, controlled_player)`` switches to the single-controller
    problem in which the controlled player minimizes.
    """
    if not 0.0 < beta < 1.0:
        raise ValueError(f"beta must be in (0, 1), got {beta!r}")
    op = _make_operator(model, table, opponent)
    V = np.zeros(model.n_states) if v0 is None else np.array(v0, dtype=float)
    change = np.inf
    for _ in range(max_iter):
        V_new = op(beta * V)
        change = float(np.max(np.abs(V_new - V)))
        V = V_new
        if change < _stop_level(tol, V):
            return V
    raise SolverFailure("discounted iteration did not converge", residual=change, beta=beta)


def _stop_level(tol: float, V: np.ndarray) -> float:
    # Absolute tolerance, floored at a few ulps of |V| so large fixed points still terminate.
    return max(tol, 8.0 * np.finfo(float).eps * float(np.max(np.abs(V))))


def _make_operator(model, table, opponent):
    if opponent is None:
        return _Operator(model, table, "game")
    strategy, controlled = opponent
    return _Operator(model, table, "mdp", opponent=strategy, controlled=controlled)


def _vanishing_discount(model: GameModel, op: _Operator, ref: int | None, tol: float):
    """``beta_n = 1 - 2**-n``; Richardson extrapolation over the last three terms."""
    mus, hs, estimates = [], [], []
    V = np.zeros(model.n_states)
    budget = DISCOUNT_MAX_ITER
    for k in range(1, 41):
        beta = 1.0 - 2.0 ** -k
        if hs:
            V = hs[-1] + mus[-1] / (1.0 - beta)
        it = 0
        while True:
            V_new = op(beta * V)
            it += 1
            change = float(np.max(np.abs(V_new - V)))
            V = V_new
            if change < _stop_level(DISCOUNT_TOL, V):
                break
            if it >= budget:
                raise SolverFailure("vanishing-discount budget exhausted",
                                    estimates=estimates, beta=beta)
        budget -= it
        z = V.max() if ref is None else V[ref]
        mus.append((1.0 - beta) * z)
        hs.append(V - z)
        if k >= 3:
            mu = (8 * mus[-1] - 6 * mus[-2] + mus[-3]) / 3.0
            h = (8 * hs[-1] - 6 * hs[-2] + hs[-3]) / 3.0
            h -= h.max() if ref is None else h[ref]
            estimates.append(mu)
            if len(estimates) >= 2 and abs(estimates[-1] - estimates[-2]) < tol:
                return mu, h, k
    raise SolverFailure("vanishing-discount estimates did not settle", estimates=estimates)


def _solve(model: GameModel, op: _Operator, ref: int | None, h0, tol: float,
           method: str, max_sweeps: int):
    spans: list[float] = []
    if method in ("auto", "rvi"):
        try:
            mu, h, iters, spans = _relative_iteration(op, model.n_states, h0, ref, tol, max_sweeps)
            used = "rvi"
        except SolverFailure as exc:
            if method == "rvi":
                raise
            spans = exc.diagnostics.get("span_history", [])
            log.warning("relative value iteration failed (%s); trying vanishing discount", exc)
            method = "vanishing_discount"
    if method == "vanishing_discount":
        try:
            mu, h, iters = _vanishing_discount(model, op, ref, tol)
        except SolverFailure as exc:
            raise SolverFailure("both relative value iteration and vanishing discount failed",
                                span_history=spans, **exc.diagnostics) from exc
        used = "vanishing_discount"
    elif method not in ("auto", "rvi"):
        raise ValueError(f"unknown method {method!r}")
    residual = float(np.max(np.abs(op(h) - mu - h)))
    return mu, h, iters, residual, used, spans


def solve_discrete_game(model: GameModel, table: CostTable, h0=None, tol: float = SPAN_TOL,
                        method: str = "auto", max_sweeps: int = MAX_SWEEPS) -> DiscreteSolution:
    """Average-cost value ``mu`` and bias ``h`` (``max h = 0``) of the discrete game."""
    op = _Operator(model, table, "game")
    mu, h, iters, residual, used, spans = _solve(model, op, None, h0, tol, method, max_sweeps)
    s1, s2 = op.strategies(h)
    return DiscreteSolution(mu, h, s1, s2, iters, residual, used, spans)


def solve_discrete_mdp(model: GameModel, table: CostTable, opponent: StationaryStrategy,
                       controlled_player: int, maximize: bool = False, h0=None,
                       tol: float = SPAN_TOL, method: str = "auto",
                       max_sweeps: int = MAX_SWEEPS) -> DiscreteSolution:
    """Single-controller problem against a fixed stationary opponent.

    The controlled player minimizes (or maximizes) over its pure actions;
    ``h`` is normalized at the reference state and the returned strategy is
    pure.
    """
    if controlled_player not in (1, 2):
        raise ValueError(f"controlled_player must be 1 or 2, got {controlled_player!r}")
    check_strategy(model, opponent, 3 - controlled_player)
    op = _Operator(model, table, "mdp", opponent=opponent, controlled=controlled_player,
                   maximize=maximize)
    ref = model.reference_state
    mu, h, iters, residual, used, spans = _solve(model, op, ref, h0, tol, method, max_sweeps)
    strat = op.strategies(h)
    s1, s2 = (strat, None) if controlled_player == 1 else (None, strat)
    return DiscreteSolution(mu, h, s1, s2, iters, residual, used, spans)


def evaluate_strategies(model: GameModel, table: CostTable, strategy1: StationaryStrategy,
                        strategy2: StationaryStrategy, h0=None, tol: float = SPAN_TOL,
                        method: str = "auto", max_sweeps: int = MAX_SWEEPS) -> DiscreteSolution:
    """Growth rate ``mu`` of ``E exp(theta sum D)`` under a fixed stationary pair, by iteration."""
    check_strategy(model, strategy1, 1)
    check_strategy(model, strategy2, 2)
    op = _Operator(model, table, "eval", fixed=(strategy1, strategy2))
    ref = model.reference_state
    mu, h, iters, residual, used, spans = _solve(model, op, ref, h0, tol, method, max_sweeps)
    return DiscreteSolution(mu, h, strategy1, strategy2, iters, residual, used, spans)


def optimality_residual(model: GameModel, table: CostTable, mu: float, h) -> float:
    """Sup-norm defect of the game optimality equation at ``(mu, h)``."""
    op = _Operator(model, table, "game")
    h = np.asarray(h, dtype=float)
    return float(np.max(np.abs(op(h) - mu - h)))
