"""Two-person zero-sum matrix games in mixed strategies.

The row player picks ``psi`` and minimizes ``psi @ M @ phi``; the column player
picks ``phi`` and maximizes it. Games are solved exactly (up to floating point)
with a dense simplex tableau using Bland's anti-cycling rule.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .model import GameModel
from .transform import CostTable

log = logging.getLogger(__name__)

PIVOT_TOL = 1e-12
LOG_OVERFLOW_GUARD = 650.0


@dataclass(frozen=True, eq=False)
class MatrixGame:
    """Payoff matrix; true entries are ``exp(log_offset) * entries``."""

    entries: np.ndarray
    log_offset: float = 0.0

    def __post_init__(self):
        M = np.atleast_2d(np.array(self.entries, dtype=float))
        if M.ndim != 2 or M.shape[0] < 1 or M.shape[1] < 1:
            raise ValueError(f"need a non-empty 2-D matrix, got shape {M.shape}")
        if not np.all(np.isfinite(M)):
            raise ValueError("matrix entries must be finite")
        M.setflags(write=False)
        object.__setattr__(self, "entries", M)

    @property
    def shape(self) -> tuple[int, int]:
        return self.entries.shape


@dataclass(frozen=True, eq=False)
class GameSolution:
    value: float
    row_mix: np.ndarray
    col_mix: np.ndarray


def _simplex_max(A: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Maximize ``sum(x)`` s.t. ``A x <= 1``, ``x >= 0``; returns primal ``x`` and dual ``y``.

    ``A`` must be strictly positive, so the slack basis is feasible and the
    program is bounded.
    """
    r, c = A.shape
    T = np.zeros((r + 1, c + r + 1))
    T[:r, :c] = A
    T[:r, c:c + r] = np.eye(r)
    T[:r, -1] = 1.0
    T[r, :c] = 1.0  # reduced costs of the maximization objective
    basis = list(range(c, c + r))
    for _ in range(10_000):
        if log.isEnabledFor(logging.DEBUG):
            log.debug("tableau basis=%s\n%s", basis, T)
        entering = next((k for k in range(c + r) if T[r, k] > PIVOT_TOL), None)
        if entering is None:
            break
        col = T[:r, entering]
        rows = [k for k in range(r) if col[k] > PIVOT_TOL]
        ratios = [T[k, -1] / col[k] for k in rows]
        best = min(ratios)
        # Bland: among tied ratios leave with the lowest-index basic variable.
        tied = [k for k, q in zip(rows, ratios) if q <= best + PIVOT_TOL * max(1.0, abs(best))]
        leave = min(tied, key=lambda k: basis[k])
        T[leave] /= T[leave, entering]
        for k in range(r + 1):
            if k != leave and T[k, entering] != 0.0:
                T[k] -= T[k, entering] * T[leave]
        basis[leave] = entering
    else:  # pragma: no cover - Bland's rule terminates
        raise RuntimeError("simplex did not terminate")
    x = np.zeros(c)
    for k, v in enumerate(basis):
        if v < c:
            x[v] = T[k, -1]
    y = -T[r, c:c + r]
    return np.maximum(x, 0.0), np.maximum(y, 0.0)


def solve_matrix_game(game: MatrixGame) -> GameSolution:
    """Value and one optimal mixed strategy per player."""
    M = game.entries
    m, n = M.shape
    lo, hi = float(M.min()), float(M.max())
    scale = math.exp(game.log_offset)
    if hi - lo <= 0.0:
        row = np.zeros(m)
        row[0] = 1.0
        col = np.zeros(n)
        col[0] = 1.0
        return GameSolution(lo * scale, row, col)
    span = hi - lo
    # Entries mapped into [1, 2]; the map is affine increasing so mixes are unchanged.
    shifted = (M - lo) / span + 1.0
    x, y = _simplex_max(shifted.T)
    v = 1.0 / x.sum()
    row_mix = x / x.sum()
    col_mix = y / y.sum()
    value = ((v - 1.0) * span + lo) * scale
    return GameSolution(value, row_mix, col_mix)


def game_value(game: MatrixGame) -> float:
    return solve_matrix_game(game).value


def best_response(game: MatrixGame, opponent_mix, side: str) -> tuple[float, int]:
    """Optimal pure reply: min over rows (``side='row'``) or max over columns.

    Ties go to the lowest index.
    """
    M = game.entries
    q = np.asarray(opponent_mix, dtype=float)
    if side == "row":
        if q.shape != (M.shape[1],):
            raise ValueError(f"column mix has length {q.shape}, expected {M.shape[1]}")
        payoff = M @ q
        best = payoff.min()
        hits = payoff <= best + 1e-12 * max(1.0, abs(best))
    elif side == "column":
        if q.shape != (M.shape[0],):
            raise ValueError(f"row mix has length {q.shape}, expected {M.shape[0]}")
        payoff = q @ M
        best = payoff.max()
        hits = payoff >= best - 1e-12 * max(1.0, abs(best))
    else:
        raise ValueError(f"side must be 'row' or 'column', got {side!r}")
    k = int(np.argmax(hits))
    return float(payoff[k]) * math.exp(game.log_offset), k


def local_log_matrix(theta: float, D: np.ndarray, P: np.ndarray, h: np.ndarray) -> np.ndarray:
    """``log(exp(theta D[a,b]) * sum_j P[a,b,j] exp(theta h[j]))`` computed stably."""
    th = theta * np.asarray(h, dtype=float)
    c = th.max()
    return theta * D + np.log(P @ np.exp(th - c)) + c


def shapley_local_matrix(model: GameModel, table: CostTable, h, i: int) -> MatrixGame:
    """Local exponentiated game at state ``i``.

    When ``theta * (|D| + |h|)`` exceeds the overflow guard the entries are
    divided by a common factor whose logarithm is kept in ``log_offset``.
    """
    h = np.asarray(h, dtype=float)
    if not np.all(np.isfinite(h)):
        raise ValueError("h must be finite")
    L = local_log_matrix(model.theta, table[i], model.transition[i], h)
    if model.theta * (table.sup_norm() + float(np.max(np.abs(h)))) > LOG_OVERFLOW_GUARD:
        off = float(L.max())
        return MatrixGame(np.exp(L - off), off)
    return MatrixGame(np.exp(L))
