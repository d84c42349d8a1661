"""Brute-force references: finite-horizon recursion, power iteration, grid minimax.

These are deliberately naive and share no numerics with the production
solvers beyond the model and cost-table containers.
"""
from __future__ import annotations

import itertools
import math

import numpy as np
from scipy.special import logsumexp

from .matrix_game import MatrixGame
from .model import GameModel, StationaryStrategy, check_strategy
from .transform import CostTable

MAX_HORIZON = 10_000
POWER_TOL = 1e-13
POWER_MAX_ITER = 2_000_000
GRID_CHUNK = 200_000


def log_transfer_matrix(model: GameModel, table: CostTable, strategy1: StationaryStrategy,
                        strategy2: StationaryStrategy) -> np.ndarray:
    """Entrywise log of ``q_ij = sum_ab psi(a|i) phi(b|i) exp(theta D) p_ij(a,b)``."""
    theta = model.theta
    n = model.n_states
    logq = np.full((n, n), -np.inf)
    for i in range(n):
        P = model.transition[i]
        terms = []
        for a, b in itertools.product(range(P.shape[0]), range(P.shape[1])):
            w = strategy1[i][a] * strategy2[i][b]
            if w > 0:
                with np.errstate(divide="ignore"):
                    terms.append(math.log(w) + theta * table[i][a, b] + np.log(P[a, b]))
        if terms:
            logq[i] = logsumexp(np.array(terms), axis=0)
    return logq


def exact_exp_cost(model: GameModel, table: CostTable, strategy1: StationaryStrategy,
                   strategy2: StationaryStrategy, start: int, n: int) -> float:
    """``log E exp(theta * sum_{k<n} D(X_k, A_k, B_k))`` from ``start``."""
    if not 0 <= n <= MAX_HORIZON:
        raise ValueError(f"horizon must be in [0, {MAX_HORIZON}], got {n}")
    check_strategy(model, strategy1, 1)
    check_strategy(model, strategy2, 2)
    logq = log_transfer_matrix(model, table, strategy1, strategy2)
    logv = np.full(model.n_states, -np.inf)
    logv[start] = 0.0
    for _ in range(n):
        logv = logsumexp(logv[:, None] + logq, axis=0)
    return float(logsumexp(logv))


def exact_exp_cost_path(model: GameModel, table: CostTable, strategy1: StationaryStrategy,
                        strategy2: StationaryStrategy, start: int, n: int) -> np.ndarray:
    """All of ``exact_exp_cost`` for horizons ``0..n`` in one pass."""
    if not 0 <= n <= MAX_HORIZON:
        raise ValueError(f"horizon must be in [0, {MAX_HORIZON}], got {n}")
    logq = log_transfer_matrix(model, table, strategy1, strategy2)
    logv = np.full(model.n_states, -np.inf)
    logv[start] = 0.0
    out = [0.0]
    for _ in range(n):
        logv = logsumexp(logv[:, None] + logq, axis=0)
        out.append(float(logsumexp(logv)))
    return np.array(out)


def spectral_radius(matrix) -> float:
    """Perron root of a nonnegative irreducible matrix by power iteration.

    Iterates on ``A + I`` (primitive whenever ``A`` is irreducible) and stops
    when the Collatz-Wielandt bounds agree to ``1e-13`` relative.
    """
    A = np.array(matrix, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("matrix must be square")
    if np.any(A < 0):
        raise ValueError("matrix must be nonnegative")
    if not np.any(A):
        raise ValueError("zero matrix has no Perron root")
    scale = float(A.max())
    B = A / scale + np.eye(len(A))
    x = np.ones(len(A))
    lam = math.nan
    for _ in range(POWER_MAX_ITER):
        y = B @ x
        ratios = y / x
        lo, hi = float(ratios.min()), float(ratios.max())
        lam = 0.5 * (lo + hi)
        if hi - lo < POWER_TOL * hi:
            break
        x = y / y.max()
    else:
        raise RuntimeError("power iteration did not converge")
    return (lam - 1.0) * scale


def perron_growth(model: GameModel, table: CostTable, strategy1: StationaryStrategy,
                  strategy2: StationaryStrategy) -> float:
    """``(1/theta) ln rho(q)`` with ``q`` built as in :func:`exact_exp_cost`."""
    logq = log_transfer_matrix(model, table, strategy1, strategy2)
    finite = logq[np.isfinite(logq)]
    shift = float(finite.max())
    return (math.log(spectral_radius(np.exp(logq - shift))) + shift) / model.theta


def _simplex_grid(k: int, N: int):
    """Chunks of all points ``c / N`` with ``c`` a composition of ``N`` into ``k`` parts."""
    buf = []
    for bars in itertools.combinations(range(N + k - 1), k - 1):
        prev = -1
        comp = []
        for bar in bars:
            comp.append(bar - prev - 1)
            prev = bar
        comp.append(N + k - 2 - prev)
        buf.append(comp)
        if len(buf) == GRID_CHUNK:
            yield np.array(buf, dtype=float) / N
            buf = []
    if buf:
        yield np.array(buf, dtype=float) / N


def _check_grid(game: MatrixGame, grid_points: int):
    m, n = game.shape
    if not (2 <= m <= 4 and 2 <= n <= 4):
        raise ValueError(f"grid oracle supports 2..4 actions per player, got {m}x{n}")
    if grid_points < 101:
        raise ValueError("grid_points must be at least 101")
    if math.comb(grid_points - 1 + max(m, n) - 1, max(m, n) - 1) > 5 * 10 ** 7:
        raise ValueError("grid too large")


def grid_minimax(game: MatrixGame, grid_points: int = 1001) -> float:
    """``min`` over grid row mixes of the best column payoff (upper bound on the value).

    ``grid_points`` counts points per simplex edge, so the step is ``1/(grid_points-1)``.
    """
    _check_grid(game, grid_points)
    M = game.entries
    best = math.inf
    for X in _simplex_grid(M.shape[0], grid_points - 1):
        best = min(best, float((X @ M).max(axis=1).min()))
    return best * math.exp(game.log_offset)


def grid_maximin(game: MatrixGame, grid_points: int = 1001) -> float:
    """``max`` over grid column mixes of the best row payoff (lower bound on the value)."""
    _check_grid(game, grid_points)
    M = game.entries
    best = -math.inf
    for Y in _simplex_grid(M.shape[1], grid_points - 1):
        best = max(best, float((Y @ M.T).min(axis=1).max()))
    return best * math.exp(game.log_offset)


def pure_strategies(model: GameModel, player: int):
    """Every pure stationary strategy of ``player``."""
    sizes = [model.shape(i)[player - 1] for i in range(model.n_states)]
    for choice in itertools.product(*[range(k) for k in sizes]):
        yield StationaryStrategy(tuple(np.eye(k)[c] for k, c in zip(sizes, choice)))


def smdp_value_by_enumeration(model: GameModel, opponent: StationaryStrategy, player: int,
                              maximize: bool = False, zero_sum: bool = False):
    """Best pure stationary reply found by trying all of them.

    Each candidate is evaluated by the root of ``g -> ln rho(q_g)`` with the
    Perron root from :func:`spectral_radius`. Returns ``(g, strategy)``.
    """
    from scipy.optimize import brentq

    from .transform import build_cost_table

    cost_player = 1 if zero_sum else player

    def growth(s1, s2, g):
        table = build_cost_table(model, cost_player, g, immediate=zero_sum)
        return perron_growth(model, table, s1, s2)

    best_g, best_s = None, None
    for s in pure_strategies(model, player):
        s1, s2 = (s, opponent) if player == 1 else (opponent, s)
        lo, hi = -1.0, 1.0
        while growth(s1, s2, lo) <= 0:
            lo *= 2
        while growth(s1, s2, hi) >= 0:
            hi *= 2
        g = brentq(lambda x: growth(s1, s2, x), lo, hi, xtol=1e-13, rtol=1e-14)
        better = best_g is None or (g > best_g + 1e-13 if maximize else g < best_g - 1e-13)
        if better:
            best_g, best_s = g, s
    return best_g, best_s
