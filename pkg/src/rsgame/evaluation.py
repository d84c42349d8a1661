"""Fixed-strategy evaluation through the Perron root of the twisted kernel.

Under a stationary pair the discrete growth rate is ``(1/theta) ln rho(Q)``
with ``Q_ij = sum_{a,b} psi(a|i) phi(b|i) exp(theta D(i,a,b)) p_ij(a,b)``;
the semi-Markov value of the pair is the ``g`` at which that rate vanishes.
"""
from __future__ import annotations

import numpy as np

from .model import GameModel, StationaryStrategy, check_strategy
from .roots import find_decreasing_root
from .transform import CostTable, build_cost_table


def evaluation_matrix(model: GameModel, table: CostTable, strategy1: StationaryStrategy,
                      strategy2: StationaryStrategy, log_shift: float = 0.0) -> np.ndarray:
    """``Q * exp(-log_shift)``; the shift keeps large ``theta D`` representable."""
    rows = []
    for i in range(model.n_states):
        W = np.exp(model.theta * table[i] - log_shift)
        weights = strategy1[i][:, None] * strategy2[i][None, :] * W
        rows.append(np.einsum("ab,abj->j", weights, model.transition[i]))
    return np.array(rows)


def perron_root(Q: np.ndarray) -> float:
    """Largest real eigenvalue of a nonnegative matrix (dense eigensolver)."""
    eig = np.linalg.eigvals(Q)
    return float(np.max(eig.real))


def evaluation_mu(model: GameModel, table: CostTable, strategy1: StationaryStrategy,
                  strategy2: StationaryStrategy) -> float:
    shift = model.theta * table.sup_norm()
    Q = evaluation_matrix(model, table, strategy1, strategy2, shift)
    return (np.log(perron_root(Q)) + shift) / model.theta


def evaluate_pair(model: GameModel, strategy1: StationaryStrategy, strategy2: StationaryStrategy,
                  player: int = 1, zero_sum: bool = False) -> float:
    """Semi-Markov value ``J`` of a stationary pair for one player.

    In zero-sum mode there is one cost stream, player 1's running cost plus
    the immediate cost; it is what player 1 pays and player 2 receives, so
    ``player`` does not change the result.
    """
    check_strategy(model, strategy1, 1)
    check_strategy(model, strategy2, 2)

    def mu(g: float) -> float:
        table = build_cost_table(model, 1 if zero_sum else player, g, immediate=zero_sum)
        return evaluation_mu(model, table, strategy1, strategy2)

    return find_decreasing_root(mu).root
