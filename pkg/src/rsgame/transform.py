"""Equivalent one-step costs ``D_g`` for the embedded discrete-time game.

For a pay rate ``g`` each cell ``(i, a, b)`` gets::

    D_g(i, a, b) = C(i, a, b) + (1/theta) ln E[exp(theta * (R(S) - g S))]

where ``R`` is the antiderivative of the running cost and ``S`` the sojourn.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .model import GameModel


class DomainError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class CostTable:
    """Per-state ``(m_i, n_i)`` arrays of one-step costs, with the ``g`` used to build them."""

    values: tuple[np.ndarray, ...]
    g: float = float("nan")
    player: int = 1

    def __post_init__(self):
        vals = []
        for v in self.values:
            arr = np.array(v, dtype=float)
            if not np.all(np.isfinite(arr)):
                raise ValueError("cost table entries must be finite")
            arr.setflags(write=False)
            vals.append(arr)
        object.__setattr__(self, "values", tuple(vals))

    def __getitem__(self, i: int) -> np.ndarray:
        return self.values[i]

    def sup_norm(self) -> float:
        return max(float(np.max(np.abs(v))) for v in self.values)

    def shift(self, c: float) -> "CostTable":
        return CostTable(tuple(v + c for v in self.values), self.g, self.player)

    def distance(self, other: "CostTable") -> float:
        return max(float(np.max(np.abs(u - v))) for u, v in zip(self.values, other.values))

    def to_json(self, model: GameModel) -> str:
        return json.dumps({
            "g": self.g,
            "player": self.player,
            "model_hash": model.fingerprint(),
            "values": [v.tolist() for v in self.values],
        })


def integrated_running_cost(model: GameModel, player: int, i: int, a: int, b: int, s: float) -> float:
    """``int_0^s rho(t) dt`` for the cell's running-cost polynomial."""
    if not 0.0 <= s <= model.horizon_bound:
        raise DomainError(f"s={s!r} outside [0, {model.horizon_bound!r}]")
    return float(model.running_cost(player)[i][a][b].integral(s))


def sojourn_log_mgf(model: GameModel, player: int, i: int, a: int, b: int, g: float) -> float:
    theta = model.theta
    rc = model.running_cost(player)[i][a][b]
    anti = rc.antiderivative()

    def exponent(s):
        return theta * (np.polynomial.polynomial.polyval(s, anti) - g * s)

    return model.sojourn[i][a][b].log_expectation(exponent, model.horizon_bound) / theta


def build_cost_table(model: GameModel, player: int, g: float, immediate: bool | None = None) -> CostTable:
    """``D_g`` for one player.

    ``immediate=None`` adds the immediate cost whenever the model carries one;
    the non-zero-sum solvers pass ``immediate=False``.
    """
    use_c = model.immediate_cost is not None if immediate is None else immediate
    values = []
    for i in range(model.n_states):
        m, n = model.shape(i)
        block = np.empty((m, n))
        for a in range(m):
            for b in range(n):
                block[a, b] = sojourn_log_mgf(model, player, i, a, b, g)
        if use_c:
            block += model.immediate(i)
        values.append(block)
    return CostTable(tuple(values), float(g), player)
