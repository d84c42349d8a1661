"""Monte-Carlo simulation of the semi-Markov game under stationary strategies.

Every path ``k`` owns the random stream ``SeedSequence(seed, spawn_key=(k,))``
and consumes four uniforms per epoch (action 1, action 2, sojourn, next
state), so results do not depend on batching or worker count. Paths are
advanced in lockstep with numpy.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from scipy.stats import norm

from .model import SCHEMA_VERSION, GameModel, StationaryStrategy, check_strategy, uniform_strategy

CHUNK = 256
BATCH = 10_000
Z99 = float(norm.ppf(0.995))
_KIND = {"atoms": 0, "uniform": 1, "truncated_exponential": 2}


@dataclass
class Trajectory:
    """Epoch records ``(X_n, A_n, B_n, S_n, T_n)`` for ``n = 0..N_t``.

    The last record's sojourn carries the process past ``t_max``.
    """

    records: list[tuple[int, int, int, float, float]]
    t_max: float
    n_t: int

    def to_csv(self) -> str:
        lines = ["n,X,A,B,S,T"]
        lines += [f"{n},{x},{a},{b},{s!r},{t!r}" for n, (x, a, b, s, t) in enumerate(self.records)]
        return "\n".join(lines) + "\n"


@dataclass
class JEstimate:
    point: float
    ci99: tuple[float, float]
    n_paths: int
    t: float
    log_mean: float
    seed: int
    player: int = 1
    zero_sum: bool = True

    def to_dict(self) -> dict[str, Any]:
        return {
            "schema_version": SCHEMA_VERSION,
            "point": self.point,
            "ci99": list(self.ci99),
            "ci_method": "delta method on log-mean (approximate)",
            "n_paths": self.n_paths,
            "t": self.t,
            "log_mean": self.log_mean,
            "seed": self.seed,
            "player": self.player,
            "zero_sum": self.zero_sum,
        }


@dataclass
class TailReport:
    alpha: float
    r_alpha: int
    t: float
    n_paths: int
    seed: int
    rows: list[dict[str, float]] = field(default_factory=list)

    @property
    def violations(self) -> int:
        return sum(1 for r in self.rows if r["violated"])

    def to_dict(self) -> dict[str, Any]:
        return {
            "schema_version": SCHEMA_VERSION,
            "alpha": self.alpha,
            "r_alpha": self.r_alpha,
            "t": self.t,
            "n_paths": self.n_paths,
            "seed": self.seed,
            "violations": self.violations,
            "rows": self.rows,
        }


def path_rng(seed: int, k: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(k,)))


class _Tables:
    """Padded arrays for vectorized sampling and cost accumulation."""

    def __init__(self, model: GameModel, s1: StationaryStrategy, s2: StationaryStrategy,
                 player: int, zero_sum: bool):
        if zero_sum:
            player = 1  # the single zero-sum cost stream
        n = model.n_states
        M = max(model.shape(i)[0] for i in range(n))
        N = max(model.shape(i)[1] for i in range(n))
        K = max(len(d.atoms) for i, a, b in model.cells() for d in [model.sojourn[i][a][b]]) or 1
        deg = max(rc.degree for i, a, b in model.cells()
                  for rc in [model.running_cost(player)[i][a][b]])
        self.B = model.horizon_bound
        self.cum1 = np.ones((n, M))
        self.cum2 = np.ones((n, N))
        self.cost = np.zeros((n, M, N))
        self.anti = np.zeros((n, M, N, deg + 2))
        self.tcum = np.ones((n, M, N, n))
        self.kind = np.zeros((n, M, N), dtype=np.int64)
        self.atom_s = np.zeros((n, M, N, K))
        self.atom_c = np.ones((n, M, N, K))
        self.lo = np.zeros((n, M, N))
        self.hi = np.zeros((n, M, N))
        self.rate = np.ones((n, M, N))
        for i in range(n):
            m, k = model.shape(i)
            c1 = np.cumsum(s1[i])
            c1[-1] = 1.0
            self.cum1[i, :m] = c1
            c2 = np.cumsum(s2[i])
            c2[-1] = 1.0
            self.cum2[i, :k] = c2
        rcs = model.running_cost(player)
        for i, a, b in model.cells():
            if zero_sum:
                self.cost[i, a, b] = model.immediate(i)[a, b]
            anti = rcs[i][a][b].antiderivative()
            self.anti[i, a, b, :len(anti)] = anti
            tc = np.cumsum(model.transition[i][a, b])
            tc[-1] = 1.0
            self.tcum[i, a, b] = tc
            d = model.sojourn[i][a][b]
            self.kind[i, a, b] = _KIND[d.kind]
            if d.kind == "atoms":
                s = [x for x, _ in d.atoms]
                cw = np.cumsum([w for _, w in d.atoms])
                cw[-1] = 1.0
                self.atom_s[i, a, b, :len(s)] = s
                self.atom_s[i, a, b, len(s):] = s[-1]
                self.atom_c[i, a, b, :len(s)] = cw
            elif d.kind == "uniform":
                self.lo[i, a, b], self.hi[i, a, b] = d.lo, d.hi
            else:
                self.rate[i, a, b] = d.rate

    def integral(self, i, a, b, s):
        coef = self.anti[i, a, b]
        out = np.zeros_like(s)
        for k in range(coef.shape[-1] - 1, -1, -1):
            out = out * s + coef[:, k]
        return out

    def sojourn(self, i, a, b, u):
        """Sojourn draws from uniforms ``u`` in ``[0, 1)``."""
        kind = self.kind[i, a, b]
        up = 1.0 - u  # in (0, 1]
        s = np.empty_like(u)
        m = kind == 0
        if m.any():
            idx = (self.atom_c[i[m], a[m], b[m]] <= u[m, None]).sum(axis=1)
            idx = np.minimum(idx, self.atom_s.shape[-1] - 1)
            s[m] = self.atom_s[i[m], a[m], b[m], idx]
        m = kind == 1
        if m.any():
            lo, hi = self.lo[i[m], a[m], b[m]], self.hi[i[m], a[m], b[m]]
            s[m] = lo + (hi - lo) * up[m]
        m = kind == 2
        if m.any():
            r = self.rate[i[m], a[m], b[m]]
            s[m] = -np.log1p(up[m] * np.expm1(-r * self.B)) / r
        return s


def _run_paths(tables: _Tables, start: int, t_max: float, seed: int, first: int, count: int,
               record: bool = False):
    """Advance ``count`` paths; returns ``(cost, n_t, records)``."""
    rngs = [path_rng(seed, k) for k in range(first, first + count)]
    blocks = np.stack([g.random((CHUNK, 4)) for g in rngs])
    x = np.full(count, start, dtype=np.int64)
    T = np.zeros(count)
    cost = np.zeros(count)
    n = np.zeros(count, dtype=np.int64)
    active = np.ones(count, dtype=bool)
    records: list[list] = [[] for _ in range(count)] if record else []
    step = 0
    while active.any():
        if step == CHUNK:
            idx = np.flatnonzero(active)
            for k in idx:
                blocks[k] = rngs[k].random((CHUNK, 4))
            step = 0
        idx = np.flatnonzero(active)
        u = blocks[idx, step]
        i = x[idx]
        a = (tables.cum1[i] <= u[:, 0, None]).sum(axis=1)
        b = (tables.cum2[i] <= u[:, 1, None]).sum(axis=1)
        s = tables.sojourn(i, a, b, u[:, 2])
        j = (tables.tcum[i, a, b] <= u[:, 3, None]).sum(axis=1)
        t_now = T[idx]
        done = t_now + s > t_max
        seg = np.where(done, t_max - t_now, s)
        cost[idx] += tables.cost[i, a, b] + tables.integral(i, a, b, seg)
        if record:
            for k, kk in enumerate(idx):
                records[kk].append((int(i[k]), int(a[k]), int(b[k]), float(s[k]), float(t_now[k])))
        T[idx] = t_now + s
        x[idx] = np.minimum(j, tables.tcum.shape[-1] - 1)
        cont = idx[~done]
        n[cont] += 1
        active[idx[done]] = False
        step += 1
    return cost, n, records


def simulate_trajectory(model: GameModel, strategy1: StationaryStrategy,
                        strategy2: StationaryStrategy, start_state: int, t_max: float,
                        seed: int = 0, path: int = 0) -> Trajectory:
    """One path; identical to path ``path`` of :func:`estimate_J` with the same seed."""
    check_strategy(model, strategy1, 1)
    check_strategy(model, strategy2, 2)
    if not t_max > 0:
        raise ValueError("t_max must be positive")
    tables = _Tables(model, strategy1, strategy2, 1, False)
    _, n, records = _run_paths(tables, start_state, t_max, seed, path, 1, record=True)
    return Trajectory(records[0], t_max, int(n[0]))


def accumulate_cost(model: GameModel, traj: Trajectory, player: int = 1,
                    zero_sum: bool = True) -> float:
    """Total cost up to ``t_max``: full sojourns, the truncated last one, and in
    zero-sum mode the immediate cost at every epoch ``0..N_t``. Zero-sum mode
    always uses player 1's running cost, whichever ``player`` is asked for."""
    rcs = model.running_cost(1 if zero_sum else player)
    total = 0.0
    for x, a, b, s, t in traj.records:
        seg = min(s, traj.t_max - t)
        if zero_sum:
            total += float(model.immediate(x)[a, b])
        total += float(rcs[x][a][b].integral(seg))
    return total


def _resolve_workers(workers: int | None) -> int:
    if workers is None:
        workers = int(os.environ.get("RSGAME_THREADS", "1"))
    return max(1, workers)


def path_costs(model: GameModel, strategy1: StationaryStrategy, strategy2: StationaryStrategy,
               start_state: int, t: float, n_paths: int, seed: int = 0, player: int = 1,
               zero_sum: bool = True, workers: int | None = None):
    """Per-path total costs and jump counts, in path order."""
    check_strategy(model, strategy1, 1)
    check_strategy(model, strategy2, 2)
    tables = _Tables(model, strategy1, strategy2, player, zero_sum)
    starts = list(range(0, n_paths, BATCH))

    def run(first):
        cost, n, _ = _run_paths(tables, start_state, t, seed, first, min(BATCH, n_paths - first))
        return cost, n

    w = _resolve_workers(workers)
    if w == 1:
        parts = [run(f) for f in starts]
    else:
        with ThreadPoolExecutor(max_workers=w) as pool:
            parts = list(pool.map(run, starts))
    return np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts])


def estimate_J(model: GameModel, strategy1: StationaryStrategy, strategy2: StationaryStrategy,
               start_state: int, t: float, n_paths: int, seed: int = 0, player: int = 1,
               zero_sum: bool = True, workers: int | None = None) -> JEstimate:
    """``(1/(theta t)) ln mean(exp(theta C_t))`` with a 99% delta-method interval."""
    if n_paths < 100:
        raise ValueError("n_paths must be at least 100")
    cost, _ = path_costs(model, strategy1, strategy2, start_state, t, n_paths, seed,
                         player, zero_sum, workers)
    theta = model.theta
    with np.errstate(over="ignore"):
        x = theta * cost
    if not np.all(np.isfinite(x)):
        raise OverflowError("exponential cost overflowed; use a smaller theta * t")
    top = float(x.max())
    y = np.exp(x - top)
    mean = float(y.mean())
    sd = float(y.std(ddof=1))
    log_mean = top + math.log(mean)
    half = Z99 * sd / (mean * math.sqrt(n_paths))
    scale = theta * t
    return JEstimate(log_mean / scale, ((log_mean - half) / scale, (log_mean + half) / scale),
                     n_paths, t, log_mean, seed, player, zero_sum)


def r_alpha(model: GameModel, alpha: float) -> int:
    """Smallest integer ``r >= 1`` with ``sup E[exp(-r S)] <= alpha`` over all cells."""
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must be in (0, 1)")
    B = model.horizon_bound
    dists = [model.sojourn[i][a][b] for i, a, b in model.cells()]

    def ok(r: int) -> bool:
        return max(d.laplace(r, B) for d in dists) <= alpha * (1.0 + 1e-12)

    hi = 1
    while not ok(hi):
        hi *= 2
        if hi > 2 ** 62:
            raise ValueError("no finite r_alpha found")
    lo = hi // 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi


def tail_diagnostic(model: GameModel, alpha: float, t: float, n_paths: int, seed: int = 0,
                    start_state: int = 0) -> TailReport:
    """Compare empirical ``P[N_t >= n]`` with ``alpha**n exp(r_alpha t)`` under uniform play."""
    r = r_alpha(model, alpha)
    _, counts = path_costs(model, uniform_strategy(model, 1), uniform_strategy(model, 2),
                           start_state, t, n_paths, seed, 1, False)
    report = TailReport(alpha, r, t, n_paths, seed)
    for n in range(0, int(counts.max()) + 1):
        p = float(np.mean(counts >= n))
        log_bound = n * math.log(alpha) + r * t
        bound = math.exp(min(log_bound, 700.0))
        se = math.sqrt(p * (1.0 - p) / n_paths)
        report.rows.append({
            "n": n, "empirical": p, "bound": bound, "stderr": se,
            "violated": bool(p - bound > 3.0 * se and p > bound),
        })
    return report
