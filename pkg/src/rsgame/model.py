"""Game description types, JSON (de)serialization and model validation.

A model holds, for every state ``i`` and action pair ``(a, b)``, an immediate
cost, one running-cost polynomial per player, a sojourn-time distribution on
``(0, horizon_bound]`` and a transition row. Tables are stored per state, so
action sets may differ in size from state to state.
"""
from __future__ import annotations

import hashlib
import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Any, Iterator, Sequence

import numpy as np
from scipy.sparse.csgraph import connected_components
from scipy.special import logsumexp

SCHEMA_VERSION = 1
MAX_DEGREE = 8
PROB_TOL = 1e-12
MAX_ENUMERATED_PAIRS = 4096
M_RHO_SAMPLES = 1025

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(64)


class ModelError(ValueError):
    """Malformed model document or inconsistent table dimensions."""

    def __init__(self, message: str, path: str | None = None):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


@dataclass(frozen=True)
class RunningCost:
    """Polynomial running-cost rate ``rho(t) = sum_k c_k t**k``."""

    coefficients: tuple[float, ...] = (0.0,)

    def __post_init__(self):
        object.__setattr__(self, "coefficients", tuple(float(c) for c in self.coefficients))
        if not self.coefficients:
            raise ModelError("running cost needs at least one coefficient")

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def __call__(self, t):
        return np.polynomial.polynomial.polyval(t, self.coefficients)

    def antiderivative(self) -> np.ndarray:
        """Coefficients of ``R(s) = int_0^s rho``; ``R(0) = 0``."""
        c = np.asarray(self.coefficients)
        return np.concatenate([[0.0], c / np.arange(1, len(c) + 1)])

    def integral(self, s):
        return np.polynomial.polynomial.polyval(s, self.antiderivative())


@dataclass(frozen=True)
class SojournDist:
    """Sojourn-time law on ``(0, B]``.

    ``atoms`` is a tuple of ``(s, w)`` pairs; ``uniform`` uses ``lo``/``hi``;
    ``truncated_exponential`` uses ``rate`` and is truncated to the model's
    horizon bound, which is passed to every method that needs it.
    """

    kind: str
    atoms: tuple[tuple[float, float], ...] = ()
    lo: float = 0.0
    hi: float = 0.0
    rate: float = 0.0

    KINDS = ("atoms", "uniform", "truncated_exponential")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ModelError(f"unknown sojourn kind {self.kind!r}")
        object.__setattr__(
            self, "atoms", tuple((float(s), float(w)) for s, w in self.atoms)
        )
        for name in ("lo", "hi", "rate"):
            object.__setattr__(self, name, float(getattr(self, name)))

    @classmethod
    def deterministic(cls, s: float) -> "SojournDist":
        return cls("atoms", atoms=((s, 1.0),))

    def log_expectation(self, log_integrand, horizon: float) -> float:
        """``ln E[exp(f(S))]`` for a vectorized exponent ``f``.

        Atoms are summed exactly; the continuous kinds use 64-node
        Gauss-Legendre quadrature on their support interval.
        """
        if self.kind == "atoms":
            s = np.array([a[0] for a in self.atoms])
            w = np.array([a[1] for a in self.atoms])
            return float(logsumexp(log_integrand(s), b=w))
        if self.kind == "uniform":
            lo, hi = self.lo, self.hi
            x = 0.5 * (hi - lo) * _GL_NODES + 0.5 * (hi + lo)
            return float(logsumexp(log_integrand(x), b=0.5 * _GL_WEIGHTS))
        r, B = self.rate, horizon
        x = 0.5 * B * (_GL_NODES + 1.0)
        log_density = math.log(r) - r * x - math.log(-math.expm1(-r * B))
        return float(logsumexp(log_integrand(x) + log_density, b=0.5 * B * _GL_WEIGHTS))

    def laplace(self, r: float, horizon: float) -> float:
        """Closed-form ``E[exp(-r S)]`` for ``r >= 0``."""
        if self.kind == "atoms":
            return float(sum(w * math.exp(-r * s) for s, w in self.atoms))
        if r == 0:
            return 1.0
        if self.kind == "uniform":
            lo, hi = self.lo, self.hi
            return math.exp(-r * lo) * -math.expm1(-r * (hi - lo)) / (r * (hi - lo))
        lam, B = self.rate, horizon
        return lam * -math.expm1(-(lam + r) * B) / ((lam + r) * -math.expm1(-lam * B))

    def mean(self, horizon: float) -> float:
        return math.exp(self.log_expectation(np.log, horizon))

    def sample(self, u: np.ndarray, horizon: float) -> np.ndarray:
        """Inverse-CDF draw from uniforms ``u`` in ``(0, 1]``."""
        if self.kind == "atoms":
            s = np.array([a[0] for a in self.atoms])
            cw = np.cumsum([a[1] for a in self.atoms])
            cw[-1] = 1.0
            idx = np.searchsorted(cw, 1.0 - u, side="right")
            return s[np.minimum(idx, len(s) - 1)]
        if self.kind == "uniform":
            return self.lo + (self.hi - self.lo) * u
        return -np.log1p(u * math.expm1(-self.rate * horizon)) / self.rate

    def to_dict(self) -> dict[str, Any]:
        if self.kind == "atoms":
            return {"kind": "atoms", "atoms": [[s, w] for s, w in self.atoms]}
        if self.kind == "uniform":
            return {"kind": "uniform", "lo": self.lo, "hi": self.hi}
        return {"kind": "truncated_exponential", "rate": self.rate}

    def support_problems(self, horizon: float) -> list[str]:
        """Reasons this law is not a probability on ``(0, horizon]``."""
        out = []
        if self.kind == "atoms":
            if not self.atoms:
                out.append("empty atom list")
            for s, w in self.atoms:
                if not (0.0 < s <= horizon) or not math.isfinite(s):
                    out.append(f"atom at {s!r} outside (0, {horizon!r}]")
                if not (w > 0.0) or not math.isfinite(w):
                    out.append(f"atom weight {w!r} not positive")
            total = sum(w for _, w in self.atoms)
            if abs(total - 1.0) > PROB_TOL:
                out.append(f"atom weights sum to {total!r}")
        elif self.kind == "uniform":
            if not (0.0 <= self.lo < self.hi <= horizon):
                out.append(f"uniform bounds ({self.lo!r}, {self.hi!r}) not in [0, {horizon!r}]")
        else:
            if not (self.rate > 0.0) or not math.isfinite(self.rate):
                out.append(f"rate {self.rate!r} not positive")
        return out


def _parse_sojourn(doc: Any, path: str) -> SojournDist:
    if not isinstance(doc, dict) or "kind" not in doc:
        raise ModelError("sojourn entry must be an object with a 'kind'", path)
    kind = doc["kind"]
    allowed = {
        "atoms": {"kind", "atoms"},
        "uniform": {"kind", "lo", "hi"},
        "truncated_exponential": {"kind", "rate"},
    }
    if kind not in allowed:
        raise ModelError(f"unknown sojourn kind {kind!r}", path)
    _reject_unknown(doc, allowed[kind], path)
    missing = allowed[kind] - set(doc)
    if missing:
        raise ModelError(f"missing field(s) {sorted(missing)}", path)
    if kind == "atoms":
        atoms = doc["atoms"]
        if not isinstance(atoms, list) or not all(
            isinstance(p, list) and len(p) == 2 for p in atoms
        ):
            raise ModelError("atoms must be a list of [s, w] pairs", path + ".atoms")
        return SojournDist("atoms", atoms=tuple((_num(s, path), _num(w, path)) for s, w in atoms))
    if kind == "uniform":
        return SojournDist("uniform", lo=_num(doc["lo"], path), hi=_num(doc["hi"], path))
    return SojournDist("truncated_exponential", rate=_num(doc["rate"], path))


def _num(x: Any, path: str) -> float:
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise ModelError(f"expected a number, got {x!r}", path)
    return float(x)


def _reject_unknown(doc: dict, allowed: set[str], path: str) -> None:
    extra = set(doc) - allowed
    if extra:
        raise ModelError(f"unknown field(s) {sorted(extra)}", path)


@dataclass(frozen=True)
class StationaryStrategy:
    """Per-state mixed action: ``probs[i]`` is a distribution over that state's actions."""

    probs: tuple[np.ndarray, ...]

    def __post_init__(self):
        rows = []
        for p in self.probs:
            row = np.array(p, dtype=float)
            row.setflags(write=False)
            rows.append(row)
        object.__setattr__(self, "probs", tuple(rows))

    def __getitem__(self, i: int) -> np.ndarray:
        return self.probs[i]

    def __len__(self) -> int:
        return len(self.probs)

    def is_pure(self) -> bool:
        return all(np.count_nonzero(p) == 1 for p in self.probs)

    def mix(self, other: "StationaryStrategy", weight: float) -> "StationaryStrategy":
        """``(1 - weight) * self + weight * other``, state by state."""
        return StationaryStrategy(
            tuple((1.0 - weight) * p + weight * q for p, q in zip(self.probs, other.probs))
        )

    def distance(self, other: "StationaryStrategy") -> float:
        """Largest per-state total-variation distance."""
        return max(0.5 * float(np.abs(p - q).sum()) for p, q in zip(self.probs, other.probs))


@dataclass(frozen=True, eq=False)
class GameModel:
    """Finite-state semi-Markov game.

    Per-state tables: ``transition[i]`` has shape ``(m_i, n_i, |S|)``,
    ``immediate_cost[i]`` shape ``(m_i, n_i)``; ``sojourn``, ``running_cost1``
    and ``running_cost2`` are nested ``[i][a][b]`` tuples.
    """

    states: tuple[str, ...]
    actions1: tuple[tuple[str, ...], ...]
    actions2: tuple[tuple[str, ...], ...]
    theta: float
    horizon_bound: float
    transition: tuple[np.ndarray, ...]
    sojourn: tuple[tuple[tuple[SojournDist, ...], ...], ...]
    running_cost1: tuple[tuple[tuple[RunningCost, ...], ...], ...]
    running_cost2: tuple[tuple[tuple[RunningCost, ...], ...], ...] | None = None
    immediate_cost: tuple[np.ndarray, ...] | None = None
    reference_state: int = 0
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        set_ = lambda k, v: object.__setattr__(self, k, v)  # noqa: E731
        set_("states", tuple(self.states))
        set_("actions1", tuple(tuple(a) for a in self.actions1))
        set_("actions2", tuple(tuple(b) for b in self.actions2))
        set_("theta", float(self.theta))
        set_("horizon_bound", float(self.horizon_bound))
        n = len(self.states)
        if n == 0:
            raise ModelError("model needs at least one state", "states")
        if len(set(self.states)) != n:
            raise ModelError("duplicate state names", "states")
        for name, acts in (("actions1", self.actions1), ("actions2", self.actions2)):
            if len(acts) != n:
                raise ModelError(f"expected {n} action lists", name)
            for i, a in enumerate(acts):
                if len(a) == 0:
                    raise ModelError("empty action set", f"{name}[{self.states[i]}]")
                if len(set(a)) != len(a):
                    raise ModelError("duplicate action names", f"{name}[{self.states[i]}]")
        trans = []
        for i, p in enumerate(self.transition):
            arr = np.array(p, dtype=float)
            if arr.shape != (*self.shape(i), n):
                raise ModelError(f"shape {arr.shape} != {(*self.shape(i), n)}", f"transition[{self.states[i]}]")
            arr.setflags(write=False)
            trans.append(arr)
        if len(trans) != n:
            raise ModelError(f"expected {n} transition blocks", "transition")
        set_("transition", tuple(trans))
        if self.immediate_cost is not None:
            costs = []
            for i, c in enumerate(self.immediate_cost):
                arr = np.array(c, dtype=float)
                if arr.shape != self.shape(i):
                    raise ModelError(f"shape {arr.shape} != {self.shape(i)}", f"immediate_cost[{self.states[i]}]")
                arr.setflags(write=False)
                costs.append(arr)
            if len(costs) != n:
                raise ModelError(f"expected {n} cost blocks", "immediate_cost")
            set_("immediate_cost", tuple(costs))
        for name in ("sojourn", "running_cost1", "running_cost2"):
            table = getattr(self, name)
            if table is None:
                if name != "running_cost2":
                    raise ModelError("table is required", name)
                continue
            table = tuple(tuple(tuple(row) for row in block) for block in table)
            if len(table) != n:
                raise ModelError(f"expected {n} blocks", name)
            for i, block in enumerate(table):
                if len(block) != self.shape(i)[0] or any(len(r) != self.shape(i)[1] for r in block):
                    raise ModelError(f"dimensions do not match {self.shape(i)}", f"{name}[{self.states[i]}]")
            set_(name, table)
        if not 0 <= int(self.reference_state) < n:
            raise ModelError("reference state out of range", "reference_state")
        set_("reference_state", int(self.reference_state))

    @property
    def n_states(self) -> int:
        return len(self.states)

    def shape(self, i: int) -> tuple[int, int]:
        return len(self.actions1[i]), len(self.actions2[i])

    def cells(self) -> Iterator[tuple[int, int, int]]:
        for i in range(self.n_states):
            m, n = self.shape(i)
            for a in range(m):
                for b in range(n):
                    yield i, a, b

    def running_cost(self, player: int):
        if player == 1:
            return self.running_cost1
        if player == 2:
            if self.running_cost2 is None:
                raise ModelError("model has no running cost for player 2", "running_cost2")
            return self.running_cost2
        raise ValueError(f"player must be 1 or 2, got {player!r}")

    def immediate(self, i: int) -> np.ndarray:
        if self.immediate_cost is None:
            return np.zeros(self.shape(i))
        return self.immediate_cost[i]

    def action_names(self, player: int) -> tuple[tuple[str, ...], ...]:
        return self.actions1 if player == 1 else self.actions2

    def state_index(self, name: str) -> int:
        try:
            return self.states.index(name)
        except ValueError:
            raise ModelError(f"unknown state {name!r}") from None

    def fingerprint(self) -> str:
        if "hash" not in self._cache:
            self._cache["hash"] = hashlib.sha256(save_model(self).encode()).hexdigest()
        return self._cache["hash"]

    def with_theta(self, theta: float) -> "GameModel":
        return _replace(self, theta=theta)


def _replace(model: GameModel, **changes) -> GameModel:
    fields = {
        k: getattr(model, k)
        for k in (
            "states", "actions1", "actions2", "theta", "horizon_bound", "transition",
            "sojourn", "running_cost1", "running_cost2", "immediate_cost", "reference_state",
        )
    }
    fields.update(changes)
    return GameModel(**fields)


_TOP_KEYS = (
    "states", "theta", "horizon_bound", "reference_state", "actions1", "actions2",
    "immediate_cost", "running_cost1", "running_cost2", "sojourn", "transition",
)
_REQUIRED = {"states", "theta", "horizon_bound", "actions1", "actions2", "running_cost1",
             "sojourn", "transition"}


def load_model(text: str, check: bool = True) -> GameModel:
    """Parse a JSON model document.

    With ``check=True`` the hard invariants (stochastic rows, sojourn support,
    positive ``theta`` and ``horizon_bound``) are enforced and the first
    violation raises :class:`ModelError` naming the offending entry.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelError(f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    model = model_from_dict(doc)
    if check:
        problems = hard_problems(model)
        if problems:
            path, message = problems[0]
            raise ModelError(message, path)
    return model


def model_from_dict(doc: Any) -> GameModel:
    if not isinstance(doc, dict):
        raise ModelError("top level must be an object")
    _reject_unknown(doc, set(_TOP_KEYS), "$")
    missing = _REQUIRED - set(doc)
    if missing:
        raise ModelError(f"missing field(s) {sorted(missing)}", "$")
    states = doc["states"]
    if not isinstance(states, list) or not all(isinstance(s, str) for s in states):
        raise ModelError("must be a list of strings", "states")

    def per_state(key: str) -> list:
        block = doc[key]
        if not isinstance(block, dict):
            raise ModelError("must be an object keyed by state", key)
        _reject_unknown(block, set(states), key)
        out = []
        for s in states:
            if s not in block:
                raise ModelError(f"missing state {s!r}", key)
            out.append(block[s])
        return out

    actions1 = per_state("actions1")
    actions2 = per_state("actions2")
    for key, acts in (("actions1", actions1), ("actions2", actions2)):
        for s, a in zip(states, acts):
            if not isinstance(a, list) or not all(isinstance(x, str) for x in a):
                raise ModelError("must be a list of strings", f"{key}[{s}]")

    def cell_table(key: str, parse) -> list:
        blocks = per_state(key)
        out = []
        for i, (s, block) in enumerate(zip(states, blocks)):
            path = f"{key}[{s}]"
            if not isinstance(block, dict):
                raise ModelError("must be an object keyed by action", path)
            _reject_unknown(block, set(actions1[i]), path)
            rows = []
            for a in actions1[i]:
                if a not in block:
                    raise ModelError(f"missing entry for action {a!r}", path)
                row_doc = block[a]
                rpath = f"{path}[{a}]"
                if not isinstance(row_doc, dict):
                    raise ModelError("must be an object keyed by action", rpath)
                _reject_unknown(row_doc, set(actions2[i]), rpath)
                row = []
                for b in actions2[i]:
                    if b not in row_doc:
                        raise ModelError(f"missing entry for action {b!r}", rpath)
                    row.append(parse(row_doc[b], f"{rpath}[{b}]"))
                rows.append(row)
            out.append(rows)
        return out

    def parse_poly(x, path):
        if not isinstance(x, list) or not x:
            raise ModelError("running cost must be a non-empty coefficient list", path)
        if len(x) - 1 > MAX_DEGREE:
            raise ModelError(f"degree {len(x) - 1} exceeds {MAX_DEGREE}", path)
        return RunningCost(tuple(_num(c, path) for c in x))

    def parse_row(x, path):
        if not isinstance(x, dict):
            raise ModelError("transition row must be an object keyed by target state", path)
        _reject_unknown(x, set(states), path)
        return [_num(x.get(j, 0.0), f"{path}[{j}]") for j in states]

    ref = doc.get("reference_state", states[0] if states else None)
    if ref not in states:
        raise ModelError(f"unknown state {ref!r}", "reference_state")
    immediate = None
    if "immediate_cost" in doc:
        immediate = [np.array(b, dtype=float) for b in cell_table("immediate_cost", _num)]
    rc2 = cell_table("running_cost2", parse_poly) if "running_cost2" in doc else None
    return GameModel(
        states=tuple(states),
        actions1=tuple(tuple(a) for a in actions1),
        actions2=tuple(tuple(b) for b in actions2),
        theta=_num(doc["theta"], "theta"),
        horizon_bound=_num(doc["horizon_bound"], "horizon_bound"),
        transition=tuple(np.array(b, dtype=float) for b in cell_table("transition", parse_row)),
        sojourn=cell_table("sojourn", _parse_sojourn),
        running_cost1=cell_table("running_cost1", parse_poly),
        running_cost2=rc2,
        immediate_cost=immediate,
        reference_state=states.index(ref),
    )


def model_to_dict(model: GameModel) -> dict[str, Any]:
    S = model.states

    def cell_table(fn) -> dict:
        return {
            S[i]: {
                a: {b: fn(i, ai, bi) for bi, b in enumerate(model.actions2[i])}
                for ai, a in enumerate(model.actions1[i])
            }
            for i in range(model.n_states)
        }

    doc: dict[str, Any] = {
        "states": list(S),
        "theta": model.theta,
        "horizon_bound": model.horizon_bound,
        "reference_state": S[model.reference_state],
        "actions1": {S[i]: list(a) for i, a in enumerate(model.actions1)},
        "actions2": {S[i]: list(b) for i, b in enumerate(model.actions2)},
    }
    if model.immediate_cost is not None:
        doc["immediate_cost"] = cell_table(lambda i, a, b: float(model.immediate_cost[i][a, b]))
    doc["running_cost1"] = cell_table(lambda i, a, b: list(model.running_cost1[i][a][b].coefficients))
    if model.running_cost2 is not None:
        doc["running_cost2"] = cell_table(lambda i, a, b: list(model.running_cost2[i][a][b].coefficients))
    doc["sojourn"] = cell_table(lambda i, a, b: model.sojourn[i][a][b].to_dict())
    doc["transition"] = cell_table(
        lambda i, a, b: {
            S[j]: float(p) for j, p in enumerate(model.transition[i][a, b]) if p != 0.0
        }
    )
    return doc


def save_model(model: GameModel) -> str:
    """Canonical JSON text; ``save_model(load_model(t)) == t`` for canonical ``t``."""
    return json.dumps(model_to_dict(model), indent=2, ensure_ascii=False) + "\n"


# -- strategies --------------------------------------------------------------

def uniform_strategy(model: GameModel, player: int) -> StationaryStrategy:
    acts = model.action_names(player)
    return StationaryStrategy(tuple(np.full(len(a), 1.0 / len(a)) for a in acts))


def pure_strategy(model: GameModel, player: int, choice: Sequence[int]) -> StationaryStrategy:
    acts = model.action_names(player)
    rows = []
    for i, k in enumerate(choice):
        row = np.zeros(len(acts[i]))
        row[k] = 1.0
        rows.append(row)
    return StationaryStrategy(tuple(rows))


def check_strategy(model: GameModel, strategy: StationaryStrategy, player: int) -> None:
    acts = model.action_names(player)
    if len(strategy) != model.n_states:
        raise ModelError(f"strategy covers {len(strategy)} states, model has {model.n_states}")
    for i, p in enumerate(strategy.probs):
        where = f"strategy{player}[{model.states[i]}]"
        if p.shape != (len(acts[i]),):
            raise ModelError(f"length {p.shape[0] if p.ndim else 0} != {len(acts[i])}", where)
        if np.any(p < 0) or not np.all(np.isfinite(p)):
            raise ModelError("negative or non-finite probability", where)
        if abs(p.sum() - 1.0) > PROB_TOL:
            raise ModelError(f"probabilities sum to {p.sum()!r}", where)


def strategy_to_dict(model: GameModel, strategy: StationaryStrategy, player: int) -> dict[str, Any]:
    acts = model.action_names(player)
    return {
        "player": player,
        "probs": {
            model.states[i]: {a: float(p[k]) for k, a in enumerate(acts[i])}
            for i, p in enumerate(strategy.probs)
        },
    }


def strategy_from_dict(model: GameModel, doc: Any, player: int | None = None) -> tuple[int, StationaryStrategy]:
    if not isinstance(doc, dict):
        raise ModelError("strategy document must be an object")
    _reject_unknown(doc, {"player", "probs"}, "strategy")
    p = doc.get("player", player)
    if p not in (1, 2):
        raise ModelError(f"player must be 1 or 2, got {p!r}", "strategy.player")
    if player is not None and p != player:
        raise ModelError(f"strategy is for player {p}, expected {player}", "strategy.player")
    probs = doc.get("probs")
    if probs == "uniform":
        return p, uniform_strategy(model, p)
    if not isinstance(probs, dict):
        raise ModelError("missing probs object", "strategy.probs")
    _reject_unknown(probs, set(model.states), "strategy.probs")
    acts = model.action_names(p)
    rows = []
    for i, s in enumerate(model.states):
        entry = probs.get(s)
        if not isinstance(entry, dict):
            raise ModelError("missing state", f"strategy.probs[{s}]")
        _reject_unknown(entry, set(acts[i]), f"strategy.probs[{s}]")
        rows.append(np.array([_num(entry.get(a, 0.0), f"strategy.probs[{s}][{a}]") for a in acts[i]]))
    strategy = StationaryStrategy(tuple(rows))
    check_strategy(model, strategy, p)
    return p, strategy


def load_strategy(model: GameModel, text: str, player: int | None = None) -> tuple[int, StationaryStrategy]:
    return strategy_from_dict(model, json.loads(text), player)


def save_strategy(model: GameModel, strategy: StationaryStrategy, player: int) -> str:
    return json.dumps(strategy_to_dict(model, strategy, player), indent=2) + "\n"


# -- validation --------------------------------------------------------------

@dataclass
class ValidationReport:
    checks: list[tuple[str, str, str]]
    m_rho: float
    irreducibility_status: str
    assumption3_status: str
    assumption3_R: float = math.nan
    assumption3_sup: float = math.nan

    @property
    def status(self) -> str:
        statuses = {c[1] for c in self.checks}
        for s in ("fail", "warn"):
            if s in statuses:
                return s
        return "pass"

    def failures(self) -> list[tuple[str, str, str]]:
        return [c for c in self.checks if c[1] == "fail"]

    def to_dict(self) -> dict[str, Any]:
        return {
            "schema_version": SCHEMA_VERSION,
            "status": self.status,
            "checks": [{"name": n, "status": s, "detail": d} for n, s, d in self.checks],
            "m_rho": self.m_rho,
            "irreducibility_status": self.irreducibility_status,
            "assumption3_status": self.assumption3_status,
            "assumption3_R": self.assumption3_R,
            "assumption3_sup": _json_float(self.assumption3_sup),
        }


def _json_float(x: float):
    return x if math.isfinite(x) else str(x)


def hard_problems(model: GameModel) -> list[tuple[str, str]]:
    """``(path, message)`` for every violated hard invariant."""
    out = []
    if not (model.theta > 0) or not math.isfinite(model.theta):
        out.append(("theta", f"theta must be positive, got {model.theta!r}"))
    B = model.horizon_bound
    if not (B > 0) or not math.isfinite(B):
        out.append(("horizon_bound", f"horizon_bound must be positive, got {B!r}"))
    S = model.states
    for i, a, b in model.cells():
        where = f"[{S[i]}][{model.actions1[i][a]}][{model.actions2[i][b]}]"
        row = model.transition[i][a, b]
        if np.any(row < 0) or not np.all(np.isfinite(row)):
            out.append(("transition" + where, "row has negative or non-finite entries"))
        elif abs(row.sum() - 1.0) > PROB_TOL:
            out.append(("transition" + where, f"row sums to {float(row.sum())!r}"))
        for msg in model.sojourn[i][a][b].support_problems(B):
            out.append(("sojourn" + where, msg))
        for name in ("running_cost1", "running_cost2"):
            table = getattr(model, name)
            if table is None:
                continue
            rc = table[i][a][b]
            if rc.degree > MAX_DEGREE or not all(math.isfinite(c) for c in rc.coefficients):
                out.append((name + where, "coefficients must be finite with degree <= 8"))
        if model.immediate_cost is not None and not math.isfinite(model.immediate_cost[i][a, b]):
            out.append(("immediate_cost" + where, "cost is not finite"))
    return out


def compute_m_rho(model: GameModel, player: int) -> float:
    """``max |rho(t)|`` over all cells and ``t`` on a 1025-point grid of ``[0, B]``."""
    table = model.running_cost(player)
    t = np.linspace(0.0, model.horizon_bound, M_RHO_SAMPLES)
    best = 0.0
    for i, a, b in model.cells():
        best = max(best, float(np.max(np.abs(table[i][a][b](t)))))
    return best


def has_choice(model: GameModel, player: int) -> bool:
    """Whether ``player`` has more than one action somewhere."""
    return any(model.shape(i)[player - 1] > 1 for i in range(model.n_states))


def n_pure_pairs(model: GameModel) -> int:
    return math.prod(m * n for m, n in (model.shape(i) for i in range(model.n_states)))


def pure_pair_transitions(model: GameModel) -> Iterator[np.ndarray]:
    """Embedded-chain matrix under each pure stationary pair."""
    choices = [list(itertools.product(range(m), range(n))) for m, n in
               (model.shape(i) for i in range(model.n_states))]
    for combo in itertools.product(*choices):
        yield np.array([model.transition[i][a, b] for i, (a, b) in enumerate(combo)])


def _strongly_connected(adj: np.ndarray) -> bool:
    n_comp, _ = connected_components(adj, directed=True, connection="strong")
    return n_comp == 1


def first_passage_mgf(P: np.ndarray, ref: int, R: float) -> np.ndarray:
    """``E_i[R**tau]`` with ``tau`` the first epoch ``n >= 1`` at ``ref``; ``inf`` when divergent."""
    taboo = P.copy()
    taboo[:, ref] = 0.0
    if np.max(np.abs(np.linalg.eigvals(R * taboo))) >= 1.0 - 1e-12:
        return np.full(len(P), np.inf)
    return np.linalg.solve(np.eye(len(P)) - R * taboo, R * P[:, ref])


def validate(model: GameModel) -> ValidationReport:
    checks: list[tuple[str, str, str]] = []
    problems = hard_problems(model)
    for path, msg in problems:
        checks.append((path, "fail", msg))
    if not problems:
        checks.append(("structure", "pass", "stochastic rows, sojourn support and parameters valid"))

    m_rho = compute_m_rho(model, 1)
    if model.running_cost2 is not None:
        m_rho = max(m_rho, compute_m_rho(model, 2))

    # Irreducible embedded chain under every stationary pair.
    pairs = n_pure_pairs(model)
    if pairs <= MAX_ENUMERATED_PAIRS:
        bad = next((P for P in pure_pair_transitions(model) if not _strongly_connected(P > 0)), None)
        if bad is None:
            irr, detail = "pass", f"all {pairs} pure stationary pairs irreducible"
        else:
            irr, detail = "fail", "embedded chain reducible under some pure stationary pair"
    else:
        floor = np.array([
            [min(float(model.transition[i][:, :, j].min()), 1.0) for j in range(model.n_states)]
            for i in range(model.n_states)
        ])
        if _strongly_connected(floor > 0):
            irr, detail = "pass", "common-edge graph strongly connected (sufficient)"
        else:
            irr, detail = "warn", f"{pairs} pure pairs, not enumerated; sufficient condition inconclusive"
    checks.append(("irreducibility", irr, detail))

    # First-passage moment condition with R pinned at exp(2 theta B M_rho).
    R = math.exp(2.0 * model.theta * model.horizon_bound * m_rho) if not problems else math.nan
    sup = math.nan
    if problems:
        a3, detail = "warn", "skipped: model fails hard checks"
    elif pairs > MAX_ENUMERATED_PAIRS:
        a3, detail = "warn", f"{pairs} pure pairs, first-passage bound not enumerated"
    else:
        sup = 0.0
        for P in pure_pair_transitions(model):
            sup = max(sup, float(np.max(first_passage_mgf(P, model.reference_state, R))))
            if math.isinf(sup):
                break
        if math.isfinite(sup):
            a3, detail = "pass", f"sup E[R^tau*] = {sup!r} with R = {R!r}"
        else:
            a3, detail = "warn", f"E[R^tau*] infinite for some pure pair with R = {R!r}"
    checks.append(("assumption3", a3, detail))
    return ValidationReport(checks, m_rho, irr, a3, R, sup)
