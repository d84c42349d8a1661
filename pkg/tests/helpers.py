"""Random model generators shared by the property tests."""
import numpy as np

from rsgame.model import model_from_dict

SOJOURN_KINDS = ("atoms", "uniform", "truncated_exponential")


def random_model_dict(rng, n_states=2, m=2, n=2, theta=None, horizon=2.0, immediate=True,
                      two_costs=False, degree=2, kinds=SOJOURN_KINDS):
    states = [f"s{k}" for k in range(n_states)]
    acts1 = {s: [f"a{k}" for k in range(m)] for s in states}
    acts2 = {s: [f"b{k}" for k in range(n)] for s in states}

    def cell(f):
        return {s: {a: {b: f() for b in acts2[s]} for a in acts1[s]} for s in states}

    def sojourn():
        kind = kinds[rng.integers(len(kinds))]
        if kind == "atoms":
            k = int(rng.integers(1, 4))
            s = rng.uniform(0.05, horizon, size=k)
            w = rng.uniform(0.1, 1.0, size=k)
            w /= w.sum()
            w[-1] = 1.0 - w[:-1].sum()
            return {"kind": "atoms", "atoms": [[float(a), float(b)] for a, b in zip(s, w)]}
        if kind == "uniform":
            lo = float(rng.uniform(0.0, horizon / 2))
            return {"kind": "uniform", "lo": lo, "hi": float(rng.uniform(lo + 0.1, horizon))}
        return {"kind": "truncated_exponential", "rate": float(rng.uniform(0.2, 3.0))}

    def row():
        p = rng.uniform(0.05, 1.0, size=n_states)
        p /= p.sum()
        return {s: float(x) for s, x in zip(states, p)}

    def poly():
        return [float(x) for x in rng.uniform(-0.5, 0.5, size=int(rng.integers(1, degree + 2)))]

    doc = {
        "states": states,
        "theta": float(rng.uniform(0.1, 1.0)) if theta is None else theta,
        "horizon_bound": horizon,
        "actions1": acts1,
        "actions2": acts2,
        "running_cost1": cell(poly),
        "sojourn": cell(sojourn),
        "transition": cell(row),
    }
    if immediate:
        doc["immediate_cost"] = cell(lambda: float(rng.uniform(-1.0, 1.0)))
    if two_costs:
        doc["running_cost2"] = cell(poly)
    return doc


def random_model(rng, **kw):
    return model_from_dict(random_model_dict(rng, **kw))


def random_strategy_rows(rng, sizes):
    rows = []
    for k in sizes:
        p = rng.uniform(0.0, 1.0, size=k) ** 2
        p /= p.sum()
        rows.append(p)
    return rows
