"""Bracket expansion and bisection for nonincreasing scalar maps ``g -> mu(g)``."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

from .discrete import SolverFailure

X_TOL = 1e-11
F_TOL = 1e-9
MAX_DOUBLINGS = 60


class BracketError(SolverFailure):
    pass


@dataclass
class RootResult:
    root: float
    value: float
    bracket: tuple[float, float]
    trace: list[tuple[float, float]] = field(default_factory=list)


def find_decreasing_root(fn: Callable[[float], float], center: float = 0.0, radius: float = 1.0,
                         xtol: float = X_TOL, ftol: float = F_TOL,
                         max_doublings: int = MAX_DOUBLINGS) -> RootResult:
    """Zero of a continuous nonincreasing ``fn``.

    The bracket ``[center - r, center + r]`` is doubled until ``fn`` changes
    sign, then halved until it is narrower than ``xtol``; the returned point
    is the secant interpolant inside the final bracket.
    """
    trace: list[tuple[float, float]] = []

    def f(x: float) -> float:
        y = fn(x)
        trace.append((x, y))
        return y

    r = radius
    lo, hi = center - r, center + r
    f_lo, f_hi = f(lo), f(hi)
    doublings = 0
    while not (f_lo >= 0.0 >= f_hi):
        if doublings >= max_doublings:
            raise BracketError("no sign change found while expanding the bracket", mu_trace=trace)
        r *= 2.0
        doublings += 1
        if f_lo < 0.0:
            lo = center - r
            f_lo = f(lo)
        if f_hi > 0.0:
            hi = center + r
            f_hi = f(hi)
    if f_lo == 0.0:
        return RootResult(lo, 0.0, (lo, lo), trace)
    if f_hi == 0.0:
        return RootResult(hi, 0.0, (hi, hi), trace)
    while hi - lo > xtol:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        f_mid = f(mid)
        if f_mid == 0.0:
            return RootResult(mid, 0.0, (lo, hi), trace)
        if f_mid > 0.0:
            lo, f_lo = mid, f_mid
        else:
            hi, f_hi = mid, f_mid
    x = lo + f_lo * (hi - lo) / (f_lo - f_hi)
    x = min(max(x, lo), hi)
    y = f(x)
    if abs(y) > ftol:
        # Fall back to the better endpoint; both are within xtol of the root.
        x, y = min(((lo, f_lo), (hi, f_hi), (x, y)), key=lambda p: abs(p[1]))
        if abs(y) > ftol:
            raise BracketError(f"|mu| = {abs(y):.3g} exceeds {ftol:g} at the final point",
                               mu_trace=trace)
    return RootResult(x, y, (lo, hi), trace)
