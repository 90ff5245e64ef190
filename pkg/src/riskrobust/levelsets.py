"""Superlevel sets ``{x : h(x) > c}`` and quantiles of ``h(X)``.

Monotone ``h`` gives a single half-line and is handled exactly by the
callers. Everything here is the general path: ``h`` is sampled on a grid of
quantiles of ``X``, sign changes of ``h - c`` are refined with Brent's
method, and the resulting union of intervals is returned. Outside the
outermost grid points ``h - c`` is assumed not to change sign.
"""

from __future__ import annotations

import math
from typing import Callable, List, Tuple

import numpy as np
from scipy import optimize

from .errors import NumericError
from .intervals import INF, Interval, complement, normalize
from .market_model import EmpiricalAtoms, ScalarDistribution

GRID_SIZE = 4001


def _grid(dist: ScalarDistribution, size: int = GRID_SIZE) -> np.ndarray:
    u = np.linspace(0.0, 1.0, size)[1:-1]
    pts = np.asarray(dist._ppf(u), float)
    lo, hi = dist.support
    extra = [v for v in (lo, hi) if math.isfinite(v)]
    return np.unique(np.concatenate([pts, extra]))


def upper_set(h: Callable, c: float, dist: ScalarDistribution, size: int = GRID_SIZE) -> List[Interval]:
    """``{x : h(x) > c}`` restricted to the support of ``dist``, extended to
    the real line by the sign at the outermost support points."""
    if isinstance(dist, EmpiricalAtoms):
        xs = dist.values
        return normalize(Interval.point(x) for x in xs[np.asarray(h(xs), float) > c])
    xs = _grid(dist, size)
    vals = np.asarray(h(xs), float) - c
    above = vals > 0
    cuts: List[Tuple[float, bool]] = []  # crossing point, whether h rises through c
    for i in np.nonzero(above[1:] != above[:-1])[0]:
        a, b = xs[i], xs[i + 1]
        f = lambda x: float(h(x)) - c
        fa, fb = f(a), f(b)
        if fa == 0.0:
            root = a
        elif fb == 0.0:
            root = b
        else:
            try:
                root = optimize.brentq(f, a, b, xtol=1e-14, rtol=4 * np.finfo(float).eps, maxiter=500)
            except ValueError as exc:
                raise NumericError("level crossing could not be bracketed", bracket=(a, b), level=c) from exc
        cuts.append((root, bool(above[i + 1])))
    out = []
    start = -INF if above[0] else None
    for root, rising in cuts:
        if rising:
            start = root
        else:
            out.append(Interval(start, root, False, True))
            start = None
    if start is not None:
        out.append(Interval(start, INF, False, False))
    return normalize(out)


def prob_union(dist: ScalarDistribution, ivs) -> float:
    return float(sum(dist.prob(iv) for iv in normalize(ivs)))


def function_quantile(h: Callable, dist: ScalarDistribution, p: float, size: int = GRID_SIZE):
    """Left ``p``-quantile ``c`` of ``h(X)`` and the set ``{h > c}``."""
    if isinstance(dist, EmpiricalAtoms):
        vals = np.asarray(h(dist.values), float)
        c = EmpiricalAtoms(vals, dist.weights).quantile(p)
        return float(c), upper_set(h, c, dist)
    xs = _grid(dist, size)
    vals = np.asarray(h(xs), float)
    lo, hi = float(vals.min()), float(vals.max())
    lo -= 1e-9 * max(1.0, abs(lo))
    # P(h(X) <= hi) may still be below p if h keeps rising past the grid
    while prob_union(dist, upper_set(h, hi, dist, size)) > 1.0 - p:
        hi = hi + max(1.0, abs(hi))
        if hi > 1e300:
            raise NumericError("quantile of h(X) is unbounded", level=p)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if 1.0 - prob_union(dist, upper_set(h, mid, dist, size)) >= p:
            hi = mid
        else:
            lo = mid
    return hi, upper_set(h, hi, dist, size)


def region_split(upper: List[Interval]):
    """``(upper, complement)`` as normalized lists."""
    up = normalize(upper)
    return up, complement(up)
