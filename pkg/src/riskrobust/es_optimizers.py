"""Minimizing Expected Shortfall of a hedged position under a pricing budget.

* complete market: the constant ``x0`` is optimal exactly when
  ``ess-sup gamma <= 1/(1-p)``; otherwise the infimum is minus infinity and
  :func:`es_cm_witness` exhibits it.
* no short selling: optimizers keep ``x`` where ``gamma > c``, cap at ``r``
  where ``gamma < c`` and mix the two on ``{gamma = c}``.
* bounded: optimizers pay ``m`` where ``gamma > c``, ``r`` where
  ``gamma < c`` and a level in ``[r, m]`` on ``{gamma = c}``.

The solution form is known but the parameters are not given in closed form.
They are found by a grid over the tail probability ``P(gamma > c)`` (log
spaced, so tiny tails are resolved), golden-section refinement around the
best grid point, and an inner solve for the level that makes the budget bind.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, List, Sequence, Tuple

import numpy as np
from scipy import optimize

from .errors import DomainError, Nonexistence, NumericError
from .intervals import INF, Interval, complement, normalize
from .levelsets import function_quantile, prob_union
from .market_model import MarketModel
from .solution import Constraint, Piece, ProblemSpec, SolutionFunction, WitnessSequence
from .var_optimizers import _capped_price, _gamma_moment_union, _require, price

GRID_POINTS = 64
QUANTILE_TOL = 1e-6
BUDGET_TOL = 1e-8


@dataclass(frozen=True)
class EsSolutionParams:
    c: float
    r: float
    lam: float


def es_of(model: MarketModel, g: SolutionFunction, p: float) -> float:
    return float(g.pushforward(model.x_dist).es(p))


# --------------------------------------------------------------------------
# complete market
# --------------------------------------------------------------------------


def solve_es_cm(model: MarketModel, spec: ProblemSpec) -> SolutionFunction:
    _require(spec, Constraint.COMPLETE_MARKET)
    bound = 1.0 / (1.0 - spec.p)
    sup = model.gamma_ess_sup()
    if sup > bound + 1e-12:
        raise Nonexistence(
            f"ess-sup gamma = {sup:.6g} exceeds 1/(1-p) = {bound:.6g}; ES is unbounded below",
            witness=es_cm_witness(model, spec, [10.0**k for k in range(5)]),
        )
    g = SolutionFunction.constant(spec.x0, form="es_cm")
    g.info.update(objective=float(spec.x0), budget=price(model, g), E1={"holds": True, "ess_sup": sup})
    return g


def _region_above_gamma(model: MarketModel, level: float) -> List[Interval]:
    """``{gamma > level}``."""
    gamma, dist = model.gamma, model.x_dist
    if gamma.monotone == "constant":
        return [Interval.real_line()] if float(gamma(0.0)) > level else []
    if gamma.monotone in ("increasing", "decreasing") and gamma.kind in ("linear", "exp_tilt"):
        x = gamma.inverse(level, dist.support)
        lo, hi = dist.support
        if x is None:
            mid = dist.quantile(0.5)
            return [Interval.real_line()] if float(gamma(mid)) > level else []
        return [Interval.above(x)] if gamma.monotone == "increasing" else [Interval.below(x, inclusive=False)]
    from .levelsets import upper_set

    return upper_set(gamma, level, dist)


def es_cm_witness(model: MarketModel, spec: ProblemSpec, lambdas: Sequence[float]) -> WitnessSequence:
    """``g_lam = lam 1{gamma > 1/(1-p)} - lam y + x0`` with ES ``x0 + lam (k - y)``."""
    _require(spec, Constraint.COMPLETE_MARKET)
    p, x0 = spec.p, spec.x0
    bound = 1.0 / (1.0 - p)
    if model.gamma_ess_sup() <= bound + 1e-12:
        raise DomainError("ess-sup gamma <= 1/(1-p): the constant x0 is optimal and no witness exists")
    region = normalize(_region_above_gamma(model, bound))
    y = _gamma_moment_union(model, 0, region)
    mass = prob_union(model.x_dist, region)
    # ES of an indicator with mass below 1-p is mass/(1-p); otherwise 1
    k = min(mass / (1.0 - p), 1.0)

    def build(lam):
        pieces = [Piece(iv, "const", value=lam * (1.0 - y) + x0) for iv in region]
        pieces += [Piece(iv, "const", value=x0 - lam * y) for iv in complement(region)]
        return SolutionFunction(pieces, "es_cm_witness", {"lam": float(lam), "y": y, "k": k})

    seq = WitnessSequence(lambdas, build, lambda g: es_of(model, g, p))
    seq.y, seq.k, seq.slope = y, k, k - y
    return seq


# --------------------------------------------------------------------------
# shared search helpers
# --------------------------------------------------------------------------


def _grid_refine(f: Callable[[float], float], xs: Sequence[float], xtol: float = 1e-12) -> Tuple[float, float]:
    """Minimize ``f`` over a grid, then refine by golden section between the
    best point's neighbours. Ties go to the smallest argument."""
    xs = list(xs)
    vals = [f(x) for x in xs]
    i = int(np.argmin(vals))
    best_x, best_v = xs[i], vals[i]
    lo = xs[max(i - 1, 0)]
    hi = xs[min(i + 1, len(xs) - 1)]
    if hi > lo:
        if 0 < i < len(xs) - 1:
            res = optimize.minimize_scalar(f, bracket=(lo, best_x, hi), method="golden", tol=xtol)
        else:
            res = optimize.minimize_scalar(f, bounds=(lo, hi), method="bounded", options={"xatol": xtol})
        if lo <= res.x <= hi and res.fun < best_v - 1e-15 * max(1.0, abs(best_v)):
            best_x, best_v = float(res.x), float(res.fun)
    return float(best_x), float(best_v)


def _tail_region(model: MarketModel, t: float):
    """``(c, {gamma > c})`` with ``P(gamma > c) = t`` for continuous ``gamma(X)``."""
    dist, gamma = model.x_dist, model.gamma
    if t <= 0.0:
        return model.gamma_ess_sup(), []
    if t >= 1.0:
        return model.gamma_ess_inf(), [Interval.real_line()]
    if gamma.monotone == "increasing" and dist.continuous:
        s = float(dist.quantile(1.0 - t))
        return float(gamma(s)), [Interval.above(s)]
    if gamma.monotone == "decreasing" and dist.continuous:
        s = float(dist.quantile(t))
        return float(gamma(s)), [Interval.below(s, inclusive=False)]
    c, up = function_quantile(gamma, dist, 1.0 - t)
    return c, up


def _max_tail(cost: Callable[[float], float], limit: float) -> float:
    """Largest ``t`` in ``[0, 1]`` with nondecreasing ``cost(t) <= limit``."""
    if cost(1.0) <= limit:
        return 1.0
    lo, hi = 0.0, 1.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if cost(mid) <= limit:
            lo = mid
        else:
            hi = mid
    return lo


def _tail_grid(t_max: float, n: int = GRID_POINTS) -> List[float]:
    if t_max <= 0:
        return [0.0]
    return [0.0] + list(np.geomspace(t_max * 1e-12, t_max, n - 1))


def _cap_for_budget(model: MarketModel, target: float, region) -> float:
    """Smallest ``r >= 0`` with ``E[gamma min(X, r) 1_region] = target``."""
    if target <= 0:
        return 0.0
    hi = max(model.x_dist.quantile(0.5), 1.0)
    while _capped_price(model, hi, region) < target:
        hi *= 2.0
        if hi > 1e300:
            raise NumericError("cap level for the budget is unbounded", target=target)
    lo = 0.0
    for _ in range(300):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if _capped_price(model, mid, region) >= target:
            hi = mid
        else:
            lo = mid
    return hi


def _quantile_check(model, g, p, r):
    law = g.pushforward(model.x_dist)
    at, below = law.cdf(r), law.cdf_left(r)
    return {"holds": at >= p - QUANTILE_TOL and below <= p + QUANTILE_TOL, "P(g<=r)": at, "P(g<r)": below}


# --------------------------------------------------------------------------
# no short selling
# --------------------------------------------------------------------------


def _ns_function(upper, r, lam, mix_region=None) -> List[Piece]:
    if mix_region is not None:
        return [Piece(Interval.real_line(), "mix", cap=r, lam=lam)]
    pieces = [Piece(iv, "identity") for iv in normalize(upper)]
    pieces += [Piece(iv, "min", cap=r) for iv in complement(upper)]
    return pieces


def solve_es_ns(model: MarketModel, spec: ProblemSpec, grid_points: int = GRID_POINTS) -> SolutionFunction:
    """Optimizer ``x 1{gamma > c} + min(x, r) 1{gamma < c}`` plus a mixture
    ``(1 - lam) x + lam min(x, r)`` on ``{gamma = c}``."""
    _require(spec, Constraint.NO_SHORT_SELLING)
    p, x0 = spec.p, spec.x0
    total = model.gamma_mean_x
    if not x0 < total:
        raise DomainError(f"budget x0={x0} must be below E[gamma X]={total:.12g}")
    if x0 == 0.0:
        g = SolutionFunction.constant(0.0, form="es_ns")
        g.params.update(c=model.gamma_ess_sup(), r=0.0, lam=0.0)
        g.info.update(objective=0.0, budget=0.0, budget_residual=0.0)
        return g

    if model.gamma.monotone == "constant":
        c = float(model.gamma(0.0))
        whole = [Interval.real_line()]
        # budget: (1 - lam) E[gamma X] + lam E[gamma min(X, r)] = x0
        lam_min = 1.0 - x0 / total

        def cap(lam):
            return _cap_for_budget(model, (x0 - (1.0 - lam) * total) / lam, whole)

        def build(lam):
            return SolutionFunction(_ns_function(None, cap(lam), lam, whole), "es_ns")

        lam_grid = list(np.linspace(max(lam_min, 0.0), 1.0, grid_points + 1))
        lam, val = _grid_refine(lambda l: es_of(model, build(l), p), lam_grid)
        r = cap(lam)
        g = SolutionFunction(_ns_function(None, r, lam, whole), "es_ns", {"c": c, "r": r, "lam": lam})
    else:
        def head(t):
            return _gamma_moment_union(model, 1, _tail_region(model, t)[1])

        t_max = _max_tail(head, x0)

        def build(t):
            c, up = _tail_region(model, t)
            r = _cap_for_budget(model, x0 - _gamma_moment_union(model, 1, up), complement(normalize(up)))
            return SolutionFunction(_ns_function(up, r, 0.0), "es_ns", {"c": c, "r": r, "lam": 0.0, "tail": t})

        t, val = _grid_refine(lambda t: es_of(model, build(t), p), _tail_grid(t_max, grid_points))
        g = build(t)
        r = g.params["r"]

    spent = price(model, g)
    if abs(spent - x0) > BUDGET_TOL:
        raise NumericError("budget does not bind at the ES optimum", residual=spent - x0)
    g.info.update(
        objective=es_of(model, g, p),
        budget=spent,
        budget_residual=spent - x0,
        r_is_quantile=_quantile_check(model, g, p, r),
    )
    return g


# --------------------------------------------------------------------------
# bounded
# --------------------------------------------------------------------------


def _bd_function(upper, m, r) -> List[Piece]:
    pieces = [Piece(iv, "const", value=m) for iv in normalize(upper)]
    pieces += [Piece(iv, "const", value=r) for iv in complement(upper)]
    return pieces


def solve_es_bd(model: MarketModel, spec: ProblemSpec, grid_points: int = GRID_POINTS) -> SolutionFunction:
    """Optimizer ``m 1{gamma > c} + r 1{gamma < c} + lam 1{gamma = c}``."""
    _require(spec, Constraint.BOUNDED)
    p, x0, m = spec.p, spec.x0, spec.m

    if model.gamma.monotone == "constant":
        # {gamma = c} is everything; the budget pins the level at x0
        g = SolutionFunction.constant(x0, form="es_bd")
        g.params.update(c=float(model.gamma(0.0)), r=x0, lam=x0, m=m)
        g.info.update(objective=float(x0), budget=price(model, g), budget_residual=price(model, g) - x0)
        return g

    def head(t):
        return _gamma_moment_union(model, 0, _tail_region(model, t)[1])

    t_max = _max_tail(head, x0 / m)

    def build(t):
        c, up = _tail_region(model, t)
        h = _gamma_moment_union(model, 0, up)
        r = (x0 - m * h) / (1.0 - h) if h < 1.0 else 0.0
        r = min(max(r, 0.0), m)
        return SolutionFunction(_bd_function(up, m, r), "es_bd", {"c": c, "r": r, "lam": r, "m": m, "tail": t})

    t, _ = _grid_refine(lambda t: es_of(model, build(t), p), _tail_grid(t_max, grid_points))
    g = build(t)
    spent = price(model, g)
    if abs(spent - x0) > BUDGET_TOL:
        raise NumericError("budget does not bind at the ES optimum", residual=spent - x0)
    g.info.update(
        objective=es_of(model, g, p),
        budget=spent,
        budget_residual=spent - x0,
        r_is_quantile=_quantile_check(model, g, p, g.params["r"]),
    )
    return g


def solve(model: MarketModel, spec: ProblemSpec) -> SolutionFunction:
    if spec.constraint is Constraint.NO_SHORT_SELLING:
        return solve_es_ns(model, spec)
    if spec.constraint is Constraint.BOUNDED:
        return solve_es_bd(model, spec)
    return solve_es_cm(model, spec)
