"""Minimizing VaR of a hedged position ``g(X)`` under a pricing budget.

Three admissible sets are covered:

* complete market: any ``g`` with ``E[gamma g(X)] >= x0``. The infimum is
  minus infinity; :func:`var_cm_witness` builds the two-level functions that
  drive VaR down without bound.
* no short selling: ``0 <= g(x) <= x``. The optimizer keeps the loss on the
  upper ``(1 - p)`` tail of ``(X - q) gamma`` and caps it at ``q`` elsewhere.
* bounded: ``0 <= g(x) <= m``. The optimizer pays ``m`` on the upper
  ``(1 - p)`` tail of ``gamma`` and a flat ``q'`` elsewhere.

For nondecreasing ``gamma`` both tail regions are the half-line above
``VaR_p(X)``, which the solvers use directly. Other densities go through the
grid based level sets in :mod:`riskrobust.levelsets`.
"""

from __future__ import annotations

import math
from typing import List, Sequence

import numpy as np

from .errors import AssumptionError, DomainError, NumericError
from .intervals import INF, Interval, complement, normalize
from .levelsets import function_quantile, prob_union
from .market_model import MarketModel
from .solution import Constraint, Piece, ProblemSpec, SolutionFunction, WitnessSequence

BUDGET_TOL = 1e-8
LEVEL_TOL = 1e-9


def _require(spec: ProblemSpec, kind: Constraint):
    if spec.constraint is not kind:
        raise DomainError(f"expected a {kind.value} problem, got {spec.constraint.value}")


def _gamma_moment_union(model: MarketModel, k: int, ivs) -> float:
    return float(sum(model.gamma_moment(k, iv) for iv in normalize(ivs)))


def _capped_price(model: MarketModel, q: float, ivs) -> float:
    """``E[gamma min(X, q) 1{X in ivs}]``."""
    total = 0.0
    for iv in normalize(ivs):
        total += model.gamma_moment(1, iv.intersect(Interval.below(q)))
        total += q * model.gamma_moment(0, iv.intersect(Interval.above(q)))
    return total


def _pieces(upper, upper_piece, lower_piece) -> List[Piece]:
    upper = normalize(upper)
    out = [upper_piece(iv) for iv in upper]
    out += [lower_piece(iv) for iv in complement(upper)]
    return out


def price(model: MarketModel, g: SolutionFunction) -> float:
    """``E[gamma g(X)]`` for a piecewise solution."""
    total = 0.0
    for iv, a0, a1 in g.as_piecewise().chunks:
        total += a0 * model.gamma_moment(0, iv)
        if a1:
            total += a1 * model.gamma_moment(1, iv)
    return float(total)


def objective(model: MarketModel, g: SolutionFunction, p: float) -> float:
    return float(g.pushforward(model.x_dist).quantile(p))


# --------------------------------------------------------------------------
# complete market
# --------------------------------------------------------------------------


def var_cm_witness(model: MarketModel, spec: ProblemSpec, d: float) -> SolutionFunction:
    """Budget-feasible ``g_d = d + (x0 - d)/lam 1{x > VaR_p(X)}`` with
    ``VaR_p(g_d(X)) = d`` whenever ``d <= x0``."""
    _require(spec, Constraint.COMPLETE_MARKET)
    y = model.x_dist.quantile(spec.p)
    tail = Interval.above(y)
    lam = model.gamma_moment(0, tail)
    if not lam > 0:
        raise DomainError("pricing density puts no weight above VaR_p(X)")
    jump = (spec.x0 - d) / lam
    pieces = [
        Piece(Interval.below(y), "const", value=float(d)),
        Piece(tail, "const", value=float(d + jump)),
    ]
    return SolutionFunction(
        pieces, "var_cm_witness", {"d": float(d), "y": float(y), "lam": float(lam)}, {"budget": spec.x0}
    )


def var_cm_witness_sequence(model: MarketModel, spec: ProblemSpec, ds: Sequence[float]) -> WitnessSequence:
    return WitnessSequence(ds, lambda d: var_cm_witness(model, spec, d), lambda g: objective(model, g, spec.p))


def solve_var_cm(model: MarketModel, spec: ProblemSpec):
    from .errors import Nonexistence

    raise Nonexistence(
        "VaR over the complete market is unbounded below",
        witness=var_cm_witness_sequence(model, spec, [-(10.0**k) for k in range(4)]),
    )


# --------------------------------------------------------------------------
# no short selling
# --------------------------------------------------------------------------


def _bisect_increasing(f, lo, hi, tol=1e-15, maxiter=300):
    """Smallest root of a nondecreasing ``f`` with ``f(lo) < 0 <= f(hi)``."""
    for _ in range(maxiter):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi or hi - lo <= tol * max(1.0, abs(hi)):
            break
        if f(mid) >= 0:
            hi = mid
        else:
            lo = mid
    # hi is feasible; lo is not. Prefer whichever sits closer to the root.
    flo, fhi = f(lo), f(hi)
    return lo if abs(flo) < abs(fhi) else hi


def solve_var_ns(model: MarketModel, spec: ProblemSpec, q_grid: int = 64) -> SolutionFunction:
    """Optimizer ``x 1{(x-q) gamma > c} + min(x, q) 1{(x-q) gamma <= c}``."""
    _require(spec, Constraint.NO_SHORT_SELLING)
    p, x0 = spec.p, spec.x0
    dist = model.x_dist
    total = model.gamma_mean_x
    if not x0 < total:
        raise DomainError(f"budget x0={x0} must be below E[gamma X]={total:.12g}")
    x_p = float(dist.quantile(p))

    if model.gamma.nondecreasing:
        # (x - q) gamma(x) is negative below q and strictly increasing above it
        upper = [Interval.above(x_p)]
        head = model.gamma_moment(1, upper[0])

        def budget(q):
            return head + _capped_price(model, q, complement(upper))

        def level(q):
            return (x_p - q) * float(model.gamma(x_p))

        roots = None
    else:
        def region(q):
            return function_quantile(lambda x: (np.asarray(x, float) - q) * model.gamma(x), dist, p)

        def budget(q):
            c, up = region(q)
            return _gamma_moment_union(model, 1, up) + _capped_price(model, q, complement(up))

        def level(q):
            return region(q)[0]

        roots = []

    info = {}
    if budget(0.0) >= x0:
        q = 0.0
    elif roots is None:
        q = _bisect_increasing(lambda t: budget(t) - x0, 0.0, x_p)
    else:
        grid = np.linspace(0.0, x_p, q_grid + 1)
        vals = [budget(t) - x0 for t in grid]
        for a, b, fa, fb in zip(grid, grid[1:], vals, vals[1:]):
            if fa < 0 <= fb:
                roots.append(_bisect_increasing(lambda t: budget(t) - x0, a, b))
        if not roots:
            raise NumericError("no budget-binding q found on [0, VaR_p(X))", bracket=(0.0, x_p))
        q = roots[0]
        info["q_roots"] = roots
        info["multiple_roots"] = len(roots) > 1

    if model.gamma.nondecreasing:
        c = level(q)
    else:
        c, upper = region(q)
    if q >= x_p:
        raise NumericError("solved q is not below VaR_p(X)", q=q, var_x=x_p)

    pieces = _pieces(
        upper,
        lambda iv: Piece(iv, "identity"),
        lambda iv: Piece(iv, "min", cap=q) if q > 0 else Piece(iv, "const", value=0.0),
    )
    g = SolutionFunction(pieces, "var_ns", {"q": float(q), "c": float(c), "var_x": x_p})
    spent = price(model, g)
    below = 1.0 - prob_union(dist, upper)
    info.update(
        budget=spent,
        budget_residual=spent - x0,
        objective=objective(model, g, p),
        V1={"holds": abs(below - p) <= LEVEL_TOL, "P(h<=c)": below},
        branch="q=0" if q == 0.0 else "binding",
    )
    if q > 0 and abs(spent - x0) > BUDGET_TOL:
        raise NumericError("budget does not bind at the solved q", residual=spent - x0, q=q)
    g.info.update(info)
    return g


# --------------------------------------------------------------------------
# bounded
# --------------------------------------------------------------------------


def _gamma_tail(model: MarketModel, p: float):
    """``c = VaR_p(gamma(X))`` and the region ``{gamma > c}``."""
    dist, gamma = model.x_dist, model.gamma
    if gamma.monotone == "constant":
        return float(gamma(0.0)), []
    if gamma.monotone == "increasing" and dist.continuous:
        x_p = float(dist.quantile(p))
        return float(gamma(x_p)), [Interval.above(x_p)]
    if gamma.monotone == "decreasing" and dist.continuous:
        x_lo = float(dist.quantile(1.0 - p))
        return float(gamma(x_lo)), [Interval.below(x_lo, inclusive=False)]
    return function_quantile(gamma, dist, p)


def solve_var_bd(model: MarketModel, spec: ProblemSpec) -> SolutionFunction:
    """Optimizer ``m 1{gamma > c} + q' 1{gamma <= c}`` with ``c = VaR_p(gamma)``."""
    _require(spec, Constraint.BOUNDED)
    p, x0, m = spec.p, spec.x0, spec.m
    dist = model.x_dist
    c, upper = _gamma_tail(model, p)
    below = 1.0 - prob_union(dist, upper)
    v2 = abs(below - p) <= LEVEL_TOL
    head = _gamma_moment_union(model, 0, upper)
    es_gamma = (head + c * (below - p)) / (1.0 - p)
    info = {"V2": {"holds": v2, "P(gamma<=c)": below}, "es_gamma": es_gamma}

    if m * es_gamma >= x0 / (1.0 - p):
        q_prime = 0.0
        if not v2:
            if model.gamma.monotone != "constant" or not dist.continuous:
                raise AssumptionError("P(gamma <= VaR_p(gamma)) != p and no uniform transform available", "V2")
            # gamma is flat, so the upper (1-p) event is taken from X itself
            upper = [Interval.above(float(dist.quantile(p)))]
            info["uniform_transform"] = "X"
        branch = "q'=0"
    else:
        if not v2:
            raise AssumptionError(
                f"P(gamma <= VaR_p(gamma)) = {below:.12g} differs from p = {p}", "V2"
            )
        rest = 1.0 - head  # E[gamma] = 1
        q_prime = (x0 - m * head) / rest
        branch = "binding"

    pieces = _pieces(
        upper,
        lambda iv: Piece(iv, "const", value=float(m)),
        lambda iv: Piece(iv, "const", value=float(q_prime)),
    )
    g = SolutionFunction(pieces, "var_bd", {"q_prime": float(q_prime), "c": float(c), "m": float(m)})
    spent = price(model, g)
    info.update(budget=spent, budget_residual=spent - x0, objective=objective(model, g, p), branch=branch)
    if q_prime > 0 and abs(spent - x0) > BUDGET_TOL:
        raise NumericError("budget does not bind at the solved q'", residual=spent - x0)
    g.info.update(info)
    return g


def solve(model: MarketModel, spec: ProblemSpec) -> SolutionFunction:
    if spec.constraint is Constraint.NO_SHORT_SELLING:
        return solve_var_ns(model, spec)
    if spec.constraint is Constraint.BOUNDED:
        return solve_var_bd(model, spec)
    return solve_var_cm(model, spec)
