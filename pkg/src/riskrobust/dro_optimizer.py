"""Worst-case VaR over an L-infinity ball of models.

The robust bounded problem minimizes ``sup VaR_p(g(Y))`` over all ``Y`` with
``|Y - X| <= eps`` almost surely. With ``p >= 1/2``, a nonincreasing density
for ``X`` and a nondecreasing pricing density the optimizer is the two-level
function ``m 1{x > c + eps} + q 1{x <= c + eps}`` with ``c = VaR_p(X)``:
moving ``X`` by at most ``eps`` can never push more than ``1 - p`` of the
mass past ``c + eps``, so the worst case is the flat level ``q``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import AssumptionError, DomainError
from .intervals import INF, Interval, normalize
from .market_model import MarketModel, check_assumptions
from .risk_measures import var_empirical
from .solution import Constraint, Piece, ProblemSpec, SolutionFunction
from .var_optimizers import price

# slack when comparing the adversary's reach with 1 - p; the enlarged region
# is rebuilt from c + eps - eps, which can be off by an ulp
REACH_TOL = 1e-12


@dataclass(frozen=True)
class DroSpec:
    base: ProblemSpec
    epsilon: float

    def __post_init__(self):
        if self.base.constraint is not Constraint.BOUNDED:
            raise DomainError("the robust VaR problem is posed over the bounded admissible set")
        if not self.epsilon > 0:
            raise DomainError(f"ball radius must be positive, got {self.epsilon!r}")

    @property
    def p(self):
        return self.base.p

    def to_dict(self):
        return {**self.base.to_dict(), "epsilon": self.epsilon}


def solve_dro_var_bd(model: MarketModel, spec: DroSpec) -> SolutionFunction:
    p, x0, m, eps = spec.base.p, spec.base.x0, spec.base.m, spec.epsilon
    v3 = check_assumptions(model, p)["V3"]
    if not v3.holds:
        raise AssumptionError(f"structural conditions for the robust solution fail: {v3.diagnostic}", "V3")
    c = float(model.x_dist.quantile(p))
    threshold = c + eps
    upper = Interval.above(threshold)
    head = model.gamma_moment(0, upper)
    q = (x0 - m * head) / (1.0 - head)
    if not q > 0:
        raise AssumptionError(f"solved level q = {q:.6g} is not positive", "V3")
    g = SolutionFunction(
        (Piece(Interval.below(threshold), "const", value=q), Piece(upper, "const", value=m)),
        "dro_var_bd",
        {"q": float(q), "c": c, "threshold": threshold, "epsilon": eps, "m": m},
    )
    spent = price(model, g)
    g.info.update(budget=spent, budget_residual=spent - x0, worst_case_objective=float(q),
                  V3={"holds": True, "diagnostic": v3.diagnostic})
    return g


def _reach(dist, g: SolutionFunction, t: float, eps: float) -> float:
    """``P(X within eps of {g > t})``: the most mass an adversary can lift above ``t``."""
    up = g.as_piecewise().upper_set(t)
    return float(sum(dist.prob(iv) for iv in normalize(iv.enlarge(eps) for iv in up)))


def analytic_worst_case(model: MarketModel, g: SolutionFunction, p: float, eps: float) -> float:
    """``inf{t : P(X in {g > t}^eps) <= 1 - p}``, the exact worst case."""
    dist = model.x_dist
    pw = g.as_piecewise()
    flats = sorted({a0 for iv, a0, a1 in pw.chunks if a1 == 0})
    slopes = [c for c in pw.chunks if c[2] > 0]
    limit = 1.0 - p + REACH_TOL
    for v in flats if not slopes else []:
        if _reach(dist, g, v, eps) <= limit:
            return float(v)
    if not slopes:
        return float(flats[-1])
    lo, hi = pw.pushforward(dist)._value_range()
    lo = lo - eps - 1.0
    if not np.isfinite(hi):
        hi = max(1.0, abs(lo))
        while _reach(dist, g, hi, eps) > limit:
            hi *= 2.0
    for _ in range(300):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if _reach(dist, g, mid, eps) <= limit:
            hi = mid
        else:
            lo = mid
    for v in flats:
        if abs(v - hi) <= 1e-12 * max(1.0, abs(v)) and _reach(dist, g, v, eps) <= limit:
            return float(v)
    return float(hi)


def _pointwise_push(g: SolutionFunction, xs: np.ndarray, eps: float) -> np.ndarray:
    """For each ``x`` the point of ``[x - eps, x + eps]`` where ``g`` is largest."""
    pw = g.as_piecewise()
    best_y = xs + eps
    best_v = pw(best_y)
    for iv, a0, a1 in pw.chunks:
        if np.isinf(iv.hi):
            continue
        y = iv.hi if iv.hi_closed else np.nextafter(iv.hi, -INF)
        inside = (xs - eps <= y) & (y <= xs + eps)
        if not iv.contains(y) or not inside.any():
            continue
        v = a0 + a1 * y
        better = inside & (v > best_v)
        best_y = np.where(better, y, best_y)
        best_v = np.where(better, v, best_v)
    return best_y


def worst_case_var(
    model: MarketModel,
    g: SolutionFunction,
    p: float,
    epsilon: float,
    n_adversarial: int = 1000,
    n_samples: int = 1000,
    seed: int = 0,
    analytic: bool = True,
) -> float:
    """Largest ``VaR_p(g(Y))`` found over ``|Y - X| <= epsilon``.

    Adversaries act on a stratified sample of ``X``: the pointwise push to
    where ``g`` is largest, plus ``n_adversarial`` random couplings that move
    each point by a uniform amount in ``[-epsilon, epsilon]`` or by
    ``+-epsilon`` with random signs. With ``analytic`` the exact worst case
    over the law of ``X`` is included. Ties resolve to the first candidate.
    """
    rng = np.random.default_rng(seed)
    xs = model.x_dist.sample(rng, n_samples, stratified=True)
    best = var_empirical(g(_pointwise_push(g, xs, epsilon)), p)
    for i in range(n_adversarial):
        if i % 2 == 0:
            moves = rng.uniform(-epsilon, epsilon, xs.size)
        else:
            moves = epsilon * rng.choice([-1.0, 1.0], xs.size)
        best = max(best, var_empirical(g(xs + moves), p))
    if analytic:
        best = max(best, analytic_worst_case(model, g, p, epsilon))
    return float(best)
