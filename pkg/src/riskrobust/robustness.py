"""Empirical robustness of optimized positions.

A position ``g`` optimized for the model ``X`` is robust when
``Z -> rho(g(Z))`` is continuous at ``X``. :func:`probe` follows a
perturbation family towards ``X`` and records the solvency gap
``rho(g(Z)) - rho(g(X))`` at each step; a fixed decision rule turns the
finite gap curve into a verdict:

* ``NonRobust`` when the three smallest-``eps`` gaps all exceed
  ``tau = 10 (stderr + 1e-6)`` in absolute value;
* ``Robust`` when ``|gap|`` never grows (up to ``tau``) as ``eps`` shrinks,
  is below ``tau`` at the smallest ``eps``, and the weighted line fitted to
  the gap curve extrapolates to zero at distance zero;
* ``Inconclusive`` otherwise.

:func:`check_continuity_criterion` is the structural counterpart: a
continuous optimizer plus a ``rho`` continuous in the metric guarantees
robustness, without any simulation.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, FrozenSet, List, Optional, Sequence

import numpy as np

from .errors import DomainError
from .market_model import MarketModel
from .metrics import Kind, MetricKind, coupled_distance
from .perturbations import PerturbationFamily, stream
from .risk_measures import batch_stderr, es_empirical, var_empirical
from .solution import Continuity, Pushforward, SolutionFunction

TAU_FACTOR = 10.0
TAU_FLOOR = 1e-6
DEFAULT_SAMPLES = 200_000


class Verdict(str, enum.Enum):
    ROBUST = "Robust"
    NON_ROBUST = "NonRobust"
    INCONCLUSIVE = "Inconclusive"


class Guarantee(str, enum.Enum):
    GUARANTEED_ROBUST = "GuaranteedRobust"
    NO_GUARANTEE = "NoGuarantee"


def _rho_functions(rho: str):
    rho = rho.lower()
    if rho == "var":
        return var_empirical, lambda law, p: law.quantile(p)
    if rho == "es":
        return es_empirical, lambda law, p: law.es(p)
    raise DomainError(f"rho must be 'var' or 'es', got {rho!r}")


@dataclass
class GapPoint:
    eps: float
    distance: float
    rho_at_Z: float
    rho_at_X: float
    solvency_gap: float
    mc_stderr: float
    mode: str
    optimality_gap: Optional[float] = None
    optimality_shift: Optional[float] = None

    @property
    def tau(self) -> float:
        return TAU_FACTOR * (self.mc_stderr + TAU_FLOOR)

    def to_dict(self):
        d = {
            "eps": self.eps,
            "distance": self.distance,
            "rho_at_Z": self.rho_at_Z,
            "rho_at_X": self.rho_at_X,
            "solvency_gap": self.solvency_gap,
            "mc_stderr": self.mc_stderr,
            "tau": self.tau,
            "mode": self.mode,
        }
        if self.optimality_gap is not None:
            d["optimality_gap"] = self.optimality_gap
            d["optimality_shift"] = self.optimality_shift
        return d


@dataclass
class RobustnessReport:
    metric: MetricKind
    rho: str
    p: float
    family: Dict
    eps_grid: List[float]
    points: List[GapPoint]
    limit_gap_estimate: float
    verdict: Verdict
    solution_meta: Dict
    notes: List[str] = field(default_factory=list)

    @property
    def gap_curve(self):
        return [(pt.distance, pt.solvency_gap) for pt in self.points]

    @property
    def gaps(self):
        return [pt.solvency_gap for pt in self.points]

    def to_dict(self):
        return {
            "metric": self.metric.label,
            "rho": self.rho,
            "p": self.p,
            "family": self.family,
            "eps_grid": list(self.eps_grid),
            "gap_curve": [pt.to_dict() for pt in self.points],
            "limit_gap_estimate": self.limit_gap_estimate,
            "verdict": self.verdict.value,
            "solution": self.solution_meta,
            "notes": list(self.notes),
        }


def decide(points: Sequence[GapPoint]) -> Verdict:
    """Apply the decision rule to points ordered by decreasing ``eps``."""
    if not points:
        return Verdict.INCONCLUSIVE
    tail = points[-3:]
    if len(tail) == 3 and all(abs(pt.solvency_gap) > pt.tau for pt in tail):
        return Verdict.NON_ROBUST
    shrinking = all(
        abs(b.solvency_gap) <= abs(a.solvency_gap) + b.tau for a, b in zip(points, points[1:])
    )
    if shrinking and abs(points[-1].solvency_gap) < points[-1].tau and _limit_is_zero(points):
        return Verdict.ROBUST
    return Verdict.INCONCLUSIVE


def _limit_is_zero(points: Sequence[GapPoint]) -> bool:
    """Whether the line ``gap = a + b * distance`` fitted with weights
    ``1 / (stderr + floor)**2`` has an intercept within ``TAU_FACTOR`` of its
    own standard error. A noisy last point cannot hide a gap that the more
    precise points pin away from zero."""
    d = np.array([pt.distance for pt in points], float)
    if np.ptp(d) == 0.0:
        return True
    gaps = np.array([pt.solvency_gap for pt in points], float)
    w = 1.0 / (np.array([pt.mc_stderr for pt in points], float) + TAU_FLOOR) ** 2
    design = np.column_stack([np.ones_like(d), d])
    cov = np.linalg.pinv(design.T @ (w[:, None] * design))
    a = (cov @ design.T @ (w * gaps))[0]
    return abs(a) <= TAU_FACTOR * (math.sqrt(max(cov[0, 0], 0.0)) + TAU_FLOOR)


def probe(
    model: MarketModel,
    solution: SolutionFunction,
    rho: str,
    family: PerturbationFamily,
    metric: MetricKind,
    eps_grid: Sequence[float],
    p: float,
    n_samples: int = DEFAULT_SAMPLES,
    seed: int = 0,
    resolve: Optional[Callable[[MarketModel], SolutionFunction]] = None,
    batches: int = 20,
) -> RobustnessReport:
    """Trace the solvency gap of ``solution`` along ``family`` at each ``eps``.

    Affine families are evaluated exactly through the pushforward of the
    perturbed law. Other families use ``n_samples`` stratified draws of ``X``
    coupled to ``Z``; the gap is estimated as the difference of empirical
    risk measures on the same draws, and its standard error comes from
    interleaved batch means. ``resolve`` re-solves the problem at ``Z`` (for
    affine families only) to report the optimality gap and shift alongside.
    """
    eps_grid = [float(e) for e in eps_grid]
    if not eps_grid or any(e <= 0 for e in eps_grid):
        raise DomainError("eps grid must be nonempty and positive")
    if any(b >= a for a, b in zip(eps_grid, eps_grid[1:])):
        raise DomainError("eps grid must be strictly decreasing")
    sample_rho, law_rho = _rho_functions(rho)
    dist = model.x_dist
    pw = solution.as_piecewise()
    rho_x = float(law_rho(Pushforward(dist, pw), p))

    points = []
    for k, eps in enumerate(eps_grid):
        aff = family.affine(eps)
        dist_val = family.distance(metric, dist, eps)
        opt_gap = opt_shift = None
        if aff is not None:
            loc, scale = aff
            rho_z = float(law_rho(Pushforward(dist, pw.compose_affine(loc, scale)), p))
            gap, stderr, mode = rho_z - rho_x, 0.0, "analytic"
            if resolve is not None:
                opt_gap, opt_shift = _optimality(model, family, eps, resolve, law_rho, p, rho_z, rho_x)
        else:
            rng = stream(seed, k)
            xs, zs = family.sample(dist, eps, rng, n_samples)
            gx, gz = pw(xs), pw(zs)
            gap = sample_rho(gz, p) - sample_rho(gx, p)
            both = np.vstack([gx, gz])
            stderr = batch_stderr(lambda b: sample_rho(b[1], p) - sample_rho(b[0], p), both, batches)
            rho_z, mode = rho_x + gap, "monte_carlo"
            if dist_val is None:
                dist_val = coupled_distance(metric, xs, zs)
        if dist_val is None:
            rng = stream(seed, k)
            xs, zs = family.sample(dist, eps, rng, n_samples)
            dist_val = coupled_distance(metric, xs, zs)
        points.append(GapPoint(eps, float(dist_val), float(rho_z), rho_x, float(gap), float(stderr), mode,
                               opt_gap, opt_shift))

    verdict = decide(points)
    notes = []
    if solution.info.get("branch") in ("q=0", "q'=0") or solution.form.startswith("es_"):
        notes.append("optimizer uniqueness not established; the returned representative was probed")
    return RobustnessReport(
        metric=metric,
        rho=rho.lower(),
        p=p,
        family=family.to_dict(),
        eps_grid=eps_grid,
        points=points,
        limit_gap_estimate=points[-1].solvency_gap,
        verdict=verdict,
        solution_meta=solution.to_dict(),
        notes=notes,
    )


def _optimality(model, family, eps, resolve, law_rho, p, rho_z, rho_x):
    try:
        z_model = model.with_distribution(family.law(model.x_dist, eps))
        g_z = resolve(z_model)
        ideal = float(law_rho(g_z.pushforward(z_model.x_dist), p))
    except Exception:  # the re-solve is a diagnostic only
        return None, None
    return rho_z - ideal, ideal - rho_x


# --------------------------------------------------------------------------
# structural criterion
# --------------------------------------------------------------------------

RhoContinuity = FrozenSet[Kind]


def rho_continuity(rho: str, uniformly_integrable: bool = False) -> RhoContinuity:
    """Metrics in which ``rho`` is continuous everywhere.

    ES is continuous in every ``L-q`` and ``L-infinity``, and in the weak
    topology only on uniformly integrable families. VaR is weakly continuous
    only at laws whose quantile function is continuous at ``p``, so it is not
    continuous in any of the metrics globally.
    """
    rho = rho.lower()
    if rho == "es":
        kinds = {Kind.LINF, Kind.LQ}
        if uniformly_integrable:
            kinds.add(Kind.PROKHOROV)
        return frozenset(kinds)
    if rho == "var":
        return frozenset()
    raise DomainError(f"rho must be 'var' or 'es', got {rho!r}")


def check_continuity_criterion(solution: SolutionFunction, rho_cont: RhoContinuity, metric: MetricKind) -> Guarantee:
    """``GuaranteedRobust`` when a continuous optimizer meets a ``rho``
    continuous in ``metric``; ``L-q`` additionally needs linear growth."""
    cont = solution.continuity()
    if cont is Continuity.DISCONTINUOUS or metric.kind not in rho_cont:
        return Guarantee.NO_GUARANTEE
    if metric.kind is Kind.LQ and cont is not Continuity.CONTINUOUS_LINEAR_GROWTH:
        return Guarantee.NO_GUARANTEE
    return Guarantee.GUARANTEED_ROBUST
