"""Problem specifications and piecewise solution functions.

Every optimizer returned by the solvers is a finite list of pieces, each a
nondecreasing affine-by-parts map on an interval of ``x``. Breaking the
pieces into affine chunks gives an exact handle on the law of ``g(X)``: its
cdf, left quantile and tail mean reduce to interval probabilities and first
partial moments of ``X``, which every distribution provides in closed form.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import DomainError
from .intervals import INF, Interval, is_partition, normalize
from .market_model import EmpiricalAtoms, ScalarDistribution
from .risk_measures import es_from_atoms


class Constraint(str, enum.Enum):
    COMPLETE_MARKET = "cm"
    NO_SHORT_SELLING = "ns"
    BOUNDED = "bd"


@dataclass(frozen=True)
class ProblemSpec:
    """Confidence level, budget and admissible set of one problem."""

    p: float
    x0: float
    constraint: Constraint = Constraint.COMPLETE_MARKET
    m: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "constraint", Constraint(self.constraint))
        if not 0.0 < self.p < 1.0:
            raise DomainError(f"p must lie in (0, 1), got {self.p!r}")
        if self.constraint is Constraint.BOUNDED:
            if self.m is None or not self.m > 0:
                raise DomainError("bounded problems need m > 0")
            if not 0.0 <= self.x0 < self.m:
                raise DomainError(f"bounded problems need 0 <= x0 < m, got x0={self.x0}, m={self.m}")
        if self.constraint is Constraint.NO_SHORT_SELLING and self.x0 < 0:
            raise DomainError("no-short-selling problems need x0 >= 0")

    def to_dict(self):
        return {"p": self.p, "x0": self.x0, "constraint": self.constraint.value, "m": self.m}


# --------------------------------------------------------------------------
# piecewise affine functions and their pushforwards
# --------------------------------------------------------------------------

Chunk = Tuple[Interval, float, float]  # region, intercept, slope (slope >= 0)


class PiecewiseLinear:
    """``g(x) = a0 + a1 x`` on each chunk; chunks partition the real line."""

    def __init__(self, chunks: Sequence[Chunk]):
        self.chunks: List[Chunk] = [c for c in chunks if not c[0].empty]
        for _, _, a1 in self.chunks:
            if a1 < 0:
                raise DomainError("chunks must be nondecreasing")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.full(x.shape, np.nan)
        for iv, a0, a1 in self.chunks:
            m = iv.contains(x)
            out[m] = a0 + a1 * x[m]
        return out if out.ndim else float(out)

    def compose_affine(self, loc: float, scale: float) -> "PiecewiseLinear":
        """``x -> g(loc + scale x)``."""
        return PiecewiseLinear(
            [(iv.affine_preimage(loc, scale), a0 + a1 * loc, a1 * scale) for iv, a0, a1 in self.chunks]
        )

    def upper_set(self, t: float) -> List[Interval]:
        """``{x : g(x) > t}`` as a normalized union of intervals."""
        out = []
        for iv, a0, a1 in self.chunks:
            if a1 > 0:
                out.append(iv.intersect(Interval.above((t - a0) / a1)))
            elif a0 > t:
                out.append(iv)
        return normalize(out)

    def boundaries(self):
        """``(b, left_limit, right_limit)`` at each finite chunk boundary."""
        ordered = sorted(self.chunks, key=lambda c: (c[0].lo, not c[0].lo_closed))
        out = []
        for (ivl, a0l, a1l), (ivr, a0r, a1r) in zip(ordered, ordered[1:]):
            b = ivl.hi
            if math.isinf(b):
                continue
            out.append((b, a0l + a1l * b, a0r + a1r * b))
        return out

    def pushforward(self, dist: ScalarDistribution) -> "Pushforward":
        return Pushforward(dist, self)


class Pushforward:
    """Law of ``g(X)`` for piecewise affine nondecreasing-by-chunk ``g``."""

    def __init__(self, dist: ScalarDistribution, g: PiecewiseLinear):
        self.dist = dist
        self.g = g
        self._discrete = None
        if isinstance(dist, EmpiricalAtoms):
            self._discrete = EmpiricalAtoms(g(dist.values), dist.weights)

    # cdf of g(X) ---------------------------------------------------------
    def _set_below(self, t: float, strict: bool = False):
        for iv, a0, a1 in self.g.chunks:
            if a1 > 0:
                s = (t - a0) / a1
                yield iv.intersect(Interval.below(s, inclusive=not strict))
            elif (a0 < t) if strict else (a0 <= t):
                yield iv

    def cdf(self, t: float) -> float:
        if self._discrete is not None:
            return float(self._discrete.cdf(t))
        return min(sum(self.dist.prob(iv) for iv in self._set_below(t)), 1.0)

    def cdf_left(self, t: float) -> float:
        if self._discrete is not None:
            return float(self._discrete.cdf_left(t))
        return min(sum(self.dist.prob(iv) for iv in self._set_below(t, strict=True)), 1.0)

    def atoms(self) -> List[float]:
        """Values taken by ``g`` with positive probability on flat chunks."""
        out = set()
        for iv, a0, a1 in self.g.chunks:
            if a1 == 0 and self.dist.prob(iv) > 0:
                out.add(a0)
        return sorted(out)

    def _value_range(self):
        lo_s, hi_s = self.dist.support
        vals_lo, vals_hi = [], []
        for iv, a0, a1 in self.g.chunks:
            if self.dist.prob(iv) <= 0:
                continue
            a = max(iv.lo, lo_s)
            b = min(iv.hi, hi_s)
            vals_lo.append(a0 + a1 * a if a1 > 0 else a0)
            vals_hi.append(a0 + a1 * b if a1 > 0 else a0)
        return min(vals_lo), max(vals_hi)

    def quantile(self, p: float) -> float:
        """Left quantile ``inf{t : P(g(X) <= t) >= p}``."""
        if not 0.0 < p < 1.0:
            raise DomainError(f"level must lie in (0, 1), got {p!r}")
        if self._discrete is not None:
            return float(self._discrete.quantile(p))
        atoms = self.atoms()
        for a in atoms:
            # the level is crossed exactly at this atom
            if self.cdf_left(a) < p <= self.cdf(a):
                return float(a)
        lo, hi = self._value_range()
        lo = lo - 1.0 if math.isfinite(lo) else -1.0
        if not math.isfinite(hi):
            hi = max(1.0, abs(lo))
            while self.cdf(hi) < p:
                hi *= 2.0
                if hi > 1e300:
                    return INF
        for _ in range(400):
            mid = 0.5 * (lo + hi)
            if mid <= lo or mid >= hi:
                break
            if self.cdf(mid) >= p:
                hi = mid
            else:
                lo = mid
        t = hi
        tol = 1e-12 * max(1.0, abs(t))
        for a in atoms:
            if t - tol <= a <= t + tol and self.cdf(a) >= p:
                return float(a)
        return float(t)

    def es(self, p: float) -> float:
        """``ES_p(g(X))``; ``inf`` when the tail is not integrable."""
        if not 0.0 < p < 1.0:
            raise DomainError(f"level must lie in (0, 1), got {p!r}")
        if self._discrete is not None:
            return es_from_atoms(self._discrete.values, self._discrete.weights, p)
        v = self.quantile(p)
        tail = 0.0
        for iv, a0, a1 in self.g.chunks:
            if a1 > 0:
                region = iv.intersect(Interval.above((v - a0) / a1))
                if region.empty:
                    continue
                m1 = self.dist.partial_moment(1, region)
                if math.isinf(m1):
                    return INF
                tail += a0 * self.dist.prob(region) + a1 * m1
            elif a0 > v:
                tail += a0 * self.dist.prob(iv)
        excess = self.cdf(v) - p
        return float((tail + v * excess) / (1.0 - p))

    def mean(self) -> float:
        total = 0.0
        for iv, a0, a1 in self.g.chunks:
            total += a0 * self.dist.prob(iv) + (a1 * self.dist.partial_moment(1, iv) if a1 else 0.0)
        return total


# --------------------------------------------------------------------------
# solution functions
# --------------------------------------------------------------------------

PIECE_KINDS = ("identity", "min", "const", "mix")


@dataclass(frozen=True)
class Piece:
    """One region of a solution.

    ``identity``: ``x``; ``min``: ``min(x, cap)``; ``const``: ``value``;
    ``mix``: ``(1 - lam) x + lam min(x, cap)``.
    """

    region: Interval
    kind: str
    value: float = 0.0
    cap: float = 0.0
    lam: float = 0.0

    def __post_init__(self):
        if self.kind not in PIECE_KINDS:
            raise DomainError(f"unknown piece kind {self.kind!r}")
        if self.kind == "mix" and not 0.0 <= self.lam <= 1.0:
            raise DomainError("mixing weight must lie in [0, 1]")

    def chunks(self) -> List[Chunk]:
        r = self.region
        if self.kind == "identity":
            return [(r, 0.0, 1.0)]
        if self.kind == "const":
            return [(r, float(self.value), 0.0)]
        below = r.intersect(Interval.below(self.cap))
        above = r.intersect(Interval.above(self.cap))
        if self.kind == "min":
            return [(below, 0.0, 1.0), (above, float(self.cap), 0.0)]
        return [(below, 0.0, 1.0), (above, self.lam * self.cap, 1.0 - self.lam)]

    def to_dict(self):
        d = {"region": repr(self.region), "kind": self.kind}
        if self.kind == "const":
            d["value"] = self.value
        if self.kind in ("min", "mix"):
            d["cap"] = self.cap
        if self.kind == "mix":
            d["lam"] = self.lam
        return d


class Continuity(str, enum.Enum):
    CONTINUOUS = "continuous"
    CONTINUOUS_LINEAR_GROWTH = "continuous_linear_growth"
    DISCONTINUOUS = "discontinuous"


JUMP_TOL = 1e-12


@dataclass(frozen=True)
class SolutionFunction:
    """An optimizing function ``g`` with the parameters that determine it.

    ``params`` holds whichever of ``q``, ``q_prime``, ``c``, ``r``, ``lam``,
    ``threshold`` the solver determined; ``info`` carries diagnostics
    (objective value, budget residual, assumption checks).
    """

    pieces: Tuple[Piece, ...]
    form: str
    params: Dict[str, float] = field(default_factory=dict)
    info: Dict[str, object] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "pieces", tuple(self.pieces))
        if not is_partition(p.region for p in self.pieces):
            raise DomainError(f"piece regions do not partition the real line: {[p.region for p in self.pieces]}")

    @classmethod
    def constant(cls, value: float, form: str = "constant", **info) -> "SolutionFunction":
        return cls((Piece(Interval.real_line(), "const", value=value),), form, {"value": value}, info)

    def as_piecewise(self) -> PiecewiseLinear:
        return PiecewiseLinear([c for piece in self.pieces for c in piece.chunks()])

    def __call__(self, x):
        return self.as_piecewise()(x)

    evaluate = __call__

    def pushforward(self, dist: ScalarDistribution) -> Pushforward:
        return Pushforward(dist, self.as_piecewise())

    def jump_locations(self) -> List[Tuple[float, float]]:
        """``(location, jump size)`` for every discontinuity."""
        out = []
        for b, left, right in self.as_piecewise().boundaries():
            if abs(right - left) > JUMP_TOL * max(1.0, abs(left), abs(right)):
                out.append((b, right - left))
        return out

    def continuity(self) -> Continuity:
        if self.jump_locations():
            return Continuity.DISCONTINUOUS
        # every piece kind has slope at most one and bounded intercept
        return Continuity.CONTINUOUS_LINEAR_GROWTH

    def lipschitz_constant(self) -> float:
        if self.jump_locations():
            return INF
        return max((a1 for _, _, a1 in self.as_piecewise().chunks), default=0.0)

    def to_dict(self):
        return {
            "form": self.form,
            "params": dict(self.params),
            "pieces": [p.to_dict() for p in self.pieces],
            "jumps": [[b, s] for b, s in self.jump_locations()],
            "continuity": self.continuity().value,
        }


class WitnessSequence:
    """Feasible functions indexed by a parameter along which the objective
    decreases without bound."""

    def __init__(self, parameters: Sequence[float], build: Callable[[float], SolutionFunction],
                 objective: Callable[[SolutionFunction], float]):
        self.parameters = list(parameters)
        self._build = build
        self._objective = objective

    def __len__(self):
        return len(self.parameters)

    def __getitem__(self, i) -> SolutionFunction:
        return self._build(self.parameters[i])

    def __iter__(self):
        return (self[i] for i in range(len(self)))

    @property
    def objective_values(self) -> List[float]:
        return [self._objective(g) for g in self]
