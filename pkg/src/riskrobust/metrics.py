"""Distances between a model and its perturbations.

Two coupled distances act on index-aligned samples (``L-infinity`` and
``L-q``); the Prokhorov distance only sees the two marginal laws, so it is a
pseudo-metric on random variables.

For finite discrete laws on the line the Prokhorov distance is computed
exactly. By Strassen's theorem ``pi(mu, nu) <= eps`` iff some coupling puts
mass at most ``eps`` on ``|x - y| > eps``, i.e. iff the unmatched mass
``D(eps)`` of a maximal partial matching between atoms at distance at most
``eps`` is at most ``eps``. On the line a greedy sweep over sorted atoms
finds that maximal matching. ``D`` is a step function that only changes at
pairwise atom distances, so the infimum is found by a binary search over
those distances.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DomainError
from .market_model import EmpiricalAtoms, ScalarDistribution

DEFAULT_ATOMS = 1000
# unmatched mass below this is rounding left over from the weight updates
MASS_TOL = 1e-12


class Kind(str, enum.Enum):
    LINF = "linf"
    LQ = "lq"
    PROKHOROV = "prokhorov"


@dataclass(frozen=True)
class MetricKind:
    kind: Kind
    q: float = 2.0

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        if self.kind is Kind.LQ and not self.q >= 1:
            raise DomainError(f"Lq needs q >= 1, got {self.q!r}")

    @classmethod
    def linf(cls):
        return cls(Kind.LINF)

    @classmethod
    def lq(cls, q: float = 2.0):
        return cls(Kind.LQ, q)

    @classmethod
    def prokhorov(cls):
        return cls(Kind.PROKHOROV)

    @classmethod
    def parse(cls, text: str) -> "MetricKind":
        """``linf``, ``lq``, ``l2``, ``lq:3`` or ``prokhorov``."""
        t = text.strip().lower()
        if t in ("linf", "l_inf", "inf"):
            return cls.linf()
        if t in ("prokhorov", "weak", "prokhorovweak"):
            return cls.prokhorov()
        if t.startswith("lq"):
            _, _, q = t.partition(":")
            return cls.lq(float(q) if q else 2.0)
        if t.startswith("l") and t[1:].replace(".", "", 1).isdigit():
            return cls.lq(float(t[1:]))
        raise DomainError(f"unknown metric {text!r}")

    @property
    def label(self) -> str:
        if self.kind is Kind.LQ:
            return f"lq:{self.q:g}"
        return self.kind.value


def coupled_distance(kind: MetricKind, xs, zs) -> float:
    xs = np.asarray(xs, float).ravel()
    zs = np.asarray(zs, float).ravel()
    if xs.shape != zs.shape:
        raise DomainError(f"coupled samples differ in length: {xs.size} vs {zs.size}")
    if xs.size == 0:
        raise DomainError("empty samples")
    if kind.kind is Kind.LINF:
        return float(np.max(np.abs(xs - zs)))
    if kind.kind is Kind.LQ:
        return float(np.mean(np.abs(xs - zs) ** kind.q) ** (1.0 / kind.q))
    return prokhorov_discrete(_sample_law(xs), _sample_law(zs))


def _sample_law(xs: np.ndarray, n: int = DEFAULT_ATOMS) -> EmpiricalAtoms:
    """Empirical law of a sample; large samples are reduced to ``n``
    mid-cell empirical quantiles so the exact computation stays cheap."""
    if xs.size <= 2 * n:
        return EmpiricalAtoms(xs)
    s = np.sort(xs)
    idx = np.minimum(((np.arange(n) + 0.5) / n * s.size).astype(int), s.size - 1)
    return EmpiricalAtoms(s[idx])


def unmatched_mass(mu: EmpiricalAtoms, nu: EmpiricalAtoms, eps: float) -> float:
    """``1 -`` largest mass that can be moved between atoms at distance ``<= eps``."""
    xv, xw = mu.values, mu.weights.copy()
    yv, yw = nu.values, nu.weights.copy()
    i = j = 0
    matched = 0.0
    # compare differences exactly as the candidate distances are formed, so
    # a pair at distance eps is always matchable
    while i < xv.size and j < yv.size:
        if xv[i] - yv[j] > eps:
            j += 1
        elif yv[j] - xv[i] > eps:
            i += 1
        else:
            amount = min(xw[i], yw[j])
            matched += amount
            xw[i] -= amount
            yw[j] -= amount
            if xw[i] <= 0.0:
                i += 1
            if yw[j] <= 0.0:
                j += 1
    left = 1.0 - matched
    return left if left > MASS_TOL else 0.0


def _candidate_distances(mu: EmpiricalAtoms, nu: EmpiricalAtoms) -> np.ndarray:
    d = np.abs(mu.values[:, None] - nu.values[None, :]).ravel()
    d = d[d < 1.0]
    return np.unique(np.concatenate([[0.0], d]))


def prokhorov_discrete(mu: EmpiricalAtoms, nu: EmpiricalAtoms) -> float:
    """Exact Prokhorov distance between two finite discrete laws on the line."""
    ds = _candidate_distances(mu, nu)
    deficits = {}

    def deficit(k):
        if k not in deficits:
            deficits[k] = unmatched_mass(mu, nu, ds[k])
        return deficits[k]

    # first index whose deficit is already within its distance
    lo, hi = 0, ds.size
    while lo < hi:
        mid = (lo + hi) // 2
        if deficit(mid) <= ds[mid]:
            hi = mid
        else:
            lo = mid + 1
    best = 1.0
    if lo < ds.size:
        best = min(best, float(ds[lo]))
    if lo > 0:
        best = min(best, deficit(lo - 1))
    return float(best)


def discretize(dist: ScalarDistribution, n: int = DEFAULT_ATOMS) -> EmpiricalAtoms:
    """``n`` equally weighted atoms at the mid-cell quantiles ``(i + 1/2)/n``."""
    if isinstance(dist, EmpiricalAtoms):
        return dist
    u = (np.arange(n) + 0.5) / n
    return EmpiricalAtoms(np.asarray(dist._ppf(u), float))


def prokhorov(mu, nu, n: int = DEFAULT_ATOMS) -> float:
    """Prokhorov distance between laws, discretizing continuous ones."""
    return prokhorov_discrete(discretize(mu, n), discretize(nu, n))


def distance(kind: MetricKind, xs, zs) -> float:
    return coupled_distance(kind, xs, zs)
