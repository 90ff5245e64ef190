"""Families of perturbed models ``Z_eps`` converging to ``X`` as ``eps -> 0``.

Each family produces index-coupled samples ``(x_i, z_i)``; the shift and
scale families are also affine images of ``X``, so their laws are known
exactly and downstream code can push solutions forward analytically.

* :class:`Shift`: ``Z = X + eps``.
* :class:`Scale`: ``Z = (1 + eps) X``.
* :class:`LemmaA2`: outside the set ``B = {phi > a}`` each point is moved by
  an independent ``Uniform[-eps, eps]`` amount, unless that would leave the
  support. The move is at most ``eps``, the law of ``Z`` stays absolutely
  continuous with respect to that of ``X``, and mass leaks into ``B`` so that
  ``P(phi(Z) <= a) < p``. This is the perturbation that defeats any position
  with a jump at the ``p``-quantile.
* :class:`TailSpike`: with probability ``eps`` the loss gains an extra
  ``eps**-2``. Prokhorov distance at most ``eps`` but a tail contribution to
  ES of order ``1/eps``.
* :class:`Noise`: ``Z = X + Uniform[-eps, eps]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Tuple

import numpy as np

from .errors import DomainError
from .intervals import INF, Interval
from .market_model import Affine, EmpiricalAtoms, ScalarDistribution
from .metrics import Kind, MetricKind, discretize, prokhorov, prokhorov_discrete

HYPOTHESIS_TOL = 1e-6


def stream(seed: int, *keys: int) -> np.random.Generator:
    """Independent generator for ``(seed, keys...)``; same inputs, same stream."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), *map(int, keys)]))


class PerturbationFamily:
    kind = "base"

    def sample(self, dist: ScalarDistribution, eps: float, rng: np.random.Generator, n: int,
               stratified: bool = True) -> Tuple[np.ndarray, np.ndarray]:
        """Index-coupled draws ``(x, z)`` of ``(X, Z_eps)``."""
        xs = dist.sample(rng, n, stratified=stratified)
        return xs, self.transform(xs, eps, rng, dist)

    def transform(self, xs, eps, rng, dist):
        raise NotImplementedError

    def affine(self, eps: float) -> Optional[Tuple[float, float]]:
        """``(loc, scale)`` with ``Z = loc + scale X`` if the family is affine."""
        return None

    def law(self, dist: ScalarDistribution, eps: float) -> Optional[ScalarDistribution]:
        aff = self.affine(eps)
        if aff is None:
            return None
        loc, scale = aff
        if isinstance(dist, EmpiricalAtoms):
            return EmpiricalAtoms(loc + scale * dist.values, dist.weights)
        return Affine(dist, loc, scale)

    def distance(self, metric: MetricKind, dist: ScalarDistribution, eps: float) -> Optional[float]:
        """Closed-form distance between ``X`` and ``Z_eps``, if known."""
        return None

    def to_dict(self):
        return {"kind": self.kind}


@dataclass(frozen=True)
class Shift(PerturbationFamily):
    kind = "shift"

    def transform(self, xs, eps, rng, dist):
        return xs + eps

    def affine(self, eps):
        return (float(eps), 1.0)

    def distance(self, metric, dist, eps):
        if metric.kind is Kind.PROKHOROV:
            return prokhorov(dist, self.law(dist, eps))
        return abs(float(eps))


@dataclass(frozen=True)
class Scale(PerturbationFamily):
    kind = "scale"

    def transform(self, xs, eps, rng, dist):
        return (1.0 + eps) * xs

    def affine(self, eps):
        return (0.0, 1.0 + float(eps))

    def distance(self, metric, dist, eps):
        if metric.kind is Kind.PROKHOROV:
            return prokhorov(dist, self.law(dist, eps))
        if metric.kind is Kind.LINF:
            lo, hi = dist.support
            return abs(eps) * max(abs(lo), abs(hi))
        q = metric.q
        if float(q).is_integer():
            moment = dist.partial_moment(int(q), Interval.real_line()) if dist.support[0] >= 0 else None
            if moment is not None:
                return abs(eps) * moment ** (1.0 / q)
        return None


@dataclass(frozen=True)
class Noise(PerturbationFamily):
    kind = "noise"

    def transform(self, xs, eps, rng, dist):
        return xs + rng.uniform(-eps, eps, xs.size)


@dataclass(frozen=True)
class LemmaA2(PerturbationFamily):
    """Local uniform smearing outside ``B = {phi > a}``, clamped to the support.

    ``quantile_coupled`` replaces the independent uniform coupling with
    ``Z = F_Z^{-1}(F_X(X))``, where ``F_Z`` is estimated from an independent
    draw of the smeared variable.
    """

    a: float
    p: float
    phi: Callable = field(default=lambda x: x, compare=False)
    quantile_coupled: bool = False
    kind = "lemma_a2"

    def check_hypothesis(self, dist: ScalarDistribution) -> float:
        """``P(phi(X) <= a)``, which must equal ``p``."""
        if isinstance(dist, EmpiricalAtoms):
            below = float(np.sum(dist.weights[np.asarray(self.phi(dist.values)) <= self.a]))
        else:
            from .levelsets import prob_union, upper_set

            below = 1.0 - prob_union(dist, upper_set(self.phi, self.a, dist))
        if abs(below - self.p) > HYPOTHESIS_TOL:
            raise DomainError(f"P(phi(X) <= a) = {below:.9g} differs from p = {self.p}")
        return below

    def _smear(self, xs, eps, rng, dist):
        if eps == 0:
            return xs.copy()
        lo, hi = dist.support
        moved = xs + rng.uniform(-eps, eps, xs.size)
        in_b = np.asarray(self.phi(xs), float) > self.a
        stays = in_b | (moved < lo) | (moved > hi)
        return np.where(stays, xs, moved)

    def sample(self, dist, eps, rng, n, stratified=True):
        self.check_hypothesis(dist)
        return super().sample(dist, eps, rng, n, stratified)

    def transform(self, xs, eps, rng, dist):
        if not self.quantile_coupled:
            return self._smear(xs, eps, rng, dist)
        other = np.sort(self._smear(dist.sample(rng, xs.size, stratified=True), eps, rng, dist))
        u = np.asarray(dist.cdf(xs), float)
        idx = np.clip(np.ceil(u * xs.size).astype(int) - 1, 0, xs.size - 1)
        return other[idx]

    def to_dict(self):
        return {"kind": self.kind, "a": self.a, "p": self.p, "quantile_coupled": self.quantile_coupled}


@dataclass(frozen=True)
class TailSpike(PerturbationFamily):
    """With probability ``mass`` (default ``eps``) add ``height`` (default
    ``eps**-2``) to the loss."""

    mass: Optional[float] = None
    height: Optional[float] = None
    kind = "tail_spike"

    def levels(self, eps):
        mass = self.mass if self.mass is not None else eps
        height = self.height if self.height is not None else (eps ** -2.0 if eps > 0 else 0.0)
        return mass, height

    def transform(self, xs, eps, rng, dist):
        mass, height = self.levels(eps)
        spike = rng.random(xs.size) < mass
        return xs + height * spike

    def distance(self, metric, dist, eps):
        mass, height = self.levels(eps)
        if metric.kind is Kind.LINF:
            return height if mass > 0 else 0.0
        if metric.kind is Kind.LQ:
            return height * mass ** (1.0 / metric.q)
        # the law of Z is the mixture (1 - mass) X + mass (X + height)
        base = discretize(dist)
        w = base.weights
        mixed = EmpiricalAtoms(np.concatenate([base.values, base.values + height]),
                               np.concatenate([(1.0 - mass) * w, mass * w]))
        return prokhorov_discrete(base, mixed)

    def to_dict(self):
        return {"kind": self.kind, "mass": self.mass, "height": self.height}


FAMILIES = {"shift": Shift, "scale": Scale, "noise": Noise, "lemma_a2": LemmaA2, "tail_spike": TailSpike}


def make_family(kind: str, **params) -> PerturbationFamily:
    key = kind.lower()
    if key not in FAMILIES:
        raise DomainError(f"unknown perturbation family {kind!r}")
    try:
        return FAMILIES[key](**params)
    except TypeError as exc:
        raise DomainError(f"bad parameters for {kind}: {exc}") from None


def lemma_a2_sequence(dist: ScalarDistribution, phi: Callable, a: float, p: float, seed: int = 0,
                      quantile_coupled: bool = False):
    """``n -> (x, z)`` sampler for ``Z_{1/n}``."""
    fam = LemmaA2(a, p, phi, quantile_coupled)
    fam.check_hypothesis(dist)

    def sampler(n_index: int, n_samples: int):
        return fam.sample(dist, 1.0 / n_index, stream(seed, n_index), n_samples)

    return sampler


def shift(dist: ScalarDistribution, delta: float, seed: int = 0):
    """Coupled sampler for ``Z = X + delta``."""
    fam = Shift()
    return lambda n: fam.sample(dist, delta, stream(seed), n)
