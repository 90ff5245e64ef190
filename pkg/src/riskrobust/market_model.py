"""One-dimensional economic models: the law of the loss ``X`` and a pricing
density ``gamma(X)``.

Every distribution exposes the same small set of primitives (cdf, left
quantile, partial moments over intervals, sampling). Solvers and risk
functionals are written against those primitives only, so closed forms are
used whenever a family provides them and nothing downstream needs to know
which family it is working with.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, Optional, Sequence, Union

import numpy as np
from scipy import integrate, optimize, special

from .errors import DomainError, NumericError
from .intervals import INF, Interval, normalize

NORMALIZATION_TOL = 1e-8
QUAD_ABS_TOL = 1e-10


def _check_level(t):
    arr = np.asarray(t, dtype=float)
    if np.any(~(arr > 0) | ~(arr < 1)):
        raise DomainError(f"probability level must lie in (0, 1), got {t!r}")
    return arr


class ScalarDistribution:
    """Law of a real random variable.

    Subclasses implement ``cdf``, ``_ppf``, ``pdf`` and ``upper_moment``; the
    interval machinery below is shared.
    """

    continuous = True
    name = "distribution"

    # -- to be provided by subclasses ------------------------------------
    def cdf(self, x):
        raise NotImplementedError

    def _ppf(self, u):
        raise NotImplementedError

    def pdf(self, x):
        raise NotImplementedError

    def upper_moment(self, k: int, t: float) -> float:
        """``E[X**k 1{X > t}]``."""
        raise NotImplementedError

    @property
    def support(self):
        raise NotImplementedError

    @property
    def density_shape(self) -> str:
        return "other"

    # -- shared ----------------------------------------------------------
    def cdf_left(self, x):
        """``P(X < x)``."""
        return self.cdf(x)

    def quantile(self, t):
        """Left quantile ``inf{x : F(x) >= t}``."""
        arr = _check_level(t)
        out = self._ppf(arr)
        return float(out) if np.ndim(out) == 0 else out

    def prob(self, iv: Interval) -> float:
        if iv.empty:
            return 0.0
        if iv.hi == INF and not iv.lo_closed:
            # survival function directly, avoiding 1 - F cancellation in the tail
            return max(float(self.upper_moment(0, iv.lo)), 0.0)
        upper = self.cdf(iv.hi) if iv.hi_closed else self.cdf_left(iv.hi)
        lower = self.cdf_left(iv.lo) if iv.lo_closed else self.cdf(iv.lo)
        return max(float(upper - lower), 0.0)

    def partial_moment(self, k: int, iv: Interval) -> float:
        """``E[X**k 1{X in iv}]``."""
        if iv.empty:
            return 0.0
        if k == 0:
            return self.prob(iv)
        top = self.upper_moment(k, iv.lo)
        if iv.hi == INF:
            return top
        bottom = self.upper_moment(k, iv.hi)
        if math.isinf(top) and math.isinf(bottom):
            return 0.0
        return top - bottom

    @property
    def mean(self) -> float:
        return self.upper_moment(1, -INF)

    def es(self, p: float) -> float:
        """Expected shortfall for a continuous law: tail mean above VaR."""
        _check_level(p)
        v = self.quantile(p)
        return self.upper_moment(1, v) / (1.0 - p)

    def sample(self, rng: np.random.Generator, n: int, stratified: bool = False):
        """Draw ``n`` values. ``stratified`` places exactly one uniform in each
        cell ``[i/n, (i+1)/n)`` before applying the quantile function."""
        u = rng.random(n)
        if stratified:
            u = (np.arange(n) + u) / n
        u = np.clip(u, 1e-300, 1.0 - 1e-16)
        return np.asarray(self._ppf(u), dtype=float)


@dataclass(frozen=True)
class Uniform(ScalarDistribution):
    a: float = 0.0
    b: float = 1.0
    name = "uniform"

    def __post_init__(self):
        if not self.b > self.a:
            raise DomainError("Uniform requires b > a")

    @property
    def support(self):
        return (self.a, self.b)

    @property
    def density_shape(self):
        return "nonincreasing"

    def cdf(self, x):
        return np.clip((np.asarray(x, float) - self.a) / (self.b - self.a), 0.0, 1.0)

    def _ppf(self, u):
        return self.a + u * (self.b - self.a)

    def pdf(self, x):
        x = np.asarray(x, float)
        return np.where((x >= self.a) & (x <= self.b), 1.0 / (self.b - self.a), 0.0)

    def upper_moment(self, k, t):
        t = min(max(t, self.a), self.b)
        return (self.b ** (k + 1) - t ** (k + 1)) / ((k + 1) * (self.b - self.a))


@dataclass(frozen=True)
class Exponential(ScalarDistribution):
    rate: float = 1.0
    name = "exponential"

    def __post_init__(self):
        if not self.rate > 0:
            raise DomainError("Exponential requires rate > 0")

    @property
    def support(self):
        return (0.0, INF)

    @property
    def density_shape(self):
        return "decreasing"

    def cdf(self, x):
        x = np.asarray(x, float)
        return np.where(x > 0, -np.expm1(-self.rate * np.maximum(x, 0.0)), 0.0)

    def _ppf(self, u):
        return -np.log1p(-u) / self.rate

    def pdf(self, x):
        x = np.asarray(x, float)
        return np.where(x >= 0, self.rate * np.exp(-self.rate * np.maximum(x, 0.0)), 0.0)

    def upper_moment(self, k, t):
        if t == INF:
            return 0.0
        t = max(t, 0.0)
        return math.factorial(k) * float(special.gammaincc(k + 1, self.rate * t)) / self.rate**k


@dataclass(frozen=True)
class Lognormal(ScalarDistribution):
    mu: float = 0.0
    sigma: float = 1.0
    name = "lognormal"

    def __post_init__(self):
        if not self.sigma > 0:
            raise DomainError("Lognormal requires sigma > 0")

    @property
    def support(self):
        return (0.0, INF)

    def cdf(self, x):
        x = np.asarray(x, float)
        with np.errstate(divide="ignore"):
            z = (np.log(np.maximum(x, 0.0)) - self.mu) / self.sigma
        return np.where(x > 0, special.ndtr(z), 0.0)

    def _ppf(self, u):
        return np.exp(self.mu + self.sigma * special.ndtri(u))

    def pdf(self, x):
        x = np.asarray(x, float)
        safe = np.where(x > 0, x, 1.0)
        z = (np.log(safe) - self.mu) / self.sigma
        dens = np.exp(-0.5 * z * z) / (safe * self.sigma * math.sqrt(2 * math.pi))
        return np.where(x > 0, dens, 0.0)

    def upper_moment(self, k, t):
        if t == INF:
            return 0.0
        scale = math.exp(k * self.mu + 0.5 * k * k * self.sigma**2)
        if t <= 0:
            return scale
        return scale * float(special.ndtr((self.mu + k * self.sigma**2 - math.log(t)) / self.sigma))


@dataclass(frozen=True)
class Pareto(ScalarDistribution):
    """Pareto type I with tail index ``alpha`` and minimum ``scale``."""

    alpha: float = 3.0
    scale: float = 1.0
    name = "pareto"

    def __post_init__(self):
        if not self.alpha > 1:
            raise DomainError("Pareto requires alpha > 1 so that the mean is finite")
        if not self.scale > 0:
            raise DomainError("Pareto requires scale > 0")

    @property
    def support(self):
        return (self.scale, INF)

    @property
    def density_shape(self):
        return "decreasing"

    def cdf(self, x):
        x = np.asarray(x, float)
        return np.where(x > self.scale, 1.0 - (self.scale / np.maximum(x, self.scale)) ** self.alpha, 0.0)

    def _ppf(self, u):
        return self.scale * (1.0 - u) ** (-1.0 / self.alpha)

    def pdf(self, x):
        x = np.asarray(x, float)
        safe = np.maximum(x, self.scale)
        return np.where(x >= self.scale, self.alpha * self.scale**self.alpha / safe ** (self.alpha + 1), 0.0)

    def upper_moment(self, k, t):
        if t == INF:
            return 0.0
        if k >= self.alpha:
            return INF
        t = max(t, self.scale)
        return self.alpha * self.scale**self.alpha * t ** (k - self.alpha) / (self.alpha - k)


class EmpiricalAtoms(ScalarDistribution):
    """Finite discrete law on sorted atoms."""

    continuous = False
    name = "empirical"

    def __init__(self, values: Sequence[float], weights: Optional[Sequence[float]] = None):
        values = np.asarray(values, dtype=float).ravel()
        if values.size == 0:
            raise DomainError("EmpiricalAtoms needs at least one atom")
        if weights is None:
            weights = np.full(values.size, 1.0 / values.size)
            self._equal = True
        else:
            weights = np.asarray(weights, dtype=float).ravel()
            if weights.shape != values.shape:
                raise DomainError("values and weights must have the same length")
            if np.any(weights < 0):
                raise DomainError("atom weights must be nonnegative")
            if abs(weights.sum() - 1.0) > 1e-12:
                raise DomainError(f"atom weights sum to {weights.sum()!r}, not 1")
            self._equal = bool(np.all(weights == weights[0]))
        order = np.argsort(values, kind="stable")
        self.values = values[order]
        self.weights = weights[order]
        self._cum = np.cumsum(self.weights)
        self.values.setflags(write=False)
        self.weights.setflags(write=False)

    @classmethod
    def from_samples(cls, samples) -> "EmpiricalAtoms":
        return cls(np.asarray(samples, dtype=float))

    def __repr__(self):
        return f"EmpiricalAtoms(n={self.values.size})"

    def __eq__(self, other):
        return (
            isinstance(other, EmpiricalAtoms)
            and np.array_equal(self.values, other.values)
            and np.array_equal(self.weights, other.weights)
        )

    __hash__ = None

    @property
    def support(self):
        return (float(self.values[0]), float(self.values[-1]))

    @property
    def density_shape(self):
        return "atoms"

    def cdf(self, x):
        idx = np.searchsorted(self.values, x, side="right")
        return np.where(idx > 0, self._cum[np.maximum(idx - 1, 0)], 0.0)

    def cdf_left(self, x):
        idx = np.searchsorted(self.values, x, side="left")
        return np.where(idx > 0, self._cum[np.maximum(idx - 1, 0)], 0.0)

    def _ppf(self, u):
        u = np.asarray(u, float)
        n = self.values.size
        if self._equal:
            # ceil(n t)-th order statistic, robust to rounding of n t
            k = np.ceil(np.round(n * u, 9)).astype(int)
            return self.values[np.clip(k - 1, 0, n - 1)]
        idx = np.searchsorted(self._cum, u - 1e-12, side="left")
        return self.values[np.clip(idx, 0, n - 1)]

    def pdf(self, x):
        raise DomainError("EmpiricalAtoms has no density")

    def _mask(self, iv: Interval):
        return iv.contains(self.values)

    def prob(self, iv):
        if iv.empty:
            return 0.0
        return float(self.weights[self._mask(iv)].sum())

    def partial_moment(self, k, iv):
        if iv.empty:
            return 0.0
        m = self._mask(iv)
        return float(np.sum(self.weights[m] * self.values[m] ** k))

    def upper_moment(self, k, t):
        return self.partial_moment(k, Interval.above(t))

    def es(self, p):
        from .risk_measures import es_from_atoms

        _check_level(p)
        return es_from_atoms(self.values, self.weights, p)

    def sample(self, rng, n, stratified=False):
        u = rng.random(n)
        if stratified:
            u = (np.arange(n) + u) / n
        idx = np.searchsorted(self._cum, u, side="right")
        return self.values[np.clip(idx, 0, self.values.size - 1)]


@dataclass(frozen=True)
class Affine(ScalarDistribution):
    """Law of ``loc + scale * B`` for a base law ``B`` and ``scale > 0``."""

    base: ScalarDistribution
    loc: float = 0.0
    scale: float = 1.0
    name = "affine"

    def __post_init__(self):
        if not self.scale > 0:
            raise DomainError("Affine requires scale > 0")

    @property
    def continuous(self):
        return self.base.continuous

    @property
    def support(self):
        lo, hi = self.base.support
        return (self.loc + self.scale * lo, self.loc + self.scale * hi)

    @property
    def density_shape(self):
        return self.base.density_shape

    def _pre(self, x):
        return (np.asarray(x, float) - self.loc) / self.scale

    def cdf(self, x):
        return self.base.cdf(self._pre(x))

    def cdf_left(self, x):
        return self.base.cdf_left(self._pre(x))

    def _ppf(self, u):
        return self.loc + self.scale * np.asarray(self.base._ppf(u))

    def pdf(self, x):
        return self.base.pdf(self._pre(x)) / self.scale

    def prob(self, iv):
        return self.base.prob(iv.affine_preimage(self.loc, self.scale))

    def partial_moment(self, k, iv):
        pre = iv.affine_preimage(self.loc, self.scale)
        total = 0.0
        for j in range(k + 1):
            coef = math.comb(k, j) * self.loc ** (k - j) * self.scale**j
            if coef != 0.0:
                total += coef * self.base.partial_moment(j, pre)
        return total

    def upper_moment(self, k, t):
        return self.partial_moment(k, Interval.above(t))

    def es(self, p):
        return self.loc + self.scale * self.base.es(p)

    def sample(self, rng, n, stratified=False):
        return self.loc + self.scale * self.base.sample(rng, n, stratified)


def make_distribution(family: str, **params) -> ScalarDistribution:
    """Build a distribution from a family name, as used in config files."""
    family = family.lower()
    table = {
        "uniform": Uniform,
        "exponential": Exponential,
        "lognormal": Lognormal,
        "pareto": Pareto,
    }
    if family in table:
        try:
            return table[family](**params)
        except TypeError as exc:
            raise DomainError(f"bad parameters for {family}: {exc}") from None
    if family in ("empirical", "atoms", "empiricalatoms"):
        return EmpiricalAtoms(params["values"], params.get("weights"))
    raise DomainError(f"unknown distribution family {family!r}")


def quantile(dist: ScalarDistribution, t):
    """Left quantile of ``dist`` at level ``t`` in (0, 1)."""
    return dist.quantile(t)


# --------------------------------------------------------------------------
# pricing density
# --------------------------------------------------------------------------

MONOTONE_KINDS = ("constant", "increasing", "decreasing", "general")


@dataclass(frozen=True)
class PricingDensity:
    """Strictly positive pricing density written as a function of ``X``.

    ``scale`` multiplies the raw function; :class:`MarketModel` sets it so
    that ``E[gamma(X)] = 1``.
    """

    kind: str
    func: Callable = field(repr=False, compare=False)
    monotone: str = "general"
    params: tuple = ()
    scale: float = 1.0

    def __post_init__(self):
        if self.monotone not in MONOTONE_KINDS:
            raise DomainError(f"monotone flag must be one of {MONOTONE_KINDS}")

    @classmethod
    def constant(cls, value: float = 1.0) -> "PricingDensity":
        if not value > 0:
            raise DomainError("constant pricing density must be positive")
        return cls("constant", lambda x: np.full(np.shape(x), 1.0), "constant", (("value", value),), value)

    @classmethod
    def linear(cls, slope: float = 1.0) -> "PricingDensity":
        """``gamma(x) = slope * x``."""
        if not slope > 0:
            raise DomainError("linear pricing density needs a positive slope")
        return cls("linear", lambda x: np.asarray(x, float), "increasing", (("slope", slope),), slope)

    @classmethod
    def exp_tilt(cls, theta: float) -> "PricingDensity":
        """``gamma(x) proportional to exp(theta * x)`` (Esscher-type density)."""
        mono = "increasing" if theta > 0 else "decreasing" if theta < 0 else "constant"
        t = float(theta)
        return cls("exp_tilt", lambda x: np.exp(t * np.asarray(x, float)), mono, (("theta", t),), 1.0)

    @classmethod
    def function(cls, func: Callable, monotone: str = "general") -> "PricingDensity":
        return cls("function", func, monotone, (), 1.0)

    def rescaled(self, factor: float) -> "PricingDensity":
        return PricingDensity(self.kind, self.func, self.monotone, self.params, self.scale * factor)

    def __call__(self, x):
        return self.scale * np.asarray(self.func(x), dtype=float)

    @property
    def nondecreasing(self) -> bool:
        return self.monotone in ("constant", "increasing")

    def inverse(self, c: float, support=(-INF, INF)) -> Optional[float]:
        """Point where a strictly monotone density crosses level ``c`` on
        ``support``; ``None`` if it stays on one side."""
        if self.monotone not in ("increasing", "decreasing"):
            raise DomainError("inverse needs a strictly monotone density")
        if self.kind == "linear":
            x = c / self.scale
        elif self.kind == "exp_tilt":
            if c <= 0:
                return None
            x = math.log(c / self.scale) / dict(self.params)["theta"]
        else:
            x = _monotone_crossing(lambda y: float(self(y)) - c, support)
            return x
        lo, hi = support
        if x <= lo or x >= hi:
            return None
        return x


def _monotone_crossing(f, support):
    """Root of a monotone scalar ``f`` on ``support``, expanding infinite ends."""
    lo, hi = support
    lo = -1.0 if lo == -INF else lo
    hi = max(lo + 1.0, 1.0) if hi == INF else hi
    flo, fhi = f(lo), f(hi)
    for _ in range(200):
        if flo * fhi <= 0:
            break
        if support[1] == INF:
            hi = lo + 2.0 * (hi - lo)
            fhi = f(hi)
        elif support[0] == -INF:
            lo = hi - 2.0 * (hi - lo)
            flo = f(lo)
        else:
            return None
    if flo * fhi > 0:
        return None
    if flo == 0:
        return lo
    if fhi == 0:
        return hi
    return optimize.brentq(f, lo, hi, xtol=1e-14, rtol=4 * np.finfo(float).eps, maxiter=500)


# --------------------------------------------------------------------------
# market model
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class MarketModel:
    """Law of the loss ``X`` plus pricing density ``gamma(X)``.

    On construction ``E[gamma(X)]`` is computed; if it differs from one by
    more than ``1e-8`` the density is rescaled and a warning is issued.
    """

    x_dist: ScalarDistribution
    gamma: PricingDensity = field(default_factory=PricingDensity.constant)
    require_nonnegative: bool = True

    def __post_init__(self):
        lo, _ = self.x_dist.support
        if self.require_nonnegative and lo < 0:
            raise DomainError("the loss X must be nonnegative")
        total = self.gamma_moment(0, Interval.real_line())
        if not (total > 0 and math.isfinite(total)):
            raise DomainError(f"E[gamma(X)] = {total!r} cannot be normalized")
        if abs(total - 1.0) > NORMALIZATION_TOL:
            warnings.warn(
                f"pricing density rescaled by {1.0 / total:.12g} so that E[gamma(X)] = 1",
                stacklevel=3,
            )
            object.__setattr__(self, "gamma", self.gamma.rescaled(1.0 / total))
        if not math.isfinite(self.gamma_moment(1, Interval.real_line())):
            raise DomainError("E[gamma(X) X] must be finite")

    # --- integrals ------------------------------------------------------
    def gamma_moment(self, k: int, iv: Interval) -> float:
        """``E[gamma(X) X**k 1{X in iv}]``."""
        dist, g = self.x_dist, self.gamma
        if iv.empty:
            return 0.0
        if isinstance(dist, EmpiricalAtoms):
            m = iv.contains(dist.values)
            v = dist.values[m]
            return float(np.sum(dist.weights[m] * g(v) * v**k))
        if g.kind == "constant":
            return g.scale * dist.partial_moment(k, iv)
        if g.kind == "linear":
            return g.scale * dist.partial_moment(k + 1, iv)
        return _quad_gamma(dist, g, k, iv)

    def expect(self, func: Callable, iv: Interval = Interval.real_line()) -> float:
        """``E[func(X) 1{X in iv}]`` by summation or adaptive quadrature."""
        dist = self.x_dist
        if isinstance(dist, EmpiricalAtoms):
            m = iv.contains(dist.values)
            return float(np.sum(dist.weights[m] * np.asarray(func(dist.values[m]), float)))
        return _quad(lambda x: float(func(x)) * float(dist.pdf(x)), dist, iv)

    @property
    def gamma_mean_x(self) -> float:
        """``E[gamma X]``, the price of the unhedged loss."""
        return self.gamma_moment(1, Interval.real_line())

    def gamma_ess_sup(self) -> float:
        lo, hi = self.x_dist.support
        g = self.gamma
        if g.monotone == "constant":
            return float(g.scale)
        if isinstance(self.x_dist, EmpiricalAtoms):
            return float(np.max(g(self.x_dist.values)))
        if g.monotone == "increasing":
            return float(g(hi)) if hi < INF else _limit(g, +1)
        if g.monotone == "decreasing":
            return float(g(lo)) if lo > -INF else _limit(g, -1)
        u = np.linspace(0.0, 1.0, 4001)[1:-1]
        return float(np.max(g(self.x_dist._ppf(u))))

    def gamma_ess_inf(self) -> float:
        lo, hi = self.x_dist.support
        g = self.gamma
        if g.monotone == "constant":
            return float(g.scale)
        if isinstance(self.x_dist, EmpiricalAtoms):
            return float(np.min(g(self.x_dist.values)))
        if g.monotone == "increasing":
            return float(g(lo)) if lo > -INF else 0.0
        if g.monotone == "decreasing":
            return float(g(hi)) if hi < INF else 0.0
        u = np.linspace(0.0, 1.0, 4001)[1:-1]
        return float(np.min(g(self.x_dist._ppf(u))))

    def with_distribution(self, dist: ScalarDistribution) -> "MarketModel":
        """Same pricing function, new law (renormalized, no nonnegativity)."""
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            return MarketModel(dist, self.gamma, require_nonnegative=False)


def _limit(g, direction):
    x = 1.0
    last = float(g(direction * x))
    for _ in range(60):
        x *= 2.0
        cur = float(g(direction * x))
        if not math.isfinite(cur) or cur > 1e300:
            return INF
        if abs(cur - last) <= 1e-14 * max(1.0, abs(cur)):
            return cur
        last = cur
    return INF


def _quad(integrand, dist, iv: Interval) -> float:
    lo, hi = dist.support
    a = max(iv.lo, lo)
    b = min(iv.hi, hi)
    if not a < b:
        return 0.0
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", integrate.IntegrationWarning)
        val, err = integrate.quad(integrand, a, b, epsabs=QUAD_ABS_TOL, epsrel=1e-10, limit=500)
    if caught and err > 1e-8:
        raise NumericError("quadrature did not converge", residual=err, interval=(a, b))
    return float(val)


def _quad_gamma(dist, g, k, iv):
    return _quad(lambda x: float(g(x)) * x**k * float(dist.pdf(x)), dist, iv)


def expect_gamma_indicator(model: MarketModel, region: Union[Interval, Iterable[Interval]]) -> float:
    """``E[gamma(X) 1{X in region}]`` for a finite union of intervals."""
    ivs = [region] if isinstance(region, Interval) else list(region)
    return float(sum(model.gamma_moment(0, iv) for iv in normalize(ivs)))


# --------------------------------------------------------------------------
# assumption checks
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class AssumptionCheck:
    holds: Optional[bool]
    diagnostic: str

    @property
    def deferred(self) -> bool:
        return self.holds is None


@dataclass(frozen=True)
class AssumptionReport:
    p: float
    checks: Dict[str, AssumptionCheck]

    def __getitem__(self, name):
        return self.checks[name]

    def holds(self, name) -> Optional[bool]:
        return self.checks[name].holds

    def to_dict(self):
        return {k: {"holds": v.holds, "diagnostic": v.diagnostic} for k, v in self.checks.items()}


def _positive_density(dist) -> bool:
    return dist.continuous and dist.density_shape != "atoms"


def check_assumptions(model: MarketModel, p: float) -> AssumptionReport:
    """Evaluate the structural assumptions for confidence level ``p``.

    The quantile non-atomicity conditions depend on the solved levels and are
    reported as deferred; the solvers re-check them.
    """
    _check_level(p)
    dist, g = model.x_dist, model.gamma
    checks: Dict[str, AssumptionCheck] = {}

    lo, hi = dist.support
    gamma_total = model.gamma_moment(0, Interval.real_line())
    gmx = model.gamma_mean_x
    if isinstance(dist, EmpiricalAtoms):
        probe = dist.values
    else:
        probe = dist._ppf(np.linspace(0.0, 1.0, 2001)[1:-1])
    gamma_pos = bool(np.all(g(probe) > 0))
    a_ok = lo >= 0 and _positive_density(dist) and gamma_pos and abs(gamma_total - 1) <= NORMALIZATION_TOL
    a_ok = a_ok and math.isfinite(gmx)
    checks["A"] = AssumptionCheck(
        a_ok,
        f"support=({lo:.6g}, {hi:.6g}), density={'yes' if _positive_density(dist) else 'no'}, "
        f"gamma>0 on support interior={gamma_pos}, E[gamma]={gamma_total:.12g}, E[gamma X]={gmx:.12g}",
    )

    sup = model.gamma_ess_sup()
    bound = 1.0 / (1.0 - p)
    checks["E1"] = AssumptionCheck(sup <= bound + 1e-12, f"ess-sup gamma = {sup:.6g} vs 1/(1-p) = {bound:.6g}")

    if g.monotone == "constant":
        e2 = AssumptionCheck(True, "gamma is constant")
    elif g.monotone in ("increasing", "decreasing") and dist.continuous:
        e2 = AssumptionCheck(True, f"gamma strictly {g.monotone} and X continuous: gamma(X) has no atoms")
    elif not dist.continuous:
        e2 = AssumptionCheck(False, "X has atoms, so a non-constant gamma(X) has atoms")
    else:
        e2 = AssumptionCheck(True, "gamma general: continuity of gamma(X) assumed, not verified")
    checks["E2"] = e2

    checks["V1"] = AssumptionCheck(None, "deferred: needs the solved level q")
    checks["V2"] = AssumptionCheck(None, "deferred: needs the solved level q'")

    shape = dist.density_shape
    dens_ok = shape in ("decreasing", "nonincreasing")
    v3 = p >= 0.5 and dens_ok and g.nondecreasing
    checks["V3"] = AssumptionCheck(
        v3,
        f"p={p} (needs >= 1/2), density shape={shape}, gamma monotone={g.monotone}; "
        "q > 0 is checked by the solver",
    )
    return AssumptionReport(p, checks)
