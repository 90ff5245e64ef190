"""Value-at-Risk and Expected Shortfall.

Both functionals accept either a law (anything with ``quantile``/``es``
methods: the parametric families, :class:`~riskrobust.market_model.EmpiricalAtoms`
and pushforwards of piecewise positions) or a raw sample. Losses are
positive. VaR is the left quantile; no interpolation is ever applied.
"""

from __future__ import annotations

import math
import warnings
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import integrate

from .errors import DomainError, NumericError

INF = math.inf


def _level(p):
    if not (0.0 < p < 1.0):
        raise DomainError(f"confidence level must lie in (0, 1), got {p!r}")
    return float(p)


def _as_sample(y):
    arr = np.asarray(y, dtype=float).ravel()
    if arr.size == 0:
        raise DomainError("empty sample")
    return arr


def order_index(n: int, p: float) -> int:
    """``ceil(n p)``, guarded against rounding in ``n * p``."""
    return max(int(math.ceil(round(n * p, 9))), 1)


def var_empirical(samples, p: float) -> float:
    """``ceil(n p)``-th order statistic."""
    p = _level(p)
    y = _as_sample(samples)
    k = order_index(y.size, p)
    return float(np.partition(y, k - 1)[k - 1])


def es_empirical(samples, p: float) -> float:
    """Tail average of the empirical quantile function on ``(p, 1)``."""
    p = _level(p)
    y = np.sort(_as_sample(samples))
    n = y.size
    k = order_index(n, p)
    head = (k / n - p) * y[k - 1]
    tail = y[k:].sum() / n
    return float((head + tail) / (1.0 - p))


def es_from_atoms(values, weights, p: float) -> float:
    """ES of a finite discrete law given sorted atoms and weights."""
    p = _level(p)
    values = np.asarray(values, float)
    weights = np.asarray(weights, float)
    if np.all(weights == weights[0]):
        return es_empirical(values, p)
    upper = np.cumsum(weights)
    lower = upper - weights
    overlap = np.clip(np.minimum(upper, 1.0) - np.maximum(lower, p), 0.0, None)
    m = overlap > 0
    return float(np.sum(overlap[m] * values[m]) / (1.0 - p))


def _is_law(obj) -> bool:
    return hasattr(obj, "quantile") and not isinstance(obj, np.ndarray)


def var(obj, p: float) -> float:
    """``VaR_p``: left ``p``-quantile of a law or of a sample."""
    p = _level(p)
    if _is_law(obj):
        return float(obj.quantile(p))
    return var_empirical(obj, p)


def es(obj, p: float) -> float:
    """``ES_p``: average of ``VaR_u`` over ``u`` in ``(p, 1)``; may be ``inf``."""
    p = _level(p)
    if _is_law(obj):
        return float(obj.es(p))
    return es_empirical(obj, p)


def ess_sup(obj) -> float:
    """``VaR_1 = ES_1``: essential supremum."""
    if hasattr(obj, "support"):
        return float(obj.support[1])
    return float(np.max(_as_sample(obj)))


def es_quadrature(quantile_fn: Callable[[float], float], p: float, tol: float = 1e-10) -> float:
    """ES by adaptive quadrature of the quantile function on ``(p, 1)``.

    Divergence is detected on the dyadic blocks ``(1 - 2^-j, 1 - 2^-(j+1))``
    of the tail: if their contributions stop shrinking the integral is
    reported as ``inf``.
    """
    p = _level(p)
    width = 1.0 - p
    blocks = []
    for j in range(1, 45):
        a = 1.0 - width * 2.0 ** (-(j - 1))
        b = 1.0 - width * 2.0 ** (-j)
        blocks.append((a, b))
    total = 0.0
    contribs = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        for a, b in blocks:
            val, _ = integrate.quad(quantile_fn, a, b, epsabs=tol * 1e-3, epsrel=1e-12, limit=200)
            contribs.append(val)
            total += val
    last = np.abs(contribs[-8:])
    if not np.all(np.isfinite(last)) or (last[-1] > 0 and last[-1] >= 0.9 * last[0]):
        return INF
    # remaining tail beyond the last block, bounded by a geometric continuation
    ratio = last[-1] / last[-2] if last[-2] > 0 else 0.0
    if ratio >= 1.0:
        return INF
    total += contribs[-1] * ratio / (1.0 - ratio)
    return total / width


def batch_stderr(estimator: Callable, samples, batches: int = 20) -> float:
    """Standard error of ``estimator(samples)`` by interleaved batch means.

    Interleaving (``i mod batches``) keeps stratified samples stratified
    within each batch.
    """
    y = np.asarray(samples, float)
    if y.ndim == 1:
        parts = [y[i::batches] for i in range(batches)]
    else:
        parts = [y[:, i::batches] for i in range(batches)]
    ests = np.array([estimator(part) for part in parts])
    if not np.all(np.isfinite(ests)):
        return INF
    return float(np.std(ests, ddof=1) / math.sqrt(batches))


def es_dual_check(
    model,
    p: float,
    density: Callable,
    func: Optional[Callable] = None,
    breakpoints: Sequence[float] = (),
) -> float:
    """``E[B(X) Y(X)]`` for a candidate dual density ``B``.

    ``B`` must satisfy ``E[B] = 1`` and ``0 <= B <= 1/(1-p)``; the returned
    value is then a lower bound for ``ES_p(Y)``. ``func`` defaults to the
    identity, i.e. ``Y = X``. ``breakpoints`` lists discontinuities of the
    integrand so quadrature can split there.
    """
    p = _level(p)
    dist = model.x_dist if hasattr(model, "x_dist") else model
    func = func or (lambda x: x)
    cap = 1.0 / (1.0 - p)

    if hasattr(dist, "values"):
        xs, ws = dist.values, dist.weights
        b = np.asarray(density(xs), float)
        total_b = float(np.sum(ws * b))
        bmin, bmax = float(b.min()), float(b.max())
        ey = float(np.sum(ws * b * np.asarray(func(xs), float)))
    else:
        probe = dist._ppf(np.linspace(0.0, 1.0, 20001)[1:-1])
        b = np.asarray(density(probe), float)
        bmin, bmax = float(b.min()), float(b.max())
        total_b = _integrate_pieces(lambda x: float(density(x)) * float(dist.pdf(x)), dist, breakpoints)
        ey = None
    if bmin < -1e-8:
        raise DomainError(f"dual density violates B >= 0 (min {bmin:.6g})")
    if bmax > cap + 1e-8:
        raise DomainError(f"dual density violates B <= 1/(1-p) = {cap:.6g} (max {bmax:.6g})")
    if abs(total_b - 1.0) > 1e-8:
        raise DomainError(f"dual density violates E[B] = 1 (got {total_b:.12g})")
    if ey is None:
        ey = _integrate_pieces(
            lambda x: float(density(x)) * float(func(x)) * float(dist.pdf(x)), dist, breakpoints
        )
    return ey


def _integrate_pieces(integrand, dist, breakpoints):
    lo, hi = dist.support
    cuts = [lo] + sorted(b for b in breakpoints if lo < b < hi) + [hi]
    total = 0.0
    for a, b in zip(cuts, cuts[1:]):
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", integrate.IntegrationWarning)
            val, err = integrate.quad(integrand, a, b, epsabs=1e-12, epsrel=1e-12, limit=500)
        if caught and err > 1e-8:
            raise NumericError("quadrature did not converge", residual=err, interval=(a, b))
        total += val
    return total
