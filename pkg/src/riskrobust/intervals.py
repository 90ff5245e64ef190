"""Real intervals with explicit endpoint closedness.

Regions of solution functions are finite unions of these. Closedness only
matters for distributions with atoms, but it is tracked everywhere so that a
list of regions can be checked to partition the real line exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, List

import numpy as np

INF = math.inf


@dataclass(frozen=True)
class Interval:
    lo: float = -INF
    hi: float = INF
    lo_closed: bool = False
    hi_closed: bool = True

    def __post_init__(self):
        # infinite endpoints are never included
        if self.lo == -INF and self.lo_closed:
            object.__setattr__(self, "lo_closed", False)
        if self.hi == INF and self.hi_closed:
            object.__setattr__(self, "hi_closed", False)

    @classmethod
    def real_line(cls) -> "Interval":
        return cls(-INF, INF, False, False)

    @classmethod
    def above(cls, t: float, inclusive: bool = False) -> "Interval":
        """``(t, inf)`` or ``[t, inf)``."""
        return cls(t, INF, inclusive, False)

    @classmethod
    def below(cls, t: float, inclusive: bool = True) -> "Interval":
        """``(-inf, t]`` or ``(-inf, t)``."""
        return cls(-INF, t, False, inclusive)

    @classmethod
    def point(cls, t: float) -> "Interval":
        return cls(t, t, True, True)

    @property
    def empty(self) -> bool:
        if self.lo > self.hi:
            return True
        if self.lo == self.hi:
            return not (self.lo_closed and self.hi_closed)
        return False

    def contains(self, x):
        x = np.asarray(x, dtype=float)
        left = x >= self.lo if self.lo_closed else x > self.lo
        right = x <= self.hi if self.hi_closed else x < self.hi
        return left & right

    def intersect(self, other: "Interval") -> "Interval":
        if self.lo > other.lo:
            lo, lo_c = self.lo, self.lo_closed
        elif self.lo < other.lo:
            lo, lo_c = other.lo, other.lo_closed
        else:
            lo, lo_c = self.lo, self.lo_closed and other.lo_closed
        if self.hi < other.hi:
            hi, hi_c = self.hi, self.hi_closed
        elif self.hi > other.hi:
            hi, hi_c = other.hi, other.hi_closed
        else:
            hi, hi_c = self.hi, self.hi_closed and other.hi_closed
        return Interval(lo, hi, lo_c, hi_c)

    def affine_preimage(self, loc: float, scale: float) -> "Interval":
        """``{x : loc + scale * x in self}`` for ``scale > 0``."""
        if scale <= 0:
            raise ValueError("scale must be positive")
        lo = (self.lo - loc) / scale if self.lo != -INF else -INF
        hi = (self.hi - loc) / scale if self.hi != INF else INF
        return Interval(lo, hi, self.lo_closed, self.hi_closed)

    def enlarge(self, eps: float) -> "Interval":
        """``{x : |x - y| <= eps for some y in self}``; endpoints keep their
        closedness since the nearest point of an open end is not in the set."""
        if self.empty:
            return self
        return Interval(self.lo - eps, self.hi + eps, self.lo_closed, self.hi_closed)

    def __repr__(self):
        left = "[" if self.lo_closed else "("
        right = "]" if self.hi_closed else ")"
        return f"{left}{self.lo:.12g}, {self.hi:.12g}{right}"


def normalize(intervals: Iterable[Interval]) -> List[Interval]:
    """Sort, drop empties and merge overlapping or touching intervals."""
    ivs = sorted((iv for iv in intervals if not iv.empty), key=lambda iv: (iv.lo, not iv.lo_closed))
    out: List[Interval] = []
    for iv in ivs:
        if out:
            last = out[-1]
            touching = iv.lo < last.hi or (iv.lo == last.hi and (iv.lo_closed or last.hi_closed))
            if touching:
                if iv.hi > last.hi or (iv.hi == last.hi and iv.hi_closed and not last.hi_closed):
                    out[-1] = Interval(last.lo, iv.hi, last.lo_closed, iv.hi_closed)
                continue
        out.append(iv)
    return out


def complement(intervals: Iterable[Interval]) -> List[Interval]:
    """Complement in the real line of a union of intervals."""
    out: List[Interval] = []
    cur_lo, cur_closed = -INF, False
    for iv in normalize(intervals):
        gap = Interval(cur_lo, iv.lo, cur_closed, not iv.lo_closed)
        if not gap.empty:
            out.append(gap)
        cur_lo, cur_closed = iv.hi, not iv.hi_closed
    tail = Interval(cur_lo, INF, cur_closed, False)
    if not tail.empty and not (cur_lo == INF):
        out.append(tail)
    return out


def intersect_all(a: Iterable[Interval], b: Iterable[Interval]) -> List[Interval]:
    b = list(b)
    return normalize(x.intersect(y) for x in a for y in b)


def is_partition(intervals: Iterable[Interval]) -> bool:
    """True when the intervals are pairwise disjoint and cover the real line."""
    ivs = sorted((iv for iv in intervals if not iv.empty), key=lambda iv: (iv.lo, not iv.lo_closed))
    if not ivs or ivs[0].lo != -INF:
        return False
    for left, right in zip(ivs, ivs[1:]):
        if left.hi != right.lo or left.hi_closed == right.lo_closed:
            return False
    return ivs[-1].hi == INF
