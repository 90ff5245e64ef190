import math

import numpy as np
import pytest

from riskrobust.intervals import INF, Interval, complement, intersect_all, is_partition, normalize


def test_infinite_endpoints_are_open():
    iv = Interval(-INF, INF, True, True)
    assert not iv.lo_closed and not iv.hi_closed


def test_contains_respects_closedness():
    iv = Interval(0.0, 1.0, False, True)
    assert list(iv.contains([0.0, 0.5, 1.0, 1.5])) == [False, True, True, False]


def test_point_and_empty():
    assert not Interval.point(2.0).empty
    assert Interval(1.0, 1.0, True, False).empty
    assert Interval(2.0, 1.0).empty


def test_intersect_keeps_the_tighter_end():
    a = Interval(0.0, 2.0, True, True)
    b = Interval(1.0, 3.0, False, False)
    iv = a.intersect(b)
    assert (iv.lo, iv.hi, iv.lo_closed, iv.hi_closed) == (1.0, 2.0, False, True)


def test_normalize_merges_touching_pieces():
    out = normalize([Interval(1.0, 2.0, False, True), Interval(0.0, 1.0, True, True), Interval(5.0, 6.0)])
    assert len(out) == 2
    assert (out[0].lo, out[0].hi) == (0.0, 2.0)


def test_normalize_keeps_a_missing_point_apart():
    out = normalize([Interval(0.0, 1.0, True, False), Interval(1.0, 2.0, False, True)])
    assert len(out) == 2


def test_complement_is_a_partition_with_the_original():
    ivs = [Interval(0.0, 1.0, True, False), Interval(2.0, 3.0, False, True)]
    assert is_partition(ivs + complement(ivs))


def test_complement_of_real_line_is_empty():
    assert complement([Interval.real_line()]) == []


def test_intersect_all():
    a = [Interval(0.0, 2.0), Interval(4.0, 6.0)]
    b = [Interval(1.0, 5.0)]
    out = intersect_all(a, b)
    assert [(iv.lo, iv.hi) for iv in out] == [(1.0, 2.0), (4.0, 5.0)]


def test_affine_preimage():
    iv = Interval(1.0, 3.0).affine_preimage(1.0, 2.0)
    assert (iv.lo, iv.hi) == (0.0, 1.0)
    with pytest.raises(ValueError):
        Interval(1.0, 3.0).affine_preimage(0.0, -1.0)


def test_enlarge_keeps_endpoint_closedness():
    iv = Interval.above(1.0).enlarge(0.5)
    assert iv.lo == 0.5 and not iv.lo_closed
    assert Interval.point(0.0).enlarge(0.1).contains(0.1)


def test_is_partition_detects_overlap_and_gaps():
    assert not is_partition([Interval.below(1.0), Interval.above(1.0, inclusive=True)])
    assert not is_partition([Interval.below(1.0), Interval.above(2.0)])
    assert is_partition([Interval.below(1.0), Interval.above(1.0)])
