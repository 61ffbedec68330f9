import math
import random

import numpy as np
import pytest

from confrec.intervals import Interval, down, sum_down, sum_up, up


def test_point_and_width():
    iv = Interval(1.0, 2.0)
    assert iv.width == 1.0
    assert iv.mid == 1.5
    assert Interval.point(3.0).width == 0.0


def test_invalid_interval():
    with pytest.raises(ValueError):
        Interval(2.0, 1.0)
    with pytest.raises(ValueError):
        Interval(float("nan"), 1.0)


def test_rounding_helpers():
    assert down(1.0) < 1.0 < up(1.0)
    assert up(down(1.0)) == 1.0


def test_arithmetic_soundness_random():
    # exact real results (via Fraction) must stay inside the rounded intervals
    from fractions import Fraction

    rng = random.Random(1234)
    for _ in range(300):
        a = Fraction(rng.randint(-50, 50), rng.randint(1, 20))
        b = Fraction(rng.randint(-50, 50), rng.randint(1, 20))
        ia = Interval.point(float(a))
        ib = Interval.point(float(b))
        fa, fb = Fraction(float(a)), Fraction(float(b))
        assert (ia + ib).lo <= fa + fb <= (ia + ib).hi
        assert (ia - ib).lo <= fa - fb <= (ia - ib).hi
        assert (ia * ib).lo <= fa * fb <= (ia * ib).hi
        if fb != 0:
            q = fa / fb
            assert (ia / ib).lo <= q <= (ia / ib).hi


def test_division_by_zero_interval():
    with pytest.raises(ZeroDivisionError):
        Interval(1.0, 2.0) / Interval(-1.0, 1.0)


def test_pow_monotone():
    iv = Interval(0.25, 0.5)
    p = iv.pow(0.6309297535714574)
    assert p.lo <= 0.25**0.6309297535714574
    assert p.hi >= 0.5**0.6309297535714574
    with pytest.raises(ValueError):
        Interval(-1.0, 1.0).pow(0.5)


def test_distance():
    a = Interval(0.0, 1.0)
    b = Interval(2.0, 3.0)
    d = a.distance(b)
    assert d.lo <= 1.0 <= d.hi  # closest points 1 and 2
    assert d.hi >= 3.0  # farthest points 0 and 3
    overlapping = a.distance(Interval(0.5, 0.7))
    assert overlapping.lo == 0.0


def test_abs_square_log():
    assert Interval(-2.0, 1.0).abs().lo == 0.0
    sq = Interval(-2.0, 1.0).square()
    assert sq.lo == 0.0 and sq.hi >= 4.0
    lg = Interval(1.0, math.e).log()
    assert lg.lo <= 0.0 and lg.hi >= 1.0


def test_hull_encloses_intersect():
    a, b = Interval(0.0, 1.0), Interval(0.5, 2.0)
    h = Interval.hull(a, b)
    assert h.encloses(a) and h.encloses(b)
    assert a.intersects(b)
    assert a.intersect(b) == Interval(0.5, 1.0)
    with pytest.raises(ValueError):
        Interval(0.0, 1.0).intersect(Interval(2.0, 3.0))


def test_sum_bounds():
    rng = np.random.default_rng(7)
    arr = rng.random(10_000)
    lo, hi = sum_down(arr), sum_up(arr)
    assert lo <= float(np.sum(arr)) <= hi
    # directed error stays tiny relative to the sum
    assert hi - lo < 1e-8 * float(np.sum(arr))
