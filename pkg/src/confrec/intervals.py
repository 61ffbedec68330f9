"""Outward-rounded interval arithmetic over binary64.

Every arithmetic operation rounds the result outward by one ulp per side,
so an Interval is always a certified enclosure of the exact real result,
assuming its operands were. The widening is invisible at the tolerances
used elsewhere (>= 1e-12) but makes containment checks sound.

A small set of directed-rounding helpers for numpy arrays lives at the
bottom; the vectorised enumeration code uses those instead of Interval
objects.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

_INF = math.inf


def down(x: float) -> float:
    """Next float toward -inf (identity on infinities)."""
    return math.nextafter(x, -_INF) if math.isfinite(x) else x


def up(x: float) -> float:
    """Next float toward +inf (identity on infinities)."""
    return math.nextafter(x, _INF) if math.isfinite(x) else x


@dataclass(frozen=True, slots=True)
class Interval:
    """Closed interval [lo, hi], lo <= hi."""

    lo: float
    hi: float

    def __post_init__(self):
        if math.isnan(self.lo) or math.isnan(self.hi) or self.lo > self.hi:
            raise ValueError(f"invalid interval [{self.lo}, {self.hi}]")

    @staticmethod
    def point(x: float) -> "Interval":
        return Interval(x, x)

    @staticmethod
    def hull(*members: "Interval") -> "Interval":
        return Interval(min(m.lo for m in members), max(m.hi for m in members))

    # -- geometry ----------------------------------------------------------

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def mid(self) -> float:
        return 0.5 * (self.lo + self.hi)

    def contains(self, x: float) -> bool:
        return self.lo <= x <= self.hi

    def encloses(self, other: "Interval") -> bool:
        return self.lo <= other.lo and other.hi <= self.hi

    def intersects(self, other: "Interval") -> bool:
        return self.lo <= other.hi and other.lo <= self.hi

    def intersect(self, other: "Interval") -> "Interval":
        lo, hi = max(self.lo, other.lo), min(self.hi, other.hi)
        if lo > hi:
            raise ValueError("empty intersection")
        return Interval(lo, hi)

    # -- arithmetic (outward rounded) --------------------------------------

    def __add__(self, other: "Interval | float") -> "Interval":
        o = _as_iv(other)
        return Interval(down(self.lo + o.lo), up(self.hi + o.hi))

    __radd__ = __add__

    def __sub__(self, other: "Interval | float") -> "Interval":
        o = _as_iv(other)
        return Interval(down(self.lo - o.hi), up(self.hi - o.lo))

    def __rsub__(self, other: float) -> "Interval":
        return _as_iv(other) - self

    def __neg__(self) -> "Interval":
        return Interval(-self.hi, -self.lo)

    def __mul__(self, other: "Interval | float") -> "Interval":
        o = _as_iv(other)
        cands = (self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi)
        return Interval(down(min(cands)), up(max(cands)))

    __rmul__ = __mul__

    def __truediv__(self, other: "Interval | float") -> "Interval":
        o = _as_iv(other)
        if o.lo <= 0.0 <= o.hi:
            raise ZeroDivisionError(f"division by interval containing 0: {o}")
        cands = (self.lo / o.lo, self.lo / o.hi, self.hi / o.lo, self.hi / o.hi)
        return Interval(down(min(cands)), up(max(cands)))

    def __rtruediv__(self, other: float) -> "Interval":
        return _as_iv(other) / self

    def abs(self) -> "Interval":
        if self.lo >= 0.0:
            return self
        if self.hi <= 0.0:
            return -self
        return Interval(0.0, max(-self.lo, self.hi))

    def square(self) -> "Interval":
        a = self.abs()
        lo = 0.0 if a.lo == 0.0 else down(a.lo * a.lo)
        return Interval(lo, up(a.hi * a.hi))

    def pow(self, s: float) -> "Interval":
        """self**s for a nonnegative interval; monotone in the base."""
        if self.lo < 0.0:
            raise ValueError("pow requires a nonnegative interval")
        if s >= 0.0:
            lo = 0.0 if self.lo == 0.0 and s > 0 else down(self.lo**s)
            return Interval(lo, up(self.hi**s))
        if self.lo == 0.0:
            raise ZeroDivisionError("negative power of interval touching 0")
        return Interval(down(self.hi**s), up(self.lo**s))

    def log(self) -> "Interval":
        if self.lo <= 0.0:
            raise ValueError("log requires a positive interval")
        return Interval(down(math.log(self.lo)), up(math.log(self.hi)))

    def distance(self, other: "Interval") -> "Interval":
        """Certified range of |u - v| over u in self, v in other."""
        lo = max(0.0, self.lo - other.hi, other.lo - self.hi)
        hi = max(self.hi - other.lo, other.hi - self.lo)
        return Interval(0.0 if lo == 0.0 else down(lo), up(hi))

    def inflate(self, margin: float) -> "Interval":
        if margin < 0:
            raise ValueError("margin must be nonnegative")
        return Interval(down(self.lo - margin), up(self.hi + margin))

    def __repr__(self) -> str:  # compact, round-trippable enough for logs
        return f"[{self.lo!r}, {self.hi!r}]"


def _as_iv(x: "Interval | float") -> Interval:
    return x if isinstance(x, Interval) else Interval.point(float(x))


# -- numpy directed-rounding helpers --------------------------------------

_EPS = np.finfo(np.float64).eps


def bump_down(a: np.ndarray) -> np.ndarray:
    return np.nextafter(a, -np.inf)


def bump_up(a: np.ndarray) -> np.ndarray:
    return np.nextafter(a, np.inf)


def sum_down(a: np.ndarray) -> float:
    """Lower bound for the exact sum of the array entries."""
    s = float(np.sum(a))
    err = _EPS * len(a) * float(np.sum(np.abs(a)))
    return down(s - err)


def sum_up(a: np.ndarray) -> float:
    """Upper bound for the exact sum of the array entries."""
    s = float(np.sum(a))
    err = _EPS * len(a) * float(np.sum(np.abs(a)))
    return up(s + err)
