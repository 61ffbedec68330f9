"""Dimension exponent: the zero of the pressure function.

For similarity systems the exponent solves the Moran equation
sum_i r_i^s = 1 exactly and bisection delivers machine-precision
enclosures. Otherwise we bracket the pressure zero between finite-depth
bounds:

    upper:  P(s) <= (1/n) log sum_{|I|=n} (sup_V |phi_I'|)^s
            (subadditive since every map keeps V invariant)
    lower:  P(s) >= (1/n) log sum_{|I|=n} (inf_hull |phi_I'|)^s
            (superadditive since every map keeps the hull invariant)

Both sums use certified per-word derivative bounds, so the returned
gamma interval always contains the true exponent; its width at depth n
is governed by the distortion of depth-n words, not by rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import BracketError, ValidationError
from .ifs import IFSSpec, partition_sum_bounds
from .intervals import Interval, down, up


@dataclass(frozen=True)
class PressureEstimate:
    s: float
    depth: int
    value_upper: float
    value_lower: float
    partition_sum: Interval


@dataclass(frozen=True)
class GammaResult:
    gamma: Interval
    method: str  # "moran" | "pressure"
    depth_used: int


def pressure_estimate(ifs: IFSSpec, s: float, depth: int) -> PressureEstimate:
    if s < 0:
        raise ValidationError("pressure exponent s must be >= 0")
    if depth < 1:
        raise ValidationError("pressure depth must be >= 1")
    psb = partition_sum_bounds(ifs, depth, s)
    if ifs.is_similarity:
        val = math.log(psb["ps_hi"]) / depth
        return PressureEstimate(s, depth, val, val, Interval(psb["ps_lo"], psb["ps_hi"]))
    vu = up(up(math.log(psb["ps_hi"])) / depth)
    vl = down(down(math.log(psb["lower_sum"])) / depth)
    return PressureEstimate(s, depth, vu, vl, Interval(psb["ps_lo"], psb["ps_hi"]))


def _bisect_decreasing(f, lo: float, hi: float, tol: float, max_iter: int = 200):
    """Bracketed bisection for a decreasing f with f(lo) > 0 >= f(hi)."""
    for _ in range(max_iter):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        if f(mid) > 0:
            lo = mid
        else:
            hi = mid
    return lo, hi


def moran_gamma(ratios, tol: float = 1e-14) -> Interval:
    """Root of sum_i r_i^s = 1, bracketed to width <= tol."""
    ratios = tuple(float(r) for r in ratios)
    if any(not (0.0 < r < 1.0) for r in ratios):
        raise ValidationError("contraction violated: similarity ratios must lie in (0,1)")

    def g(s: float) -> float:
        return sum(r**s for r in ratios) - 1.0

    hi = 1.0
    while g(hi) > 0:
        hi *= 2.0
        if hi > 64:
            raise BracketError("Moran equation has no root below s = 64")
    lo, hi = _bisect_decreasing(g, 0.0, hi, tol)
    return Interval(lo, hi)


def solve_gamma(ifs: IFSSpec, tol: float = 1e-12, depth: int = 10) -> GammaResult:
    """Certified enclosure of the exponent gamma with P(gamma) = 0.

    Similarity systems take the exact Moran path; otherwise both pressure
    bounds are bisected at the given depth and the bracket endpoints keep
    the signs value_lower(gamma.lo) >= 0 >= value_upper(gamma.hi).
    """
    if tol <= 0:
        raise ValidationError("tolerance must be positive")
    if ifs.is_similarity:
        return GammaResult(moran_gamma(ifs.ratios(), min(tol, 1e-13)), "moran", 0)

    est_cache: dict[float, PressureEstimate] = {}

    def est(s: float) -> PressureEstimate:
        if s not in est_cache:
            est_cache[s] = pressure_estimate(ifs, s, depth)
        return est_cache[s]

    hi = 1.0
    while est(hi).value_upper > 0:
        hi *= 2.0
        if hi > 64:
            raise BracketError(f"pressure upper bound still positive at s = {hi}")
    if est(0.0).value_lower <= 0:
        raise BracketError("pressure lower bound not positive at s = 0; depth insufficient")

    g_lo, _ = _bisect_decreasing(lambda s: est(s).value_lower, 0.0, hi, tol / 4)
    _, g_hi = _bisect_decreasing(lambda s: est(s).value_upper, 0.0, hi, tol / 4)
    if g_lo > g_hi:
        raise BracketError("pressure bounds crossed; depth insufficient")
    return GammaResult(Interval(g_lo, g_hi), "pressure", depth)


def partition_sum_check(ifs: IFSSpec, gamma: float, depths) -> list[Interval]:
    """Certified sums over depth-n words of ||phi_I'||^gamma, one per depth."""
    out = []
    for n in depths:
        psb = partition_sum_bounds(ifs, int(n), gamma)
        out.append(Interval(psb["ps_lo"], psb["ps_hi"]))
    return out
