"""Coding space dynamics: the shift map, measure sampling, recurrence verdicts.

Points are handled purely through finite coding prefixes: a coding of
length L pins the point to its depth-L cylinder box, and the shifted
point to a depth-(L-n) box. The distance |T^n x - x| is therefore known
only as an interval, and every verdict is sound:

    HIT   certified  gap.hi <  phi(n)
    MISS  certified  gap.lo >= phi(n)
    UNKNOWN          the enclosure straddles phi(n)  (truncation artifact)

Digit sampling uses the counter-based generator in :mod:`confrec.philox`
with one stream per sample index, so results are reproducible and
independent of chunking or thread count. For similarity systems with
block length 1 the digit law p_i = r_i^gamma is the exact natural
measure; otherwise blocks of length b are drawn i.i.d. with probability
proportional to the block's derivative sup-norm raised to gamma.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ValidationError
from .ifs import IFSSpec, eval_pi, level_ranges
from .intervals import Interval, bump_down, bump_up
from .philox import TAG_BLOCKS, categorical_matrix
from .rates import RateFunction
from .words import Word

HIT = "HIT"
MISS = "MISS"
UNKNOWN = "UNKNOWN"


@dataclass(frozen=True)
class CodingSample:
    digits: Word
    weight_exponent: float
    seed: int


@dataclass(frozen=True)
class HitVerdict:
    n: int
    verdict: str
    gap: Interval


@dataclass(frozen=True)
class OrbitResult:
    verdicts: tuple[HitVerdict, ...]

    @property
    def unknown_count(self) -> int:
        return sum(1 for v in self.verdicts if v.verdict == UNKNOWN)

    @property
    def hit_times(self) -> tuple[int, ...]:
        return tuple(v.n for v in self.verdicts if v.verdict == HIT)


def shift(coding: Word, n: int = 1) -> Word:
    """Drop the first n symbols of the coding."""
    if len(coding) < 1:
        raise ValidationError("cannot shift an empty coding")
    return coding.shift(n)


def block_distribution(ifs: IFSSpec, gamma: float, block: int) -> np.ndarray:
    """Sampling law over blocks in D^b: weight ||phi_I'||_hi^gamma, normalised."""
    if block < 1:
        raise ValidationError("block length must be >= 1")
    r = level_ranges(ifs, block)
    w = r.sup_hi**gamma
    return w / w.sum()


def sample_digit_matrix(
    ifs: IFSSpec,
    gamma: float,
    depth: int,
    count: int,
    seed: int,
    block: int = 1,
    start: int = 0,
) -> np.ndarray:
    """(count, depth) digit matrix drawn in i.i.d. blocks of length `block`."""
    if depth < 1 or count < 1:
        raise ValidationError("depth and count must be positive")
    if depth % block != 0:
        raise ValidationError(f"depth {depth} not divisible by block {block}")
    probs = block_distribution(ifs, gamma, block)
    ids = categorical_matrix(seed, count, depth // block, probs, TAG_BLOCKS, start)
    if block == 1:
        return ids.astype(np.uint16)
    # decode block ids to symbols, most significant digit first
    k = ifs.alphabet_size
    out = np.empty((count, depth), dtype=np.uint16)
    for pos in range(block):
        shift_pow = k ** (block - 1 - pos)
        out[:, pos::block] = (ids // shift_pow) % k
    return out


def sample_codings(
    ifs: IFSSpec,
    gamma: float,
    depth: int,
    count: int,
    seed: int,
    block: int = 1,
) -> list[CodingSample]:
    digits = sample_digit_matrix(ifs, gamma, depth, count, seed, block)
    return [CodingSample(Word(row), gamma, seed) for row in digits]


# ---------------------------------------------------------------------------
# certified enclosures along a coding


def suffix_enclosures(ifs: IFSSpec, digits: np.ndarray):
    """Cylinder boxes of every suffix: columns j = 0..L enclose X_{d_j..d_{L-1}}.

    Returns (lo, hi) arrays of shape (N, L+1); column L is the hull.
    """
    if ifs.dim != 1:
        raise ValidationError("vectorised orbit analysis supports dimension 1 only")
    digits = np.asarray(digits)
    n, length = digits.shape
    lo = np.empty((n, length + 1))
    hi = np.empty((n, length + 1))
    lo[:, length] = ifs.hull.lo
    hi[:, length] = ifs.hull.hi
    for j in range(length - 1, -1, -1):
        col = digits[:, j]
        cur_lo, cur_hi = lo[:, j + 1], hi[:, j + 1]
        out_lo, out_hi = lo[:, j], hi[:, j]
        for sym in range(ifs.alphabet_size):
            mask = col == sym
            if not mask.any():
                continue
            nlo, nhi = ifs.maps[sym].apply_vec(cur_lo[mask], cur_hi[mask])
            out_lo[mask] = nlo
            out_hi[mask] = nhi
    return lo, hi


def gap_bounds(ifs: IFSSpec, digits: np.ndarray, n_max: int):
    """Certified |T^n x - x| ranges for n = 1..n_max, per sample.

    Returns (gap_lo, gap_hi) of shape (N, n_max); column n-1 is time n.
    """
    digits = np.asarray(digits)
    if n_max >= digits.shape[1]:
        raise ValidationError("n_max must be smaller than the coding depth")
    lo, hi = suffix_enclosures(ifs, digits)
    a_lo, a_hi = lo[:, [0]], hi[:, [0]]
    b_lo, b_hi = lo[:, 1 : n_max + 1], hi[:, 1 : n_max + 1]
    g_lo = np.maximum(bump_down(a_lo - b_hi), bump_down(b_lo - a_hi))
    g_lo = np.maximum(g_lo, 0.0)
    g_hi = np.maximum(bump_up(a_hi - b_lo), bump_up(b_hi - a_lo))
    return g_lo, g_hi


def classify_recurrence_event(
    ifs: IFSSpec, coding: Word, n: int, phi: RateFunction
) -> HitVerdict:
    """Sound verdict for |T^n x - x| < phi(n) from a finite coding."""
    if not (1 <= n < len(coding)):
        raise ValidationError(f"need 1 <= n < coding length, got n={n}, L={len(coding)}")
    a = eval_pi(ifs, coding)
    b = eval_pi(ifs, shift(coding, n))
    gap = a.distance(b)
    threshold = phi.phi(n)
    if gap.hi < threshold:
        return HitVerdict(n, HIT, gap)
    if gap.lo >= threshold:
        return HitVerdict(n, MISS, gap)
    return HitVerdict(n, UNKNOWN, gap)


def orbit_hits(ifs: IFSSpec, coding: Word, phi: RateFunction, n_max: int) -> OrbitResult:
    """Verdicts for n = 1..n_max along one coding."""
    if n_max < 1 or n_max >= len(coding):
        raise ValidationError("need 1 <= n_max < coding length")
    if ifs.dim == 1:
        digits = np.array([tuple(coding)], dtype=np.uint16)
        g_lo, g_hi = gap_bounds(ifs, digits, n_max)
        verdicts = []
        for n in range(1, n_max + 1):
            gap = Interval(float(g_lo[0, n - 1]), float(g_hi[0, n - 1]))
            threshold = phi.phi(n)
            if gap.hi < threshold:
                verdicts.append(HitVerdict(n, HIT, gap))
            elif gap.lo >= threshold:
                verdicts.append(HitVerdict(n, MISS, gap))
            else:
                verdicts.append(HitVerdict(n, UNKNOWN, gap))
        return OrbitResult(tuple(verdicts))
    return OrbitResult(
        tuple(classify_recurrence_event(ifs, coding, n, phi) for n in range(1, n_max + 1))
    )


# ---------------------------------------------------------------------------
# Monte Carlo recurrence experiment


@dataclass(frozen=True)
class DichotomyData:
    """Aggregated hit statistics for one rate function."""

    n_values: np.ndarray       # (n_max,)
    hit_rate: np.ndarray       # definite hits / count
    unknown_rate: np.ndarray
    phi_gamma: np.ndarray
    rate_ratio: np.ndarray     # hit_rate / phi_gamma
    hit_count: np.ndarray      # (count,) definite hits per sample
    first_hit: np.ndarray      # (count,) smallest hit time, -1 if none
    hits: np.ndarray           # (count, n_max) definite-hit indicator
    count: int
    seed: int
    depth: int
    divergent: Optional[bool]

    @property
    def unknown_fraction(self) -> float:
        return float(np.mean(self.unknown_rate))

    def cumulative_mean_hits(self) -> np.ndarray:
        return np.cumsum(self.hit_rate)

    def fraction_with_hit(self, n_lo: int, n_hi: int) -> float:
        """Fraction of samples with a definite hit somewhere in [n_lo, n_hi]."""
        return float(np.mean(self.hits[:, n_lo - 1 : n_hi].any(axis=1)))


def recurrence_mc(
    ifs: IFSSpec,
    gamma: float,
    phi: RateFunction,
    count: int,
    n_max: int,
    depth: int,
    seed: int,
    block: int = 1,
    threads: int = 1,
) -> DichotomyData:
    """Sample `count` codings and classify recurrence at every n <= n_max.

    Work is chunked over sample blocks; per-sample RNG streams make the
    result identical for any chunking or thread count.
    """
    if depth <= n_max:
        raise ValidationError("coding depth must exceed n_max")

    chunk = 4096
    spans = [(start, min(chunk, count - start)) for start in range(0, count, chunk)]

    def work(span):
        start, cnt = span
        digits = sample_digit_matrix(ifs, gamma, depth, cnt, seed, block, start=start)
        return gap_bounds(ifs, digits, n_max)

    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(work, spans))
    else:
        parts = [work(span) for span in spans]
    g_lo = np.vstack([p[0] for p in parts])
    g_hi = np.vstack([p[1] for p in parts])
    thresholds = np.array([phi.phi(n) for n in range(1, n_max + 1)])
    hits = g_hi < thresholds[None, :]
    misses = g_lo >= thresholds[None, :]
    unknowns = ~(hits | misses)

    phig = np.array([phi.phi_gamma(n) for n in range(1, n_max + 1)])
    hit_rate = hits.mean(axis=0)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(phig > 0, hit_rate / phig, np.nan)

    hit_count = hits.sum(axis=1).astype(np.int64)
    first = np.where(hits.any(axis=1), hits.argmax(axis=1) + 1, -1).astype(np.int64)

    return DichotomyData(
        n_values=np.arange(1, n_max + 1),
        hit_rate=hit_rate,
        unknown_rate=unknowns.mean(axis=0),
        phi_gamma=phig,
        rate_ratio=ratio,
        hit_count=hit_count,
        first_hit=first,
        hits=hits,
        count=count,
        seed=seed,
        depth=depth,
        divergent=phi.diverges(),
    )
