"""Recurrence-carrying cylinder families and their exact measures.

For a length-n word I, the orbit of any point whose coding starts with
the periodic extension I^{k+1}(i_1..i_s) returns within phi(n) of itself
at time n, provided the cylinder of the prefix I^k(i_1..i_s) fits inside
the ball of radius phi(n)/2 around the fixed point of phi_I: shifting by
n strips one period, so both x and T^n x land in that prefix cylinder,
and the triangle inequality through the fixed point closes the gap.

build_En assembles one such target cylinder per base word (optionally
restricted to base words extending a root J), certifies the containment
with interval boxes, and sums the exact normalised measures; the targets
of distinct base words differ inside their first n symbols, hence are
prefix-incomparable and their measures add.

Measures are the normalised natural measure nu = H^gamma|_X / H^gamma(X):
for similarity systems with the open set condition nu of a cylinder is
the exact product of r_i^gamma over its symbols; otherwise an interval
proxy ||phi_I'||^gamma / (depth-|I| partition sum) is used.

The second-moment machinery assembles S = sum nu(E_n) and
S2 = sum nu(E_n cap E_m) (pairwise intersections via the prefix rule on
a trie) into the Chung-Erdos lower bound S^2/S2 for the measure of the
union, and the covering side sums (2K ||phi_I'|| phi(n))^gamma over the
level, with K = 1/(1 - r_max) from the inverse-branch expansion bound.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import BudgetError, ConfrecError, ValidationError
from .ifs import (
    IFSSpec,
    _ARRAY_CAP,
    compose_word,
    derivative_min_bounds,
    derivative_norm_bounds,
    fixed_point,
    level_ranges,
    partition_sum_bounds,
)
from .dynamics import gap_bounds
from .intervals import Interval
from .philox import TAG_DIGITS, TAG_POINTS, categorical_matrix
from .rates import RateFunction
from .words import EMPTY_WORD, Word

_MAX_PREFIX_SYMBOLS = 10_000


# ---------------------------------------------------------------------------
# measures


def nu_cylinder(ifs: IFSSpec, gamma: float, word: Word) -> Interval:
    """Normalised natural measure of the cylinder X_word.

    Exact product path for similarity systems declaring the open set
    condition; certified interval proxy otherwise. Without the OSC flag
    the exact semantics are refused: the proxy is returned and a warning
    is emitted, since cylinder measures need not be multiplicative.
    """
    word.validate(ifs.alphabet_size)
    if len(word) == 0:
        return Interval.point(1.0)
    if not ifs.osc_declared:
        warnings.warn(
            "open set condition not declared: returning comparability bounds, "
            "not exact cylinder measures",
            stacklevel=2,
        )
    if ifs.is_similarity and ifs.osc_declared:
        p = 1.0
        for s in word:
            p *= ifs.maps[s].ratio ** gamma
        return Interval.point(p)
    num = derivative_norm_bounds(ifs, word).pow(gamma)
    lo_num = derivative_min_bounds(ifs, word).pow(gamma)
    norm = _partition_interval(ifs, gamma, len(word))
    return Interval(
        (Interval(lo_num.lo, lo_num.lo) / norm.hi).lo,
        (Interval(num.hi, num.hi) / norm.lo).hi,
    )


def _partition_interval(ifs: IFSSpec, gamma: float, depth: int) -> Interval:
    """Two-sided partition-sum bounds at any depth.

    Levels up to 4x the in-memory cap are enumerated exactly (streamed in
    chunks); deeper levels are decomposed as q*d0 + r, where the
    sub/super-multiplicativity of the sup/inf norms turns cached shallow
    sums into valid (wider) bounds.
    """
    cache = ifs._cache.setdefault("partition", {})
    key = (gamma, depth)
    if key in cache:
        return cache[key]
    max_direct = int(math.log(4 * _ARRAY_CAP, ifs.alphabet_size))
    if ifs.is_similarity or depth <= max_direct:
        psb = partition_sum_bounds(ifs, depth, gamma)
        out = Interval(min(psb["lower_sum"], psb["ps_lo"]), psb["ps_hi"])
    else:
        d0 = max_direct
        q, r = divmod(depth, d0)
        base = partition_sum_bounds(ifs, d0, gamma)
        up_iv = Interval(base["ps_hi"], base["ps_hi"])
        lo_iv = Interval(base["lower_sum"], base["lower_sum"])
        acc_hi = Interval.point(1.0)
        acc_lo = Interval.point(1.0)
        for _ in range(q):
            acc_hi = acc_hi * up_iv
            acc_lo = acc_lo * lo_iv
        if r:
            rest = partition_sum_bounds(ifs, r, gamma)
            acc_hi = acc_hi * Interval(rest["ps_hi"], rest["ps_hi"])
            acc_lo = acc_lo * Interval(rest["lower_sum"], rest["lower_sum"])
        out = Interval(acc_lo.lo, acc_hi.hi)
    cache[key] = out
    return out


# ---------------------------------------------------------------------------
# inner cylinders and the families E_n


@dataclass(frozen=True)
class InnerCylinder:
    base_word: Word      # I, length n
    k: int
    s: int
    prefix_word: Word    # I^k (i_1..i_s), certified inside B(fix(I), rho)
    target_word: Word    # I^{k+1} (i_1..i_s): one extra period
    nu_target: Interval


@dataclass(frozen=True)
class EnFamily:
    n: int
    root: Word
    members: tuple[InnerCylinder, ...]
    nu_measure: Interval


def find_inner_cylinder(ifs: IFSSpec, base: Word, rho: float) -> InnerCylinder:
    """Minimal periodic-prefix cylinder of I^infty inside B(fix(I), rho).

    The prefix grows one symbol at a time along the periodic coding until
    the interval box certifiably fits the ball; the target word inserts
    one extra full period after the prefix period count.
    """
    if len(base) == 0:
        raise ValidationError("inner cylinder needs a nonempty base word")
    base.validate(ifs.alphabet_size)
    if not (0.0 < rho < ifs.diam.hi):
        raise ValidationError(f"ball radius {rho} must lie in (0, Diam(X))")
    if rho < 1e-280:
        raise BudgetError(f"ball radius {rho} below certifiable float resolution")

    n = len(base)
    fp_tol = max(1e-15, min(1e-12, rho * 1e-6))
    fp = fixed_point(ifs, base, fp_tol)

    comp = compose_word(ifs, EMPTY_WORD)
    box = ifs.hull
    m = 0
    while m <= _MAX_PREFIX_SYMBOLS:
        if box.distance(fp).hi <= rho:
            k, s = divmod(m, n)
            prefix = base.periodic_prefix(m)
            target = base.periodic_prefix(m + n)
            return InnerCylinder(base, k, s, prefix, target, Interval.point(0.0))
        sym = base[m % n]
        comp = comp.extend(ifs.maps[sym])
        box = comp.apply_iv(ifs.hull)
        m += 1
    raise BudgetError(
        f"containment not certified within {_MAX_PREFIX_SYMBOLS} prefix symbols "
        f"(rho = {rho}); radius too small for the budget"
    )


def _with_measure(ifs: IFSSpec, gamma: float, ic: InnerCylinder) -> InnerCylinder:
    return InnerCylinder(
        ic.base_word, ic.k, ic.s, ic.prefix_word, ic.target_word,
        nu_cylinder(ifs, gamma, ic.target_word),
    )


def build_En(
    ifs: IFSSpec,
    gamma: float,
    phi: RateFunction,
    n: int,
    root: Word = EMPTY_WORD,
) -> EnFamily:
    """One inner cylinder per base word I in D^n extending the root."""
    if n < 1:
        raise ValidationError("level n must be >= 1")
    root.validate(ifs.alphabet_size)
    if n < len(root):
        raise ValidationError(f"level {n} shorter than root {root}")
    n_words = ifs.alphabet_size ** (n - len(root))
    ifs.check_budget(n_words)

    rho = phi.phi(n) / 2.0
    members = []
    for suffix in itertools.product(range(ifs.alphabet_size), repeat=n - len(root)):
        base = root + Word(suffix)
        ic = find_inner_cylinder(ifs, base, rho)
        members.append(_with_measure(ifs, gamma, ic))

    _assert_prefix_incomparable([m.target_word for m in members])
    nu = Interval.point(0.0)
    for m in members:
        nu = nu + m.nu_target
    return EnFamily(n, root, tuple(members), nu)


def _assert_prefix_incomparable(words: Sequence[Word]) -> None:
    ordered = sorted(words, key=lambda w: w.symbols)
    for a, b in zip(ordered, ordered[1:]):
        if a.is_prefix_of(b):
            raise ConfrecError(
                f"target words are prefix-comparable: {a} <= {b}; measures would not add"
            )


# ---------------------------------------------------------------------------
# series and second moments


@dataclass(frozen=True)
class EnSeries:
    root: Word
    nu_root: Interval
    families: tuple[EnFamily, ...]
    ratios: tuple[tuple[int, Interval], ...]  # (Q', cumulative ratio)


def en_series(
    ifs: IFSSpec, gamma: float, phi: RateFunction, root: Word, q_max: int,
    threads: int = 1,
) -> EnSeries:
    n0 = max(1, len(root))
    if q_max < n0:
        raise ValidationError(f"Q = {q_max} below the first level {n0}")
    ifs.check_budget(ifs.alphabet_size ** (q_max - len(root)))  # deepest level
    nu_root = nu_cylinder(ifs, gamma, root)
    levels = range(n0, q_max + 1)
    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            families = tuple(
                pool.map(lambda n: build_En(ifs, gamma, phi, n, root), levels)
            )
    else:
        families = tuple(build_En(ifs, gamma, phi, n, root) for n in levels)
    ratios = []
    cum_nu = Interval.point(0.0)
    cum_pg = 0.0
    for fam in families:
        cum_nu = cum_nu + fam.nu_measure
        cum_pg += phi.phi_gamma(fam.n)
        ratios.append((fam.n, cum_nu / (nu_root * cum_pg)))
    return EnSeries(root, nu_root, families, tuple(ratios))


def series_ratio(
    ifs: IFSSpec, gamma: float, phi: RateFunction, root: Word, q_max: int
) -> list[tuple[int, Interval]]:
    """Cumulative sum of nu(E_n) against nu(X_root) * partial phi^gamma sums."""
    return list(en_series(ifs, gamma, phi, root, q_max).ratios)


class _Trie:
    __slots__ = ("children", "terminal", "subtree")

    def __init__(self):
        self.children: dict[int, _Trie] = {}
        self.terminal: Optional[Interval] = None
        self.subtree = Interval.point(0.0)

    def insert(self, word: Word, measure: Interval) -> None:
        node = self
        node.subtree = node.subtree + measure
        for sym in word:
            node = node.children.setdefault(sym, _Trie())
            node.subtree = node.subtree + measure
        if node.terminal is not None:
            raise ConfrecError(f"duplicate target word {word}")
        node.terminal = measure


def pairwise_intersection(
    ifs: IFSSpec, gamma: float, fam_a: EnFamily, fam_b: EnFamily
) -> Interval:
    """Exact nu(E_n cap E_m) by the prefix rule.

    Two target cylinders meet in positive measure iff one word is a
    prefix of the other, contributing the longer word's measure.
    """
    if fam_a.root != fam_b.root:
        raise ValidationError("families must share their root")
    trie = _Trie()
    for member in fam_a.members:
        trie.insert(member.target_word, member.nu_target)

    total = Interval.point(0.0)
    for member in fam_b.members:
        node = trie
        ancestor = None
        for depth, sym in enumerate(member.target_word):
            if node.terminal is not None:
                ancestor = node.terminal  # an A-target is a proper prefix of b
                break
            node = node.children.get(sym)
            if node is None:
                break
        else:
            # consumed all of b inside the trie
            if node.terminal is not None:
                total = total + member.nu_target  # equal words
                extra = node.subtree - node.terminal
            else:
                extra = node.subtree
            total = total + extra  # A-targets strictly extending b
            continue
        if ancestor is not None:
            total = total + member.nu_target
    return Interval(max(0.0, total.lo), max(0.0, total.hi))


@dataclass(frozen=True)
class SecondMomentReport:
    Q: int
    S: Interval
    S2: Interval
    ce_lower: Interval
    kappa: float
    s_tilde: float          # sum of phi(n)^gamma over the window
    c_fit: float            # S2 <= c_fit * nu(root) * (s_tilde + s_tilde^2)
    nu_root: Interval


def chung_erdos_lower(S: Interval, S2: Interval) -> Interval:
    """S^2 / S2 lower bound for the measure of the union."""
    return S.square() / S2


def second_moment_series(
    ifs: IFSSpec, gamma: float, phi: RateFunction, root: Word, q_max: int,
    threads: int = 1,
) -> list[SecondMomentReport]:
    """Incremental Chung-Erdos reports for every Q' up to q_max."""
    series = en_series(ifs, gamma, phi, root, q_max, threads=threads)
    fams = series.families
    kappa = max(ifs.map_deriv_sup(i).hi for i in range(ifs.alphabet_size)) ** gamma

    pair_cache: dict[tuple[int, int], Interval] = {}

    def pair(i: int, j: int) -> Interval:
        key = (min(i, j), max(i, j))
        if key not in pair_cache:
            pair_cache[key] = pairwise_intersection(ifs, gamma, fams[key[0]], fams[key[1]])
        return pair_cache[key]

    out = []
    S = Interval.point(0.0)
    S2 = Interval.point(0.0)
    s_tilde = 0.0
    for idx, fam in enumerate(fams):
        S = S + fam.nu_measure
        s_tilde += phi.phi_gamma(fam.n)
        S2 = S2 + fam.nu_measure  # diagonal: nu(E_n cap E_n)
        for prev in range(idx):
            S2 = S2 + pair(prev, idx) * 2.0
        ce = chung_erdos_lower(S, S2)
        denom = series.nu_root.lo * (s_tilde + s_tilde**2)
        c_fit = S2.hi / denom if denom > 0 else math.inf
        out.append(
            SecondMomentReport(fam.n, S, S2, ce, kappa, s_tilde, c_fit, series.nu_root)
        )
    return out


def second_moment_report(
    ifs: IFSSpec, gamma: float, phi: RateFunction, root: Word, q_max: int
) -> SecondMomentReport:
    return second_moment_series(ifs, gamma, phi, root, q_max)[-1]


# ---------------------------------------------------------------------------
# covering side


def covering_constant(ifs: IFSSpec) -> Interval:
    """K with |x - fix(I)| <= K ||phi_I'|| phi(n) on the time-n hit set.

    The inverse branch expands distances by at least ||phi_I'||^{-1}
    (mean value bound), so the hit-set radius phi(n)/(||phi_I'||^{-1}-1)
    is at most K ||phi_I'|| phi(n) with K = 1/(1 - r_max).
    """
    r_max = Interval.point(ifs.r_max)
    if r_max.hi >= 1.0:
        raise ValidationError("covering constant undefined: r_max >= 1")
    return 1.0 / (1.0 - r_max)


def covering_terms(
    ifs: IFSSpec, gamma: float, phi: RateFunction, n_start: int, span: int
) -> list[tuple[int, Interval]]:
    """Per-level covering sums (2K phi(n))^gamma * sum_I ||phi_I'||^gamma."""
    if n_start < 1 or span < 0:
        raise ValidationError("need n_start >= 1 and span >= 0")
    two_k_pow = (covering_constant(ifs) * 2.0).pow(gamma)
    terms = []
    for n in range(n_start, n_start + span + 1):
        ps = _partition_interval(ifs, gamma, n)
        terms.append((n, two_k_pow * phi.phi_gamma(n) * ps))
    return terms


def covering_tail(
    ifs: IFSSpec, gamma: float, phi: RateFunction, n_start: int, span: int
) -> Interval:
    total = Interval.point(0.0)
    for _, term in covering_terms(ifs, gamma, phi, n_start, span):
        total = total + term
    return total


# ---------------------------------------------------------------------------
# system constants (recorded in reports)


@dataclass(frozen=True)
class SystemConstants:
    r_max: float
    r_min: float
    covering_k: float       # upper end of the certified K interval
    kappa: float            # per-symbol measure decay max_i r_i^gamma
    c_low: float            # distortion floor: |phi_I(x)-phi_I(y)| >= c_low*hi_I*|x-y|


def system_constants(ifs: IFSSpec, gamma: float) -> SystemConstants:
    c_low = 1.0
    for length in (1, 2):
        for word in itertools.product(range(ifs.alphabet_size), repeat=length):
            w = Word(word)
            lo = derivative_min_bounds(ifs, w).lo
            hi = derivative_norm_bounds(ifs, w).hi
            c_low = min(c_low, lo / hi)
    kappa = max(ifs.map_deriv_sup(i).hi for i in range(ifs.alphabet_size)) ** gamma
    return SystemConstants(
        r_max=ifs.r_max,
        r_min=ifs.r_min,
        covering_k=covering_constant(ifs).hi,
        kappa=kappa,
        c_low=c_low,
    )


# ---------------------------------------------------------------------------
# Monte Carlo membership oracle


def _prefix_codes(digits: np.ndarray, lengths: Sequence[int], alphabet: int):
    """Base-|D| codes of the digit prefixes at each requested length."""
    max_len = max(lengths)
    if alphabet**max_len > 2**62:
        raise BudgetError(f"prefix codes overflow uint64 at length {max_len}")
    want = set(lengths)
    codes = {}
    run = np.zeros(digits.shape[0], dtype=np.uint64)
    for j in range(max_len):
        run = run * np.uint64(alphabet) + digits[:, j].astype(np.uint64)
        if j + 1 in want:
            codes[j + 1] = run.copy()
    return codes


def _word_code(word: Word, alphabet: int) -> int:
    code = 0
    for sym in word:
        code = code * alphabet + sym
    return code


def mc_family_indicators(
    ifs: IFSSpec,
    gamma: float,
    families: Sequence[EnFamily],
    count: int,
    seed: int,
) -> dict:
    """Monte Carlo membership of sampled points in each family's union.

    Sampling follows the natural digit law (exact for similarity systems
    with the open set condition). Returns per-family boolean indicator
    arrays plus the sampled count; callers derive frequencies and
    binomial standard errors.
    """
    if not families:
        raise ValidationError("need at least one family")
    probs = _digit_probs(ifs, gamma)
    max_len = max(len(m.target_word) for f in families for m in f.members)
    digits = categorical_matrix(seed, count, max_len, probs, TAG_DIGITS)
    lengths = sorted({len(m.target_word) for f in families for m in f.members})
    codes = _prefix_codes(digits, lengths, ifs.alphabet_size)

    out = {}
    for fam in families:
        ind = np.zeros(count, dtype=bool)
        by_len: dict[int, list[int]] = {}
        for m in fam.members:
            by_len.setdefault(len(m.target_word), []).append(
                _word_code(m.target_word, ifs.alphabet_size)
            )
        for length, word_codes in by_len.items():
            ind |= np.isin(codes[length], np.array(word_codes, dtype=np.uint64))
        out[fam.n] = ind
    return {"indicators": out, "count": count}


def _digit_probs(ifs: IFSSpec, gamma: float) -> np.ndarray:
    r = level_ranges(ifs, 1)
    w = r.sup_hi**gamma
    return w / w.sum()


# ---------------------------------------------------------------------------
# point-level certificate verification


@dataclass(frozen=True)
class CertificateReport:
    n: int
    checked: int
    hits: int
    misses: int
    unknowns: int


def verify_recurrence_certificates(
    ifs: IFSSpec,
    gamma: float,
    family: EnFamily,
    phi: RateFunction,
    samples: int = 100,
    seed: int = 0,
    margin: int = 25,
) -> CertificateReport:
    """Classify random points of every target cylinder at time n.

    Points are random coding extensions of the target word; by the
    containment certificate each must recur within phi(n), so sound
    classification can yield HIT or (with exhausted depth) UNKNOWN but
    never MISS.
    """
    n = family.n
    threshold = phi.phi(n)
    probs = _digit_probs(ifs, gamma)
    hits = misses = 0
    checked = 0
    by_len: dict[int, list[InnerCylinder]] = {}
    for member in family.members:
        by_len.setdefault(len(member.target_word), []).append(member)

    stream = 0
    max_rows = 32768
    for length, members in sorted(by_len.items()):
        grp_size = max(1, max_rows // samples)
        for start in range(0, len(members), grp_size):
            grp = members[start : start + grp_size]
            rows = len(grp) * samples
            suffix = categorical_matrix(seed, rows, margin, probs, TAG_POINTS, stream)
            stream += rows
            prefix = np.repeat(
                np.array([tuple(m.target_word) for m in grp], dtype=np.uint16),
                samples,
                axis=0,
            )
            digits = np.concatenate([prefix, suffix], axis=1)
            g_lo, g_hi = gap_bounds(ifs, digits, n)
            gl, gh = g_lo[:, n - 1], g_hi[:, n - 1]
            hits += int(np.sum(gh < threshold))
            misses += int(np.sum(gl >= threshold))
            checked += rows
    return CertificateReport(n, checked, hits, misses, checked - hits - misses)
