"""Conformal iterated function systems with certified per-cylinder data.

Two map families are supported in ambient dimension 1: orientation-aware
similarities x -> +-r x + t and Moebius maps x -> (ax+b)/(cx+d) with the
pole certified outside the working domain. Dimension 2 is restricted to
similarities (scale + rotation + optional reflection).

All geometric quantities (boxes, diameters, derivative norms, fixed
points) are produced as outward-rounded interval enclosures. Words of
similarities keep an exact float path: the composed ratio is the plain
product of the constituent ratios and cylinder diameters are exact
multiples of Diam(X).

Derivative sup-norms are taken over the working neighbourhood V (the
attractor hull inflated by a configurable margin); the complementary
inf-norms over the invariant hull feed the lower pressure bounds in
:mod:`confrec.dimension`. For a Moebius word the composed derivative
magnitude |det|/(cx+d)^2 is monotone on any interval avoiding the pole,
so both norms are evaluated tightly at interval endpoints.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from .errors import BudgetError, ValidationError
from .intervals import Interval, bump_down, bump_up, down, sum_down, sum_up, up
from .words import Word

DEFAULT_HULL_TOL = 1e-12
DEFAULT_V_MARGIN = 0.05
DEFAULT_WORD_BUDGET = 2**24
_ARRAY_CAP = 2**18  # widest level materialised at once by the enumerator


# ---------------------------------------------------------------------------
# boxes (1D = Interval, 2D = product of intervals)


@dataclass(frozen=True, slots=True)
class Box2:
    x: Interval
    y: Interval

    @property
    def width(self) -> float:
        # diameter upper bound of the enclosed rectangle
        return up(math.hypot(self.x.width, self.y.width))

    def encloses(self, other: "Box2") -> bool:
        return self.x.encloses(other.x) and self.y.encloses(other.y)

    def intersects(self, other: "Box2") -> bool:
        return self.x.intersects(other.x) and self.y.intersects(other.y)

    def distance(self, other: "Box2") -> Interval:
        dx = self.x.distance(other.x)
        dy = self.y.distance(other.y)
        sq = dx.square() + dy.square()
        return Interval(max(0.0, sq.lo), sq.hi).pow(0.5)  # rounding can dip below 0

    def inflate(self, margin: float) -> "Box2":
        return Box2(self.x.inflate(margin), self.y.inflate(margin))

    @staticmethod
    def hull(*members: "Box2") -> "Box2":
        return Box2(
            Interval.hull(*(m.x for m in members)),
            Interval.hull(*(m.y for m in members)),
        )


Box = Union[Interval, Box2]


def box_hull(members: Sequence[Box]) -> Box:
    if isinstance(members[0], Interval):
        return Interval.hull(*members)
    return Box2.hull(*members)


def box_movement(a: Box, b: Box) -> float:
    """Hausdorff-style gap between two boxes (max endpoint displacement)."""
    if isinstance(a, Interval):
        return max(abs(a.lo - b.lo), abs(a.hi - b.hi))
    return max(box_movement(a.x, b.x), box_movement(a.y, b.y))


# ---------------------------------------------------------------------------
# maps


@dataclass(frozen=True, slots=True)
class Similarity1D:
    """x -> a x + t with a = -ratio if flipped, +ratio otherwise."""

    ratio: float
    translation: float
    flip: bool = False

    def __post_init__(self):
        if not (0.0 < self.ratio < 1.0):
            raise ValidationError(f"contraction violated: ratio {self.ratio} not in (0,1)")

    @property
    def slope(self) -> float:
        return -self.ratio if self.flip else self.ratio

    def apply_iv(self, x: Interval) -> Interval:
        img = x * self.slope + self.translation
        return img

    def deriv_range_iv(self, x: Interval) -> Interval:
        return Interval.point(self.ratio)

    def apply_vec(self, lo: np.ndarray, hi: np.ndarray):
        a, t = self.slope, self.translation
        if a >= 0:
            nlo, nhi = a * lo + t, a * hi + t
        else:
            nlo, nhi = a * hi + t, a * lo + t
        return bump_down(bump_down(nlo)), bump_up(bump_up(nhi))


@dataclass(frozen=True, slots=True)
class Moebius1D:
    """x -> (a x + b)/(c x + d); ad - bc != 0, pole outside the domain."""

    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        if self.a * self.d - self.b * self.c == 0.0:
            raise ValidationError("moebius map is singular (ad - bc = 0)")

    def absdet_iv(self) -> Interval:
        det = (
            Interval.point(self.a) * Interval.point(self.d)
            - Interval.point(self.b) * Interval.point(self.c)
        )
        return det.abs()

    def _den(self, x: Interval) -> Interval:
        den = x * self.c + self.d
        if den.lo <= 0.0 <= den.hi:
            raise ValidationError(f"moebius pole inside domain {x}")
        return den

    def apply_iv(self, x: Interval) -> Interval:
        self._den(x)  # certify pole-free before endpoint evaluation
        e0 = self._at(x.lo)
        e1 = self._at(x.hi)
        return Interval.hull(e0, e1)

    def _at(self, x: float) -> Interval:
        px = Interval.point(x)
        num = px * self.a + self.b
        den = px * self.c + self.d
        return num / den

    def deriv_range_iv(self, x: Interval) -> Interval:
        den = self._den(x)
        return self.absdet_iv() / den.square()

    def apply_vec(self, lo: np.ndarray, hi: np.ndarray):
        d0 = self.c * lo + self.d
        d1 = self.c * hi + self.d
        if not (np.all((d0 > 0) & (d1 > 0)) or np.all((d0 < 0) & (d1 < 0))):
            raise ValidationError("moebius pole inside vectorised domain")
        e0 = (self.a * lo + self.b) / d0
        e1 = (self.a * hi + self.b) / d1
        nlo = np.minimum(e0, e1)
        nhi = np.maximum(e0, e1)
        # three rounded ops per endpoint evaluation
        for _ in range(3):
            nlo = bump_down(nlo)
            nhi = bump_up(nhi)
        return nlo, nhi


@dataclass(frozen=True, slots=True)
class Similarity2D:
    """Conformal planar similarity: x -> r R(theta) F x + t."""

    ratio: float
    rotation: float
    reflect: bool
    translation: tuple[float, float]

    def __post_init__(self):
        if not (0.0 < self.ratio < 1.0):
            raise ValidationError(f"contraction violated: ratio {self.ratio} not in (0,1)")

    def matrix(self) -> tuple[float, float, float, float]:
        r, th = self.ratio, self.rotation
        c, s = r * math.cos(th), r * math.sin(th)
        if self.reflect:
            return c, s, s, -c
        return c, -s, s, c

    def apply_iv(self, box: Box2) -> Box2:
        m00, m01, m10, m11 = self.matrix()
        tx, ty = self.translation
        nx = box.x * m00 + box.y * m01 + tx
        ny = box.x * m10 + box.y * m11 + ty
        return Box2(nx, ny)

    def deriv_range_iv(self, box: Box2) -> Interval:
        return Interval.point(self.ratio)


Map1D = Union[Similarity1D, Moebius1D]
AnyMap = Union[Similarity1D, Moebius1D, Similarity2D]


def _to_matrix(m: Map1D) -> tuple[float, float, float, float]:
    """Moebius matrix of a 1D map (similarities embed as (a, t; 0, 1))."""
    if isinstance(m, Similarity1D):
        return m.slope, m.translation, 0.0, 1.0
    return m.a, m.b, m.c, m.d


def _map_absdet(m: Map1D) -> Interval:
    if isinstance(m, Similarity1D):
        return Interval.point(m.ratio)
    return m.absdet_iv()


# ---------------------------------------------------------------------------
# word compositions


@dataclass(frozen=True, slots=True)
class SimilarityComp1D:
    """Exact composed similarity x -> slope x + shift."""

    slope: float
    shift: float

    @property
    def ratio(self) -> float:
        return abs(self.slope)

    def extend(self, m: Similarity1D) -> "SimilarityComp1D":
        return SimilarityComp1D(self.slope * m.slope, self.slope * m.translation + self.shift)

    def apply_point(self, x: float) -> float:
        return self.slope * x + self.shift

    def apply_iv(self, x: Interval) -> Interval:
        return x * self.slope + self.shift

    def inverse_apply_iv(self, y: Interval) -> Interval:
        return (y - self.shift) / self.slope

    def deriv_sup_iv(self, x: Interval) -> Interval:
        return Interval.point(self.ratio)

    deriv_inf_iv = deriv_sup_iv

    def fixed_point_iv(self) -> Interval:
        return Interval.point(self.shift) / (1.0 - Interval.point(self.slope))


@dataclass(frozen=True, slots=True)
class MoebiusComp1D:
    """Composed Moebius word with certified matrix entries.

    |det| is tracked as the product of the per-map determinant magnitudes
    rather than recomputed from the (large, cancelling) matrix entries.
    """

    m00: Interval
    m01: Interval
    m10: Interval
    m11: Interval
    absdet: Interval

    @staticmethod
    def identity() -> "MoebiusComp1D":
        one, zero = Interval.point(1.0), Interval.point(0.0)
        return MoebiusComp1D(one, zero, zero, one, one)

    def extend(self, m: Map1D) -> "MoebiusComp1D":
        a, b, c, d = _to_matrix(m)
        return MoebiusComp1D(
            self.m00 * a + self.m01 * c,
            self.m00 * b + self.m01 * d,
            self.m10 * a + self.m11 * c,
            self.m10 * b + self.m11 * d,
            self.absdet * _map_absdet(m),
        )

    def _den(self, x: Interval) -> Interval:
        den = self.m10 * x + self.m11
        if den.lo <= 0.0 <= den.hi:
            raise ValidationError("composed moebius pole inside evaluation interval")
        return den

    def _at(self, x: float) -> Interval:
        px = Interval.point(x)
        return (self.m00 * px + self.m01) / (self.m10 * px + self.m11)

    def apply_iv(self, x: Interval) -> Interval:
        self._den(x)
        return Interval.hull(self._at(x.lo), self._at(x.hi))

    def inverse_apply_iv(self, y: Interval) -> Interval:
        inv = MoebiusComp1D(self.m11, -self.m01, -self.m10, self.m00, self.absdet)
        return inv.apply_iv(y)

    def _deriv_at(self, x: float) -> Interval:
        den = self.m10 * Interval.point(x) + self.m11
        return self.absdet / den.square()

    def deriv_sup_iv(self, x: Interval) -> Interval:
        self._den(x)
        v0, v1 = self._deriv_at(x.lo), self._deriv_at(x.hi)
        return Interval(max(v0.lo, v1.lo), max(v0.hi, v1.hi))

    def deriv_inf_iv(self, x: Interval) -> Interval:
        self._den(x)
        v0, v1 = self._deriv_at(x.lo), self._deriv_at(x.hi)
        return Interval(min(v0.lo, v1.lo), min(v0.hi, v1.hi))


@dataclass(frozen=True, slots=True)
class SimilarityComp2D:
    m: tuple[float, float, float, float]
    t: tuple[float, float]
    ratio: float

    @staticmethod
    def identity() -> "SimilarityComp2D":
        return SimilarityComp2D((1.0, 0.0, 0.0, 1.0), (0.0, 0.0), 1.0)

    def extend(self, s: Similarity2D) -> "SimilarityComp2D":
        a = self.m
        b = s.matrix()
        m = (
            a[0] * b[0] + a[1] * b[2],
            a[0] * b[1] + a[1] * b[3],
            a[2] * b[0] + a[3] * b[2],
            a[2] * b[1] + a[3] * b[3],
        )
        tx = a[0] * s.translation[0] + a[1] * s.translation[1] + self.t[0]
        ty = a[2] * s.translation[0] + a[3] * s.translation[1] + self.t[1]
        return SimilarityComp2D(m, (tx, ty), self.ratio * s.ratio)

    def apply_iv(self, box: Box2) -> Box2:
        m, t = self.m, self.t
        nx = box.x * m[0] + box.y * m[1] + t[0]
        ny = box.x * m[2] + box.y * m[3] + t[1]
        return Box2(nx, ny)

    def deriv_sup_iv(self, box: Box2) -> Interval:
        return Interval.point(self.ratio)

    deriv_inf_iv = deriv_sup_iv

    def fixed_point_iv(self) -> Box2:
        m, t = self.m, self.t
        a = Interval.point(1.0) - Interval.point(m[0])
        b = -Interval.point(m[1])
        c = -Interval.point(m[2])
        d = Interval.point(1.0) - Interval.point(m[3])
        det = a * d - b * c
        px = (d * t[0] - b * t[1]) / det
        py = (a * t[1] - c * t[0]) / det
        return Box2(px, py)


MapComposition = Union[SimilarityComp1D, MoebiusComp1D, SimilarityComp2D]


# ---------------------------------------------------------------------------
# the system


@dataclass(frozen=True)
class CylinderData:
    word: Word
    deriv_norm: Interval
    diam: Interval
    box: Box
    fixed_point: Optional[Box]


@dataclass(frozen=True)
class IFSSpec:
    maps: tuple[AnyMap, ...]
    dim: int
    hull: Box
    V: Box
    diam: Interval
    holder_alpha: float
    holder_c: float
    osc_declared: bool
    witnesses: tuple[Box, ...]
    word_budget: int = DEFAULT_WORD_BUDGET
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def alphabet_size(self) -> int:
        return len(self.maps)

    @property
    def is_similarity(self) -> bool:
        return all(isinstance(m, (Similarity1D, Similarity2D)) for m in self.maps)

    def ratios(self) -> tuple[float, ...]:
        if not self.is_similarity:
            raise ValidationError("ratios() requires a similarity system")
        return tuple(m.ratio for m in self.maps)

    def map_deriv_sup(self, i: int) -> Interval:
        """Enclosure of sup over V of |phi_i'|."""
        return _deriv_sup(self.maps[i], self.V)

    def map_deriv_inf(self, i: int) -> Interval:
        """Enclosure of inf over the hull of |phi_i'|."""
        return _deriv_inf(self.maps[i], self.hull)

    @property
    def r_max(self) -> float:
        return max(self.map_deriv_sup(i).hi for i in range(self.alphabet_size))

    @property
    def r_min(self) -> float:
        return min(self.map_deriv_inf(i).lo for i in range(self.alphabet_size))

    def check_budget(self, n_words: int) -> None:
        if n_words > self.word_budget:
            raise BudgetError(
                f"enumeration of {n_words} words exceeds budget {self.word_budget}"
            )


def _deriv_sup(m: AnyMap, dom: Box) -> Interval:
    if isinstance(m, (Similarity1D, Similarity2D)):
        return Interval.point(m.ratio)
    v0, v1 = m.deriv_range_iv(Interval.point(dom.lo)), m.deriv_range_iv(Interval.point(dom.hi))
    return Interval(max(v0.lo, v1.lo), max(v0.hi, v1.hi))


def _deriv_inf(m: AnyMap, dom: Box) -> Interval:
    if isinstance(m, (Similarity1D, Similarity2D)):
        return Interval.point(m.ratio)
    v0, v1 = m.deriv_range_iv(Interval.point(dom.lo)), m.deriv_range_iv(Interval.point(dom.hi))
    return Interval(min(v0.lo, v1.lo), min(v0.hi, v1.hi))


def _map_apply(m: AnyMap, box: Box) -> Box:
    return m.apply_iv(box)


def compute_hull(
    maps: Sequence[AnyMap],
    dim: int = 1,
    domain: Optional[Box] = None,
    tol: float = DEFAULT_HULL_TOL,
    max_iter: int = 100_000,
) -> Box:
    """Smallest certified invariant box: iterate B -> box(U phi_i(B)).

    Returns a box B with every phi_i(B) inside B (checked by interval
    evaluation) and successive-iterate movement below tol.
    """
    if tol <= 0:
        raise ValidationError("hull tolerance must be positive")
    if domain is None:
        if any(isinstance(m, Moebius1D) for m in maps):
            raise ValidationError("moebius systems need an explicit starting domain")
        if dim == 1:
            pts = [SimilarityComp1D(m.slope, m.translation).fixed_point_iv() for m in maps]
            box: Box = Interval.hull(*pts)
        else:
            comps = [SimilarityComp2D.identity().extend(m) for m in maps]
            box = Box2.hull(*(c.fixed_point_iv() for c in comps))
    else:
        box = domain

    for _ in range(max_iter):
        nxt = box_hull([_map_apply(m, box) for m in maps])
        moved = box_movement(box, nxt)
        box = nxt
        if moved <= tol:
            break
    else:
        raise ValidationError("hull iteration did not converge")

    # certify invariance, inflating by a hair if rounding pushed images out
    step = 64 * np.finfo(float).eps * _box_scale(box)
    for _ in range(6):
        if all(_box_enclosed(_map_apply(m, box), box) for m in maps):
            return box
        box = box.inflate(step)
        step = max(step * 8, tol)
    raise ValidationError("could not certify an invariant hull box")


def _box_enclosed(inner: Box, outer: Box) -> bool:
    return outer.encloses(inner)


def _box_scale(box: Box) -> float:
    if isinstance(box, Interval):
        return max(1.0, abs(box.lo), abs(box.hi))
    return max(1.0, _box_scale(box.x), _box_scale(box.y))


def build_ifs(
    maps: Sequence[AnyMap],
    dim: int = 1,
    holder_alpha: float = 1.0,
    holder_c: float = 0.0,
    osc: bool = False,
    domain: Optional[Box] = None,
    hull_tol: float = DEFAULT_HULL_TOL,
    v_margin: float = DEFAULT_V_MARGIN,
    word_budget: int = DEFAULT_WORD_BUDGET,
) -> IFSSpec:
    maps = tuple(maps)
    if len(maps) < 2:
        raise ValidationError("an IFS needs at least two maps")
    if dim not in (1, 2):
        raise ValidationError("ambient dimension must be 1 or 2")
    if dim == 2 and not all(isinstance(m, Similarity2D) for m in maps):
        raise ValidationError("dimension 2 supports similarity maps only")
    if dim == 1 and not all(isinstance(m, (Similarity1D, Moebius1D)) for m in maps):
        raise ValidationError("dimension 1 maps must be similarity or moebius")
    if holder_alpha <= 0:
        raise ValidationError("holder_alpha must be positive")
    if holder_c < 0:
        raise ValidationError("holder_c must be nonnegative")

    hull = compute_hull(maps, dim, domain, hull_tol)
    diam_hi = hull.width if isinstance(hull, Box2) else up(hull.hi - hull.lo)
    margin = v_margin * diam_hi if diam_hi > 0 else v_margin
    V = hull.inflate(margin)

    for i, m in enumerate(maps):
        dsup = _deriv_sup(m, V)
        dinf = _deriv_inf(m, V)
        if not dsup.hi < 1.0:
            raise ValidationError(f"contraction violated: map {i} has sup|phi'| >= 1 on V")
        if not dinf.lo > 0.0:
            raise ValidationError(f"map {i} derivative not certifiably positive on V")
        if not _box_enclosed(_map_apply(m, V), V):
            raise ValidationError(f"map {i} does not keep V invariant; increase v_margin")

    witnesses = []
    for i in range(len(maps)):
        comp = _identity_comp(maps, dim)
        comp = comp.extend(maps[i])
        witnesses.append(_fixed_point_of(comp, hull, tol=max(hull_tol, 1e-14)))

    if isinstance(hull, Interval):
        # monotone 1D maps: the invariant-box endpoints are the attractor
        # extremes up to the iteration tolerance, so they serve as certified
        # attractor-point enclosures (and make diameters tight)
        r_rough = max(_deriv_sup(m, V).hi for m in maps)
        slack = up(4.0 * (hull_tol + 64 * np.finfo(float).eps * _box_scale(hull))
                   / max(1e-3, 1.0 - r_rough))
        witnesses.append(Interval(hull.lo, min(hull.hi, hull.lo + slack)))
        witnesses.append(Interval(max(hull.lo, hull.hi - slack), hull.hi))

    lo = 0.0
    for wa, wb in itertools.combinations(witnesses, 2):
        lo = max(lo, wa.distance(wb).lo)
    diam = Interval(min(lo, diam_hi), diam_hi)

    return IFSSpec(
        maps=maps,
        dim=dim,
        hull=hull,
        V=V,
        diam=diam,
        holder_alpha=holder_alpha,
        holder_c=holder_c,
        osc_declared=osc,
        witnesses=tuple(witnesses),
        word_budget=word_budget,
    )


def _identity_comp(maps: Sequence[AnyMap], dim: int) -> MapComposition:
    if dim == 2:
        return SimilarityComp2D.identity()
    if all(isinstance(m, Similarity1D) for m in maps):
        return SimilarityComp1D(1.0, 0.0)
    return MoebiusComp1D.identity()


# ---------------------------------------------------------------------------
# word-level operations


def compose_word(ifs: IFSSpec, word: Word) -> MapComposition:
    """phi_word = phi_{w1} o ... o phi_{wn}; empty word is the identity."""
    word.validate(ifs.alphabet_size)
    comp = _identity_comp(ifs.maps, ifs.dim)
    for s in word:
        comp = comp.extend(ifs.maps[s])
    return comp


def derivative_norm_bounds(ifs: IFSSpec, word: Word) -> Interval:
    """Enclosure of the sup over V of |phi_word'|.

    Exact (zero-width) for similarity words; tight endpoint evaluation
    for Moebius words.
    """
    if len(word) == 0:
        raise ValidationError("derivative bounds need a nonempty word")
    word.validate(ifs.alphabet_size)
    if ifs.is_similarity:
        p = 1.0
        for s in word:
            p *= ifs.maps[s].ratio
        return Interval.point(p)
    comp = compose_word(ifs, word)
    return comp.deriv_sup_iv(ifs.V)


def derivative_min_bounds(ifs: IFSSpec, word: Word) -> Interval:
    """Enclosure of the inf over the hull of |phi_word'|."""
    if len(word) == 0:
        raise ValidationError("derivative bounds need a nonempty word")
    word.validate(ifs.alphabet_size)
    if ifs.is_similarity:
        return derivative_norm_bounds(ifs, word)
    comp = compose_word(ifs, word)
    return comp.deriv_inf_iv(ifs.hull)


def _fixed_point_of(comp: MapComposition, start: Box, tol: float) -> Box:
    if isinstance(comp, (SimilarityComp1D, SimilarityComp2D)):
        return comp.fixed_point_iv()
    box = start
    prev_width = math.inf
    for _ in range(10_000):
        nxt = comp.apply_iv(box)
        try:
            box = nxt.intersect(box)
        except ValueError:
            box = nxt  # rounding pushed the image off the old box by ulps
        if box.width <= tol:
            return box
        if box.width >= prev_width:
            break
        prev_width = box.width
    if box.width <= tol:
        return box
    raise ValidationError(f"fixed point enclosure stalled at width {box.width} > tol {tol}")


def fixed_point(ifs: IFSSpec, word: Word, tol: float = 1e-12) -> Box:
    """Enclosure of the unique p with phi_word(p) = p, width <= tol."""
    if tol <= 0:
        raise ValidationError("fixed point tolerance must be positive")
    if len(word) == 0:
        raise ValidationError("fixed point needs a nonempty word")
    word.validate(ifs.alphabet_size)
    comp = compose_word(ifs, word)
    start = comp.apply_iv(ifs.hull)
    return _fixed_point_of(comp, start, tol)


def cylinder_box(ifs: IFSSpec, word: Word) -> Box:
    comp = compose_word(ifs, word)
    return comp.apply_iv(ifs.hull)


def eval_pi(ifs: IFSSpec, prefix: Word) -> Box:
    """Enclosure of pi(sequence) over all sequences starting with prefix."""
    if len(prefix) == 0:
        raise ValidationError("eval_pi needs a nonempty prefix")
    return cylinder_box(ifs, prefix)


def cylinder_data(ifs: IFSSpec, word: Word) -> CylinderData:
    word.validate(ifs.alphabet_size)
    comp = compose_word(ifs, word)
    box = comp.apply_iv(ifs.hull)

    if len(word) == 0:
        return CylinderData(word, Interval.point(1.0), ifs.diam, box, None)

    if ifs.is_similarity and ifs.dim == 1:
        r = 1.0
        for s in word:
            r *= ifs.maps[s].ratio
        deriv = Interval.point(r)
        d = r * (ifs.hull.hi - ifs.hull.lo)
        diam = Interval.point(d)
    else:
        deriv = derivative_norm_bounds(ifs, word)
        hi = box.width if isinstance(box, Box2) else up(box.hi - box.lo)
        lo = 0.0
        for wa, wb in itertools.combinations(ifs.witnesses, 2):
            ia, ib = comp.apply_iv(wa), comp.apply_iv(wb)
            lo = max(lo, ia.distance(ib).lo)
        diam = Interval(min(lo, hi), hi)

    fp = _fixed_point_of(comp, box, tol=max(1e-14, 1e-10 * diam.hi))
    if isinstance(fp, Interval):
        fp = Interval(max(fp.lo, box.lo), min(fp.hi, box.hi))
    return CylinderData(word, deriv, diam, box, fp)


def attractor_hull(ifs: IFSSpec, tol: float = DEFAULT_HULL_TOL) -> Box:
    """Recompute the invariant hull box at the given tolerance."""
    return compute_hull(ifs.maps, ifs.dim, ifs.hull, tol)


# ---------------------------------------------------------------------------
# vectorised level enumeration (1D)


@dataclass(frozen=True)
class LevelRanges:
    """Per-word derivative bounds at one depth, word-indexed base-|D| MSB first.

    sup_* enclose sup over V of |phi_I'|; inf_* enclose inf over the hull.
    """

    depth: int
    sup_lo: np.ndarray
    sup_hi: np.ndarray
    inf_lo: np.ndarray
    inf_hi: np.ndarray


class _MatrixLevel:
    """Interval matrix entries for all words of the current depth."""

    __slots__ = ("depth", "e_lo", "e_hi", "det_lo", "det_hi")

    def __init__(self, depth, e_lo, e_hi, det_lo, det_hi):
        self.depth = depth
        self.e_lo = e_lo  # (4, n) a,b,c,d lower ends
        self.e_hi = e_hi
        self.det_lo = det_lo
        self.det_hi = det_hi


def _iv_scale(lo: np.ndarray, hi: np.ndarray, s: float):
    if s >= 0:
        return bump_down(s * lo), bump_up(s * hi)
    return bump_down(s * hi), bump_up(s * lo)


def _iv_add(alo, ahi, blo, bhi):
    return bump_down(alo + blo), bump_up(ahi + bhi)


def _matrix_identity() -> _MatrixLevel:
    one = np.array([1.0])
    zero = np.array([0.0])
    e_lo = np.vstack([one, zero, zero, one])
    e_hi = e_lo.copy()
    return _MatrixLevel(0, e_lo, e_hi, one.copy(), one.copy())


def _matrix_extend(level: _MatrixLevel, maps: Sequence[Map1D]) -> _MatrixLevel:
    """One more symbol appended on the right: M -> M @ A_j, blocks per j."""
    a_lo, b_lo, c_lo, d_lo = level.e_lo
    a_hi, b_hi, c_hi, d_hi = level.e_hi
    blocks_lo, blocks_hi, dets_lo, dets_hi = [], [], [], []
    for m in maps:
        ma, mb, mc, md = _to_matrix(m)
        na = _iv_add(*_iv_scale(a_lo, a_hi, ma), *_iv_scale(b_lo, b_hi, mc))
        nb = _iv_add(*_iv_scale(a_lo, a_hi, mb), *_iv_scale(b_lo, b_hi, md))
        nc = _iv_add(*_iv_scale(c_lo, c_hi, ma), *_iv_scale(d_lo, d_hi, mc))
        nd = _iv_add(*_iv_scale(c_lo, c_hi, mb), *_iv_scale(d_lo, d_hi, md))
        det = _map_absdet(m)
        cands = np.stack(
            [level.det_lo * det.lo, level.det_lo * det.hi, level.det_hi * det.lo, level.det_hi * det.hi]
        )
        dets_lo.append(bump_down(cands.min(axis=0)))
        dets_hi.append(bump_up(cands.max(axis=0)))
        blocks_lo.append(np.vstack([na[0], nb[0], nc[0], nd[0]]))
        blocks_hi.append(np.vstack([na[1], nb[1], nc[1], nd[1]]))

    n = level.e_lo.shape[1]
    k = len(maps)
    e_lo = np.empty((4, n * k))
    e_hi = np.empty((4, n * k))
    det_lo = np.empty(n * k)
    det_hi = np.empty(n * k)
    for j in range(k):
        # word index = old_index * k + j  (append the new symbol at the end)
        e_lo[:, j::k] = blocks_lo[j]
        e_hi[:, j::k] = blocks_hi[j]
        det_lo[j::k] = dets_lo[j]
        det_hi[j::k] = dets_hi[j]
    return _MatrixLevel(level.depth + 1, e_lo, e_hi, det_lo, det_hi)


def _matrix_deriv_at(level: _MatrixLevel, x: float):
    """Per-word enclosure of |phi'(x)| = |det| / (c x + d)^2."""
    c_lo, c_hi = level.e_lo[2], level.e_hi[2]
    d_lo, d_hi = level.e_lo[3], level.e_hi[3]
    den_lo, den_hi = _iv_add(*_iv_scale(c_lo, c_hi, x), d_lo, d_hi)
    if not (np.all(den_lo > 0) or np.all(den_hi < 0)):
        raise ValidationError("composed moebius pole hit the evaluation domain")
    alo = np.minimum(np.abs(den_lo), np.abs(den_hi))
    ahi = np.maximum(np.abs(den_lo), np.abs(den_hi))
    sq_lo = bump_down(alo * alo)
    sq_hi = bump_up(ahi * ahi)
    v_lo = bump_down(level.det_lo / sq_hi)
    v_hi = bump_up(level.det_hi / sq_lo)
    return v_lo, v_hi


def level_ranges(ifs: IFSSpec, depth: int) -> LevelRanges:
    """Derivative bounds for every word of the given depth (cached).

    Similarity systems return exact zero-width products. Moebius systems
    evaluate the composed derivative at the endpoints of V (sup side) and
    of the hull (inf side).
    """
    if depth < 1:
        raise ValidationError("depth must be >= 1")
    n_words = ifs.alphabet_size**depth
    ifs.check_budget(n_words)
    if n_words > _ARRAY_CAP:
        raise BudgetError(
            f"level of {n_words} words exceeds the in-memory cap {_ARRAY_CAP}; "
            "use partition_sum_bounds which streams in chunks"
        )
    cache = ifs._cache.setdefault("ranges", {})
    if depth in cache:
        return cache[depth]

    if ifs.is_similarity:
        prods = np.array([1.0])
        for level_idx in range(depth):
            ratios = np.array([m.ratio for m in ifs.maps])
            prods = (prods[:, None] * ratios[None, :]).reshape(-1)
            if level_idx + 1 not in cache:
                cache[level_idx + 1] = LevelRanges(level_idx + 1, prods, prods, prods, prods)
        return cache[depth]

    level = _matrix_identity()
    for _ in range(depth):
        level = _matrix_extend(level, ifs.maps)
        if level.depth not in cache:
            supV = _ranges_from_matrices_domain(level, ifs.V)
            infH = _ranges_from_matrices_domain(level, ifs.hull)
            cache[level.depth] = LevelRanges(
                level.depth, supV[0], supV[1], infH[2], infH[3]
            )
    return cache[depth]


def _ranges_from_matrices_domain(level: _MatrixLevel, dom: Interval):
    v0 = _matrix_deriv_at(level, dom.lo)
    v1 = _matrix_deriv_at(level, dom.hi)
    sup_lo = np.maximum(v0[0], v1[0])
    sup_hi = np.maximum(v0[1], v1[1])
    inf_lo = np.minimum(v0[0], v1[0])
    inf_hi = np.minimum(v0[1], v1[1])
    return sup_lo, sup_hi, inf_lo, inf_hi


def _iv_mul(alo, ahi, blo, bhi):
    """Interval product, scalar-or-array operands."""
    cands = np.stack([alo * blo, alo * bhi, ahi * blo, ahi * bhi])
    return bump_down(cands.min(axis=0)), bump_up(cands.max(axis=0))


def _compose_levels(prefix: MoebiusComp1D, level: _MatrixLevel) -> _MatrixLevel:
    """Words prefix*u for every suffix u of the level: M_prefix @ M_u."""
    pa, pb = prefix.m00, prefix.m01
    pc, pd = prefix.m10, prefix.m11
    a_lo, b_lo, c_lo, d_lo = level.e_lo
    a_hi, b_hi, c_hi, d_hi = level.e_hi
    na = _iv_add(*_iv_mul(pa.lo, pa.hi, a_lo, a_hi), *_iv_mul(pb.lo, pb.hi, c_lo, c_hi))
    nb = _iv_add(*_iv_mul(pa.lo, pa.hi, b_lo, b_hi), *_iv_mul(pb.lo, pb.hi, d_lo, d_hi))
    nc = _iv_add(*_iv_mul(pc.lo, pc.hi, a_lo, a_hi), *_iv_mul(pd.lo, pd.hi, c_lo, c_hi))
    nd = _iv_add(*_iv_mul(pc.lo, pc.hi, b_lo, b_hi), *_iv_mul(pd.lo, pd.hi, d_lo, d_hi))
    det = _iv_mul(prefix.absdet.lo, prefix.absdet.hi, level.det_lo, level.det_hi)
    return _MatrixLevel(
        -1,
        np.vstack([na[0], nb[0], nc[0], nd[0]]),
        np.vstack([na[1], nb[1], nc[1], nd[1]]),
        det[0],
        det[1],
    )


def _suffix_level(ifs: IFSSpec, depth: int) -> _MatrixLevel:
    cache = ifs._cache.setdefault("matrix_level", {})
    if depth not in cache:
        level = _matrix_identity()
        for _ in range(depth):
            level = _matrix_extend(level, ifs.maps)
        cache[depth] = level
    return cache[depth]


def _level_sums(level: _MatrixLevel, V: Interval, hull: Interval, s: float):
    sup_v = _ranges_from_matrices_domain(level, V)
    inf_h = _ranges_from_matrices_domain(level, hull)
    return (
        sum_down(sup_v[0] ** s),
        sum_up(sup_v[1] ** s),
        sum_down(inf_h[2] ** s),
    )


def partition_sum_bounds(ifs: IFSSpec, depth: int, s: float, _cap: int = _ARRAY_CAP) -> dict:
    """Certified pieces of the depth-n partition sums at exponent s.

    Returns dict with:
      ps_lo, ps_hi     : interval for sum over words of ||phi_I'||^s (sup-norm)
      lower_sum        : lower bound for sum of (inf_hull |phi_I'|)^s

    Similarity systems collapse exactly. Moebius levels wider than the
    in-memory cap stream over leading-symbol prefixes in a fixed order,
    so every depth inside the word budget is reachable.
    """
    if ifs.is_similarity:
        # exact collapse: the level sum factorises as (sum_i r_i^s)^depth
        base = sum(m.ratio**s for m in ifs.maps)
        ps = base**depth
        return {"ps_lo": ps, "ps_hi": ps, "lower_sum": ps}
    ifs.check_budget(ifs.alphabet_size**depth)
    if ifs.alphabet_size**depth <= _cap:
        r = level_ranges(ifs, depth)
        return {
            "ps_lo": sum_down(r.sup_lo**s),
            "ps_hi": sum_up(r.sup_hi**s),
            "lower_sum": sum_down(r.inf_lo**s),
        }

    suffix_depth = max(1, int(math.log(_cap, ifs.alphabet_size)))
    prefix_depth = depth - suffix_depth
    suffix = _suffix_level(ifs, suffix_depth)
    ps_lo = ps_hi = low = 0.0
    for word in itertools.product(range(ifs.alphabet_size), repeat=prefix_depth):
        comp = _identity_comp(ifs.maps, ifs.dim)
        for sym in word:
            comp = comp.extend(ifs.maps[sym])
        chunk = _compose_levels(comp, suffix)
        c_lo, c_hi, c_low = _level_sums(chunk, ifs.V, ifs.hull, s)
        ps_lo = down(ps_lo + c_lo)
        ps_hi = up(ps_hi + c_hi)
        low = down(low + c_low)
    return {"ps_lo": ps_lo, "ps_hi": ps_hi, "lower_sum": low}


# ---------------------------------------------------------------------------
# JSON ingestion


_TOP_REQUIRED = {"alphabet", "dim", "maps", "holder_alpha"}
_TOP_OPTIONAL = {"holder_c", "osc", "domain", "v_margin"}


def parse_ifs(doc: dict) -> IFSSpec:
    if not isinstance(doc, dict):
        raise ValidationError("IFS document must be a JSON object")
    unknown = set(doc) - _TOP_REQUIRED - _TOP_OPTIONAL
    if unknown:
        raise ValidationError(f"unknown IFS fields: {sorted(unknown)}")
    missing = _TOP_REQUIRED - set(doc)
    if missing:
        raise ValidationError(f"missing IFS fields: {sorted(missing)}")

    dim = doc["dim"]
    if dim not in (1, 2):
        raise ValidationError(f"dim must be 1 or 2, got {dim!r}")
    maps_doc = doc["maps"]
    if not isinstance(maps_doc, list) or not maps_doc:
        raise ValidationError("maps must be a nonempty list")
    if doc["alphabet"] != len(maps_doc):
        raise ValidationError(
            f"alphabet {doc['alphabet']} does not match {len(maps_doc)} maps"
        )

    maps = [_parse_map(md, dim, i) for i, md in enumerate(maps_doc)]

    domain = None
    if "domain" in doc:
        d = doc["domain"]
        if dim == 1:
            if not (isinstance(d, list) and len(d) == 2 and d[0] < d[1]):
                raise ValidationError("domain must be [lo, hi] with lo < hi")
            domain = Interval(float(d[0]), float(d[1]))
        else:
            if not (isinstance(d, list) and len(d) == 2 and all(len(r) == 2 for r in d)):
                raise ValidationError("2D domain must be [[xlo,xhi],[ylo,yhi]]")
            domain = Box2(
                Interval(float(d[0][0]), float(d[0][1])),
                Interval(float(d[1][0]), float(d[1][1])),
            )

    return build_ifs(
        maps,
        dim=dim,
        holder_alpha=float(doc["holder_alpha"]),
        holder_c=float(doc.get("holder_c", 0.0)),
        osc=bool(doc.get("osc", False)),
        domain=domain,
        v_margin=float(doc.get("v_margin", DEFAULT_V_MARGIN)),
    )


def _parse_map(md: dict, dim: int, idx: int) -> AnyMap:
    if not isinstance(md, dict) or "kind" not in md:
        raise ValidationError(f"map {idx}: expected an object with a 'kind' field")
    kind = md["kind"]
    if kind == "similarity":
        if dim == 1:
            allowed = {"kind", "ratio", "translation", "flip"}
            _check_fields(md, allowed, {"kind", "ratio", "translation"}, idx)
            return Similarity1D(
                ratio=float(md["ratio"]),
                translation=float(md["translation"]),
                flip=bool(md.get("flip", False)),
            )
        allowed = {"kind", "ratio", "translation", "rotation", "reflect"}
        _check_fields(md, allowed, {"kind", "ratio", "translation"}, idx)
        t = md["translation"]
        if not (isinstance(t, list) and len(t) == 2):
            raise ValidationError(f"map {idx}: 2D translation must be [x, y]")
        return Similarity2D(
            ratio=float(md["ratio"]),
            rotation=float(md.get("rotation", 0.0)),
            reflect=bool(md.get("reflect", False)),
            translation=(float(t[0]), float(t[1])),
        )
    if kind == "moebius":
        if dim != 1:
            raise ValidationError(f"map {idx}: moebius maps are 1D only")
        _check_fields(md, {"kind", "a", "b", "c", "d"}, {"kind", "a", "b", "c", "d"}, idx)
        return Moebius1D(float(md["a"]), float(md["b"]), float(md["c"]), float(md["d"]))
    raise ValidationError(f"map {idx}: unknown kind {kind!r}")


def _check_fields(md: dict, allowed: set, required: set, idx: int) -> None:
    unknown = set(md) - allowed
    if unknown:
        raise ValidationError(f"map {idx}: unknown fields {sorted(unknown)}")
    missing = required - set(md)
    if missing:
        raise ValidationError(f"map {idx}: missing fields {sorted(missing)}")


def load_ifs(path) -> IFSSpec:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as e:
        raise ValidationError(f"cannot read IFS file {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise ValidationError(f"invalid JSON in {path}: line {e.lineno} col {e.colno}") from e
    return parse_ifs(doc)
