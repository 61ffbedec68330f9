import json
import math
import random

import pytest

from confrec import (
    Box2,
    Moebius1D,
    Similarity1D,
    Similarity2D,
    attractor_hull,
    build_ifs,
    compose_word,
    compute_hull,
    cylinder_data,
    derivative_norm_bounds,
    eval_pi,
    fixed_point,
    parse_ifs,
)
from confrec.errors import ValidationError
from confrec.ifs import SimilarityComp1D, cylinder_box, derivative_min_bounds
from confrec.intervals import Interval
from confrec.words import EMPTY_WORD, Word


# ---------------------------------------------------------------- JSON intake


def _cantor_doc():
    return {
        "alphabet": 2,
        "dim": 1,
        "maps": [
            {"kind": "similarity", "ratio": 1 / 3, "translation": 0.0},
            {"kind": "similarity", "ratio": 1 / 3, "translation": 2 / 3},
        ],
        "holder_alpha": 1.0,
        "osc": True,
    }


def test_parse_ok():
    ifs = parse_ifs(_cantor_doc())
    assert ifs.alphabet_size == 2
    assert ifs.osc_declared


def test_parse_rejects_unknown_fields():
    doc = _cantor_doc()
    doc["extra"] = 1
    with pytest.raises(ValidationError, match="unknown IFS fields"):
        parse_ifs(doc)
    doc = _cantor_doc()
    doc["maps"][0]["scale"] = 2
    with pytest.raises(ValidationError, match="unknown fields"):
        parse_ifs(doc)


def test_parse_rejects_expansion():
    doc = _cantor_doc()
    doc["maps"][0]["ratio"] = 1.2
    with pytest.raises(ValidationError, match="contraction violated"):
        parse_ifs(doc)


def test_parse_alphabet_mismatch():
    doc = _cantor_doc()
    doc["alphabet"] = 3
    with pytest.raises(ValidationError, match="does not match"):
        parse_ifs(doc)


def test_moebius_needs_domain():
    doc = {
        "alphabet": 2,
        "dim": 1,
        "maps": [
            {"kind": "moebius", "a": 0, "b": 1, "c": 1, "d": 1},
            {"kind": "moebius", "a": 0, "b": 1, "c": 1, "d": 2},
        ],
        "holder_alpha": 1.0,
    }
    with pytest.raises(ValidationError, match="domain"):
        parse_ifs(doc)


def test_load_ifs_file(tmp_path):
    from confrec import load_ifs

    p = tmp_path / "c.json"
    p.write_text(json.dumps(_cantor_doc()))
    assert load_ifs(p).alphabet_size == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{nope")
    with pytest.raises(ValidationError, match="invalid JSON"):
        load_ifs(bad)


# ------------------------------------------------------------- compositions


def test_compose_two_symbols(cantor):
    comp = compose_word(cantor, Word((0, 1)))
    # phi_0(phi_1(x)) = (x/3 + 2/3)/3 = x/9 + 2/9
    assert isinstance(comp, SimilarityComp1D)
    assert comp.slope == pytest.approx(1 / 9, abs=1e-17)
    assert comp.shift == pytest.approx(2 / 9, abs=1e-16)


def test_compose_empty_is_identity(cantor):
    comp = compose_word(cantor, EMPTY_WORD)
    assert comp.slope == 1.0 and comp.shift == 0.0


def test_compose_11(cantor):
    comp = compose_word(cantor, Word((1, 1)))
    assert comp.ratio == pytest.approx(1 / 9, abs=1e-17)
    assert comp.shift == pytest.approx(8 / 9, abs=1e-15)


def test_compose_rejects_bad_symbol(cantor):
    with pytest.raises(ValidationError, match="out of range"):
        compose_word(cantor, Word((0, 2)))


# ----------------------------------------------------------- derivative norms


def test_similarity_norm_exact(cantor):
    d = derivative_norm_bounds(cantor, Word((0, 1, 1, 0)))
    expected = (1 / 3) * (1 / 3) * (1 / 3) * (1 / 3)
    assert d.lo == d.hi == expected


def test_norm_requires_nonempty(cantor):
    with pytest.raises(ValidationError):
        derivative_norm_bounds(cantor, EMPTY_WORD)


def test_gauss_branch_norm_endpoints(gauss):
    # |phi'| = 1/(x+1)^2 is decreasing, so the sup/inf over V sit at the ends
    v = gauss.V
    d = derivative_norm_bounds(gauss, Word((0,)))
    assert d.lo == pytest.approx(1.0 / (v.lo + 1.0) ** 2, rel=1e-12)
    d2 = derivative_norm_bounds(gauss, Word((1,)))
    assert d2.lo == pytest.approx(1.0 / (v.lo + 2.0) ** 2, rel=1e-12)
    m = derivative_min_bounds(gauss, Word((0,)))
    assert m.hi == pytest.approx(1.0 / (gauss.hull.hi + 1.0) ** 2, rel=1e-12)


def test_gauss_norm_submultiplicative(gauss):
    d01 = derivative_norm_bounds(gauss, Word((0, 1)))
    d0 = derivative_norm_bounds(gauss, Word((0,)))
    d1 = derivative_norm_bounds(gauss, Word((1,)))
    assert d01.hi <= d0.hi * d1.hi * (1 + 1e-12)
    lo01 = derivative_min_bounds(gauss, Word((0, 1)))
    lo0 = derivative_min_bounds(gauss, Word((0,)))
    lo1 = derivative_min_bounds(gauss, Word((1,)))
    assert lo01.lo >= lo0.lo * lo1.lo * (1 - 1e-12)


def test_bounded_distortion_uniform_in_depth(gauss, gauss_gamma):
    # |phi_I(x)-phi_I(y)| / (hi_I |x-y|) stays in [c_low, 1] for deep words
    from confrec import system_constants

    c_low = system_constants(gauss, gauss_gamma).c_low
    assert 0.0 < c_low <= 1.0
    rng = random.Random(99)
    hull = gauss.hull
    for depth in (3, 6, 9, 12):
        for _ in range(10):
            word = Word(tuple(rng.randrange(2) for _ in range(depth)))
            comp = compose_word(gauss, word)
            hi = derivative_norm_bounds(gauss, word).hi
            for _ in range(10):
                x = rng.uniform(hull.lo, hull.hi)
                y = rng.uniform(hull.lo, hull.hi)
                if abs(x - y) < 1e-9:
                    continue
                fx = comp.apply_iv(Interval.point(x))
                fy = comp.apply_iv(Interval.point(y))
                ratio = abs(fx.mid - fy.mid) / (hi * abs(x - y))
                assert c_low * (1 - 1e-9) <= ratio <= 1 + 1e-9


# ---------------------------------------------------------------- fixed points


def test_fixed_points_cantor(cantor):
    assert fixed_point(cantor, Word((1,))).contains(1.0)
    fp = fixed_point(cantor, Word((0, 1)))
    assert fp.contains(0.25) and fp.width < 1e-12
    fp = fixed_point(cantor, Word((1, 0)))
    assert fp.contains(0.75) and fp.width < 1e-12


def test_fixed_point_tol_validation(cantor):
    with pytest.raises(ValidationError):
        fixed_point(cantor, Word((1,)), tol=0.0)
    with pytest.raises(ValidationError):
        fixed_point(cantor, EMPTY_WORD)


def test_fixed_point_consistency(cantor, gauss):
    # phi_word(p) stays within 2 tol of p
    rng = random.Random(5)
    for ifs in (cantor, gauss):
        for _ in range(20):
            word = Word(tuple(rng.randrange(2) for _ in range(rng.randint(1, 8))))
            tol = 1e-12
            fp = fixed_point(ifs, word, tol)
            img = compose_word(ifs, word).apply_iv(fp)
            assert img.distance(fp).lo <= 2 * tol


def test_gauss_single_branch_fixed_points(gauss):
    # x = 1/(x+1) -> golden mean conjugate; x = 1/(x+2) -> sqrt(2)-1
    assert fixed_point(gauss, Word((0,))).contains((math.sqrt(5) - 1) / 2)
    assert fixed_point(gauss, Word((1,))).contains(math.sqrt(2) - 1)


# --------------------------------------------------------------- cylinder data


def test_cylinder_00(cantor):
    cd = cylinder_data(cantor, Word((0, 0)))
    assert cd.box.lo == pytest.approx(0.0, abs=1e-12)
    assert cd.box.hi == pytest.approx(1 / 9, abs=1e-12)
    assert cd.diam.mid == pytest.approx(1 / 9, abs=1e-12)
    assert cd.fixed_point.contains(0.0) or cd.fixed_point.lo <= 1e-12


def test_cylinder_1(cantor):
    cd = cylinder_data(cantor, Word((1,)))
    assert cd.box.lo == pytest.approx(2 / 3, abs=1e-12)
    assert cd.box.hi == pytest.approx(1.0, abs=1e-12)
    assert cd.diam.mid == pytest.approx(1 / 3, abs=1e-13)


def test_cylinder_nesting(cantor, gauss):
    # exact set nesting; the moebius enclosures may overhang by a few ulps
    rng = random.Random(17)
    for ifs, slack in ((cantor, 0.0), (gauss, 1e-12)):
        for _ in range(25):
            base = tuple(rng.randrange(2) for _ in range(rng.randint(1, 6)))
            ext = base + tuple(rng.randrange(2) for _ in range(rng.randint(1, 4)))
            outer = cylinder_box(ifs, Word(base))
            inner = cylinder_box(ifs, Word(ext))
            assert outer.inflate(slack).encloses(inner)


def test_cylinder_fixed_point_inside_box(cantor, gauss):
    rng = random.Random(23)
    for ifs in (cantor, gauss):
        for _ in range(15):
            word = Word(tuple(rng.randrange(2) for _ in range(rng.randint(1, 7))))
            cd = cylinder_data(ifs, word)
            assert cd.box.intersects(cd.fixed_point)


def test_cylinder_diam_distortion(gauss, gauss_gamma):
    from confrec import system_constants

    c_low = system_constants(gauss, gauss_gamma).c_low
    diam_x = gauss.diam
    rng = random.Random(31)
    for _ in range(20):
        word = Word(tuple(rng.randrange(2) for _ in range(rng.randint(1, 10))))
        cd = cylinder_data(gauss, word)
        assert cd.diam.hi <= cd.deriv_norm.hi * diam_x.hi * (1 + 1e-9)
        assert cd.diam.lo >= c_low * cd.deriv_norm.lo * diam_x.lo * (1 - 1e-9)


# -------------------------------------------------------------------- the hull


def test_cantor_hull(cantor):
    assert cantor.hull.lo == pytest.approx(0.0, abs=1e-12)
    assert cantor.hull.hi == pytest.approx(1.0, abs=1e-12)
    assert cantor.diam.mid == pytest.approx(1.0, abs=1e-10)


def test_single_map_hull_degenerate():
    box = compute_hull([Similarity1D(0.5, 0.0)], dim=1)
    assert box.lo == pytest.approx(0.0, abs=1e-12)
    assert box.hi == pytest.approx(0.0, abs=1e-12)


def test_gauss_hull_alternating_extremes(gauss):
    # min/max of the digit-{1,2} continued fractions alternate digits:
    # max = [0;1,2,1,2,...] solves x^2+2x-2=0, min = 1/(2+max)
    hi = math.sqrt(3.0) - 1.0
    lo = 1.0 / (2.0 + hi)
    assert gauss.hull.lo == pytest.approx(lo, abs=1e-10)
    assert gauss.hull.hi == pytest.approx(hi, abs=1e-10)
    # both extremes are fixed points of the two-letter words
    assert fixed_point(gauss, Word((0, 1))).contains(hi)
    assert fixed_point(gauss, Word((1, 0))).contains(lo)


def test_hull_invariance(cantor, gauss):
    for ifs in (cantor, gauss):
        for m in ifs.maps:
            assert ifs.hull.encloses(m.apply_iv(ifs.hull))
    box = attractor_hull(cantor, tol=1e-10)
    assert box.encloses(cantor.hull) or cantor.hull.encloses(box)


# ------------------------------------------------------------------- eval_pi


def test_eval_pi_periodic_prefix(cantor):
    box = eval_pi(cantor, Word((0, 1, 0, 1)))
    assert box.contains(0.25)
    assert box.width <= 3.0**-4 * (1 + 1e-9)


def test_eval_pi_first_level(cantor):
    box = eval_pi(cantor, Word((0,)))
    assert box.lo == pytest.approx(0.0, abs=1e-12)
    assert box.hi == pytest.approx(1 / 3, abs=1e-12)


def test_eval_pi_triple_one(cantor):
    box = eval_pi(cantor, Word((1, 1, 1)))
    assert box.lo == pytest.approx(26 / 27, abs=1e-12)
    assert box.hi == pytest.approx(1.0, abs=1e-12)


def test_eval_pi_needs_prefix(cantor):
    with pytest.raises(ValidationError):
        eval_pi(cantor, EMPTY_WORD)


def test_coding_consistency(cantor, gauss):
    # enclosures of periodic prefixes shrink geometrically onto fix(I)
    for ifs in (cantor, gauss):
        word = Word((0, 1))
        fp = fixed_point(ifs, word)
        prev = math.inf
        for m in (2, 4, 8, 12):
            box = eval_pi(ifs, word.periodic_prefix(m))
            assert box.intersects(fp)
            assert box.width < prev
            prev = box.width


# ------------------------------------------------------------------ 2D support


@pytest.fixture(scope="module")
def quartet2d():
    # four quarter-scale corner maps: the filled unit square
    maps = [
        Similarity2D(0.5, 0.0, False, (0.0, 0.0)),
        Similarity2D(0.5, 0.0, False, (0.5, 0.0)),
        Similarity2D(0.5, 0.0, False, (0.0, 0.5)),
        Similarity2D(0.5, 0.0, False, (0.5, 0.5)),
    ]
    return build_ifs(maps, dim=2, osc=True)


def test_2d_hull(quartet2d):
    h = quartet2d.hull
    assert h.x.lo == pytest.approx(0.0, abs=1e-10)
    assert h.x.hi == pytest.approx(1.0, abs=1e-10)
    assert h.y.hi == pytest.approx(1.0, abs=1e-10)


def test_2d_cylinder_and_fixed_point(quartet2d):
    cd = cylinder_data(quartet2d, Word((3,)))
    assert isinstance(cd.box, Box2)
    assert cd.box.x.lo == pytest.approx(0.5, abs=1e-10)
    fp = fixed_point(quartet2d, Word((3,)))
    assert fp.x.contains(1.0) and fp.y.contains(1.0)
    inner = cylinder_box(quartet2d, Word((3, 0)))
    assert cd.box.encloses(inner)


def test_2d_rotation_contraction():
    maps = [
        Similarity2D(0.4, math.pi / 4, False, (0.0, 0.0)),
        Similarity2D(0.4, -math.pi / 3, True, (1.0, 0.0)),
    ]
    ifs = build_ifs(maps, dim=2)
    d = derivative_norm_bounds(ifs, Word((0, 1)))
    assert d.lo == d.hi == pytest.approx(0.16, abs=1e-15)


def test_2d_rejects_moebius():
    with pytest.raises(ValidationError):
        build_ifs([Moebius1D(0, 1, 1, 1), Moebius1D(0, 1, 1, 2)], dim=2)


# ------------------------------------------------------- less common map mixes


def test_orientation_reversing_similarity():
    # x/3 and -x/3 + 1: the reversed branch still gives the middle-third set
    flip = build_ifs([Similarity1D(1 / 3, 0.0), Similarity1D(1 / 3, 1.0, flip=True)],
                     osc=True)
    assert flip.hull.lo == pytest.approx(0.0, abs=1e-12)
    assert flip.hull.hi == pytest.approx(1.0, abs=1e-12)
    comp = compose_word(flip, Word((1, 1)))
    # (-1/3)(-x/3 + 1) + 1 = x/9 + 2/3
    assert comp.slope == pytest.approx(1 / 9, abs=1e-16)
    assert comp.shift == pytest.approx(2 / 3, abs=1e-15)
    assert fixed_point(flip, Word((1, 1))).contains(0.75)
    from confrec import solve_gamma

    assert solve_gamma(flip).gamma.mid == pytest.approx(
        math.log(2) / math.log(3), abs=1e-12)


def test_moebius_mixed_monotonicity():
    # 1/(3-x) is increasing, 1/(3+x) decreasing; extremes solve
    # x = 1/(3-x)  ->  x = (3-sqrt(5))/2,  and  min = 1/(3 + max)
    from confrec.intervals import Interval as Iv

    mix = build_ifs(
        [Moebius1D(0, 1, -1, 3), Moebius1D(0, 1, 1, 3)],
        osc=True,
        domain=Iv(0.0, 1.0),
    )
    hi = (3.0 - math.sqrt(5.0)) / 2.0
    lo = 1.0 / (3.0 + hi)
    assert mix.hull.hi == pytest.approx(hi, abs=1e-10)
    assert mix.hull.lo == pytest.approx(lo, abs=1e-10)
    d01 = derivative_norm_bounds(mix, Word((0, 1)))
    d0 = derivative_norm_bounds(mix, Word((0,)))
    d1 = derivative_norm_bounds(mix, Word((1,)))
    assert d01.hi <= d0.hi * d1.hi * (1 + 1e-12)


def test_mixed_similarity_moebius_words():
    from confrec.intervals import Interval as Iv

    hyb = build_ifs(
        [Similarity1D(0.5, 0.0), Moebius1D(0, 1, 1, 2)],
        osc=False,
        domain=Iv(0.0, 1.0),
    )
    box = eval_pi(hyb, Word((0, 1)))
    # phi_0(phi_1(hull)) with hull = [0, 1/2]: 0.5 * [1/2.5, 1/2]
    assert box.lo == pytest.approx(0.2, abs=1e-10)
    assert box.hi == pytest.approx(0.25, abs=1e-10)
    outer = cylinder_box(hyb, Word((0,)))
    assert outer.inflate(1e-12).encloses(box)
