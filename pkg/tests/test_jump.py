import math
from collections import Counter
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from jumpspace.base import PointM, agreement_depth, random_point
from jumpspace.errors import DomainError, PreconditionError
from jumpspace.jump import (
    BallSampler, FinitePointSet, JumpLevel, SpacePoint, admissible_radius, ball_decompose,
    ball_measure, ball_measure_restricted, cover_admissibility, d_infty, d_p,
    distance_to_set, rectangle_cover, resolving_depth, sample_ball,
)
from jumpspace.numeric import ONE, ZERO, Dyadic, IntervalUnion
from jumpspace.oracles import (
    brute_force_dp, monte_carlo_ball_measure, rectangle_union_measure, vectorized_dp,
)
from jumpspace.selftest import literal_section

D = Dyadic.parse
X3 = PointM((1, 1, 1))
Y3 = PointM((1, 2, 1))


def sp(text):
    return SpacePoint.parse(text)


def space_points(depth, bits=12):
    base = st.tuples(*[st.integers(1, i) for i in range(1, depth + 1)]).map(PointM)
    height = st.integers(0, 1 << bits).map(lambda n: Dyadic(n, bits))
    return st.builds(SpacePoint, base, height)


def test_parse_and_validation():
    p = sp("1,2,1,4@11/64")
    assert p.base == PointM((1, 2, 1, 4)) and p.height == D("11/64")
    assert str(p) == "1,2,1,4@11/64"
    with pytest.raises(DomainError):
        SpacePoint(X3, D("3/2"))
    with pytest.raises(DomainError):
        d_p(sp("1,1@0"), sp("1,1,1@0"))


@pytest.mark.parametrize("p,q,expected", [
    ((X3, "3/8"), (X3, "7/8"), "1/2"),
    ((X3, "3/8"), (Y3, "3/8"), "1/4"),
    ((X3, "1/4"), (Y3, "3/4"), "1/2"),
])
def test_dp_examples(p, q, expected):
    p = SpacePoint(p[0], D(p[1]))
    q = SpacePoint(q[0], D(q[1]))
    assert d_p(p, q) == D(expected)
    assert brute_force_dp(p, q) == D(expected)


def test_d_infty_examples():
    p, q = SpacePoint(X3, D("3/8")), SpacePoint(Y3, D("3/8"))
    assert d_infty(p, q) == D("1/4")
    assert d_p(p, q) <= 3 * d_infty(p, q)
    assert d_infty(SpacePoint(X3, D("1/8")), SpacePoint(X3, D("5/8"))) == D("1/2")


@settings(max_examples=300)
@given(space_points(5), space_points(5), space_points(5))
def test_dp_pseudometric(p, q, z):
    assert d_p(p, q) == d_p(q, p)
    assert d_p(p, p) == 0
    assert d_p(p, q) <= d_p(p, z) + d_p(z, q)
    assert abs(p.height - q.height) <= d_p(p, q) <= 3 * d_infty(p, q)


@settings(max_examples=300)
@given(space_points(6), space_points(6))
def test_dp_matches_brute_force(p, q):
    assert d_p(p, q) == brute_force_dp(p, q, 12)


def test_vectorized_dp_matches_closed_form():
    rng = np.random.default_rng(11)
    c = SpacePoint(random_point(8, rng), Dyadic(int(rng.integers(0, 1 << 20)), 20))
    coords = np.array([random_point(8, rng).coords for _ in range(500)])
    heights = rng.integers(0, (1 << 20) + 1, size=500)
    got = vectorized_dp(c, coords, heights, 20)
    for row, h, g in zip(coords, heights, got):
        q = SpacePoint(PointM(tuple(int(v) for v in row)), Dyadic(int(h), 20))
        assert Dyadic(int(g), 20) == d_p(c, q)


def test_distance_to_set():
    x = PointM((1, 2, 1))
    assert distance_to_set(SpacePoint(x, D("3/8")), JumpLevel(D("1/2"))) == D("1/8")
    p = SpacePoint(x, D("5/16"))
    assert distance_to_set(p, FinitePointSet((p,))) == 0
    assert distance_to_set(SpacePoint(x, D("1/4")), JumpLevel(D("1/4"))) == 0
    with pytest.raises(DomainError):
        distance_to_set(p, FinitePointSet(()))


# -- balls ------------------------------------------------------------------

C0 = SpacePoint(X3, D("5/16"))


def test_small_ball_is_center_line_only():
    dec = ball_decompose(C0, D("1/16"))
    assert all(not dec.section(k) for k in (1, 2))
    assert dec.center_line == IntervalUnion.single(D("1/4"), D("3/8"))
    assert ball_measure(C0, D("1/16")) == Fraction(1, 48)


def test_ball_measure_examples():
    assert ball_measure(C0, D("1/4")) == Fraction(5, 16)
    dec = ball_decompose(C0, D("1/4"))
    assert dec.section(1).length == D("1/8")
    assert dec.section(2).length == D("1/2")
    assert dec.center_line.length == D("1/2")
    for r in ("2", "3", "17/8"):
        assert ball_measure(C0, D(r)) == 1
        dec = ball_decompose(C0, D(r))
        assert all(sec == IntervalUnion.single(ZERO, ONE) for _, _, sec in dec.sections())


def test_decomposition_structure():
    rng = np.random.default_rng(5)
    for _ in range(30):
        c = SpacePoint(random_point(6, rng), Dyadic(int(rng.integers(0, 1 << 10)), 10))
        r = Dyadic(int(rng.integers(1, 1 << 7)), 8)
        dec = ball_decompose(c, r)
        full = IntervalUnion.single(c.height - r, c.height + r).clip(ZERO, ONE)
        secs = [dec.section(k) for k in range(1, 7)]
        for a, b in zip(secs, secs[1:]):
            assert a.issubset(b)
        assert all(s.issubset(full) for s in secs)
        for k in range(1, 6):
            assert dec.section(k) == literal_section(c.height, r, k)
        assert dec.measure() == sum(
            (w * s.length.to_fraction() for _, w, s in dec.sections()), Fraction(0))


def test_ball_measure_matches_rectangle_union_oracle():
    rng = np.random.default_rng(9)
    for depth in (3, 4):
        for _ in range(15):
            c = SpacePoint(random_point(depth, rng), Dyadic(int(rng.integers(0, 1 << 8)), 8))
            r = Dyadic(int(rng.integers(1, 1 << 8)), 8)
            assert ball_measure(c, r) == rectangle_union_measure(c, r)


def test_membership_matches_dp():
    rng = np.random.default_rng(1)
    dec = ball_decompose(sp("1,2,1,4,2,5@11/64"), D("3/32"))
    for _ in range(2000):
        q = SpacePoint(random_point(6, rng), Dyadic(int(rng.integers(0, 1 << 9)), 9))
        assert dec.contains(q) == (d_p(dec.center, q) < dec.radius)


def test_restricted_measure():
    r = D("1/16")
    t = C0.height
    band = IntervalUnion.single(t - r.half(), t + r.half())
    assert ball_measure_restricted(C0, r, IntervalUnion()) == ball_measure(C0, r)
    assert ball_measure_restricted(C0, r, band) == Fraction(1, 96)
    assert ball_measure_restricted(C0, r, IntervalUnion.single(t - r, t + r)) == 0


def test_radius_must_be_positive():
    with pytest.raises(DomainError):
        ball_measure(C0, ZERO)


def test_monte_carlo_oracle_on_example():
    p, se = monte_carlo_ball_measure(C0, D("1/4"), 40_000, 3)
    assert abs(p - 5 / 16) < 3 * se


# -- sampling ---------------------------------------------------------------

def test_samples_lie_in_ball():
    c = sp("1,2,1,4,2,5,3,8@11/64")
    for q in sample_ball(c, D("3/16"), 0, size=2000):
        assert d_p(c, q) < D("3/16")


def test_center_line_sampling_is_uniform():
    pts = sample_ball(C0, D("1/16"), 4, size=5000)
    assert all(q.base == X3 and D("1/4") < q.height < D("3/8") for q in pts)
    lower = sum(q.height < D("5/16") for q in pts)
    assert abs(lower - 2500) < 3 * math.sqrt(5000 / 4)


def test_level_frequencies_match_weights():
    c = sp("1,2,1,4,2,5,3,8@11/64")
    sampler = BallSampler(ball_decompose(c, D("1/8")))
    probs = sampler.level_probabilities()
    assert sum(probs.values()) == 1
    n = 100_000
    counts = Counter(agreement_depth(c.base, q.base) for q in sampler.sample(n, 8))
    for k, pk in probs.items():
        sigma = math.sqrt(n * float(pk) * (1 - float(pk)))
        assert abs(counts[k] - n * float(pk)) <= 3 * sigma + 1e-9


def test_sampler_determinism():
    c = sp("1,2,1,4@3/8")
    a = sample_ball(c, D("1/4"), 123, size=50)
    b = sample_ball(c, D("1/4"), 123, size=50)
    assert a == b


# -- cover ------------------------------------------------------------------

def test_cover_inadmissible_radius_names_condition():
    with pytest.raises(PreconditionError, match="smallness condition"):
        cover_admissibility(sp("1,2,1,4@11/64"), D("1/8"), Fraction(1, 10))


def test_cover_rejects_height_on_coarse_grid():
    # 1365/4096 is on grid level 12, so every window around it meets level 12
    # and the smallness condition needs level 20 for epsilon 1/10
    c = SpacePoint(PointM.origin(12), D("1365/4096"))
    with pytest.raises(PreconditionError, match="smallness condition"):
        admissible_radius(c, Fraction(1, 10))


def test_cover_at_depth_12_is_independent_of_extension():
    rng = np.random.default_rng(23)
    eps = Fraction(1, 10)
    for _ in range(3):
        c = _deep_center(rng, depth=12)
        r = admissible_radius(c, eps)
        res = rectangle_cover(c, r, eps)
        assert res.work_depth == resolving_depth(c, r, res.k1) > 12
        assert res.uncovered_fraction < eps and res.uncovered_fraction <= res.bound
        fill = [int(rng.integers(1, k + 1)) for k in range(13, res.work_depth + 6)]
        other = SpacePoint(c.base.extended(res.work_depth + 5, fill), c.height)
        assert ball_measure(other, r) == res.ball_measure
        assert rectangle_cover(other, r, eps).uncovered_fraction == res.uncovered_fraction


def _deep_center(rng, depth=160, bits=200):
    mantissa = int.from_bytes(rng.bytes(bits // 8), "big") | 1
    return SpacePoint(random_point(depth, rng), Dyadic(mantissa, bits))


@pytest.mark.parametrize("eps", [Fraction(1, 10), Fraction(1, 50)])
def test_cover_with_explicit_deep_base(eps):
    rng = np.random.default_rng(17)
    for _ in range(3):
        c = _deep_center(rng)
        r = admissible_radius(c, eps)
        res = rectangle_cover(c, r, eps)
        dec = ball_decompose(c, r)
        assert 1 <= len(res.rectangles) <= 3
        assert all(dec.contains_rectangle(R) for R in res.rectangles)
        assert res.uncovered_fraction < eps
        assert res.uncovered_fraction <= res.bound == Fraction(2, res.k1 + 1)


def test_contains_rectangle_detects_escape():
    from jumpspace.base import Island
    from jumpspace.jump import Rectangle
    c = sp("1,2,1,4@11/64")
    dec = ball_decompose(c, D("1/16"))
    # centre line is (7/64, 15/64)
    assert dec.contains_rectangle(Rectangle(Island.around(c.base, 4), D("3/16"), D("1/32")))
    assert not dec.contains_rectangle(Rectangle(Island.around(c.base, 4), D("3/16"), D("1/16")))
    # the level-3 annulus section is only (7/64, 9/64)
    assert not dec.contains_rectangle(Rectangle(Island.around(c.base, 3), D("1/8"), D("1/32")))


def test_half_measure_counterexample():
    # level-3 grid point u = 5/8 at distance r/4 from t: the dominant annulus
    # section is centred on u, so most of it lies in the band |s - t| < r/2
    r = D("1/32")
    t = D("5/8") - r.shift(-2)
    c = SpacePoint(PointM.parse("1,2,1,4,2"), t)
    band = IntervalUnion.single(t - r.half(), t + r.half())
    outside = ball_measure_restricted(c, r, band)
    assert outside == rectangle_union_measure(c, r, band) == Fraction(7, 2560)
    assert ball_measure(c, r) == rectangle_union_measure(c, r) == Fraction(61, 7680)
    assert outside / ball_measure(c, r) == Fraction(21, 61) < Fraction(1, 2)


def test_band_share_at_least_a_third_for_unclipped_balls():
    rng = np.random.default_rng(12)
    seen = 0
    while seen < 500:
        t = Dyadic(int(rng.integers(0, (1 << 20) + 1)), 20)
        r = Dyadic(int(rng.integers(1, (1 << 12) + 1)), 16)
        if t - r < 0 or t + r > 1:
            continue
        seen += 1
        c = SpacePoint(random_point(10, rng), t)
        band = IntervalUnion.single(t - r.half(), t + r.half())
        assert 3 * ball_measure_restricted(c, r, band) >= ball_measure(c, r)
