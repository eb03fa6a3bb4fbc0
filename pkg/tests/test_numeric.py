from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from jumpspace.errors import DomainError
from jumpspace.numeric import (
    ONE, ZERO, Dyadic, IntervalUnion, as_dyadic, format_exact, grid_distance,
    grid_window, interval_union_length,
)

dyadics = st.builds(Dyadic, st.integers(-10**6, 10**6), st.integers(0, 30))
F = Fraction


def test_canonical_form():
    d = Dyadic(12, 5)
    assert (d.mantissa, d.exponent) == (3, 3)
    assert Dyadic(0, 7).exponent == 0
    assert Dyadic(8, 2) == 2 and Dyadic(8, 2).exponent == 0
    assert Dyadic(3, -2) == 12 and Dyadic(3, -2).exponent == 0


@given(dyadics, dyadics)
def test_arithmetic_matches_fraction(a, b):
    fa, fb = a.to_fraction(), b.to_fraction()
    assert (a + b).to_fraction() == fa + fb
    assert (a - b).to_fraction() == fa - fb
    assert (a * b).to_fraction() == fa * fb
    assert abs(a).to_fraction() == abs(fa)
    assert (a < b) == (fa < fb) and (a == b) == (fa == fb)
    assert min(a, b).to_fraction() == min(fa, fb)
    assert a.half().to_fraction() == fa / 2 and a.double().to_fraction() == 2 * fa
    assert isinstance(a + b, Dyadic)


@given(dyadics)
def test_hash_and_fraction_interop(a):
    fa = a.to_fraction()
    assert hash(a) == hash(fa)
    assert a == fa
    assert isinstance(a + F(1, 3), Fraction)
    assert a + F(1, 3) == fa + F(1, 3)


@given(dyadics)
def test_canonical_invariant(a):
    assert a.exponent >= 0
    assert a.mantissa % 2 == 1 or a.exponent == 0


def test_division_stays_dyadic_for_powers_of_two():
    assert isinstance(Dyadic(3, 2) / 4, Dyadic)
    assert Dyadic(3, 2) / 4 == F(3, 16)
    assert not isinstance(Dyadic(3, 2) / 3, Dyadic)


@pytest.mark.parametrize("text,value", [
    ("3/8", F(3, 8)), ("5/2^4", F(5, 16)), ("0.375", F(3, 8)), ("1", F(1)), ("-1/2", F(-1, 2)),
])
def test_parse(text, value):
    assert Dyadic.parse(text) == value


@pytest.mark.parametrize("text", ["1/3", "0.1", "x"])
def test_parse_rejects_non_dyadic(text):
    with pytest.raises((DomainError, ValueError)):
        Dyadic.parse(text)


def test_format_exact():
    assert format_exact(Dyadic(5, 4)) == "5/16"
    assert format_exact(F(1, 48)) == "1/48"
    assert format_exact(Dyadic(2, 0)) == "2"


@pytest.mark.parametrize("t,k,expected", [
    ("3/8", 1, ("1/8", "1/2")),
    ("1/2", 3, ("0", "1/2")),
    ("11/64", 4, ("1/64", "3/16")),
])
def test_grid_distance(t, k, expected):
    d, u = grid_distance(Dyadic.parse(t), k)
    assert (d, u) == tuple(Dyadic.parse(e) for e in expected)


def test_grid_distance_domain():
    with pytest.raises(DomainError):
        grid_distance(Dyadic(3, 1), 2)


@given(st.integers(0, 2**16), st.integers(0, 10))
def test_grid_distance_matches_scan(n, k):
    t = Dyadic(n, 16)
    d, u = grid_distance(t, k)
    best = min(abs(t - Dyadic(j, k)) for j in range((1 << k) + 1))
    assert d == best and abs(t - u) == d


@pytest.mark.parametrize("k,t,r,expected", [
    (1, "3/8", "1/4", ["1/2"]),
    (0, "1/2", "1", ["0", "1"]),
    (2, "5/16", "1/32", []),
])
def test_grid_window(k, t, r, expected):
    got = grid_window(k, Dyadic.parse(t), Dyadic.parse(r))
    assert got == [Dyadic.parse(e) for e in expected]


@pytest.mark.parametrize("intervals,length", [
    ([("0", "1/2"), ("1/4", "3/4")], "3/4"),
    ([], "0"),
    ([("0", "1/4"), ("1/2", "5/8")], "3/8"),
])
def test_interval_union_length(intervals, length):
    ivs = [(Dyadic.parse(a), Dyadic.parse(b)) for a, b in intervals]
    assert interval_union_length(ivs) == Dyadic.parse(length)


intervals = st.lists(
    st.tuples(st.integers(0, 64), st.integers(1, 16)).map(lambda p: (Dyadic(p[0], 6), Dyadic(p[0] + p[1], 6))),
    max_size=8,
)


@given(intervals, intervals)
def test_interval_union_properties(a, b):
    ua, ub = IntervalUnion(a), IntervalUnion(b)
    both = ua.union(ub)
    inter = ua.intersection(ub)
    # inclusion-exclusion on lengths
    assert both.length + inter.length == ua.length + ub.length
    assert ua.issubset(both) and inter.issubset(ua)
    assert ua.difference_length(ub) == ua.length - inter.length
    pieces = list(both)
    assert all(lo < hi for lo, hi in pieces)
    assert all(pieces[i][1] <= pieces[i + 1][0] for i in range(len(pieces) - 1))


def test_open_interval_membership():
    u = IntervalUnion([(ZERO, Dyadic(1, 1)), (Dyadic(1, 1), ONE)])
    assert not u.contains(Dyadic(1, 1))
    assert u.contains(Dyadic(1, 2)) and not u.contains(ZERO)
    assert u.length == 1
    assert u.clip(Dyadic(1, 2), ONE).length == Dyadic(3, 2)


def test_as_dyadic_rejects_non_dyadic():
    assert as_dyadic(F(3, 8)) == F(3, 8)
    with pytest.raises(DomainError):
        as_dyadic(F(1, 3))
