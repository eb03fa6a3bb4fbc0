import math
from collections import Counter
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from jumpspace.base import (
    Island, PointM, agreement_depth, annulus_coords, d_M, enumerate_points, nu,
    random_coords, random_point, random_point_in_annulus,
)
from jumpspace.errors import DomainError
from jumpspace.numeric import Dyadic


def P(*c):
    return PointM(tuple(c))


def points(depth):
    return st.tuples(*[st.integers(1, i) for i in range(1, depth + 1)]).map(PointM)


def test_point_validation():
    with pytest.raises(DomainError):
        P(1, 3)
    with pytest.raises(DomainError):
        P(2)
    assert PointM.parse("1,2,1,4") == P(1, 2, 1, 4)
    assert str(P(1, 2, 1)) == "1,2,1"


@pytest.mark.parametrize("a,b,d", [
    ((1, 2, 1), (1, 2, 1), Dyadic(0)),
    ((1, 1, 1), (1, 2, 1), Dyadic(1, 2)),
    ((1, 1, 3), (1, 1, 2), Dyadic(1, 3)),
])
def test_d_M_examples(a, b, d):
    assert d_M(P(*a), P(*b)) == d


@pytest.mark.parametrize("a,b,m", [
    ((1, 1), (1, 2), 1),
    ((1, 2, 1, 4, 5, 6), (1, 2, 1, 4, 5, 6), 6),
    ((1, 2, 1), (1, 2, 3), 2),
])
def test_agreement_depth_examples(a, b, m):
    assert agreement_depth(P(*a), P(*b)) == m


def test_depth_mismatch():
    with pytest.raises(DomainError):
        d_M(P(1, 1), P(1, 1, 1))


@pytest.mark.parametrize("k,v", [(0, 1), (3, Fraction(1, 6)), (5, Fraction(1, 120))])
def test_nu(k, v):
    assert nu(k) == v


@given(points(7), points(7), points(7))
def test_ultrametric(a, b, c):
    assert d_M(a, b) == d_M(b, a)
    assert d_M(a, b) <= max(d_M(a, c), d_M(c, b))
    assert (d_M(a, b) == 0) == (a == b)


def test_island_measures_sum_to_parent():
    # level-k islands inside a level-(k-1) island: k children of measure 1/k!
    x = P(1, 2, 3, 1, 2)
    for k in range(1, 5):
        parent = Island.around(x, k - 1)
        children = {Island.around(y, k) for y in enumerate_points(5) if y in parent}
        assert sum(c.measure for c in children) == parent.measure
        assert len(children) == k


def test_island_size_and_enumeration():
    pts = list(enumerate_points(5))
    assert len(pts) == math.factorial(5)
    isl = Island.around(P(1, 2, 1, 4, 5), 3)
    assert sum(p in isl for p in pts) == isl.size == 20
    with pytest.raises(DomainError):
        list(enumerate_points(6))


def test_random_point_first_coordinate():
    coords = random_coords(10, 1000, 0)
    assert (coords[:, 0] == 1).all()
    assert all((1 <= coords[:, i]).all() and (coords[:, i] <= i + 1).all() for i in range(10))
    assert random_point(10, 1).depth == 10


def test_annulus_agreement():
    rng = np.random.default_rng(3)
    x = random_point(8, rng)
    for k in range(1, 8):
        for _ in range(50):
            assert agreement_depth(x, random_point_in_annulus(x, k, rng)) == k
    with pytest.raises(DomainError):
        annulus_coords(x, 0, 1, rng)


def test_level2_island_frequency():
    n = 10_000
    coords = random_coords(6, n, 42)
    freq = Counter(int(c) for c in coords[:, 1])
    sigma = math.sqrt(n * 0.25)
    for v in (1, 2):
        assert abs(freq[v] - n / 2) < 3 * sigma


def test_annulus_is_uniform_within_annulus():
    # each admissible value at index k appears with probability 1/k
    x = P(1, 2, 1, 4, 2)
    n, k = 12_000, 3
    coords = annulus_coords(x, k, n, 7)
    freq = Counter(int(c) for c in coords[:, k])
    assert set(freq) == {1, 2, 3}
    sigma = math.sqrt(n * (1 / 3) * (2 / 3))
    assert all(abs(freq[v] - n / 3) < 3 * sigma for v in freq)
