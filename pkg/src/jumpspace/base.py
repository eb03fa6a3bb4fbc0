"""The truncated sequence space ``M_N`` with its ultrametric and island measure.

A point is a sequence ``a_1..a_N`` with ``a_i`` in ``{1..i}``.  Two points at
agreement depth ``m`` (first ``m`` coordinates equal) are at distance
``1/2**(m+1)``; the island of level ``k`` around a point has measure ``1/k!``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import DomainError
from .numeric import Dyadic

DEFAULT_DEPTH = 12
MAX_ENUMERATION_DEPTH = 5


@dataclass(frozen=True)
class PointM:
    """A point of ``M`` truncated at depth ``len(coords)``."""

    coords: tuple[int, ...]

    def __post_init__(self):
        coords = tuple(int(c) for c in self.coords)
        if not coords:
            raise DomainError("a point needs at least one coordinate")
        for i, c in enumerate(coords, start=1):
            if not 1 <= c <= i:
                raise DomainError(f"coordinate {i} is {c}, must lie in 1..{i}")
        object.__setattr__(self, "coords", coords)

    @classmethod
    def _unchecked(cls, coords: tuple[int, ...]) -> "PointM":
        self = object.__new__(cls)
        object.__setattr__(self, "coords", coords)
        return self

    @classmethod
    def parse(cls, text: str) -> "PointM":
        try:
            coords = tuple(int(c) for c in text.split(","))
        except ValueError as exc:
            raise DomainError(f"malformed point {text!r}") from exc
        return cls(coords)

    @classmethod
    def origin(cls, depth: int = DEFAULT_DEPTH) -> "PointM":
        return cls._unchecked((1,) * depth)

    @property
    def depth(self) -> int:
        return len(self.coords)

    def extended(self, depth: int, fill=None) -> "PointM":
        """The point continued to ``depth`` coordinates.

        Extra coordinates are 1 unless ``fill`` (a sequence of the extra values)
        is given.  Balls centred on a point have measures that do not depend on
        these extra coordinates, which is what makes the extension harmless.
        """
        extra = depth - self.depth
        if extra <= 0:
            return self
        if fill is None:
            return PointM._unchecked(self.coords + (1,) * extra)
        return PointM(self.coords + tuple(fill)[:extra])

    def __str__(self) -> str:
        return ",".join(map(str, self.coords))

    def __len__(self) -> int:
        return len(self.coords)

    def __getitem__(self, i):
        return self.coords[i]


@dataclass(frozen=True)
class Island:
    """Points sharing a fixed prefix of length ``level``; a ball of radius 1/2**level."""

    prefix: tuple[int, ...]
    depth: int

    def __post_init__(self):
        if not 0 <= len(self.prefix) <= self.depth:
            raise DomainError("island level must lie in 0..depth")
        for i, c in enumerate(self.prefix, start=1):
            if not 1 <= c <= i:
                raise DomainError(f"prefix entry {i} is {c}, must lie in 1..{i}")

    @classmethod
    def around(cls, x: PointM, level: int) -> "Island":
        level = min(level, x.depth)
        return cls(x.coords[:level], x.depth)

    @property
    def level(self) -> int:
        return len(self.prefix)

    @property
    def measure(self) -> Fraction:
        return nu(self.level)

    @property
    def size(self) -> int:
        """Number of points of ``M_N`` in the island."""
        return math.factorial(self.depth) // math.factorial(self.level)

    def __contains__(self, x: PointM) -> bool:
        return x.depth == self.depth and x.coords[: self.level] == self.prefix


def _check_same_depth(a: PointM, b: PointM) -> None:
    if len(a.coords) != len(b.coords):
        raise DomainError(f"depth mismatch: {a.depth} vs {b.depth}")


def agreement_depth(a: PointM, b: PointM) -> int:
    """Length of the longest common prefix of ``a`` and ``b``."""
    _check_same_depth(a, b)
    ca, cb = a.coords, b.coords
    if ca == cb:
        return len(ca)
    for i, (p, q) in enumerate(zip(ca, cb)):
        if p != q:
            return i
    return len(ca)


def d_M(a: PointM, b: PointM) -> Dyadic:
    """``1/2**k`` with ``k`` the first index where ``a`` and ``b`` differ; 0 if equal."""
    m = agreement_depth(a, b)
    if m == a.depth:
        return Dyadic(0)
    return Dyadic(1, m + 1)


@lru_cache(maxsize=None)
def nu(k: int) -> Fraction:
    """Measure ``1/k!`` of an island of level ``k``."""
    if k < 0:
        raise DomainError("island level must be nonnegative")
    return Fraction(1, math.factorial(k))


def as_rng(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def random_coords(depth: int, size: int, rng) -> np.ndarray:
    """``size`` independent nu-distributed points as an ``(size, depth)`` int array."""
    rng = as_rng(rng)
    highs = np.arange(2, depth + 2)
    return rng.integers(1, highs, size=(size, depth))


def random_point(depth: int, rng) -> PointM:
    """A nu-distributed point: coordinate i uniform on ``{1..i}``."""
    row = random_coords(depth, 1, rng)[0]
    return PointM._unchecked(tuple(int(c) for c in row))


def annulus_coords(x: PointM, k: int, size: int, rng) -> np.ndarray:
    """Batch version of :func:`random_point_in_annulus`."""
    n = x.depth
    if not 1 <= k <= n - 1:
        raise DomainError(f"annulus level {k} must lie in 1..{n - 1}")
    rng = as_rng(rng)
    out = random_coords(n, size, rng)
    out[:, :k] = x.coords[:k]
    # index k (0-based) has alphabet {1..k+1}; skip x's value
    v = rng.integers(1, k + 1, size=size)
    v[v >= x.coords[k]] += 1
    out[:, k] = v
    return out


def random_point_in_annulus(x: PointM, k: int, rng) -> PointM:
    """Uniform (nu-distributed) point ``y`` with ``agreement_depth(x, y) == k``."""
    row = annulus_coords(x, k, 1, rng)[0]
    return PointM._unchecked(tuple(int(c) for c in row))


def enumerate_points(depth: int):
    """Every point of ``M_depth``; only for small depths (test oracle)."""
    if depth > MAX_ENUMERATION_DEPTH:
        raise DomainError(f"enumeration limited to depth <= {MAX_ENUMERATION_DEPTH}")
    ranges = [range(1, i + 1) for i in range(1, depth + 1)]
    for coords in itertools.product(*ranges):
        yield PointM._unchecked(coords)
