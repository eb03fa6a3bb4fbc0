"""The pseudometric space ``(M x [0,1], d_p)`` and exact ball measures.

Moving vertically costs height; at a grid height ``u`` of level ``k`` a path may
jump horizontally inside an island of level ``k``.  For two points whose bases
agree to depth ``m`` this gives the closed form

    d_p = |t - s|                          if some u in I_m lies between t and s
    d_p = |t - s| + 2 dist([t, s], I_m)    otherwise,

and ``|t - s|`` when the bases coincide.  Balls are decomposed by agreement
depth with the centre (the annulus decomposition), which makes their
``nu x Lebesgue`` measure an exact finite sum.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence, Union

import numpy as np

from .base import (
    Island,
    PointM,
    agreement_depth,
    annulus_coords,
    as_rng,
    d_M,
    nu,
)
from .errors import DomainError, PreconditionError
from .numeric import ONE, ZERO, Dyadic, IntervalUnion, as_dyadic, as_rational

# resolution of the sampler: piece choice to 2**-62, heights to 2**-40
_CHOICE_BITS = 62
_HEIGHT_BITS = 40


@dataclass(frozen=True)
class SpacePoint:
    """A point ``(x, t)`` of ``M x [0,1]``."""

    base: PointM
    height: Dyadic

    def __post_init__(self):
        h = as_dyadic(self.height)
        if h < 0 or h > 1:
            raise DomainError(f"height {h} outside [0, 1]")
        object.__setattr__(self, "height", h)

    @classmethod
    def parse(cls, text: str) -> "SpacePoint":
        """Parse ``"1,2,1,4@11/64"``."""
        try:
            base, height = text.split("@")
        except ValueError as exc:
            raise DomainError(f"expected 'coords@height', got {text!r}") from exc
        return cls(PointM.parse(base), Dyadic.parse(height))

    @property
    def depth(self) -> int:
        return self.base.depth

    def with_height(self, h) -> "SpacePoint":
        return SpacePoint(self.base, as_dyadic(h))

    def __str__(self) -> str:
        return f"{self.base}@{self.height}"


@dataclass(frozen=True)
class JumpLevel:
    """The horizontal slice ``M x {height}``."""

    height: Dyadic

    def __post_init__(self):
        object.__setattr__(self, "height", as_dyadic(self.height))

    def __str__(self) -> str:
        return f"jump:{self.height}"


@dataclass(frozen=True)
class FinitePointSet:
    points: tuple[SpacePoint, ...]

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(self.points))

    def __str__(self) -> str:
        return "points:" + ";".join(map(str, self.points))


SetDescriptor = Union[JumpLevel, FinitePointSet]


def _check_pair(p: SpacePoint, q: SpacePoint) -> None:
    if p.base.depth != q.base.depth:
        raise DomainError(f"depth mismatch: {p.depth} vs {q.depth}")


def vertical_cost(t: Dyadic, s: Dyadic, m: int) -> Dyadic:
    """Cheapest ``|t-u| + |u-s|`` over grid points ``u`` of level ``m``."""
    if t <= s:
        lo, hi = t, s
    else:
        lo, hi = s, t
    n = lo.ceil_index(m)
    if n <= hi.floor_index(m):
        return hi - lo
    below = lo - Dyadic(n - 1, m)
    above = Dyadic(n, m) - hi
    return hi - lo + 2 * min(below, above)


def d_p(p: SpacePoint, q: SpacePoint) -> Dyadic:
    """Jump-level pseudometric between two points of the same depth."""
    _check_pair(p, q)
    m = agreement_depth(p.base, q.base)
    if m == p.base.depth:
        return abs(p.height - q.height)
    return vertical_cost(p.height, q.height, m)


def d_infty(p: SpacePoint, q: SpacePoint) -> Dyadic:
    """``max(d_M(x, y), |t - s|)``."""
    _check_pair(p, q)
    return max(d_M(p.base, q.base), abs(p.height - q.height))


def distance_to_set(p: SpacePoint, S: SetDescriptor) -> Dyadic:
    if isinstance(S, JumpLevel):
        # d_p >= |t - s| and the same-base point attains it
        return abs(p.height - S.height)
    if isinstance(S, FinitePointSet):
        if not S.points:
            raise DomainError("distance to an empty point set")
        return min(d_p(p, q) for q in S.points)
    raise TypeError(f"unsupported set descriptor {S!r}")


@dataclass(frozen=True)
class Rectangle:
    """``island x (center - half_width, center + half_width)`` with center on the island's grid."""

    island: Island
    center: Dyadic
    half_width: Dyadic

    def __post_init__(self):
        object.__setattr__(self, "center", as_dyadic(self.center))
        object.__setattr__(self, "half_width", as_dyadic(self.half_width))
        if self.half_width <= 0:
            raise DomainError("rectangle half-width must be positive")
        if self.center.level > self.island.level:
            raise DomainError(f"center {self.center} is not on grid level {self.island.level}")

    @property
    def level(self) -> int:
        return self.island.level

    @property
    def vertical(self) -> IntervalUnion:
        """The height interval, clipped to [0, 1]."""
        return IntervalUnion.single(self.center - self.half_width,
                                    self.center + self.half_width).clip(ZERO, ONE)

    @property
    def measure(self) -> Fraction:
        return self.island.measure * self.vertical.length.to_fraction()

    def __contains__(self, q: SpacePoint) -> bool:
        return q.base in self.island and abs(q.height - self.center) < self.half_width


@dataclass(frozen=True)
class BallDecomposition:
    """Open ball ``{q : d_p(center, q) < radius}`` split by agreement depth.

    ``levels[k-1]`` is the height section ``V_k`` of points whose base agrees
    with the centre to depth exactly ``k``; that annulus has base measure
    ``nu(k) - nu(k+1)``.  ``center_line`` is the section over the centre's own
    base (weight ``nu(N)``).  All sections are clipped to [0, 1].
    """

    center: SpacePoint
    radius: Dyadic
    levels: tuple[IntervalUnion, ...]
    center_line: IntervalUnion
    _open_levels: tuple[IntervalUnion, ...] = field(repr=False, compare=False)
    _open_center: IntervalUnion = field(repr=False, compare=False)

    @property
    def depth(self) -> int:
        return self.center.depth

    def weight(self, k: int) -> Fraction:
        """Base measure of the depth-``k`` annulus (``k == N`` is the centre's own island)."""
        n = self.depth
        if k == n:
            return nu(n)
        if not 1 <= k < n:
            raise DomainError(f"level {k} outside 1..{n}")
        return nu(k) - nu(k + 1)

    def section(self, k: int) -> IntervalUnion:
        """Clipped height section at agreement depth ``k`` (``k == N``: centre line)."""
        if k == self.depth:
            return self.center_line
        return self.levels[k - 1]

    def sections(self):
        """Yield ``(k, weight, section)`` for k = 1..N."""
        for k in range(1, self.depth + 1):
            yield k, self.weight(k), self.section(k)

    def measure(self) -> Fraction:
        total = Fraction(0)
        for _, w, sec in self.sections():
            if sec:
                total += w * sec.length.to_fraction()
        return total

    def restricted_measure(self, excluded: IntervalUnion) -> Fraction:
        """Measure of the part of the ball whose height is outside ``excluded``."""
        total = Fraction(0)
        for _, w, sec in self.sections():
            if sec:
                total += w * sec.difference_length(excluded).to_fraction()
        return total

    def contains(self, q: SpacePoint) -> bool:
        _check_pair(self.center, q)
        k = agreement_depth(self.center.base, q.base)
        sec = self._open_center if k == self.depth else self._open_levels[k - 1]
        return sec.contains(q.height)

    __contains__ = contains

    def contains_rectangle(self, rect: Rectangle) -> bool:
        """Exact set containment of a rectangle in the ball."""
        x = self.center.base
        n = self.depth
        lo = rect.center - rect.half_width
        hi = rect.center + rect.half_width
        if rect.island.depth != n:
            raise DomainError("rectangle depth differs from ball depth")
        prefix = rect.island.prefix
        if x.coords[: len(prefix)] == prefix:
            depths = range(rect.level, n + 1)
        else:
            j = 0
            while x.coords[j] == prefix[j]:
                j += 1
            depths = (j,)
        for k in depths:
            sec = self._open_center if k == n else self._open_levels[k - 1]
            # rectangle heights are restricted to [0, 1]
            inner_lo, inner_hi = max(lo, ZERO), min(hi, ONE)
            if inner_lo < inner_hi and not sec.covers(inner_lo, inner_hi):
                return False
            for edge in (ZERO, ONE):
                if lo < edge < hi and not sec.contains(edge):
                    return False
        return True

    def to_json(self) -> dict:
        def encode(sec: IntervalUnion) -> list:
            return [[str(lo), str(hi)] for lo, hi in sec]

        levels = []
        for k, w, sec in self.sections():
            levels.append({
                "level": k,
                "weight": str(w),
                "intervals": encode(sec),
                "length": str(sec.length),
            })
        return {
            "center": str(self.center),
            "radius": str(self.radius),
            "depth": self.depth,
            "measure": str(self.measure()),
            "levels": levels[:-1],
            "center_line": levels[-1],
        }


def _check_radius(r) -> Dyadic:
    r = as_dyadic(r)
    if r <= 0:
        raise DomainError("radius must be positive")
    return r


def _level_section(t: Dyadic, r: Dyadic, k: int) -> list[tuple[Dyadic, Dyadic]]:
    # The rectangles over grid points u <= t all share the left end t - r and are
    # nested, as are those over u >= t (right end t + r); only the grid points
    # adjacent to t matter.
    pieces = []
    n_lo = t.floor_index(k)
    u = Dyadic(n_lo, k)
    if t - u < r:
        pieces.append((t - r, 2 * u - t + r))
    n_hi = t.ceil_index(k)
    if n_hi != n_lo:
        u = Dyadic(n_hi, k)
        if u - t < r:
            pieces.append((2 * u - t - r, t + r))
    return pieces


@lru_cache(maxsize=8192)
def ball_decompose(center: SpacePoint, r) -> BallDecomposition:
    """Exact per-depth description of the open ball of radius ``r``."""
    r = _check_radius(r)
    t = center.height
    n = center.depth
    full = IntervalUnion.single(t - r, t + r)
    full_clipped = full.clip(ZERO, ONE)
    open_levels = []
    clipped = []
    saturated = False
    for k in range(1, n):
        if saturated:
            open_levels.append(full)
            clipped.append(full_clipped)
            continue
        sec = IntervalUnion._from_pairs(_level_section(t, r, k))
        if sec == full:
            saturated = True
        open_levels.append(sec)
        clipped.append(sec.clip(ZERO, ONE))
    return BallDecomposition(center, r, tuple(clipped), full_clipped,
                             tuple(open_levels), full)


def ball_measure(center: SpacePoint, r) -> Fraction:
    """``nu x Lebesgue`` measure of the open ball, exact."""
    return ball_decompose(center, as_dyadic(r)).measure()


def ball_measure_restricted(center: SpacePoint, r, excluded: IntervalUnion) -> Fraction:
    """Ball measure minus the part whose heights fall in ``excluded``."""
    return ball_decompose(center, as_dyadic(r)).restricted_measure(excluded)


class BallSampler:
    """Draws points from ``nu x Lebesgue`` restricted to a ball, normalized.

    An interval piece of some section is chosen with probability proportional
    to ``weight * length`` (resolved to 2**-62), then a height uniformly inside
    it (resolved to 2**-40, always strictly inside the open interval), then a
    base point uniformly in the matching annulus.
    """

    def __init__(self, decomposition: BallDecomposition):
        self.decomposition = decomposition
        pieces = []
        masses = []
        for k, w, sec in decomposition.sections():
            for lo, hi in sec:
                pieces.append((k, lo, hi))
                masses.append(w * (hi - lo).to_fraction())
        total = sum(masses, Fraction(0))
        if total == 0:
            raise DomainError("ball has zero measure")
        self.total = total
        self.pieces = pieces
        scale = 1 << _CHOICE_BITS
        acc = Fraction(0)
        thresholds = []
        for m in masses:
            acc += m
            thresholds.append(int(acc * scale / total))
        thresholds[-1] = scale
        self._thresholds = np.array(thresholds, dtype=np.uint64)

    def sample(self, size: int, rng) -> list[SpacePoint]:
        rng = as_rng(rng)
        dec = self.decomposition
        x = dec.center.base
        n = dec.depth
        draws = rng.integers(0, 1 << _CHOICE_BITS, size=size, dtype=np.uint64)
        idx = np.searchsorted(self._thresholds, draws, side="right")
        fracs = rng.integers(1, 1 << _HEIGHT_BITS, size=size, dtype=np.int64)
        levels = np.array([self.pieces[i][0] for i in idx], dtype=np.int64) if size else np.zeros(0, np.int64)
        bases: list = [None] * size
        for k in np.unique(levels):
            k = int(k)
            where = np.nonzero(levels == k)[0]
            if k == n:
                for i in where:
                    bases[i] = x
            else:
                coords = annulus_coords(x, k, len(where), rng)
                for i, row in zip(where, coords.tolist()):
                    bases[i] = PointM._unchecked(tuple(row))
        out = []
        for i in range(size):
            _, lo, hi = self.pieces[idx[i]]
            h = lo + (hi - lo) * Dyadic(int(fracs[i]), _HEIGHT_BITS)
            out.append(SpacePoint.__new__(SpacePoint))
            object.__setattr__(out[-1], "base", bases[i])
            object.__setattr__(out[-1], "height", h)
        return out

    def level_probabilities(self) -> dict[int, Fraction]:
        """Exact probability of each agreement depth (N = centre line)."""
        probs: dict[int, Fraction] = {}
        for k, w, sec in self.decomposition.sections():
            if sec:
                probs[k] = w * sec.length.to_fraction() / self.total
        return probs


def sample_ball(center: SpacePoint, r, rng, size: int | None = None):
    """One point (or a list of ``size`` points) from the normalized ball measure."""
    sampler = BallSampler(ball_decompose(center, as_dyadic(r)))
    if size is None:
        return sampler.sample(1, rng)[0]
    return sampler.sample(size, rng)


# -- three-rectangle cover -----------------------------------------------------

def _first_level(lo: Dyadic, hi: Dyadic, lo_closed: bool, hi_closed: bool,
                 max_level: int = 4096) -> int | None:
    """Smallest k whose grid meets the interval between ``lo`` and ``hi``."""
    for k in range(max_level + 1):
        if _grid_point_in(k, lo, hi, lo_closed, hi_closed) is not None:
            return k
    return None


def _grid_point_in(k: int, lo: Dyadic, hi: Dyadic, lo_closed: bool, hi_closed: bool):
    n = lo.ceil_index(k) if lo_closed else lo.floor_index(k) + 1
    n = max(n, 0)
    if n > (1 << k):
        return None
    u = Dyadic(n, k)
    if u < hi or (hi_closed and u == hi):
        return u
    return None


@dataclass(frozen=True)
class CoverResult:
    center: SpacePoint
    radius: Dyadic
    epsilon: Fraction
    rectangles: tuple[Rectangle, ...]
    k1: int
    ball_measure: Fraction
    covered_measure: Fraction
    uncovered_fraction: Fraction
    work_depth: int

    @property
    def bound(self) -> Fraction:
        """``2 nu(k1+1) / nu(k1) = 2/(k1+1)``."""
        return 2 * nu(self.k1 + 1) / nu(self.k1)


def cover_admissibility(center: SpacePoint, r, epsilon) -> int:
    """Check the smallness conditions for the three-rectangle cover.

    Returns ``k1`` or raises :class:`PreconditionError` naming the failure.
    """
    r = _check_radius(r)
    eps = as_rational(epsilon)
    if eps <= 0:
        raise DomainError("epsilon must be positive")
    t = center.height
    k_min = _first_level(t - r, t + r, False, False)
    if k_min == 0:
        raise PreconditionError(
            f"smallness condition: (t-r, t+r) = ({t - r}, {t + r}) meets grid level 0")
    if nu(k_min + 1) / nu(k_min) >= eps / 2:
        raise PreconditionError(
            f"smallness condition nu(k+1)/nu(k) < eps/2 fails at level k={k_min}: "
            f"1/{k_min + 1} >= {eps / 2}")
    half = r.half()
    k1 = _first_level(t - half, t + half, False, False)
    if t.level <= k1:
        raise PreconditionError(
            f"height {t} lies on grid level {t.level} <= k1={k1}; the nearby grid point is not unique")
    return k1


def resolving_depth(center: SpacePoint, r, k1: int = 0) -> int:
    """Depth at which balls of radius ``r`` about ``center`` take their
    untruncated measure and islands of level ``k1 + 1`` exist.

    Every height section is the whole window once ``2**-k <= r``, so from that
    level on the truncated and untruncated measures agree.
    """
    r = as_dyadic(r)
    return max(center.depth, k1 + 1, r.exponent)


def union_measure(rectangles: Sequence[Rectangle], center: SpacePoint) -> Fraction:
    """Measure of a union of rectangles whose islands all contain ``center.base``."""
    n = center.depth
    total = Fraction(0)
    for k in range(1, n + 1):
        w = nu(n) if k == n else nu(k) - nu(k + 1)
        sec = IntervalUnion()
        for rect in rectangles:
            if rect.level <= k:
                sec = sec.union(rect.vertical)
        total += w * sec.length.to_fraction()
    return total


def rectangle_cover(center: SpacePoint, r, epsilon) -> CoverResult:
    """At most three rectangles inside the ball covering all but ``< epsilon`` of it.

    ``R_1`` sits on the coarsest grid point within ``r/2`` of the height; ``R_2``
    and ``R_3`` sit on coarser grid points in ``[t + r/2, t + r)`` and
    ``(t - r, t - r/2]`` when those exist.  The uncovered fraction is exact.

    Measures are those of the untruncated space: when the rectangles need
    islands finer than the centre's depth, the base is continued by 1s to
    ``work_depth``; the result does not depend on that choice.
    """
    r = _check_radius(r)
    eps = as_rational(epsilon)
    k1 = cover_admissibility(center, r, eps)
    t = center.height
    # islands finer than the truncation live on the base continued by 1s
    work = SpacePoint(center.base.extended(resolving_depth(center, r, k1)), t)
    x = work.base
    half = r.half()

    t1 = _grid_point_in(k1, t - half, t + half, False, False)
    rects = [Rectangle(Island.around(x, k1), t1, r - abs(t - t1))]
    sides = ((t + half, t + r, True, False), (t - r, t - half, False, True))
    for lo, hi, lo_closed, hi_closed in sides:
        if k1 >= 1 and _grid_point_in(k1 - 1, lo, hi, lo_closed, hi_closed) is not None:
            k = _first_level(lo, hi, lo_closed, hi_closed)
            ti = _grid_point_in(k, lo, hi, lo_closed, hi_closed)
            rects.append(Rectangle(Island.around(x, k), ti, r - abs(t - ti)))

    dec = ball_decompose(work, r)
    for rect in rects:
        if not dec.contains_rectangle(rect):
            raise AssertionError(f"rectangle {rect} escapes the ball")
    total = dec.measure()
    covered = union_measure(rects, work)
    return CoverResult(center, r, eps, tuple(rects), k1, total, covered,
                       (total - covered) / total, x.depth)


def admissible_radius(center: SpacePoint, epsilon, max_halvings: int = 256) -> Dyadic:
    """Largest ``2**-j`` for which the cover preconditions hold."""
    last_error = None
    for j in range(1, max_halvings + 1):
        r = Dyadic(1, j)
        try:
            cover_admissibility(center, r, epsilon)
            return r
        except PreconditionError as exc:
            last_error = exc
    raise PreconditionError(f"no admissible radius down to 2^-{max_halvings}: {last_error}")
