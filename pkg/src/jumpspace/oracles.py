"""Independent reference computations used to cross-check the fast paths.

None of these reuse the closed-form distance or the annulus decomposition:

* :func:`brute_force_dp` scans every grid point of every admissible level.
* :func:`rectangle_union_measure` enumerates all islands of the finest level
  and measures the literal union of jump-level rectangles over each.
* :func:`monte_carlo_ball_measure` samples the product measure and tests
  membership with a vectorized integer evaluation of the distance.
"""
from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

from .base import agreement_depth, as_rng, enumerate_points, nu, random_coords
from .errors import DomainError
from .jump import SpacePoint
from .numeric import ONE, ZERO, Dyadic, IntervalUnion, as_dyadic, grid_window


def brute_force_dp(p: SpacePoint, q: SpacePoint, max_level: int = 12) -> Dyadic:
    """Infimum of ``|t-u| + |u-s|`` over all ``u = n/2**k`` with ``k <= max_level``
    and ``d_M(x, y) < 1/2**k``, by exhaustive scan.

    Exact whenever both heights have denominators dividing ``2**max_level``.
    """
    t, s = p.height, q.height
    m = agreement_depth(p.base, q.base)
    top = max_level if m == p.depth else min(m, max_level)
    e = max(t.exponent, s.exponent, top)
    ti = t.mantissa << (e - t.exponent)
    si = s.mantissa << (e - s.exponent)
    best = None
    for k in range(top + 1):
        step = 1 << (e - k)
        for n in range((1 << k) + 1):
            u = n * step
            c = abs(ti - u) + abs(u - si)
            if best is None or c < best:
                best = c
    return Dyadic(best, e)


def rectangle_union_section(center: SpacePoint, r: Dyadic, y_depth: int,
                            same_base: bool) -> IntervalUnion:
    """Literal union of the rectangles ``(u - r + |t-u|, u + r - |t-u|)``
    over all admissible levels and all grid points in the window."""
    t = center.height
    if same_base:
        # every level is admissible; once t itself is a grid point the union is (t-r, t+r)
        top = max(t.exponent, r.exponent) + 1
    else:
        top = y_depth
    sec = IntervalUnion()
    for k in range(top + 1):
        for u in grid_window(k, t, r):
            w = r - abs(t - u)
            sec = sec.add(u - w, u + w)
    return sec.clip(ZERO, ONE)


def rectangle_union_measure(center: SpacePoint, r, excluded: IntervalUnion | None = None) -> Fraction:
    """Ball measure by enumerating every point of ``M_N`` (N <= 5).

    With ``excluded``, only heights outside it are counted.
    """
    r = as_dyadic(r)
    if r <= 0:
        raise DomainError("radius must be positive")
    n = center.depth
    total = Fraction(0)
    weight = nu(n)
    cache: dict[int, Fraction] = {}
    for y in enumerate_points(n):
        m = agreement_depth(center.base, y)
        if m not in cache:
            sec = rectangle_union_section(center, r, m, m == n)
            length = sec.length if excluded is None else sec.difference_length(excluded)
            cache[m] = length.to_fraction()
        total += weight * cache[m]
    return total


def _scaled(value: Dyadic, bits: int) -> int:
    if value.exponent > bits:
        raise DomainError(f"{value} needs more than {bits} bits")
    return value.mantissa << (bits - value.exponent)


def vectorized_dp(center: SpacePoint, coords: np.ndarray, heights: np.ndarray,
                  bits: int) -> np.ndarray:
    """Distances from ``center`` to many points, in units of ``2**-bits``.

    ``coords`` is an ``(n, N)`` base array; ``heights`` are int64 multiples of
    ``2**-bits``.  Integer arithmetic throughout, so results are exact.
    """
    x = np.asarray(center.base.coords)
    n_depth = center.depth
    t = _scaled(center.height, bits)
    mismatch = coords != x
    any_diff = mismatch.any(axis=1)
    depth = np.where(any_diff, mismatch.argmax(axis=1), n_depth)
    lo = np.minimum(heights, t)
    hi = np.maximum(heights, t)
    diff = hi - lo
    shift = np.clip(bits - depth, 0, None).astype(np.int64)
    step = np.left_shift(np.int64(1), shift)
    below = (lo >> shift) << shift              # largest grid point <= lo
    first = np.where(below == lo, lo, below + step)   # smallest grid point >= lo
    bracketed = first <= hi
    extra = np.minimum(lo - (first - step), first - hi)
    out = np.where(bracketed, diff, diff + 2 * extra)
    return np.where(depth == n_depth, diff, out)


def monte_carlo_ball_measure(center: SpacePoint, r, nsamples: int, rng,
                             bits: int = 48) -> tuple[float, float]:
    """Estimate of the ball measure and its binomial standard error."""
    r = as_dyadic(r)
    rng = as_rng(rng)
    coords = random_coords(center.depth, nsamples, rng)
    heights = rng.integers(0, (1 << bits) + 1, size=nsamples, dtype=np.int64)
    dist = vectorized_dp(center, coords, heights, bits)
    hits = int(np.count_nonzero(dist < _scaled(r, bits)))
    p = hits / nsamples
    return p, math.sqrt(max(p * (1 - p), 0.0) / nsamples)
