"""Vertical derivatives, approximate-differentiability defects and the
chart-uniqueness diagnostic."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from ..base import as_rng
from ..errors import DomainError
from ..jump import BallSampler, SpacePoint, ball_decompose, d_p
from ..numeric import Dyadic, as_dyadic, as_rational
from .fields import LipschitzField


class NoVerticalDerivative(DomainError):
    """Difference quotients did not settle within the height resolution."""


def vertical_derivative(f: LipschitzField, p: SpacePoint, tol, max_level: int | None = None) -> float:
    """Limit of ``(f(x, t+u) - f(x, t)) / u`` as ``u -> 0``.

    Forward and backward quotients are evaluated exactly at ``u = 2**-j`` for
    increasing ``j``.  The limit is accepted once the two one-sided quotients
    agree within ``tol`` and their mean moved by less than ``tol`` since the
    previous ``j``.  ``max_level`` defaults to the height's own dyadic level
    plus 40 halvings.
    """
    tol = as_rational(tol)
    t = p.height
    if not 0 < t < 1:
        raise DomainError(f"height {t} must lie strictly inside (0, 1)")
    if max_level is None:
        max_level = t.level + 40
    room = min(t, 1 - t)
    j = 1
    while Dyadic(1, j) > room:
        j += 1
    f0 = Fraction(f(p))
    prev = None
    for j in range(j, max_level + 1):
        u = Dyadic(1, j)
        fwd = (Fraction(f(p.with_height(t + u))) - f0) * (1 << j)
        bwd = (f0 - Fraction(f(p.with_height(t - u)))) * (1 << j)
        est = (fwd + bwd) / 2
        if prev is not None and abs(fwd - bwd) < tol and abs(est - prev) < tol:
            return float(est)
        prev = est
    raise NoVerticalDerivative(f"no vertical derivative of {f!r} at {p} down to 2^-{max_level}")


@dataclass(frozen=True)
class DefectEstimate:
    """Monte Carlo fraction of the ball where the linear approximation fails."""

    fraction: float
    ci_low: float
    ci_high: float
    defects: int
    nsamples: int


def wilson_interval(k: int, n: int, z: float = 1.96) -> tuple[float, float]:
    if n == 0:
        return 0.0, 1.0
    phat = k / n
    denom = 1 + z * z / n
    mid = (phat + z * z / (2 * n)) / denom
    half = z * math.sqrt(phat * (1 - phat) / n + z * z / (4 * n * n)) / denom
    return max(0.0, mid - half), min(1.0, mid + half)


def approx_diff_defect(f: LipschitzField, p: SpacePoint, df, eps, r, nsamples: int, rng) -> DefectEstimate:
    """Estimate ``mu{q in B(p, r) : |f(q) - f(p) - df (s - t)| > eps d_p(p, q)} / mu(B(p, r))``.

    ``df`` may be a float; it is converted exactly, so the test itself is exact
    and only the sampling is random.
    """
    eps = as_rational(eps)
    if eps <= 0:
        raise DomainError("eps must be positive")
    if nsamples < 1:
        raise DomainError("nsamples must be at least 1")
    r = as_dyadic(r)
    df = Fraction(df)
    rng = as_rng(rng)
    sampler = BallSampler(ball_decompose(p, r))
    f0 = Fraction(f(p))
    t = p.height.to_fraction()
    defects = 0
    for q in sampler.sample(nsamples, rng):
        err = abs(Fraction(f(q)) - f0 - df * (q.height.to_fraction() - t))
        if err > eps * d_p(p, q).to_fraction():
            defects += 1
    lo, hi = wilson_interval(defects, nsamples)
    return DefectEstimate(defects / nsamples, lo, hi, defects, nsamples)


@dataclass(frozen=True)
class LambdaEstimate:
    """``value`` is the minimum found; the true minimum lies in
    ``[value - grid_error, value]``."""

    value: float
    grid_error: float

    def __float__(self) -> float:
        return self.value


def _last_block(increments: Sequence, n: int) -> list[tuple[list[float], float]]:
    if not increments:
        raise DomainError("no increments")
    whole = len(increments) - len(increments) % n
    if whole == 0:
        raise DomainError(f"need at least one complete block of {n} increments")
    block = []
    for dphi, d in increments[whole - n: whole]:
        vec = [float(c) for c in (dphi if isinstance(dphi, (list, tuple)) else [dphi])]
        if len(vec) != n:
            raise DomainError(f"increment {dphi!r} is not {n}-dimensional")
        if not float(d) > 0:
            raise DomainError("distances must be positive")
        block.append((vec, float(d)))
    return block


def chart_uniqueness_lambda(increments: Sequence, n: int, grid: int = 10_000) -> LambdaEstimate:
    """``min over unit v of max_i |dphi_i . v| / d_i`` for the last complete block.

    Dimension 1 is exact.  In dimension 2 the minimum is taken over ``grid``
    angles in ``[0, pi)`` plus the angles where one term vanishes or two terms
    cross, which is where the minimum of this envelope is attained; the grid
    error bound is ``L * pi / (2 * grid)`` with ``L`` the largest ``|dphi_i|/d_i``.
    """
    if n not in (1, 2):
        raise DomainError("only dimensions 1 and 2 are supported")
    block = _last_block(increments, n)
    if n == 1:
        return LambdaEstimate(max(abs(v[0]) / d for v, d in block), 0.0)
    ws = [(v[0] / d, v[1] / d) for v, d in block]

    def envelope(theta: float) -> float:
        c, s = math.cos(theta), math.sin(theta)
        return max(abs(a * c + b * s) for a, b in ws)

    angles = [math.pi * j / grid for j in range(grid)]
    for a, b in ws:
        angles.append(math.atan2(b, a) + math.pi / 2)
    for i in range(len(ws)):
        for j in range(i + 1, len(ws)):
            for sign in (1, -1):
                a = ws[i][0] - sign * ws[j][0]
                b = ws[i][1] - sign * ws[j][1]
                angles.append(math.atan2(b, a) + math.pi / 2)
    lip = max(math.hypot(a, b) for a, b in ws)
    value = min(envelope(th) for th in angles)
    return LambdaEstimate(value, lip * math.pi / (2 * grid))
