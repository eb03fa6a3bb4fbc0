"""Porosity witnesses, non-differentiability scores and measure porosity."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from ..base import as_rng
from ..errors import DomainError, PreconditionError
from ..jump import (
    BallSampler,
    SetDescriptor,
    SpacePoint,
    ball_decompose,
    ball_measure,
    d_p,
    distance_to_set,
)
from ..numeric import ONE, ZERO, Dyadic, as_dyadic, as_rational
from .fields import LipschitzField


@dataclass(frozen=True)
class WitnessCertificate:
    """A point ``witness`` near ``subject`` together with its exact porosity ratio."""

    subject: SpacePoint
    witness: SpacePoint
    dist_to_set: Dyadic
    dist_to_subject: Dyadic
    ratio: Fraction

    def verify(self, S: SetDescriptor) -> bool:
        d_set = distance_to_set(self.witness, S)
        d_sub = d_p(self.witness, self.subject)
        return (d_set == self.dist_to_set and d_sub == self.dist_to_subject
                and d_sub > 0 and self.ratio == d_set.to_fraction() / d_sub.to_fraction())


def _certificate(S, x0, x) -> WitnessCertificate | None:
    d_sub = d_p(x, x0)
    if d_sub == 0:
        return None
    d_set = distance_to_set(x, S)
    return WitnessCertificate(x0, x, d_set, d_sub, d_set.to_fraction() / d_sub.to_fraction())


def _vertical_candidates(x0: SpacePoint, r: Dyadic, halvings: int):
    t = x0.height
    for j in range(1, halvings + 1):
        delta = r.shift(-j)
        for h in (t + delta, t - delta):
            if ZERO <= h <= ONE:
                yield x0.with_height(h)


def _grid_candidates(x0: SpacePoint, r: Dyadic):
    t = x0.height
    seen = set()
    for k in range(1, x0.depth):
        for n in (t.floor_index(k), t.ceil_index(k)):
            u = Dyadic(n, k)
            if u != t and abs(u - t) < r and ZERO <= u <= ONE and u not in seen:
                seen.add(u)
                yield x0.with_height(u)


def porosity_search(S: SetDescriptor, x0: SpacePoint, radii: Sequence, budget: int, rng,
                    deterministic: bool = True, halvings: int = 8):
    """Best witness per radius as ``[(r, certificate or None), ...]``.

    Candidates are vertical offsets ``r/2**j`` above and below ``x0``, the
    same-base points at nearby grid heights, and ``budget`` random points
    from the ball ``B(x0, r)``; only candidates with ``0 < d(x, x0) < r`` count.
    """
    if distance_to_set(x0, S) != 0:
        raise PreconditionError(f"subject {x0} is not in the set {S}")
    rng = as_rng(rng)
    out = []
    for r in radii:
        r = as_dyadic(r)
        if r <= 0:
            raise DomainError("radius must be positive")
        candidates = []
        if deterministic:
            candidates.extend(_vertical_candidates(x0, r, halvings))
            candidates.extend(_grid_candidates(x0, r))
        if budget > 0:
            candidates.extend(BallSampler(ball_decompose(x0, r)).sample(budget, rng))
        best = None
        for x in candidates:
            cert = _certificate(S, x0, x)
            if cert is None or cert.dist_to_subject >= r:
                continue
            if best is None or cert.ratio > best.ratio:
                best = cert
        out.append((r, best))
    return out


def porosity_scan(S: SetDescriptor, x0: SpacePoint, radii: Sequence, budget: int, rng,
                  deterministic: bool = True, halvings: int = 8):
    """Best ratio ``d(x, S)/d(x, x0)`` per radius (0 if no candidate) and the
    certificates of the best witnesses."""
    found = porosity_search(S, x0, radii, budget, rng, deterministic, halvings)
    ratios = [c.ratio if c else Fraction(0) for _, c in found]
    return ratios, [c for _, c in found if c is not None]


def nondiff_score(f: LipschitzField, x0: SpacePoint, witnesses: Sequence[WitnessCertificate]) -> Fraction:
    """``max |f(x) - f(x0)| / d(x, x0)`` over the witnesses."""
    if not witnesses:
        raise DomainError("nondiff_score needs at least one witness")
    f0 = f(x0)
    best = Fraction(0)
    for w in witnesses:
        d = d_p(w.witness, x0)
        if d == 0:
            raise DomainError("witness coincides with the subject")
        q = Fraction(abs(f(w.witness) - f0)) / d.to_fraction()
        best = max(best, q)
    return best


@dataclass(frozen=True)
class GammaResult:
    """Lower bound for the largest ``s`` with ``B(z, s)`` inside ``B(x, r)`` and
    ``mu(B(z, s)) <= delta * mu(B(x, r))``, with the witness that achieves it."""

    center: SpacePoint
    radius: Dyadic
    delta: Fraction
    gamma: Dyadic
    z: SpacePoint | None
    measure_zs: Fraction | None
    measure_xr: Fraction

    def verify(self) -> bool:
        if self.z is None:
            return self.gamma == 0
        mu_zs = ball_measure(self.z, self.gamma)
        mu_xr = ball_measure(self.center, self.radius)
        return (d_p(self.center, self.z) + self.gamma <= self.radius
                and mu_zs == self.measure_zs and mu_xr == self.measure_xr
                and mu_zs <= self.delta * mu_xr)


def _s_grid(s_max: Dyadic, resolution: int):
    yield s_max - s_max.shift(-resolution)
    for j in range(1, resolution + 1):
        yield s_max.shift(-j)


def measure_porosity_gamma(x: SpacePoint, r, delta, budget: int, rng,
                           resolution: int = 10, halvings: int = 8) -> GammaResult:
    """Search lower bound for the measure-porosity quantity ``gamma(mu, x, r, delta)``.

    Centres tried: ``x`` itself, vertical offsets ``r/2**j``, and ``budget``
    samples from ``B(x, r)``.  For each centre ``z`` the radii tried are
    ``s_max (1 - 2**-resolution)`` and ``s_max / 2**j`` with
    ``s_max = r - d(x, z)``; every accepted pair is checked exactly.
    """
    r = as_dyadic(r)
    if r <= 0:
        raise DomainError("radius must be positive")
    delta = as_rational(delta)
    if delta <= 0:
        raise DomainError("delta must be positive")
    rng = as_rng(rng)
    mu_xr = ball_measure(x, r)
    threshold = delta * mu_xr
    candidates = [x, *_vertical_candidates(x, r, halvings)]
    if budget > 0:
        candidates.extend(BallSampler(ball_decompose(x, r)).sample(budget, rng))
    best_s, best_z, best_mu = ZERO, None, None
    for z in candidates:
        s_max = r - d_p(x, z)
        if s_max <= best_s:
            continue
        for s in _s_grid(s_max, resolution):
            if s <= best_s:
                break
            mu = ball_measure(z, s)
            if mu <= threshold:
                best_s, best_z, best_mu = s, z, mu
                break
    return GammaResult(x, r, delta, best_s, best_z, best_mu, mu_xr)
