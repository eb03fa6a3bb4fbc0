"""Lipschitz functions on the jump space, evaluated exactly."""
from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence

from ..errors import DomainError
from ..jump import SetDescriptor, SpacePoint, d_p, distance_to_set
from ..numeric import ZERO, Dyadic, as_rational


class LipschitzField:
    """Base class: a callable ``SpacePoint -> exact number`` with a Lipschitz bound."""

    lip_bound: Fraction = Fraction(1)

    def __call__(self, p: SpacePoint):
        raise NotImplementedError


class Height(LipschitzField):
    lip_bound = Fraction(1)

    def __call__(self, p: SpacePoint) -> Dyadic:
        return p.height

    def __repr__(self) -> str:
        return "Height()"


class Constant(LipschitzField):
    lip_bound = Fraction(0)

    def __init__(self, c):
        self.c = as_rational(c)

    def __call__(self, p: SpacePoint) -> Fraction:
        return self.c

    def __repr__(self) -> str:
        return f"Constant({self.c})"


class DistanceToPoint(LipschitzField):
    lip_bound = Fraction(1)

    def __init__(self, q: SpacePoint):
        self.q = q

    def __call__(self, p: SpacePoint) -> Dyadic:
        return d_p(p, self.q)

    def __repr__(self) -> str:
        return f"DistanceToPoint({self.q})"


class Cone(LipschitzField):
    """``max(d(y, S)/2 - d(y, x), 0)``: a bump of height ``d(y, S)/2`` at ``y``."""

    lip_bound = Fraction(1)

    def __init__(self, y: SpacePoint, S: SetDescriptor):
        gap = distance_to_set(y, S)
        if gap <= 0:
            raise DomainError(f"cone centre {y} lies in the set")
        self.y = y
        self.S = S
        self.radius = gap.half()

    def __call__(self, x: SpacePoint) -> Dyadic:
        v = self.radius - d_p(self.y, x)
        return v if v > 0 else ZERO

    def __repr__(self) -> str:
        return f"Cone({self.y}, {self.S})"


class SupCones(LipschitzField):
    """Pointwise maximum of finitely many cones; still 1-Lipschitz."""

    lip_bound = Fraction(1)

    def __init__(self, centres: Iterable[tuple[SpacePoint, SetDescriptor]]):
        self.cones = [c if isinstance(c, Cone) else Cone(*c) for c in centres]
        if not self.cones:
            raise DomainError("sup of an empty family of cones")

    def __call__(self, x: SpacePoint) -> Dyadic:
        return max(c(x) for c in self.cones)

    def __repr__(self) -> str:
        return f"SupCones({len(self.cones)} cones)"


class AffineCombination(LipschitzField):
    """``sum(c_i * f_i)``; Lipschitz bound ``sum(|c_i| * Lip f_i)``."""

    def __init__(self, terms: Sequence[tuple[object, LipschitzField]]):
        self.terms = [(as_rational(c), f) for c, f in terms]
        self.lip_bound = sum((abs(c) * f.lip_bound for c, f in self.terms), Fraction(0))

    def __call__(self, p: SpacePoint) -> Fraction:
        return sum((c * f(p) for c, f in self.terms), Fraction(0))

    def __repr__(self) -> str:
        return f"AffineCombination({self.terms!r})"


def cone_value(y: SpacePoint, S: SetDescriptor, x: SpacePoint) -> Dyadic:
    return Cone(y, S)(x)


def sup_cones(Y: Sequence[tuple[SpacePoint, SetDescriptor]], x: SpacePoint) -> Dyadic:
    return SupCones(Y)(x)


def lipschitz_violations(f: LipschitzField, pairs: Iterable[tuple[SpacePoint, SpacePoint]]):
    """Pairs where ``|f(p) - f(q)| > Lip(f) * d_p(p, q)``; exact comparison."""
    bad = []
    for p, q in pairs:
        if abs(f(p) - f(q)) > f.lip_bound * d_p(p, q).to_fraction():
            bad.append((p, q))
    return bad
