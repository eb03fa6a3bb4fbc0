"""Exact dyadic arithmetic, dyadic grids and unions of open intervals.

Heights, radii and grid points are :class:`Dyadic` values.  Measures involve
factorial denominators and are plain :class:`fractions.Fraction` objects.
A ``Dyadic`` is registered as a :class:`numbers.Rational`, so mixing the two
types works and yields a ``Fraction``.
"""
from __future__ import annotations

import bisect
import numbers
import re
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

from .errors import DomainError

__all__ = [
    "Dyadic",
    "IntervalUnion",
    "as_dyadic",
    "as_rational",
    "grid_distance",
    "grid_window",
    "interval_union_length",
    "format_exact",
]

_POW2_RE = re.compile(r"^\s*([+-]?\d+)\s*/\s*2\s*\^\s*(\d+)\s*$")


def _trailing_zeros(n: int) -> int:
    return (n & -n).bit_length() - 1


class Dyadic:
    """The exact number ``mantissa / 2**exponent``.

    Values are kept canonical: the exponent is nonnegative and the mantissa is
    odd whenever the exponent is positive, so integers carry exponent 0.  Instances are immutable.
    """

    __slots__ = ("mantissa", "exponent", "_hash")

    def __init__(self, mantissa: int = 0, exponent: int = 0):
        if not isinstance(mantissa, int) or not isinstance(exponent, int):
            raise TypeError("Dyadic takes integer mantissa and exponent")
        if exponent < 0:
            mantissa <<= -exponent
            exponent = 0
        if mantissa == 0:
            exponent = 0
        elif exponent:
            tz = _trailing_zeros(mantissa)
            if tz:
                tz = min(tz, exponent)
                mantissa >>= tz
                exponent -= tz
        object.__setattr__(self, "mantissa", mantissa)
        object.__setattr__(self, "exponent", exponent)
        object.__setattr__(self, "_hash", None)

    @classmethod
    def _raw(cls, mantissa: int, exponent: int) -> "Dyadic":
        # caller guarantees canonical form
        self = object.__new__(cls)
        object.__setattr__(self, "mantissa", mantissa)
        object.__setattr__(self, "exponent", exponent)
        object.__setattr__(self, "_hash", None)
        return self

    def __setattr__(self, name, value):
        raise AttributeError("Dyadic is immutable")

    def __reduce__(self):
        return (Dyadic, (self.mantissa, self.exponent))

    # -- construction -----------------------------------------------------

    @classmethod
    def from_fraction(cls, value: Fraction) -> "Dyadic":
        den = value.denominator
        if den & (den - 1):
            raise DomainError(f"{value} is not a dyadic rational")
        return cls(value.numerator, den.bit_length() - 1)

    @classmethod
    def parse(cls, text: str) -> "Dyadic":
        """Parse ``"p/q"`` (q a power of two), ``"p/2^q"``, an integer or a
        finite decimal such as ``"0.375"``."""
        m = _POW2_RE.match(text)
        if m:
            return cls(int(m.group(1)), int(m.group(2)))
        try:
            frac = Fraction(text.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise DomainError(f"cannot parse dyadic from {text!r}") from exc
        return cls.from_fraction(frac)

    @classmethod
    def pow2(cls, k: int) -> "Dyadic":
        """``2**k`` for any integer k."""
        return cls(1, -k)

    # -- rational protocol --------------------------------------------------

    @property
    def numerator(self) -> int:
        return self.mantissa

    @property
    def denominator(self) -> int:
        return 1 << self.exponent

    @property
    def level(self) -> int:
        """Smallest k with ``self`` a multiple of ``1/2**k``."""
        return self.exponent

    def to_fraction(self) -> Fraction:
        return Fraction(self.mantissa, 1 << self.exponent)

    def __float__(self) -> float:
        return self.mantissa / (1 << self.exponent)

    def __bool__(self) -> bool:
        return self.mantissa != 0

    def __hash__(self) -> int:
        h = self._hash
        if h is None:
            h = hash(self.mantissa) if self.exponent == 0 else hash(self.to_fraction())
            object.__setattr__(self, "_hash", h)
        return h

    def __str__(self) -> str:
        if self.exponent == 0:
            return str(self.mantissa)
        return f"{self.mantissa}/{1 << self.exponent}"

    def __repr__(self) -> str:
        return f"Dyadic('{self}')"

    # -- arithmetic ---------------------------------------------------------

    def _aligned(self, other: "Dyadic") -> tuple[int, int, int]:
        e1, e2 = self.exponent, other.exponent
        if e1 == e2:
            return self.mantissa, other.mantissa, e1
        if e1 > e2:
            return self.mantissa, other.mantissa << (e1 - e2), e1
        return self.mantissa << (e2 - e1), other.mantissa, e2

    def __add__(self, other):
        if isinstance(other, Dyadic):
            a, b, e = self._aligned(other)
            return Dyadic(a + b, e)
        if isinstance(other, int):
            return Dyadic(self.mantissa + (other << self.exponent), self.exponent)
        if isinstance(other, Fraction):
            return self.to_fraction() + other
        if isinstance(other, float):
            return float(self) + other
        return NotImplemented

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Dyadic):
            a, b, e = self._aligned(other)
            return Dyadic(a - b, e)
        if isinstance(other, int):
            return Dyadic(self.mantissa - (other << self.exponent), self.exponent)
        if isinstance(other, Fraction):
            return self.to_fraction() - other
        if isinstance(other, float):
            return float(self) - other
        return NotImplemented

    def __rsub__(self, other):
        if isinstance(other, int):
            return Dyadic((other << self.exponent) - self.mantissa, self.exponent)
        if isinstance(other, Fraction):
            return other - self.to_fraction()
        if isinstance(other, float):
            return other - float(self)
        return NotImplemented

    def __mul__(self, other):
        if isinstance(other, Dyadic):
            return Dyadic(self.mantissa * other.mantissa, self.exponent + other.exponent)
        if isinstance(other, int):
            return Dyadic(self.mantissa * other, self.exponent)
        if isinstance(other, Fraction):
            return self.to_fraction() * other
        if isinstance(other, float):
            return float(self) * other
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        """Exact division; stays dyadic when the divisor is ``±2**k``."""
        if isinstance(other, int):
            other = Dyadic(other)
        if isinstance(other, Dyadic):
            if other.mantissa == 0:
                raise ZeroDivisionError("division by zero")
            m = abs(other.mantissa)
            if m & (m - 1) == 0:
                sign = 1 if other.mantissa > 0 else -1
                return Dyadic(sign * self.mantissa, self.exponent - other.exponent + m.bit_length() - 1)
            return self.to_fraction() / other.to_fraction()
        if isinstance(other, Fraction):
            return self.to_fraction() / other
        if isinstance(other, float):
            return float(self) / other
        return NotImplemented

    def __rtruediv__(self, other):
        if isinstance(other, int):
            return Dyadic(other) / self
        if isinstance(other, Fraction):
            return other / self.to_fraction()
        if isinstance(other, float):
            return other / float(self)
        return NotImplemented

    def __neg__(self) -> "Dyadic":
        return Dyadic._raw(-self.mantissa, self.exponent)

    def __pos__(self) -> "Dyadic":
        return self

    def __abs__(self) -> "Dyadic":
        if self.mantissa >= 0:
            return self
        return Dyadic._raw(-self.mantissa, self.exponent)

    def half(self) -> "Dyadic":
        return self.shift(-1)

    def double(self) -> "Dyadic":
        return self.shift(1)

    def shift(self, k: int) -> "Dyadic":
        """Multiply by ``2**k``."""
        return Dyadic(self.mantissa, self.exponent - k)

    def floor_index(self, k: int) -> int:
        """Largest n with ``n/2**k <= self``."""
        if self.exponent <= k:
            return self.mantissa << (k - self.exponent)
        return self.mantissa >> (self.exponent - k)

    def ceil_index(self, k: int) -> int:
        """Smallest n with ``n/2**k >= self``."""
        if self.exponent <= k:
            return self.mantissa << (k - self.exponent)
        return -((-self.mantissa) >> (self.exponent - k))

    # -- comparisons --------------------------------------------------------

    def _cmp(self, other) -> int | None:
        if isinstance(other, Dyadic):
            a, b, _ = self._aligned(other)
        elif isinstance(other, int):
            a, b = self.mantissa, other << self.exponent
        elif isinstance(other, numbers.Rational):
            a = self.mantissa * other.denominator
            b = other.numerator << self.exponent
        elif isinstance(other, float):
            a, b = self.to_fraction(), Fraction(other)
        else:
            return None
        return (a > b) - (a < b)

    def __eq__(self, other):
        if isinstance(other, Dyadic):
            return self.mantissa == other.mantissa and self.exponent == other.exponent
        c = self._cmp(other)
        return NotImplemented if c is None else c == 0

    def __lt__(self, other):
        c = self._cmp(other)
        return NotImplemented if c is None else c < 0

    def __le__(self, other):
        c = self._cmp(other)
        return NotImplemented if c is None else c <= 0

    def __gt__(self, other):
        c = self._cmp(other)
        return NotImplemented if c is None else c > 0

    def __ge__(self, other):
        c = self._cmp(other)
        return NotImplemented if c is None else c >= 0


numbers.Rational.register(Dyadic)

ZERO = Dyadic(0)
ONE = Dyadic(1)


def as_dyadic(value) -> Dyadic:
    """Coerce ints, power-of-two fractions and strings to :class:`Dyadic`."""
    if isinstance(value, Dyadic):
        return value
    if isinstance(value, bool):
        raise TypeError("bool is not a dyadic")
    if isinstance(value, int):
        return Dyadic(value)
    if isinstance(value, Fraction):
        return Dyadic.from_fraction(value)
    if isinstance(value, str):
        return Dyadic.parse(value)
    if isinstance(value, float):
        return Dyadic.from_fraction(Fraction(value))
    raise TypeError(f"cannot convert {type(value).__name__} to Dyadic")


def as_rational(value) -> Fraction:
    """Coerce to an exact :class:`Fraction`; strings may be ``"p/q"`` or decimals."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, Dyadic):
        return value.to_fraction()
    if isinstance(value, str):
        m = _POW2_RE.match(value)
        if m:
            return Fraction(int(m.group(1)), 1 << int(m.group(2)))
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise DomainError(f"cannot parse rational from {value!r}") from exc
    if isinstance(value, (int, float)):
        return Fraction(value)
    if isinstance(value, numbers.Rational):
        return Fraction(value.numerator, value.denominator)
    raise TypeError(f"cannot convert {type(value).__name__} to Fraction")


def format_exact(value) -> str:
    """Exact string form ``"p/q"`` (or ``"p"``) for dyadics and fractions."""
    if isinstance(value, (Dyadic, Fraction, int)):
        return str(value)
    raise TypeError(f"{value!r} is not an exact value")


def _check_height(t: Dyadic) -> None:
    if t < 0 or t > 1:
        raise DomainError(f"height {t} outside [0, 1]")


def grid_distance(t, k: int) -> tuple[Dyadic, Dyadic]:
    """Distance from ``t`` to the grid ``{n/2**k : 0 <= n <= 2**k}``.

    Returns ``(d, u)`` with ``u`` the nearest grid point; ties go to the smaller u.
    """
    t = as_dyadic(t)
    _check_height(t)
    if k < 0:
        raise DomainError("grid level must be nonnegative")
    lo = Dyadic(t.floor_index(k), k)
    hi = Dyadic(t.ceil_index(k), k)
    d_lo = t - lo
    d_hi = hi - t
    if d_lo <= d_hi:
        return d_lo, lo
    return d_hi, hi


def grid_window(k: int, t, r) -> list[Dyadic]:
    """Grid points ``u`` of level ``k`` with ``|t - u| < r``, ascending."""
    t = as_dyadic(t)
    r = as_dyadic(r)
    _check_height(t)
    if k < 0:
        raise DomainError("grid level must be nonnegative")
    if r <= 0:
        raise DomainError("radius must be positive")
    first = max((t - r).floor_index(k) + 1, 0)
    last = min((t + r).ceil_index(k) - 1, 1 << k)
    return [Dyadic(n, k) for n in range(first, last + 1)]


class IntervalUnion:
    """A finite union of open intervals with dyadic endpoints.

    Stored as sorted, pairwise disjoint intervals.  Overlapping intervals are
    merged; intervals that only touch at an endpoint stay separate because the
    shared endpoint is not a member of the union.
    """

    __slots__ = ("intervals", "_los", "_length")

    def __init__(self, intervals: Iterable[tuple] = ()):
        pairs = []
        for lo, hi in intervals:
            lo, hi = as_dyadic(lo), as_dyadic(hi)
            if lo >= hi:
                raise DomainError(f"degenerate interval ({lo}, {hi})")
            pairs.append((lo, hi))
        self._set(self._normalize(pairs))

    def _set(self, merged: list[tuple[Dyadic, Dyadic]]) -> None:
        self.intervals = tuple(merged)
        self._los = [lo for lo, _ in merged]
        self._length = None

    @staticmethod
    def _normalize(pairs: list[tuple[Dyadic, Dyadic]]) -> list[tuple[Dyadic, Dyadic]]:
        pairs.sort(key=lambda p: p[0])
        merged: list[tuple[Dyadic, Dyadic]] = []
        for lo, hi in pairs:
            if merged and lo < merged[-1][1]:
                if hi > merged[-1][1]:
                    merged[-1] = (merged[-1][0], hi)
            else:
                merged.append((lo, hi))
        return merged

    @classmethod
    def _from_pairs(cls, pairs: list[tuple[Dyadic, Dyadic]]) -> "IntervalUnion":
        self = object.__new__(cls)
        self._set(cls._normalize([p for p in pairs if p[0] < p[1]]))
        return self

    @classmethod
    def single(cls, lo, hi) -> "IntervalUnion":
        """One interval, or the empty union if ``lo >= hi``."""
        lo, hi = as_dyadic(lo), as_dyadic(hi)
        return cls._from_pairs([(lo, hi)])

    @property
    def length(self) -> Dyadic:
        if self._length is None:
            total = ZERO
            for lo, hi in self.intervals:
                total = total + (hi - lo)
            self._length = total
        return self._length

    def __len__(self) -> int:
        return len(self.intervals)

    def __iter__(self) -> Iterator[tuple[Dyadic, Dyadic]]:
        return iter(self.intervals)

    def __bool__(self) -> bool:
        return bool(self.intervals)

    def __eq__(self, other):
        if not isinstance(other, IntervalUnion):
            return NotImplemented
        return self.intervals == other.intervals

    def __hash__(self):
        return hash(self.intervals)

    def __repr__(self) -> str:
        body = ", ".join(f"({lo}, {hi})" for lo, hi in self.intervals)
        return f"IntervalUnion([{body}])"

    def add(self, lo, hi) -> "IntervalUnion":
        lo, hi = as_dyadic(lo), as_dyadic(hi)
        if lo >= hi:
            raise DomainError(f"degenerate interval ({lo}, {hi})")
        return IntervalUnion._from_pairs(list(self.intervals) + [(lo, hi)])

    def union(self, other: "IntervalUnion") -> "IntervalUnion":
        return IntervalUnion._from_pairs(list(self.intervals) + list(other.intervals))

    def contains(self, x) -> bool:
        x = as_dyadic(x)
        i = bisect.bisect_left(self._los, x) - 1
        return i >= 0 and x < self.intervals[i][1]

    __contains__ = contains

    def covers(self, lo, hi) -> bool:
        """True when the open interval ``(lo, hi)`` is a subset of the union."""
        lo, hi = as_dyadic(lo), as_dyadic(hi)
        if lo >= hi:
            return True
        i = bisect.bisect_right(self._los, lo) - 1
        return i >= 0 and hi <= self.intervals[i][1]

    def issubset(self, other: "IntervalUnion") -> bool:
        return all(other.covers(lo, hi) for lo, hi in self.intervals)

    def intersection(self, other: "IntervalUnion") -> "IntervalUnion":
        out = []
        a, b = self.intervals, other.intervals
        i = j = 0
        while i < len(a) and j < len(b):
            lo = max(a[i][0], b[j][0])
            hi = min(a[i][1], b[j][1])
            if lo < hi:
                out.append((lo, hi))
            if a[i][1] < b[j][1]:
                i += 1
            else:
                j += 1
        result = object.__new__(IntervalUnion)
        result._set(out)
        return result

    def clip(self, lo, hi) -> "IntervalUnion":
        return self.intersection(IntervalUnion.single(lo, hi))

    def difference_length(self, other: "IntervalUnion") -> Dyadic:
        """Length of ``self`` minus ``other``."""
        return self.length - self.intersection(other).length


def interval_union_length(intervals: Sequence[tuple]) -> Dyadic:
    """Exact Lebesgue measure of a union of open intervals."""
    return IntervalUnion(intervals).length
