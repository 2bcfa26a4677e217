"""Exact rational interval arithmetic.

Endpoints are `fractions.Fraction`, so every enclosure is certified: the
represented real lies in [lo, hi] with mathematical certainty.  Used for
continued-fraction digit certification, trace-weight sign checks, and the
high-precision gap columns of the convergence scans.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import isqrt


@dataclass(frozen=True)
class RatInterval:
    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    @staticmethod
    def point(x) -> "RatInterval":
        x = Fraction(x)
        return RatInterval(x, x)

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def mid(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def __float__(self) -> float:
        return float(self.mid)

    def __add__(self, other) -> "RatInterval":
        other = _coerce(other)
        return RatInterval(self.lo + other.lo, self.hi + other.hi)

    def __radd__(self, other):
        return self.__add__(other)

    def __neg__(self) -> "RatInterval":
        return RatInterval(-self.hi, -self.lo)

    def __sub__(self, other) -> "RatInterval":
        return self.__add__(-_coerce(other))

    def __rsub__(self, other):
        return _coerce(other).__sub__(self)

    def __mul__(self, other) -> "RatInterval":
        other = _coerce(other)
        products = (
            self.lo * other.lo,
            self.lo * other.hi,
            self.hi * other.lo,
            self.hi * other.hi,
        )
        return RatInterval(min(products), max(products))

    def __rmul__(self, other):
        return self.__mul__(other)

    def reciprocal(self) -> "RatInterval":
        if self.lo <= 0 <= self.hi:
            raise ZeroDivisionError("interval straddles zero")
        return RatInterval(1 / self.hi, 1 / self.lo)

    def __truediv__(self, other) -> "RatInterval":
        return self * _coerce(other).reciprocal()

    def abs(self) -> "RatInterval":
        if self.lo >= 0:
            return self
        if self.hi <= 0:
            return -self
        return RatInterval(Fraction(0), max(-self.lo, self.hi))

    def max(self, other) -> "RatInterval":
        other = _coerce(other)
        return RatInterval(max(self.lo, other.lo), max(self.hi, other.hi))

    def sqrt(self, scale: int = 40) -> "RatInterval":
        """Enclosure of the square root, outward-rounded at 10**-scale."""
        if self.lo < 0:
            raise ValueError("sqrt of an interval reaching below zero")
        return RatInterval(sqrt_lower(self.lo, scale), sqrt_upper(self.hi, scale))

    def strictly_inside(self, lo, hi) -> bool:
        return self.lo > Fraction(lo) and self.hi < Fraction(hi)

    def strictly_below(self, other) -> bool:
        return self.hi < _coerce(other).lo

    def strictly_above(self, other) -> bool:
        return self.lo > _coerce(other).hi

    def __le__(self, other) -> bool:
        # certified comparison: every point of self <= every point of other
        return self.hi <= _coerce(other).lo


def _coerce(x) -> RatInterval:
    if isinstance(x, RatInterval):
        return x
    return RatInterval.point(x)


def sqrt_lower(x: Fraction, scale: int = 40) -> Fraction:
    """Largest decimal of the given scale whose square is <= x."""
    x = Fraction(x)
    if x < 0:
        raise ValueError("negative operand")
    m = 10**scale
    return Fraction(isqrt((x.numerator * m * m) // x.denominator), m)


def sqrt_upper(x: Fraction, scale: int = 40) -> Fraction:
    """A decimal of the given scale whose square is >= x."""
    x = Fraction(x)
    if x < 0:
        raise ValueError("negative operand")
    m = 10**scale
    r = isqrt((x.numerator * m * m) // x.denominator)
    while Fraction(r, m) ** 2 < x:
        r += 1
    return Fraction(r, m)


def sqrt_enclosure(x, scale: int = 40) -> RatInterval:
    x = Fraction(x)
    return RatInterval(sqrt_lower(x, scale), sqrt_upper(x, scale))
