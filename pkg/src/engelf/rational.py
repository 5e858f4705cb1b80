"""Exact rational helpers and the closed rational interval used for enclosures."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from fractions import Fraction

from gmpy2 import mpq

Q = mpq
ZERO = mpq(0)
ONE = mpq(1)


def parse_rational(text) -> mpq:
    """Parse ``p/q``, an integer, or a decimal literal such as ``1e-6`` exactly."""
    if isinstance(text, (int, Fraction)) or type(text) is type(ZERO):
        return mpq(text)
    s = str(text).strip()
    if not s:
        raise ValueError("empty rational")
    try:
        if "/" in s:
            num, den = s.split("/")
            return mpq(int(num), int(den))
        return mpq(Fraction(s))
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"not a rational: {text!r}") from exc


def fmt_rational(x) -> str:
    x = mpq(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def to_decimal(x, digits: int = 12) -> str:
    return f"{float(x):.{digits}g}"


@dataclass(frozen=True)
class RationalInterval:
    lo: mpq
    hi: mpq

    def __post_init__(self):
        object.__setattr__(self, "lo", mpq(self.lo))
        object.__setattr__(self, "hi", mpq(self.hi))
        if self.lo > self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    @classmethod
    def point(cls, x) -> RationalInterval:
        return cls(x, x)

    @classmethod
    def hull(cls, *values) -> RationalInterval:
        return cls(min(values), max(values))

    @property
    def width(self) -> mpq:
        return self.hi - self.lo

    @property
    def mid(self) -> mpq:
        return (self.lo + self.hi) / 2

    @property
    def is_point(self) -> bool:
        return self.lo == self.hi

    def __contains__(self, x) -> bool:
        return self.lo <= x <= self.hi

    def intersect(self, other: RationalInterval) -> RationalInterval | None:
        lo, hi = max(self.lo, other.lo), min(self.hi, other.hi)
        if lo > hi:
            return None
        return RationalInterval(lo, hi)

    def affine(self, shift, scale) -> RationalInterval:
        """Image under ``t -> shift + scale * t``."""
        return RationalInterval.hull(shift + scale * self.lo, shift + scale * self.hi)

    def subset_of(self, other: RationalInterval) -> bool:
        return other.lo <= self.lo and self.hi <= other.hi

    def __str__(self) -> str:
        return f"[{fmt_rational(self.lo)}, {fmt_rational(self.hi)}]"


def exact_sum(terms) -> mpq:
    """Sum with small denominators first, so huge ones are only touched once."""
    total = ZERO
    for t in sorted(terms, key=lambda q: mpq(q).denominator.bit_length()):
        total += t
    return total


class TermSum:
    """An exact rational kept as a list of terms.

    Comparisons cancel identical terms on both sides before summing, which
    avoids normalising fractions with enormous shared denominators.
    """

    __slots__ = ("terms", "_value")

    def __init__(self, terms):
        self.terms = tuple(mpq(t) for t in terms)
        self._value = None

    @property
    def value(self) -> mpq:
        if self._value is None:
            self._value = exact_sum(self.terms)
        return self._value

    def compare(self, other) -> int:
        """Sign of self - other."""
        other_terms = other.terms if isinstance(other, TermSum) else (mpq(other),)
        left = Counter(self.terms)
        right = Counter(other_terms)
        common = left & right
        left -= common
        right -= common
        diff = exact_sum(list(left.elements()) + [-t for t in right.elements()])
        return (diff > 0) - (diff < 0)

    def __eq__(self, other):
        return self.compare(other) == 0

    def __lt__(self, other):
        return self.compare(other) < 0

    def __le__(self, other):
        return self.compare(other) <= 0

    def __gt__(self, other):
        return self.compare(other) > 0

    def __ge__(self, other):
        return self.compare(other) >= 0

    __hash__ = None

    def __repr__(self):
        return f"TermSum({len(self.terms)} terms)"
