"""E-representation (Engel series with increment digits) and cylinder algebra.

A number x in (0, 1] is written as

    x = sum_n 1 / (q_1 q_2 ... q_n),   q_n = 2 + g_1 + ... + g_n,

with digits g_n >= 0. Rationals always end in the all-zero period, i.e.
they are E-rational.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator, Sequence

from gmpy2 import mpq

from .rational import ONE, ZERO, RationalInterval

DEFAULT_MAX_DIGITS = 64


def _check_digits(digits: Sequence[int], what: str) -> tuple[int, ...]:
    out = tuple(int(g) for g in digits)
    if any(g < 0 for g in out):
        raise ValueError(f"{what} digits must be non-negative: {out}")
    return out


def _primitive(period: tuple[int, ...]) -> tuple[int, ...]:
    n = len(period)
    for p in range(1, n + 1):
        if n % p == 0 and period[:p] * (n // p) == period:
            return period[:p]
    return period


@dataclass(frozen=True)
class DigitStream:
    """Digits g_1 g_2 ... with an optional repeating period.

    Without a period the stream is a finite truncation of some unknown
    infinite stream. Periodic streams are stored in canonical form
    (primitive period, prefix not ending in a copy of the period's last
    digit) so that equal numbers compare equal.
    """

    prefix: tuple[int, ...] = ()
    period: tuple[int, ...] | None = None

    def __post_init__(self):
        prefix = _check_digits(self.prefix, "prefix")
        period = self.period
        if period is not None:
            period = _check_digits(period, "period")
            if not period:
                raise ValueError("period must be non-empty")
            period = _primitive(period)
            while prefix and prefix[-1] == period[-1]:
                prefix = prefix[:-1]
                period = period[-1:] + period[:-1]
        object.__setattr__(self, "prefix", prefix)
        object.__setattr__(self, "period", period)

    @property
    def is_periodic(self) -> bool:
        return self.period is not None

    @property
    def is_e_rational(self) -> bool:
        return self.period == (0,)

    @property
    def depth(self) -> int:
        """Number of explicitly known digits (truncation depth for finite streams)."""
        return len(self.prefix)

    def digit(self, n: int) -> int:
        """The n-th digit, 1-based."""
        if n < 1:
            raise IndexError("digits are 1-based")
        if n <= len(self.prefix):
            return self.prefix[n - 1]
        if self.period is None:
            raise IndexError(f"finite stream has only {len(self.prefix)} digits")
        k = (n - len(self.prefix) - 1) % len(self.period)
        return self.period[k]

    def take(self, k: int) -> tuple[int, ...]:
        if self.period is None and k > len(self.prefix):
            raise IndexError(f"finite stream has only {len(self.prefix)} digits")
        return tuple(self.digit(n) for n in range(1, k + 1))

    def __iter__(self) -> Iterator[int]:
        yield from self.prefix
        if self.period is not None:
            while True:
                yield from self.period

    def sigma(self, k: int) -> int:
        return sum(self.take(k))

    def __str__(self) -> str:
        parts = [str(g) for g in self.prefix]
        if self.period is not None:
            parts.append("(" + " ".join(str(g) for g in self.period) + ")")
        return " ".join(parts)

    @classmethod
    def parse(cls, text: str) -> DigitStream:
        """Parse ``"g1 g2 ... (p1 ... pj)"``; the parenthesised period is optional."""
        m = re.fullmatch(r"\s*([\d\s]*?)\s*(?:\(([\d\s]+)\))?\s*", text)
        if m is None:
            raise ValueError(f"malformed digit stream: {text!r}")
        prefix = [int(t) for t in m.group(1).split()]
        period = None if m.group(2) is None else [int(t) for t in m.group(2).split()]
        return cls(tuple(prefix), None if period is None else tuple(period))


def e_rational(*base: int) -> DigitStream:
    """The E-rational point with digits ``base`` followed by zeros."""
    return DigitStream(tuple(base), (0,))


def digits_of(x, max_digits: int = DEFAULT_MAX_DIGITS) -> DigitStream:
    """E-representation of a rational x in (0, 1].

    Runs the non-terminating Engel recursion q = floor(1/x) + 1,
    x <- q x - 1. Once the remainder is a unit fraction 1/k the recursion
    is stationary with q = k + 1, which gives the trailing (0) period.
    If that does not happen within ``max_digits`` digits, the first
    ``max_digits`` digits are returned as a finite truncation.
    """
    if isinstance(x, float):
        raise TypeError("pass an exact rational, not a float")
    if max_digits < 1:
        raise ValueError("max_digits must be positive")
    x = mpq(x)
    if not 0 < x <= 1:
        raise ValueError(f"x must lie in (0, 1], got {x}")
    digits: list[int] = []
    q_prev = 2
    while len(digits) < max_digits:
        num, den = x.numerator, x.denominator
        if num == 1:
            digits.append(den + 1 - q_prev)
            return DigitStream(tuple(digits), (0,))
        q = den // num + 1
        digits.append(q - q_prev)
        q_prev = q
        x = q * x - 1
    return DigitStream(tuple(digits))


def _partial(base: Sequence[int]) -> tuple[mpq, int, int]:
    """Return (a_m, P_m, sigma_m) for a cylinder base."""
    a = ZERO
    prod = 1
    sigma = 0
    for c in base:
        sigma += c
        prod *= 2 + sigma
        a += mpq(1, prod)
    return a, prod, sigma


@dataclass(frozen=True)
class Cylinder:
    """Set of x in (0, 1] whose first m digits equal ``base``; the interval (a_m, b_m]."""

    base: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "base", _check_digits(self.base, "cylinder"))

    @property
    def rank(self) -> int:
        return len(self.base)

    @property
    def sigma(self) -> int:
        return sum(self.base)

    def endpoints(self) -> tuple[mpq, mpq]:
        a, prod, sigma = _partial(self.base)
        if not self.base:
            return ZERO, ONE
        return a, a + mpq(1, prod * (1 + sigma))

    def length(self) -> mpq:
        _, prod, sigma = _partial(self.base)
        return mpq(1, prod * (1 + sigma))

    def child(self, c: int) -> Cylinder:
        return Cylinder(self.base + (c,))

    def parent(self) -> Cylinder:
        if not self.base:
            raise ValueError("root cylinder has no parent")
        return Cylinder(self.base[:-1])

    def child_ratio(self, c: int) -> mpq:
        s = self.sigma
        return mpq(1 + s, (2 + s + c) * (1 + s + c))

    def left_neighbor_base(self) -> tuple[int, ...]:
        """Base of the sibling to the left (last digit + 1); shares a_m as its right end."""
        if not self.base:
            raise ValueError("root cylinder has no siblings")
        return self.base[:-1] + (self.base[-1] + 1,)

    def right_point(self) -> DigitStream:
        """b_m = Delta_{c_1..c_m(0)}, the maximal element."""
        return e_rational(*self.base)

    def left_point(self) -> DigitStream:
        """a_m = Delta_{c_1..[c_m+1](0)}, the infimum (not an element)."""
        return e_rational(*self.left_neighbor_base())

    def remainder(self, first_excluded: int) -> RationalInterval:
        """Closure of the union of children c >= first_excluded."""
        a, _ = self.endpoints()
        if first_excluded == 0:
            return RationalInterval(*self.endpoints())
        top, _ = self.child(first_excluded - 1).endpoints()
        return RationalInterval(a, top)

    def contains(self, x) -> bool:
        a, b = self.endpoints()
        return a < x <= b

    def __str__(self) -> str:
        return " ".join(str(c) for c in self.base) if self.base else "()"

    @classmethod
    def parse(cls, text: str) -> Cylinder:
        text = text.strip()
        if text in ("", "()"):
            return cls(())
        return cls(tuple(int(t) for t in text.split()))


def cylinder_of(d: DigitStream, m: int) -> Cylinder:
    return Cylinder(d.take(m))


def cylinder_endpoints(c: Cylinder) -> tuple[mpq, mpq]:
    return c.endpoints()


def cylinder_length(c: Cylinder) -> mpq:
    return c.length()


def child_ratio(c: Cylinder, next_digit: int) -> mpq:
    return c.child_ratio(next_digit)


def value_of(d: DigitStream, depth: int = DEFAULT_MAX_DIGITS):
    """Numeric value of a digit stream.

    E-rational streams give an exact rational. Any other stream gives the
    closed hull of the cylinder of its first known digits: a finite
    truncation is bracketed by all of its completions, and a non-zero
    period (always an irrational number) is unrolled to ``depth`` digits.
    """
    if d.is_e_rational:
        return Cylinder(d.prefix).endpoints()[1]
    if d.is_periodic:
        m = max(depth, len(d.prefix))
        return RationalInterval(*Cylinder(d.take(m)).endpoints())
    return RationalInterval(*Cylinder(d.prefix).endpoints())


def shift(d: DigitStream) -> DigitStream:
    """omega: drop the first digit."""
    if d.prefix:
        return DigitStream(d.prefix[1:], d.period)
    if d.period is None:
        raise ValueError("cannot shift an empty finite stream")
    return DigitStream((), d.period[1:] + d.period[:1])


def insert(i: int, d: DigitStream) -> DigitStream:
    """delta_i: prepend digit i."""
    if i < 0:
        raise ValueError("digit must be non-negative")
    return DigitStream((i,) + d.prefix, d.period)


def theta(x) -> mpq:
    """(2 + g_1(x)) x - 1, the value of the stream with its first two digits merged."""
    x = mpq(x)
    if not 0 < x <= 1:
        raise ValueError(f"x must lie in (0, 1], got {x}")
    q1 = x.denominator // x.numerator + 1
    return q1 * x - 1


def merge_first_two(d: DigitStream) -> DigitStream:
    g1, g2 = d.digit(1), d.digit(2)
    rest = shift(shift(d))
    return DigitStream((g1 + g2,) + rest.prefix, rest.period)
