"""Parameter sequences (u_n) with exact tails r_n = 1 - (u_0 + ... + u_n).

Every family must satisfy

    sum u_n = 1,   |u_n| < 1,   0 < r_n < 1,   r_n = r_{n-1} - u_n,

with the convention r_{-1} = 1. Besides exact terms each family exposes
certified bounds (u*, r*, tail sums) used by the enclosure code.
"""

from __future__ import annotations

import bisect
import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

from gmpy2 import mpq, mpz

from .rational import ONE, ZERO, fmt_rational, parse_rational

BUILTIN_KINDS = (
    "sylvester",
    "dyadic",
    "dyadic_zero_interleaved",
    "signed_example4",
    "two_scale",
)

# s_n has about 0.1 * 2**(n+1) decimal digits.
SYLVESTER_EXACT_LIMIT = 24


class Family:
    """Base class. Subclasses implement ``_u`` and ``_r`` for n >= 0."""

    kind = "abstract"
    # largest n with exactly representable u_n and r_n; None means unbounded
    exact_limit: int | None = None

    def exact(self, n: int) -> bool:
        return self.exact_limit is None or n <= self.exact_limit

    def u(self, n: int) -> mpq:
        if n < 0:
            raise ValueError(f"u_n defined for n >= 0, got {n}")
        return self._u(n)

    def r(self, n: int) -> mpq:
        if n < -1:
            raise ValueError(f"r_n defined for n >= -1, got {n}")
        if n == -1:
            return ONE
        return self._r(n)

    def S(self, n: int) -> mpq:
        return 1 - self.r(n)

    def _u(self, n: int) -> mpq:
        raise NotImplementedError

    def _r(self, n: int) -> mpq:
        raise NotImplementedError

    # certified bounds -------------------------------------------------
    @property
    def u_star(self) -> mpq:
        """sup |u_n| over n >= 0."""
        raise NotImplementedError

    @property
    def r_star(self) -> mpq:
        """sup r_n over n >= 0."""
        raise NotImplementedError

    def r_sup_from(self, n: int) -> mpq:
        """sup of r_k over k >= n (n >= -1)."""
        raise NotImplementedError

    def log2_r_sup_from(self, n: int) -> float:
        """Cheap upper bound on log2 of r_sup_from(n)."""
        q = self.r_sup_from(n)
        return float(q.numerator.bit_length() - q.denominator.bit_length() + 1)

    def abs_u_tail(self, n: int) -> mpq:
        """Upper bound on sum_{k >= n} |u_k|."""
        raise NotImplementedError

    def r_tail_sum(self, n: int) -> mpq:
        """Upper bound on sum_{k >= n} r_k."""
        raise NotImplementedError

    # sign structure ---------------------------------------------------
    nonnegative = True
    has_zero = False

    @property
    def has_negative(self) -> bool:
        return not self.nonnegative

    def to_config(self) -> dict:
        return {"kind": self.kind}

    @property
    def name(self) -> str:
        return self.kind


@lru_cache(maxsize=None)
def _sylvester(n: int) -> mpz:
    if n > SYLVESTER_EXACT_LIMIT + 1:
        raise OverflowError(
            f"Sylvester term s_{n} is too large to represent exactly "
            f"(limit n <= {SYLVESTER_EXACT_LIMIT + 1})"
        )
    if n == 0:
        return mpz(2)
    s = _sylvester(n - 1)
    return s * s - s + 1


@dataclass(frozen=True)
class Sylvester(Family):
    """1/u_0 = 2, 1/u_{n+1} = (1/u_n)(1/u_n - 1) + 1, so u_n = 1/s_n and r_n = 1/(s_{n+1} - 1)."""

    kind = "sylvester"
    exact_limit = SYLVESTER_EXACT_LIMIT

    @lru_cache(maxsize=64)
    def _u(self, n):
        return mpq(1, _sylvester(n))

    @lru_cache(maxsize=64)
    def _r(self, n):
        return mpq(1, _sylvester(n + 1) - 1)

    u_star = property(lambda self: mpq(1, 2))
    r_star = property(lambda self: mpq(1, 2))

    def r_sup_from(self, n):
        return self.r(n)

    def log2_r_sup_from(self, n):
        # s_{n+1} - 1 >= 2^(2^n)
        return 0.0 if n < 0 else -math.ldexp(1.0, min(n, 1000))

    def abs_u_tail(self, n):
        return self.r(n - 1)

    def r_tail_sum(self, n):
        # r_{k+1} <= r_k / 2
        return 2 * self.r(n)


@dataclass(frozen=True)
class Dyadic(Family):
    kind = "dyadic"

    def _u(self, n):
        return mpq(1, mpz(2) ** (n + 1))

    def _r(self, n):
        return mpq(1, mpz(2) ** (n + 1))

    u_star = property(lambda self: mpq(1, 2))
    r_star = property(lambda self: mpq(1, 2))

    def r_sup_from(self, n):
        return self.r(n)

    def abs_u_tail(self, n):
        return self.r(n - 1)

    def r_tail_sum(self, n):
        return mpq(1, mpz(2) ** max(n, 0)) if n >= 0 else 1 + mpq(1)


@dataclass(frozen=True)
class DyadicZeroInterleaved(Family):
    """u_{2k} = 1/2^(k+1), u_{2k+1} = 0: the dyadic family with a zero after every term."""

    kind = "dyadic_zero_interleaved"
    has_zero = True

    def _u(self, n):
        if n % 2:
            return ZERO
        return mpq(1, mpz(2) ** (n // 2 + 1))

    def _r(self, n):
        return mpq(1, mpz(2) ** (n // 2 + 1))

    u_star = property(lambda self: mpq(1, 2))
    r_star = property(lambda self: mpq(1, 2))

    def r_sup_from(self, n):
        return self.r(n)

    def abs_u_tail(self, n):
        return self.r(n - 1)

    def r_tail_sum(self, n):
        n = max(n, 0)
        return mpq(2, mpz(2) ** (n // 2))


@dataclass(frozen=True)
class SignedExample4(Family):
    """u_0 = 2/3, u_1 = -1/6, u_n = 1/2^n for n >= 2."""

    kind = "signed_example4"
    nonnegative = False

    def _u(self, n):
        if n == 0:
            return mpq(2, 3)
        if n == 1:
            return mpq(-1, 6)
        return mpq(1, mpz(2) ** n)

    def _r(self, n):
        if n == 0:
            return mpq(1, 3)
        return mpq(1, mpz(2) ** n)

    u_star = property(lambda self: mpq(2, 3))
    r_star = property(lambda self: mpq(1, 2))

    def r_sup_from(self, n):
        if n <= -1:
            return ONE
        if n == 0:
            return mpq(1, 2)
        return self.r(n)

    def abs_u_tail(self, n):
        n = max(n, 0)
        if n == 0:
            return mpq(4, 3)
        if n == 1:
            return mpq(2, 3)
        return mpq(1, mpz(2) ** (n - 1))

    def r_tail_sum(self, n):
        n = max(n, 0)
        if n == 0:
            return mpq(4, 3)
        return mpq(1, mpz(2) ** (n - 1))


@dataclass(frozen=True)
class TwoScale(Family):
    """u_{2(k-1)} = a/2^k, u_{2k-1} = (1-a)/2^k for k >= 1, with 1 < a < 2."""

    a: mpq = field(default_factory=lambda: mpq(3, 2))
    kind = "two_scale"
    nonnegative = False

    def __post_init__(self):
        a = parse_rational(self.a)
        if not 1 < a < 2:
            raise ValueError(f"two_scale parameter must lie in (1, 2), got {a}")
        object.__setattr__(self, "a", a)

    def _u(self, n):
        if n % 2 == 0:
            return self.a / mpz(2) ** (n // 2 + 1)
        return (1 - self.a) / mpz(2) ** ((n + 1) // 2)

    def _r(self, n):
        if n % 2:
            return mpq(1, mpz(2) ** ((n + 1) // 2))
        return (2 - self.a) / mpz(2) ** (n // 2 + 1)

    @property
    def u_star(self):
        return self.a / 2

    r_star = property(lambda self: mpq(1, 2))

    def r_sup_from(self, n):
        if n <= -1:
            return ONE
        # r_{k+2} < r_k for every k
        return max(self.r(n), self.r(n + 1))

    def abs_u_tail(self, n):
        n = max(n, 0)
        return (2 * self.a - 1) / mpz(2) ** (n // 2)

    def r_tail_sum(self, n):
        n = max(n, 0)
        return (3 - self.a) / mpz(2) ** (n // 2)

    def to_config(self):
        return {"kind": self.kind, "a": fmt_rational(self.a)}

    @property
    def name(self):
        return f"two_scale(a={fmt_rational(self.a)})"


@dataclass(frozen=True)
class Custom(Family):
    """Finite exact prefix u_0..u_{L-1} followed by u_{L+j} = first * ratio**j."""

    prefix: tuple = ()
    first: mpq = ZERO
    ratio: mpq = ZERO
    kind = "custom"

    def __post_init__(self):
        prefix = tuple(parse_rational(v) for v in self.prefix)
        first = parse_rational(self.first)
        ratio = parse_rational(self.ratio)
        if not abs(ratio) < 1:
            raise ValueError(f"{CONDITIONS['sum']} violated: the tail diverges (|ratio| = {abs(ratio)} >= 1)")
        object.__setattr__(self, "prefix", prefix)
        object.__setattr__(self, "first", first)
        object.__setattr__(self, "ratio", ratio)

    @property
    def L(self) -> int:
        return len(self.prefix)

    @property
    def tail_sum(self) -> mpq:
        return self.first / (1 - self.ratio)

    def _u(self, n):
        if n < self.L:
            return self.prefix[n]
        return self.first * self.ratio ** (n - self.L)

    def _r(self, n):
        if n < self.L:
            return 1 - sum(self.prefix[: n + 1], ZERO)
        s_prefix = sum(self.prefix, ZERO)
        j = n - self.L + 1
        return 1 - s_prefix - self.first * (1 - self.ratio**j) / (1 - self.ratio)

    @property
    def nonnegative(self):
        return all(v >= 0 for v in self.prefix) and self.first >= 0 and self.ratio >= 0

    @property
    def has_zero(self):
        return any(v == 0 for v in self.prefix) or self.first == 0

    @property
    def u_star(self):
        return max([abs(v) for v in self.prefix] + [abs(self.first)])

    @property
    def r_star(self):
        # the tail r_n (n >= L-1) is monotone when the sum condition holds
        return max(self._r(n) for n in range(max(self.L, 1)))

    def r_sup_from(self, n):
        if n <= -1:
            return max(ONE, self.r_star)
        return max(self._r(k) for k in range(n, max(n, self.L - 1) + 1))

    def abs_u_tail(self, n):
        n = max(n, 0)
        head = sum((abs(v) for v in self.prefix[n:]), ZERO)
        rho = abs(self.ratio)
        return head + abs(self.first) * rho ** max(0, n - self.L) / (1 - rho)

    def r_tail_sum(self, n):
        n = max(n, 0)
        m = max(n, self.L - 1)
        head = sum((abs(self._r(k)) for k in range(n, m)), ZERO)
        rho = abs(self.ratio)
        return head + abs(self.first) * rho ** (m + 1 - self.L) / (1 - rho) ** 2

    def to_config(self):
        return {
            "kind": "custom",
            "prefix": [fmt_rational(v) for v in self.prefix],
            "tail": {"first": fmt_rational(self.first), "ratio": fmt_rational(self.ratio)},
        }

    @property
    def name(self):
        return "custom"


# zero insertion -----------------------------------------------------------


@dataclass(frozen=True)
class InsertionRule:
    """Put ``every`` zeros after each original term, plus ``after[k]`` extra zeros after term k."""

    every: int = 0
    after: tuple = ()

    def __post_init__(self):
        after = self.after.items() if isinstance(self.after, dict) else self.after
        after = tuple(sorted((int(k), int(c)) for k, c in after))
        if self.every < 0 or any(k < 0 or c < 0 for k, c in after):
            raise ValueError("insertion counts and indices must be non-negative")
        if len({k for k, _ in after}) != len(after):
            raise ValueError("duplicate index in insertion rule")
        object.__setattr__(self, "after", tuple((k, c) for k, c in after if c))

    def extra_before(self, k: int) -> int:
        """Total extra zeros inserted after terms 0..k-1."""
        return sum(c for j, c in self.after if j < k)

    def zeros_after(self, k: int) -> int:
        return self.every + dict(self.after).get(k, 0)

    def position(self, k: int) -> int:
        """New index of original term k."""
        return k * (1 + self.every) + self.extra_before(k)

    def original_index(self, n: int) -> int:
        """Largest original k whose new position is <= n."""
        lo, hi = 0, n
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if self.position(mid) <= n:
                lo = mid
            else:
                hi = mid - 1
        return lo

    @property
    def is_identity(self) -> bool:
        return self.every == 0 and not self.after


@dataclass(frozen=True)
class ZeroInserted(Family):
    base: Family = field(default_factory=lambda: Dyadic())
    rule: InsertionRule = field(default_factory=InsertionRule)
    kind = "zero_inserted"
    has_zero = True

    def _u(self, n):
        k = self.rule.original_index(n)
        return self.base.u(k) if self.rule.position(k) == n else ZERO

    def _r(self, n):
        return self.base.r(self.rule.original_index(n))

    @property
    def nonnegative(self):
        return self.base.nonnegative

    @property
    def u_star(self):
        return self.base.u_star

    @property
    def r_star(self):
        return self.base.r_star

    @property
    def exact_limit(self):
        lim = self.base.exact_limit
        return None if lim is None else self.rule.position(lim + 1) - 1

    def r_sup_from(self, n):
        if n <= -1:
            return ONE
        return self.base.r_sup_from(self.rule.original_index(n))

    def log2_r_sup_from(self, n):
        if n <= -1:
            return 0.0
        return self.base.log2_r_sup_from(self.rule.original_index(n))

    def abs_u_tail(self, n):
        n = max(n, 0)
        k = self.rule.original_index(n)
        if self.rule.position(k) < n:
            k += 1
        return self.base.abs_u_tail(k)

    def r_tail_sum(self, n):
        n = max(n, 0)
        mult = 1 + self.rule.every + max((c for _, c in self.rule.after), default=0)
        return mult * self.base.r_tail_sum(self.rule.original_index(n))

    def to_config(self):
        return {
            "kind": "zero_inserted",
            "base": self.base.to_config(),
            "every": self.rule.every,
            "after": {str(k): c for k, c in self.rule.after},
        }

    @property
    def name(self):
        return f"zero_inserted({self.base.name})"


def insert_zeros(spec: Family, rule: InsertionRule) -> Family:
    """New family with zeros placed between the terms of ``spec``."""
    if not isinstance(rule, InsertionRule):
        raise TypeError("rule must be an InsertionRule")
    if rule.is_identity:
        return spec
    return ZeroInserted(spec, rule)


# validation ---------------------------------------------------------------

CONDITIONS = {
    "sum": "condition (2): sum of u_n equals 1",
    "abs": "condition (3): |u_n| < 1",
    "tail": "condition (4): 0 < r_n < 1 and r_n = r_(n-1) - u_n",
}


@dataclass(frozen=True)
class ValidationFailure:
    condition: str
    index: int | None
    detail: str

    def __str__(self):
        where = "" if self.index is None else f" at n={self.index}"
        return f"{CONDITIONS[self.condition]} violated{where}: {self.detail}"


@dataclass
class ValidationReport:
    family: str
    checked_depth: int
    failures: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    def __str__(self):
        head = f"{self.family}: {'pass' if self.ok else 'FAIL'} (checked n <= {self.checked_depth})"
        return "\n".join([head] + [f"  {f}" for f in self.failures] + [f"  note: {n}" for n in self.notes])


class FamilyValidationError(ValueError):
    def __init__(self, report: ValidationReport):
        self.report = report
        super().__init__(str(report))


def validate(spec: Family, check_depth: int = 100) -> ValidationReport:
    """Check the initial conditions exactly for n <= check_depth.

    The infinite tail is certified by each family's closed form; for custom
    families the geometric tail must make the total sum exactly 1.
    """
    if check_depth < 1:
        raise ValueError("check_depth must be positive")
    depth = check_depth
    notes = []
    base = spec.base if isinstance(spec, ZeroInserted) else spec
    if isinstance(base, Sylvester):
        limit = SYLVESTER_EXACT_LIMIT
        if isinstance(spec, ZeroInserted):
            limit = spec.rule.position(SYLVESTER_EXACT_LIMIT)
        if depth > limit:
            depth = limit
            notes.append(f"sylvester terms checked exactly up to n={limit}; the rest follow from r_n = 1/(s_(n+1)-1)")
    report = ValidationReport(spec.name, depth, notes=notes)
    fail = report.failures.append

    if isinstance(spec, Custom):
        total = sum(spec.prefix, ZERO) + spec.tail_sum
        if total != 1:
            fail(ValidationFailure("sum", None, f"sum is {fmt_rational(total)}"))
        if spec.first <= 0 or spec.ratio <= 0:
            fail(ValidationFailure("tail", None, "geometric tail must have first > 0 and 0 < ratio < 1 to keep r_n > 0"))

    prev = ONE
    for n in range(depth + 1):
        un, rn = spec.u(n), spec.r(n)
        if not abs(un) < 1:
            fail(ValidationFailure("abs", n, f"u_n = {fmt_rational(un)}"))
        if not 0 < rn < 1:
            fail(ValidationFailure("tail", n, f"r_n = {fmt_rational(rn)}"))
        if rn != prev - un:
            fail(ValidationFailure("tail", n, "r_n != r_(n-1) - u_n"))
        prev = rn
        if len(report.failures) > 20:
            break
    return report


# construction from configs ------------------------------------------------


def family_from_config(cfg: dict) -> Family:
    if not isinstance(cfg, dict) or "kind" not in cfg:
        raise ValueError("family config must be an object with a 'kind' field")
    kind = cfg["kind"]
    if kind == "sylvester":
        return Sylvester()
    if kind == "dyadic":
        return Dyadic()
    if kind == "dyadic_zero_interleaved":
        return DyadicZeroInterleaved()
    if kind == "signed_example4":
        return SignedExample4()
    if kind == "two_scale":
        return TwoScale(parse_rational(cfg.get("a", "3/2")))
    if kind == "custom":
        tail = cfg.get("tail", {})
        return Custom(tuple(cfg.get("prefix", ())), tail.get("first", "0"), tail.get("ratio", "0"))
    if kind == "zero_inserted":
        rule = InsertionRule(int(cfg.get("every", 0)), tuple((int(k), int(c)) for k, c in cfg.get("after", {}).items()))
        return insert_zeros(family_from_config(cfg["base"]), rule)
    raise ValueError(f"unknown family kind {kind!r}")


def family_from_name(name: str, a=None) -> Family:
    cfg = {"kind": name}
    if a is not None:
        cfg["a"] = a
    return family_from_config(cfg)


def load_family(path) -> Family:
    return family_from_config(json.loads(Path(path).read_text()))


def builtin_families() -> list[Family]:
    return [Sylvester(), Dyadic(), DyadicZeroInterleaved(), SignedExample4(), TwoScale(mpq(3, 2))]


def support_thresholds(spec: Family, bits: int = 128) -> list[int]:
    """Integer thresholds ceil(S_n * 2**bits), cut once they reach 2**bits.

    A uniform integer U in [0, 2**bits) satisfies U < S_n * 2**bits exactly
    when U < threshold[n], so ``bisect_right`` on this list is an exact
    inverse-CDF draw.
    """
    if not spec.nonnegative:
        raise ValueError("inverse-CDF tables need u_n >= 0")
    top = mpz(1) << bits
    out = []
    n = 0
    while True:
        s = spec.S(n) * top
        t = -((-s.numerator) // s.denominator)
        out.append(int(t))
        if t >= top:
            return out
        n += 1


def draw_index(thresholds: list[int], uniform: int) -> int:
    return bisect.bisect_right(thresholds, uniform)
