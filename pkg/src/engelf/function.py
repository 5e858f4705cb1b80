"""The function f(x) = r_{g_1} + sum_{k>=2} r_{g_k} u_{g_1} ... u_{g_(k-1)} on (0, 1].

Values at E-rational and periodic points are exact rationals. Everything
else is enclosed: after m digits

    f(x) = y_m + D_m * f(omega^m x),   0 <= f(omega^m x) <= 1,

with y_m the partial sum and D_m = u_{g_1} ... u_{g_m}.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Iterable, Literal, Sequence

from gmpy2 import mpq

from .engel import Cylinder, DigitStream, digits_of, e_rational, insert
from .family import Family
from .rational import ONE, ZERO, RationalInterval, TermSum, exact_sum

Role = Literal["max", "min", "none", "constancy-endpoint"]
MAX, MIN, NONE, CONST = "max", "min", "none", "constancy-endpoint"


@dataclass(frozen=True)
class ProbePoint:
    point: DigitStream
    value: mpq
    role: Role = NONE


def partial_state(spec: Family, digits: Iterable[int]) -> tuple[mpq, mpq]:
    """(y_m, D_m) after consuming ``digits``; (0, 1) for no digits."""
    y, D = ZERO, ONE
    for g in digits:
        if D == 0:
            break
        y += D * spec.r(g)
        D *= spec.u(g)
    return y, D


def eq6_terms(spec: Family, base: Sequence[int]) -> list[mpq]:
    """Terms r_{c_1}, r_{c_2} u_{c_1}, ..., r_{c_m} u_{c_1}..u_{c_(m-1)}, u_{c_1}..u_{c_m}.

    Their sum is f at the E-rational point Delta_{c_1..c_m(0)}.
    """
    terms = []
    D = ONE
    for g in base:
        if D == 0:
            return terms
        terms.append(D * spec.r(g))
        D *= spec.u(g)
    terms.append(D)
    return terms


def eval_terms(spec: Family, d: DigitStream) -> TermSum:
    if not d.is_e_rational:
        raise ValueError(f"expected an E-rational stream (period (0)), got {d}")
    return TermSum(eq6_terms(spec, d.prefix))


def eval_at_E_rational(spec: Family, d: DigitStream) -> mpq:
    """f at Delta_{c_1..c_m(0)}, summed term by term."""
    if not d.is_e_rational:
        raise ValueError(f"expected an E-rational stream (period (0)), got {d}")
    return exact_sum(eq6_terms(spec, d.prefix))


def _affine_fixed_point(spec: Family, period: Sequence[int]) -> mpq:
    # y = A + B y over one period; |B| <= (u*)^len < 1
    A, B = partial_state(spec, period)
    return A / (1 - B)


def eval_periodic(spec: Family, d: DigitStream) -> mpq:
    """Exact f at an eventually periodic stream (any period length)."""
    if not d.is_periodic:
        raise ValueError("expected a periodic stream")
    y, D = partial_state(spec, d.prefix)
    return y + D * _affine_fixed_point(spec, d.period)


def eval_exact(spec: Family, x) -> mpq:
    """Exact f at a rational x in (0, 1] or at a periodic stream."""
    d = x if isinstance(x, DigitStream) else digits_of(x)
    if d.is_e_rational:
        return eval_at_E_rational(spec, d)
    if d.is_periodic:
        return eval_periodic(spec, d)
    raise ValueError("no exact value for a finite truncation")


def eval_point(spec: Family, x, epsilon=mpq(1, 10**15), exact: bool = True) -> RationalInterval:
    """f at a rational x: a point when exact, otherwise a narrow enclosure."""
    d = x if isinstance(x, DigitStream) else digits_of(x, 256)
    return eval_f(spec, d, epsilon, exact)


def tail_bound(spec: Family, m: int) -> mpq:
    """r* (u*)^m / (1 - u*): bound on the series remainder after m terms."""
    us = spec.u_star
    return spec.r_star * us**m / (1 - us)


def _log2_abs(q: mpq) -> int:
    """Integer upper bound on log2 |q| for q != 0."""
    return abs(q.numerator).bit_length() - q.denominator.bit_length() + 1


def _log2_floor(q: mpq) -> int:
    """Integer lower bound on log2 q for q > 0."""
    return q.numerator.bit_length() - 1 - q.denominator.bit_length()


def eval_f(spec: Family, d: DigitStream, epsilon, exact: bool = True) -> RationalInterval:
    """Enclosure of f(x) of width <= epsilon.

    Periodic streams take the exact path unless ``exact`` is False. The
    series path grows m until the enclosure is narrow enough; a finite
    truncation cannot be refined past its last digit, in which case the
    (wider) enclosure over all completions is returned.
    """
    epsilon = mpq(epsilon)
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if exact and d.is_periodic and all(spec.exact(g) for g in d.prefix + d.period):
        return RationalInterval.point(eval_exact(spec, d))
    y, D = ZERO, ONE
    m = 0
    enc = RationalInterval(ZERO, ONE)
    while True:
        enc = RationalInterval.hull(y, y + D)
        if m > 0:
            b = tail_bound(spec, m)
            enc = enc.intersect(RationalInterval(y - b, y + b)) or enc
        if enc.width <= epsilon or D == 0:
            return enc
        if not d.is_periodic and m >= d.depth:
            return enc
        m += 1
        g = d.digit(m)
        if _log2_abs(D) + spec.log2_r_sup_from(g - 1) <= _log2_floor(epsilon):
            # the rest moves f by at most |D| r_{g-1} <= epsilon, towards sign(D)
            step = epsilon if D > 0 else -epsilon
            return enc.intersect(RationalInterval.hull(y, y + step)) or enc
        if not spec.exact(g):
            # f = y + D (r_g + u_g f(...)) with r_g + u_g = r_{g-1} <= sup_{n >= limit} r_n
            top = D * spec.r_sup_from(spec.exact_limit)
            return enc.intersect(RationalInterval.hull(y, y + top)) or enc
        y += D * spec.r(g)
        D *= spec.u(g)


def range_bracket(spec: Family, g1: int) -> tuple[mpq, mpq]:
    """(a, b) = (min, max) of r_{g1} and r_{g1-1}.

    f(x) for first digit g1 lies between them: r_{g1-1} = f(Delta_{g1(0)})
    is attained, r_{g1} is not (f = r_{g1} exactly when u_{g1} = 0).
    """
    if g1 < 0:
        raise ValueError("digit must be non-negative")
    r0, r1 = spec.r(g1), spec.r(g1 - 1)
    return min(r0, r1), max(r0, r1)


def in_bracket(spec: Family, first_digit: int, value) -> bool:
    """value lies in the half-open range between r_g (open) and r_{g-1} (closed), and in (0, 1].

    Accepts an mpq or a TermSum.
    """
    rg, ug = spec.r(first_digit), spec.u(first_digit)
    if not isinstance(value, TermSum):
        value = TermSum([value])
    a, b = range_bracket(spec, first_digit)
    if not (0 < a and b <= 1):
        return False
    if ug == 0:
        return value == rg
    # r_{g-1} = r_g + u_g
    attained = TermSum([rg, ug])
    if ug > 0:
        return value > rg and value <= attained
    return value >= attained and value < rg


@dataclass(frozen=True)
class EquationVerdict:
    holds: bool
    exact: bool
    lhs: object
    rhs: object


def functional_eq_check(spec: Family, d: DigitStream, i: int, epsilon=mpq(1, 10**12)) -> EquationVerdict:
    """Check f(delta_i(x)) = r_i + u_i f(x).

    Periodic x: exact equality, with both sides evaluated independently.
    Truncated x: the enclosure of the left side must meet the affine image
    of the enclosure of f(x).
    """
    ri, ui = spec.r(i), spec.u(i)
    moved = insert(i, d)
    if d.is_e_rational:
        lhs = eval_terms(spec, moved)
        rhs = TermSum([ri, ui * eval_at_E_rational(spec, d)])
        return EquationVerdict(lhs == rhs, True, lhs, rhs)
    if d.is_periodic:
        lhs = eval_exact(spec, moved)
        rhs = ri + ui * eval_exact(spec, d)
        return EquationVerdict(lhs == rhs, True, lhs, rhs)
    lhs = eval_f(spec, moved, epsilon)
    rhs = eval_f(spec, d, epsilon).affine(ri, ui)
    return EquationVerdict(lhs.intersect(rhs) is not None, False, lhs, rhs)


# cylinder analysis --------------------------------------------------------


def cylinder_change(spec: Family, c: Cylinder) -> mpq:
    """f(b_m) - f(a_m) = u_{c_1} ... u_{c_m}."""
    if c.rank < 1:
        raise ValueError("cylinder_change needs rank >= 1")
    D = ONE
    for g in c.base:
        D *= spec.u(g)
    return D


@dataclass(frozen=True)
class ValueRange:
    min: mpq
    max: mpq
    argmin: ProbePoint
    argmax: ProbePoint

    @property
    def constant(self) -> bool:
        return self.min == self.max

    @property
    def interval(self) -> RationalInterval:
        return RationalInterval(self.min, self.max)


def cylinder_value_range(spec: Family, c: Cylinder) -> ValueRange:
    """Min and max of f over the closure of c; both attained at the endpoints."""
    if c.rank < 1:
        raise ValueError("cylinder_value_range needs rank >= 1")
    y, D = partial_state(spec, c.base)
    right, left = c.right_point(), c.left_point()
    if D == 0:
        p = ProbePoint(right, y, CONST)
        return ValueRange(y, y, p, p)
    top = ProbePoint(right, y + D, MAX)
    bottom = ProbePoint(left, y, MIN)
    if D > 0:
        return ValueRange(y, y + D, bottom, top)
    top = ProbePoint(left, y, MAX)
    bottom = ProbePoint(right, y + D, MIN)
    return ValueRange(y + D, y, bottom, top)


def _closure_range(spec: Family, base: tuple[int, ...]) -> tuple[mpq, mpq, mpq]:
    """(f(a), f(b), D) for a cylinder, including the root (f(0)=0, f(1)=1)."""
    y, D = partial_state(spec, base)
    return y, y + D, D


def classify_extremum(spec: Family, base: Cylinder, i: int) -> Role:
    """Type of the point Delta_{c_1..c_m i(0)}, the common end of the cylinders c.i and c.(i-1)."""
    if i < 1:
        raise ValueError("i must be >= 1")
    D = cylinder_change(spec, base) if base.rank else ONE
    ui, uprev = spec.u(i), spec.u(i - 1)
    if D == 0 or uprev * ui >= 0:
        return NONE
    return MAX if D * ui > 0 else MIN


def _bases(rank: int, cap: int) -> Iterable[tuple[int, ...]]:
    return product(range(cap + 1), repeat=rank)


def enumerate_extrema(spec: Family, max_rank: int, digit_cap: int) -> list[ProbePoint]:
    """All extrema Delta_{c_1..c_m i(0)} with m < max_rank and digits <= digit_cap."""
    if max_rank < 1 or digit_cap < 1:
        raise ValueError("caps must be positive")
    out = []
    if spec.nonnegative:
        return out
    flips = [i for i in range(1, digit_cap + 1) if spec.u(i - 1) * spec.u(i) < 0]
    if not flips:
        return out
    for m in range(max_rank):
        for base in _bases(m, digit_cap):
            cyl = Cylinder(base)
            if m and cylinder_change(spec, cyl) == 0:
                continue
            for i in flips:
                role = classify_extremum(spec, cyl, i)
                if role != NONE:
                    pt = e_rational(*base, i)
                    out.append(ProbePoint(pt, eval_at_E_rational(spec, pt), role))
    out.sort(key=lambda p: (len(p.point.prefix), p.point.prefix))
    return out


def extremum_neighbors(spec: Family, p: ProbePoint) -> tuple[mpq, mpq]:
    """Values at the far endpoints of the two cylinders meeting at p."""
    *base, i = p.point.prefix
    left_far = e_rational(*base, i + 1)
    right_far = e_rational(*base, i - 1)
    return eval_at_E_rational(spec, left_far), eval_at_E_rational(spec, right_far)


@dataclass(frozen=True)
class Witness:
    """Two sub-cylinders on which f changes in opposite directions."""

    rising: Cylinder
    falling: Cylinder
    rising_change: mpq
    falling_change: mpq


def monotonicity_witness(spec: Family, c: Cylinder, search_cap: int, max_depth: int = 2) -> Witness | None:
    """Search descendants of c (digits <= search_cap, up to ``max_depth`` levels) for a sign flip."""
    if search_cap < 1:
        raise ValueError("search_cap must be positive")
    D0 = cylinder_change(spec, c) if c.rank else ONE
    if D0 == 0 or spec.nonnegative:
        return None
    rising = falling = None
    frontier = [(c, D0)]
    for _ in range(max_depth):
        nxt = []
        for cyl, D in frontier:
            for j in range(search_cap + 1):
                ch = D * spec.u(j)
                sub = cyl.child(j)
                if ch > 0 and rising is None:
                    rising = (sub, ch)
                elif ch < 0 and falling is None:
                    falling = (sub, ch)
                if rising and falling:
                    return Witness(rising[0], falling[0], rising[1], falling[1])
                if ch != 0:
                    nxt.append((sub, ch))
        frontier = nxt
    return None


# level sets ---------------------------------------------------------------


def _contains_preimage(fa, fb, y0) -> bool:
    # f continuous on [a, b]; a itself is not in the cylinder
    return min(fa, fb) < y0 < max(fa, fb) or fb == y0


def level_set_probe(spec: Family, y0, max_rank: int, digit_cap: int) -> list[Cylinder]:
    """Disjoint rank-``max_rank`` cylinders each certified to contain a point of f^{-1}(y0).

    Breadth-first over children 0..digit_cap. A cylinder is kept while the
    closed value range [min, max] contains y0; it is certified when the
    range straddles y0 strictly (intermediate value theorem) or when y0 is
    the value at its right end b_m, which belongs to the cylinder.
    """
    y0 = mpq(y0)
    if not 0 <= y0 <= 1:
        raise ValueError("y0 must lie in [0, 1]")
    if max_rank < 1 or digit_cap < 0:
        raise ValueError("caps must be positive")
    frontier: list[tuple[tuple[int, ...], mpq, mpq]] = [((), ZERO, ONE)]
    for _ in range(max_rank):
        nxt = []
        for base, y, D in frontier:
            for c in range(digit_cap + 1):
                yc = y + D * spec.r(c)
                Dc = D * spec.u(c)
                fa, fb = yc, yc + Dc
                if min(fa, fb) <= y0 <= max(fa, fb):
                    nxt.append((base + (c,), yc, Dc))
        frontier = nxt
    out = [Cylinder(b) for b, y, D in frontier if _contains_preimage(y, y + D, y0)]
    out.sort(key=lambda cyl: cyl.base)
    return out


def graph_boxes(spec: Family, rank: int, n_points: int) -> list[tuple[mpq, mpq, mpq, mpq]]:
    """Enclosure boxes (x_lo, x_hi, f_lo, f_hi) on a grid of E-rational cylinder endpoints.

    The grid is the set of right endpoints b of cylinders of rank <= ``rank``
    with digits below a cap, thinned to about ``n_points`` points. Each box
    spans two consecutive grid points; its f-range is the hull of the exact
    endpoint values widened by the value range of every cylinder between.
    """
    if n_points < 2:
        raise ValueError("need at least two points")
    cap = 1
    pts: set = set()
    while True:
        pts = {ZERO, ONE}
        for m in range(1, rank + 1):
            for base in _bases(m, cap):
                pts.add(Cylinder(base).endpoints()[1])
        if len(pts) >= n_points or cap > 4 * n_points:
            break
        cap += 1
    grid = sorted(pts)
    if len(grid) > n_points:
        step = (len(grid) - 1) / (n_points - 1)
        grid = sorted({grid[round(k * step)] for k in range(n_points)})
    # exact values, or 1e-15 enclosures where terms are too large to expand
    exact = spec.exact_limit is None
    values = [RationalInterval.point(ZERO) if x == 0 else eval_point(spec, x, exact=exact) for x in grid]
    boxes = []
    for (x0, v0), (x1, v1) in zip(zip(grid, values), zip(grid[1:], values[1:])):
        lo, hi = _range_between(spec, x0, x1, rank)
        boxes.append((x0, x1, min(v0.lo, v1.lo, lo), max(v0.hi, v1.hi, hi)))
    return boxes


_CHILD_CAP = 48
_NEGLIGIBLE_BITS = 64


def _range_between(spec: Family, x0, x1, rank: int) -> tuple[mpq, mpq]:
    """Hull of f over [x0, x1] from a cover by cylinders of rank <= ``rank``."""
    lo, hi = ONE, ZERO
    child_cap = _CHILD_CAP if spec.exact_limit is None else min(_CHILD_CAP, spec.exact_limit)

    def visit(base, y, D, a, b):
        nonlocal lo, hi
        if b <= x0 or a >= x1:
            return
        if (x0 <= a and b <= x1) or len(base) >= rank or D == 0:
            lo = min(lo, y, y + D)
            hi = max(hi, y, y + D)
            return
        cyl = Cylinder(base)
        c = 0
        while True:
            small = c > 0 and _log2_abs(D) + spec.log2_r_sup_from(c - 1) <= -_NEGLIGIBLE_BITS
            if c > child_cap or small:
                # children >= c accumulate at a; bound them together
                top = D * spec.r_sup_from(c - 1) if not small else mpq(1 if D > 0 else -1, 2**_NEGLIGIBLE_BITS)
                tail = [y, y + top]
                lo, hi = min(lo, *tail), max(hi, *tail)
                return
            ca, cb = cyl.child(c).endpoints()
            if cb <= x0:
                # every later child lies further left
                return
            visit(base + (c,), y + D * spec.r(c), D * spec.u(c), ca, cb)
            if ca <= x0:
                return
            c += 1

    visit((), ZERO, ONE, ZERO, ONE)
    return lo, hi
