"""f as a distribution function, and rigorous bounds on its integral.

For u_n >= 0, f is the CDF of xi = Delta_{eta_1 eta_2 ...} with i.i.d.
digits, P(eta = n) = u_n. The sampler draws digits by exact inverse-CDF
on 128-bit dyadic uniforms.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field

import numpy as np
from gmpy2 import mpq

from .engel import Cylinder, DigitStream
from .family import Family, draw_index, support_thresholds
from .function import eval_point
from .rational import ONE, ZERO, RationalInterval

UNIFORM_BITS = 128
DEFAULT_PRECISION = mpq(1, 2**30)


@dataclass
class SamplerState:
    seed: int
    spec: Family
    precision: mpq = DEFAULT_PRECISION
    rng: random.Random = field(init=False, repr=False)
    thresholds: list = field(init=False, repr=False)

    def __post_init__(self):
        if not self.spec.nonnegative:
            raise ValueError(f"sampling needs u_n >= 0; {self.spec.name} has negative terms")
        self.precision = mpq(self.precision)
        if self.precision <= 0:
            raise ValueError("precision must be positive")
        self.rng = random.Random(self.seed)
        self.thresholds = support_thresholds(self.spec, UNIFORM_BITS)


@dataclass(frozen=True)
class Sample:
    point: mpq
    cylinder: Cylinder


def _draw(state: SamplerState) -> tuple[list[int], int, int, int]:
    """Digits until the cylinder is shorter than the precision; also (N, P, sigma) with a = N/P."""
    digits = []
    num, prod, sigma = 0, 1, 0
    limit = state.precision
    getbits = state.rng.getrandbits
    thresholds = state.thresholds
    while True:
        g = draw_index(thresholds, getbits(UNIFORM_BITS))
        digits.append(g)
        sigma += g
        q = 2 + sigma
        num = num * q + 1
        prod *= q
        if prod * (1 + sigma) * limit > 1:
            return digits, num, prod, sigma


def sample_xi(state: SamplerState) -> Sample:
    """One draw of xi: the right end b of a cylinder of length < precision that contains it."""
    digits, num, prod, sigma = _draw(state)
    b = mpq(num * (1 + sigma) + 1, prod * (1 + sigma))
    return Sample(b, Cylinder(tuple(digits)))


def sample_floats(state: SamplerState, n: int) -> np.ndarray:
    out = np.empty(n)
    for k in range(n):
        _, num, prod, sigma = _draw(state)
        out[k] = (num * (1 + sigma) + 1) / (prod * (1 + sigma))
    return out


def digit_counts(state: SamplerState, n: int, support: int) -> np.ndarray:
    """Counts of the first digit over n draws, for digits 0..support-1 (rest in the last cell)."""
    counts = np.zeros(support + 1, dtype=np.int64)
    for _ in range(n):
        g = draw_index(state.thresholds, state.rng.getrandbits(UNIFORM_BITS))
        counts[min(g, support)] += 1
    return counts


def _cdf_grid(spec: Family, n_grid: int) -> tuple[np.ndarray, np.ndarray]:
    xs, fs = [], []
    for k in range(1, n_grid + 1):
        x = mpq(k, n_grid)
        xs.append(float(x))
        fs.append(float(eval_point(spec, x, exact=False).mid))
    return np.array(xs), np.array(fs)


def empirical_cdf_distance(
    spec: Family, n_samples: int, n_grid: int = 1000, seed: int = 0, precision=DEFAULT_PRECISION
) -> float:
    """sup over the grid k/n_grid of |#{xi < x}/n - f(x)|."""
    if n_samples < 1:
        raise ValueError("n_samples must be positive")
    if n_grid < 1:
        raise ValueError("n_grid must be positive")
    state = SamplerState(seed, spec, precision)
    xi = np.sort(sample_floats(state, n_samples))
    xs, fs = _cdf_grid(spec, n_grid)
    ecdf = np.searchsorted(xi, xs, side="left") / n_samples
    return float(np.max(np.abs(ecdf - fs)))


# integral -----------------------------------------------------------------

DEFAULT_SLACK = mpq(1, 10**6)


@dataclass(frozen=True)
class IntegralEnclosure:
    lower: mpq
    upper: mpq
    rank_used: int
    breadth_used: int
    cylinders: int
    width_bound: mpq
    paper_bound: RationalInterval | None = None

    @property
    def width(self) -> mpq:
        return self.upper - self.lower

    @property
    def mid(self) -> mpq:
        return (self.lower + self.upper) / 2


def _remainder_scale(spec: Family, K: int, mode: str) -> mpq:
    return spec.r_sup_from(K - 1) if mode == "tail" else ONE


def _children_to_expand(spec: Family, D: mpq, breadth: int, slack: mpq, mode: str) -> int:
    """Number K of leading children (digits 0..K-1) to expand; children >= K are lumped."""
    absD = abs(D)
    for k in range(1, breadth + 2):
        if absD * _remainder_scale(spec, k, mode) <= slack:
            return k
    return breadth + 1


def integral_enclosure(
    spec: Family,
    max_rank: int,
    breadth: int,
    slack=DEFAULT_SLACK,
    remainder: str = "tail",
    with_bound: bool = True,
) -> IntegralEnclosure:
    """Exact lower/upper sums for the integral of f over [0, 1].

    Each cylinder contributes length * [min f, max f] from the endpoint
    values. A cylinder is split while its rank is below ``max_rank`` and
    |D_m| > ``slack``; children 0..breadth are expanded (fewer once the
    remaining ones are negligible) and the rest are lumped into one
    interval. With ``remainder="tail"`` the lumped values are bounded by
    y_m + D_m * [0, sup_{n>=K-1} r_n]; ``"parent"`` uses the whole parent
    range y_m + D_m * [0, 1].
    """
    if remainder not in ("tail", "parent"):
        raise ValueError("remainder must be 'tail' or 'parent'")
    if max_rank < 1 or breadth < 0:
        raise ValueError("max_rank must be positive and breadth non-negative")
    slack = mpq(slack)
    if spec.exact_limit is not None:
        breadth = min(breadth, spec.exact_limit)
    lower = upper = gap = ZERO
    count = 0
    # (rank, left end a, P_m, sigma_m, y_m, D_m)
    stack = [(0, ZERO, 1, 0, ZERO, ONE)]
    while stack:
        m, a, prod, sigma, y, D = stack.pop()
        if m >= max_rank or abs(D) <= slack:
            length = mpq(1, prod * (1 + sigma))
            lo, hi = (y, y + D) if D >= 0 else (y + D, y)
            lower += length * lo
            upper += length * hi
            gap += length * abs(D)
            count += 1
            continue
        K = _children_to_expand(spec, D, breadth, slack, remainder)
        for c in range(K):
            s = sigma + c
            p = prod * (2 + s)
            stack.append((m + 1, a + mpq(1, p), p, s, y + D * spec.r(c), D * spec.u(c)))
        length = mpq(1, prod * (1 + sigma + K))
        top = D * _remainder_scale(spec, K, remainder)
        lower += length * (y + min(ZERO, top))
        upper += length * (y + max(ZERO, top))
        gap += length * abs(top)
        count += 1
    bound = None
    if with_bound:
        pb = paper_integral_bound(spec, 60)
        bound = pb.bound if pb.applicable else None
    return IntegralEnclosure(lower, upper, max_rank, breadth, count, gap, bound)


_NEGLIGIBLE = mpq(1, 2**200)


@dataclass(frozen=True)
class PaperBound:
    applicable: bool
    sum_u: RationalInterval
    sum_r: RationalInterval
    bound: RationalInterval | None
    n_terms: int


def paper_integral_bound(spec: Family, n_terms: int) -> PaperBound:
    """Enclosure of (1 - sum u_n/(2+n))^(-1) * sum r_n/(2+n).

    Both series are cut after n_terms terms with certified tail bounds;
    the enclosures for 1..n_terms terms are intersected, so adding terms
    never widens the result.
    """
    if n_terms < 1:
        raise ValueError("n_terms must be positive")
    if spec.exact_limit is not None:
        n_terms = min(n_terms, spec.exact_limit)
    su = sr = ZERO
    u_enc = r_enc = None
    for n in range(n_terms):
        su += spec.u(n) / (2 + n)
        sr += spec.r(n) / (2 + n)
        N = n + 1
        tu = spec.abs_u_tail(N) / (2 + N)
        tr = spec.r_tail_sum(N) / (2 + N)
        cu = RationalInterval(su if spec.nonnegative else su - tu, su + tu)
        cr = RationalInterval(sr, sr + tr)
        u_enc = cu if u_enc is None else (u_enc.intersect(cu) or cu)
        r_enc = cr if r_enc is None else (r_enc.intersect(cr) or cr)
        if tu + tr < _NEGLIGIBLE:
            n_terms = N
            break
    if u_enc.hi >= 1:
        return PaperBound(False, u_enc, r_enc, None, n_terms)
    lo = r_enc.lo / (1 - u_enc.lo)
    hi = r_enc.hi / (1 - u_enc.hi)
    if r_enc.lo < 0:
        lo = r_enc.lo / (1 - u_enc.hi)
    return PaperBound(True, u_enc, r_enc, RationalInterval(lo, hi), n_terms)


@dataclass(frozen=True)
class MeanIdentityVerdict:
    passed: bool
    one_minus_mean: float
    integral_mid: float
    integral_width: float
    tolerance: float


def mean_identity_check(
    spec: Family,
    n_samples: int,
    seed: int = 0,
    rank: int = 12,
    breadth: int = 24,
    enclosure: IntegralEnclosure | None = None,
) -> MeanIdentityVerdict:
    """Compare 1 - E[xi] (Monte Carlo) with the integral enclosure of f."""
    if n_samples < 1:
        raise ValueError("n_samples must be positive")
    if enclosure is None:
        enclosure = integral_enclosure(spec, rank, breadth, with_bound=False)
    state = SamplerState(seed, spec)
    mean = float(np.mean(sample_floats(state, n_samples)))
    width = float(enclosure.width)
    tol = 3 * (width + 1 / math.sqrt(n_samples))
    lhs = 1 - mean
    mid = float(enclosure.mid)
    return MeanIdentityVerdict(abs(lhs - mid) <= tol, lhs, mid, width, tol)


def derivative_ratio_diagnostic(spec: Family, d: DigitStream, max_rank: int) -> list[mpq]:
    """mu_f(Delta_m) / |Delta_m| = D_m (2+sigma_1)...(2+sigma_m)(1+sigma_m) for m = 1..max_rank."""
    if max_rank < 1:
        raise ValueError("max_rank must be positive")
    digits = d.take(max_rank)
    out = []
    D, prod, sigma = ONE, 1, 0
    for g in digits:
        D *= spec.u(g)
        sigma += g
        prod *= 2 + sigma
        out.append(D * prod * (1 + sigma))
    return out
