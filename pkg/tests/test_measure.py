import math

import numpy as np
import pytest
from conftest import FAMILIES
from gmpy2 import mpq
from hypothesis import given, settings
from hypothesis import strategies as st
from oracles import CHI2_DF6_1E3, DYADIC_PAPER_BOUND, DYADIC_SERIES, dyadic_series_numeric, f_float

from engelf.engel import Cylinder, DigitStream, digits_of, e_rational
from engelf.function import cylinder_change
from engelf.measure import (
    SamplerState,
    derivative_ratio_diagnostic,
    digit_counts,
    empirical_cdf_distance,
    integral_enclosure,
    mean_identity_check,
    paper_integral_bound,
    sample_floats,
    sample_xi,
)

NONNEG = [n for n, f in sorted(FAMILIES.items()) if f.nonnegative]


def test_sampler_deterministic():
    a = SamplerState(7, FAMILIES["sylvester"])
    b = SamplerState(7, FAMILIES["sylvester"])
    assert [sample_xi(a) for _ in range(20)] == [sample_xi(b) for _ in range(20)]
    c = SamplerState(8, FAMILIES["sylvester"])
    assert np.any(sample_floats(c, 20) != sample_floats(SamplerState(7, FAMILIES["sylvester"]), 20))


@pytest.mark.parametrize("name", NONNEG)
def test_sample_lies_in_short_cylinder(name):
    state = SamplerState(1, FAMILIES[name], mpq(1, 10**6))
    for _ in range(50):
        s = sample_xi(state)
        a, b = s.cylinder.endpoints()
        assert s.point == b
        assert b - a < mpq(1, 10**6)


def test_zero_probability_digits_never_drawn():
    state = SamplerState(3, FAMILIES["dyadic_zero_interleaved"])
    for _ in range(500):
        assert all(g % 2 == 0 for g in sample_xi(state).cylinder.base)


@pytest.mark.parametrize("name", ["dyadic", "sylvester"])
def test_digit_frequencies_chi_square(name):
    spec = FAMILIES[name]
    n = 10**5
    counts = digit_counts(SamplerState(11, spec), n, 6)
    probs = [float(spec.u(k)) for k in range(6)]
    probs.append(1 - sum(probs))
    stat = 0.0
    for c, p in zip(counts, probs):
        if p > 0:
            expected = n * p
            stat += (c - expected) ** 2 / expected
            assert abs(c - expected) <= 3 * math.sqrt(n * p * (1 - p)) + 1
    assert stat < CHI2_DF6_1E3


def test_sampler_rejects_signed():
    with pytest.raises(ValueError):
        SamplerState(0, FAMILIES["signed_example4"])


@pytest.mark.parametrize("name", ["dyadic", "sylvester"])
def test_ks_small(name):
    assert empirical_cdf_distance(FAMILIES[name], 10**4, 500, seed=2) < 0.02


def test_ks_shrinks_with_sample_size():
    ks = [empirical_cdf_distance(FAMILIES["dyadic"], n, 200, seed=5) for n in (10**3, 10**4, 10**5)]
    assert ks[0] > ks[1] > ks[2]


def test_ks_argument_checks():
    with pytest.raises(ValueError):
        empirical_cdf_distance(FAMILIES["dyadic"], 0)


def test_integral_one_step_examples():
    # cylinder (0) has f in [1/2, 1] on length 1/2; remainder (0, 1/2] bounded by [0, 1]
    parent = integral_enclosure(FAMILIES["dyadic"], 1, 0, remainder="parent", with_bound=False)
    assert (parent.lower, parent.upper) == (mpq(1, 4), 1)
    # the tail bound knows f <= r_0 = 1/2 on (0, 1/2]
    tail = integral_enclosure(FAMILIES["dyadic"], 1, 0, with_bound=False)
    assert (tail.lower, tail.upper) == (mpq(1, 4), mpq(3, 4))


@pytest.mark.parametrize("name", sorted(FAMILIES))
def test_integral_sound_and_bounded(name):
    spec = FAMILIES[name]
    enc = integral_enclosure(spec, 5, 6, mpq(1, 10**3))
    assert enc.lower <= enc.upper
    assert enc.upper - enc.lower == enc.width_bound
    if spec.nonnegative:
        assert 0 <= enc.lower and enc.upper <= 1
        assert enc.upper <= enc.paper_bound.hi


@settings(max_examples=25)
@given(
    name=st.sampled_from(sorted(FAMILIES)),
    rank=st.integers(1, 4),
    breadth=st.integers(0, 5),
    extra_rank=st.integers(0, 2),
    extra_breadth=st.integers(0, 3),
    mode=st.sampled_from(["tail", "parent"]),
)
def test_refinement_never_widens(name, rank, breadth, extra_rank, extra_breadth, mode):
    spec = FAMILIES[name]
    coarse = integral_enclosure(spec, rank, breadth, mpq(1, 10**3), mode, with_bound=False)
    fine = integral_enclosure(spec, rank + extra_rank, breadth + extra_breadth, mpq(1, 10**3), mode, with_bound=False)
    assert coarse.lower <= fine.lower <= fine.upper <= coarse.upper


def test_integral_matches_float_quadrature():
    # midpoint rule; f is increasing with f(1) - f(0) = 1, so the rule is off by at most 1/n
    n = 1000
    total = 0.0
    for k in range(n):
        x = mpq(2 * k + 1, 2 * n)
        total += f_float("dyadic", iter(digits_of(x, 60)), 60)
    enc = integral_enclosure(FAMILIES["dyadic"], 8, 12, mpq(1, 10**5), with_bound=False)
    assert abs(total / n - float(enc.mid)) < 1 / n + float(enc.width)


def test_paper_bound_dyadic_closed_form():
    assert abs(dyadic_series_numeric() - DYADIC_SERIES) < 1e-15
    pb = paper_integral_bound(FAMILIES["dyadic"], 60)
    assert pb.applicable
    assert pb.sum_u.lo <= DYADIC_SERIES + 1e-15 and DYADIC_SERIES - 1e-15 <= pb.sum_u.hi
    assert abs(float(pb.bound.lo) - DYADIC_PAPER_BOUND) < 1e-12
    assert abs(float(pb.bound.hi) - DYADIC_PAPER_BOUND) < 1e-12


@pytest.mark.parametrize("name", sorted(FAMILIES))
def test_paper_bound_nested(name):
    spec = FAMILIES[name]
    one, many = paper_integral_bound(spec, 1), paper_integral_bound(spec, 50)
    assert many.applicable
    assert many.sum_u.subset_of(one.sum_u) and many.sum_r.subset_of(one.sum_r)
    # one term can leave the denominator uncertified; otherwise the bounds nest
    if one.applicable:
        assert many.bound.subset_of(one.bound)


def test_paper_bound_sylvester_thirty_terms():
    pb = paper_integral_bound(FAMILIES["sylvester"], 30)
    enc = integral_enclosure(FAMILIES["sylvester"], 8, 12, mpq(1, 10**5), with_bound=False)
    assert enc.upper <= pb.bound.hi


def test_mean_identity_deterministic():
    enc = integral_enclosure(FAMILIES["dyadic"], 8, 12, mpq(1, 10**5), with_bound=False)
    a = mean_identity_check(FAMILIES["dyadic"], 20000, seed=4, enclosure=enc)
    b = mean_identity_check(FAMILIES["dyadic"], 20000, seed=4, enclosure=enc)
    assert a == b and a.passed


def test_derivative_ratio_examples():
    assert derivative_ratio_diagnostic(FAMILIES["dyadic"], e_rational(), 8) == [1] * 8
    ratios = derivative_ratio_diagnostic(FAMILIES["dyadic_zero_interleaved"], e_rational(0, 2, 1, 4), 6)
    assert all(r != 0 for r in ratios[:2]) and all(r == 0 for r in ratios[2:])
    assert len(derivative_ratio_diagnostic(FAMILIES["sylvester"], DigitStream((), (1,)), 5)) == 5


@pytest.mark.parametrize("name", sorted(FAMILIES))
@given(base=st.lists(st.integers(0, 6), min_size=1, max_size=6).map(tuple))
def test_derivative_ratio_is_change_over_length(name, base):
    spec = FAMILIES[name]
    ratios = derivative_ratio_diagnostic(spec, e_rational(*base), len(base))
    for m in range(1, len(base) + 1):
        c = Cylinder(base[:m])
        assert ratios[m - 1] == cylinder_change(spec, c) / c.length()
