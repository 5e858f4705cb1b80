import json
import math

import pytest
from gmpy2 import mpq
from hypothesis import given
from hypothesis import strategies as st
from oracles import r_oracle, u_oracle

from engelf.family import (
    CONDITIONS,
    Custom,
    Dyadic,
    InsertionRule,
    SignedExample4,
    Sylvester,
    TwoScale,
    ZeroInserted,
    builtin_families,
    draw_index,
    family_from_config,
    family_from_name,
    insert_zeros,
    load_family,
    support_thresholds,
    validate,
)


def _depth(spec):
    return 12 if spec.kind == "sylvester" else 40


def test_terms_match_defining_sequences(family):
    for n in range(_depth(family)):
        assert family.u(n) == u_oracle(family.kind, n)
        assert family.r(n) == r_oracle(family.kind, n)


def test_tail_recursion(family):
    assert family.r(-1) == 1
    for n in range(_depth(family)):
        assert family.r(n) == family.r(n - 1) - family.u(n)
        assert family.S(n) == 1 - family.r(n)


def test_builtins_validate(family):
    report = validate(family, 60)
    assert report.ok, str(report)


def test_certified_bounds(family):
    span = 30 if family.kind != "sylvester" else 8
    limit = _depth(family) - span
    for n in range(limit):
        window_u = [family.u(k) for k in range(n, n + span)]
        window_r = [family.r(k) for k in range(n, n + span)]
        assert all(abs(u) <= family.u_star for u in window_u)
        assert family.r_sup_from(n) >= max(window_r)
        assert family.abs_u_tail(n) >= sum(abs(u) for u in window_u)
        assert family.r_tail_sum(n) >= sum(window_r)
        assert family.log2_r_sup_from(n) >= math.log2(family.r_sup_from(n))
    assert family.r_sup_from(-1) == 1
    assert family.u_star < 1


def test_sign_flags():
    assert Dyadic().nonnegative and not Dyadic().has_zero
    assert not SignedExample4().nonnegative and SignedExample4().has_negative
    assert family_from_name("dyadic_zero_interleaved").has_zero


@given(st.fractions(min_value=1, max_value=2, max_denominator=50).filter(lambda a: 1 < a < 2))
def test_two_scale_family_valid_for_all_a(a):
    spec = TwoScale(mpq(a))
    assert validate(spec, 30).ok
    assert spec.u(0) + spec.u(1) == mpq(1, 2)


@pytest.mark.parametrize("a", ["1", "2", "5/2", "0"])
def test_two_scale_parameter_range(a):
    with pytest.raises(ValueError):
        TwoScale(a)


def test_custom_family():
    spec = Custom(("1/2",), "1/4", "1/2")
    assert validate(spec, 50).ok
    assert spec.u(0) == mpq(1, 2) and spec.u(3) == mpq(1, 16)
    assert spec.r(2) == mpq(1, 8)


def test_custom_family_failures_name_condition():
    report = validate(Custom(("1/2",), "1/8", "1/2"), 20)
    assert not report.ok
    assert report.failures[0].condition == "sum"
    assert CONDITIONS["sum"] in str(report)
    with pytest.raises(ValueError, match=r"condition \(2\)"):
        Custom(("1/2",), "1/4", "3/2")
    neg = validate(Custom(("3/4", "1/2"), "-1/8", "1/2"), 20)
    assert {f.condition for f in neg.failures} >= {"tail"}


def test_zero_insertion_preserves_conditions():
    rule = InsertionRule(every=1, after=((0, 2),))
    spec = insert_zeros(Dyadic(), rule)
    assert isinstance(spec, ZeroInserted)
    assert validate(spec, 60).ok
    # u_0 at 0, then three zeros, then u_1
    assert [spec.u(n) for n in range(6)] == [mpq(1, 2), 0, 0, 0, mpq(1, 4), 0]
    assert spec.r(1) == spec.r(3) == mpq(1, 2)
    assert insert_zeros(Dyadic(), InsertionRule()) == Dyadic()


def test_zero_insertion_into_sylvester_limits():
    spec = insert_zeros(Sylvester(), InsertionRule(every=1))
    assert spec.exact_limit == 2 * Sylvester.exact_limit + 1
    assert spec.u(2 * 20) == Sylvester().u(20)
    assert validate(spec, 100).ok


@pytest.mark.parametrize("spec", builtin_families() + [Custom(("1/2",), "1/4", "1/2"), insert_zeros(Dyadic(), InsertionRule(2))])
def test_config_roundtrip(spec, tmp_path):
    cfg = spec.to_config()
    assert family_from_config(json.loads(json.dumps(cfg))) == spec
    path = tmp_path / "f.json"
    path.write_text(json.dumps(cfg))
    assert load_family(path) == spec


@pytest.mark.parametrize("cfg", [{}, {"kind": "nope"}, [], {"kind": "two_scale", "a": "7"}])
def test_bad_configs(cfg):
    with pytest.raises(ValueError):
        family_from_config(cfg)


def test_sylvester_overflow_guard():
    with pytest.raises(OverflowError):
        Sylvester().u(Sylvester.exact_limit + 5)


@pytest.mark.parametrize("spec", [Dyadic(), Sylvester(), family_from_name("dyadic_zero_interleaved")])
def test_support_thresholds(spec):
    t = support_thresholds(spec)
    top = 1 << 128
    assert t[-1] >= top
    assert all(a <= b for a, b in zip(t, t[1:]))
    # P(eta = n) = (t[n] - t[n-1]) / 2^128 up to one unit
    for n in range(min(6, len(t) - 1)):
        width = t[n] - (t[n - 1] if n else 0)
        assert abs(mpq(width, top) - spec.u(n)) <= mpq(1, top)
    assert draw_index(t, 0) == 0
    assert draw_index(t, t[0]) >= 1
    assert draw_index(t, top - 1) < len(t)


def test_thresholds_need_nonnegative():
    with pytest.raises(ValueError):
        support_thresholds(SignedExample4())
