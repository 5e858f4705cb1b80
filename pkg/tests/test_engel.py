from fractions import Fraction

import pytest
from gmpy2 import mpq
from hypothesis import given
from hypothesis import strategies as st
from oracles import e_digits, value_from_digits

from engelf.engel import (
    Cylinder,
    DigitStream,
    digits_of,
    e_rational,
    insert,
    merge_first_two,
    shift,
    theta,
    value_of,
)
from engelf.rational import RationalInterval, parse_rational

unit_rationals = st.fractions(min_value=0, max_value=1, max_denominator=10**6).filter(lambda x: x > 0)
bases = st.lists(st.integers(0, 9), min_size=1, max_size=7).map(tuple)


@pytest.mark.parametrize(
    "x, text",
    [("1", "(0)"), ("1/2", "1 (0)"), ("5/6", "0 0 2 (0)"), ("1/3", "2 (0)"), ("2/3", "0 2 (0)"), ("3/4", "0 1 (0)")],
)
def test_digits_examples(x, text):
    d = digits_of(parse_rational(x))
    assert str(d) == text
    assert value_of(d) == parse_rational(x)


@pytest.mark.parametrize("bad", [mpq(0), mpq(3, 2), mpq(-1, 2)])
def test_digits_domain(bad):
    with pytest.raises(ValueError):
        digits_of(bad)


def test_digits_rejects_float_and_bad_cap():
    with pytest.raises(TypeError):
        digits_of(0.5)
    with pytest.raises(ValueError):
        digits_of(mpq(1, 2), 0)


def test_truncated_stream_brackets_value():
    x = mpq(999983, 1000000)
    d = digits_of(x, 3)
    assert not d.is_periodic and d.depth == 3
    v = value_of(d)
    assert isinstance(v, RationalInterval) and x in v


@given(unit_rationals)
def test_digits_match_classic_engel_oracle(x):
    d = digits_of(mpq(x), 256)
    assert d.is_e_rational
    assert d == DigitStream(e_digits(x), (0,))
    assert value_of(d) == x


@given(bases)
def test_value_matches_series_oracle(base):
    assert value_of(e_rational(*base)) == value_from_digits(base)


@given(bases)
def test_e_rational_is_cylinder_right_end(base):
    a, b = Cylinder(base).endpoints()
    assert value_of(e_rational(*base)) == b
    assert value_of(Cylinder(base).left_point()) == a


@given(bases, st.integers(0, 30))
def test_child_ratio_and_containment(base, c):
    parent = Cylinder(base)
    child = parent.child(c)
    assert child.length() == parent.length() * parent.child_ratio(c)
    a, b = parent.endpoints()
    ca, cb = child.endpoints()
    assert a < ca < cb <= b


@given(bases, st.integers(1, 40))
def test_children_tile_parent(base, k):
    parent = Cylinder(base)
    a, b = parent.endpoints()
    total = sum((parent.child(c).length() for c in range(k)), mpq(0))
    rem = parent.remainder(k)
    assert total + rem.width == b - a
    assert rem.lo == a


def test_root_children():
    root = Cylinder(())
    assert root.endpoints() == (0, 1)
    assert Cylinder((0,)).endpoints() == (mpq(1, 2), 1)
    assert Cylinder((1,)).endpoints() == (mpq(1, 3), mpq(1, 2))


@given(unit_rationals)
def test_cylinder_of_contains_point(x):
    d = digits_of(mpq(x), 256)
    for m in range(1, min(6, d.depth) + 1):
        assert Cylinder(d.take(m)).contains(mpq(x))


def test_stream_canonical_form():
    assert DigitStream((1, 0, 1), (0, 1)) == DigitStream((1,), (0, 1))
    assert DigitStream((), (0, 1, 0, 1)).period == (0, 1)
    assert DigitStream((2, 0, 0), (0,)) == e_rational(2)
    with pytest.raises(ValueError):
        DigitStream((-1,))
    with pytest.raises(ValueError):
        DigitStream((), ())


@pytest.mark.parametrize("text", ["1 2 (0)", "(0 1)", "3 4", "(0)", "0 0 2 (0)"])
def test_parse_str_roundtrip(text):
    assert str(DigitStream.parse(text)) == text


def test_parse_rejects_garbage():
    with pytest.raises(ValueError):
        DigitStream.parse("1 x (0)")


def test_nonzero_period_is_irrational_enclosure():
    v = value_of(DigitStream((), (0, 1)), depth=40)
    assert isinstance(v, RationalInterval) and v.width < mpq(1, 10**30)
    assert v.lo > 0.74 and v.hi < 0.741


@given(bases, st.integers(0, 12))
def test_shift_inverts_insert(base, i):
    d = e_rational(*base)
    assert shift(insert(i, d)) == d
    assert insert(i, d).digit(1) == i


@given(unit_rationals)
def test_theta_merges_first_two_digits(x):
    d = digits_of(mpq(x), 256)
    assert value_of(merge_first_two(d)) == theta(mpq(x))


def test_value_of_sum_is_geometric_for_e_rationals():
    # 1 = sum_{n>=1} 1/2^n
    assert value_of(e_rational()) == 1
    assert value_from_digits(()) == Fraction(1)
