from fractions import Fraction

import pytest
from gmpy2 import mpq
from hypothesis import given
from hypothesis import strategies as st

from engelf.rational import RationalInterval, TermSum, exact_sum, fmt_rational, parse_rational

fractions = st.fractions(max_denominator=10**9)


@pytest.mark.parametrize(
    "text, expected",
    [("1/2", mpq(1, 2)), ("3", mpq(3)), ("1e-6", mpq(1, 10**6)), ("0.25", mpq(1, 4)), (" -2/4 ", mpq(-1, 2))],
)
def test_parse_rational(text, expected):
    assert parse_rational(text) == expected


@pytest.mark.parametrize("bad", ["", "1/0", "abc", "1/2/3"])
def test_parse_rational_rejects(bad):
    with pytest.raises(ValueError):
        parse_rational(bad)


@given(fractions)
def test_format_parse_roundtrip(x):
    assert parse_rational(fmt_rational(mpq(x))) == x


def test_interval_basics():
    iv = RationalInterval(mpq(1, 4), mpq(3, 4))
    assert iv.width == mpq(1, 2) and iv.mid == mpq(1, 2)
    assert mpq(1, 4) in iv and mpq(4, 5) not in iv
    assert iv.intersect(RationalInterval(1, 2)) is None
    assert iv.affine(1, -2) == RationalInterval(mpq(-1, 2), mpq(1, 2))
    assert RationalInterval.point(1).is_point
    with pytest.raises(ValueError):
        RationalInterval(1, 0)


@given(st.lists(fractions, max_size=8), st.lists(fractions, max_size=8), st.lists(fractions, max_size=4))
def test_termsum_compare_matches_plain_sum(common, left, right):
    a = TermSum(common + left)
    b = TermSum(common + right)
    diff = sum(left, Fraction(0)) - sum(right, Fraction(0))
    assert (a == b) == (diff == 0)
    assert (a < b) == (diff < 0)
    assert (a >= b) == (diff >= 0)
    assert a.value == sum(common + left, Fraction(0))


@given(st.lists(fractions, max_size=10))
def test_exact_sum(xs):
    assert exact_sum(xs) == sum(xs, Fraction(0))
