from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from oracle import sqrt_monic_even
from qdrinfeld.field_core import ff_elements, ff_make, field_for_q
from qdrinfeld.series import (INF, PrecisionExhausted, graded_reduce, ser_const, ser_format, ser_from_poly,
                              ser_inv, ser_monomial, ser_nth_root, ser_one_unit_part, ser_parse, ser_sgn,
                              ser_sqrt_disc, zero_series)

F3 = field_for_q(3)


def series_from_terms(F, terms, window=30):
    """terms: {exponent of T: coefficient index}."""
    out = zero_series(F)
    for e, c in terms.items():
        out = out + ser_monomial(F, ff_elements(F)[c], -e)
    return out.with_window(window)


def laurent(F, max_deg=3, min_deg=-6):
    return st.dictionaries(st.integers(min_deg, max_deg), st.integers(1, F.q - 1), max_size=5)


def test_additive_inverse_is_exact_zero():
    x = ser_parse("1*T^(-1)", F3)
    s = x + (-x)
    assert s.is_zero() and s.val is INF


def test_difference_of_squares():
    x = ser_parse("1*T^(-1)", F3)
    one = ser_const(F3, 1)
    assert ser_format((one + x) * (one - x)) == "1*T^(0) + 2*T^(-2)"


def test_geometric_series():
    one = ser_const(F3, 1, window=10)
    g = one / (one - ser_parse("1*T^(-1)", F3))
    assert g.prec == 10
    assert all(g.coeff(v) == ff_make(F3, 1) for v in range(10))


def test_division_by_zero_at_precision():
    tiny = ser_parse("1*T^(-1)", F3).with_window(5).declare_prec(0)
    vanished = (tiny - tiny.declare_prec(0)).declare_prec(3)
    with pytest.raises((PrecisionExhausted, ZeroDivisionError)):
        ser_inv(vanished)


def test_sign():
    assert ser_sgn(ser_parse("1*T^(2) + 1*T^(-1)", F3)).value == 1
    assert ser_sgn(ser_parse("2*T^(5)", F3)).value == 2


@given(laurent(F3), st.integers(1, 2))
def test_sign_multiplicative(terms, c):
    x = series_from_terms(F3, terms)
    if x.is_zero():
        return
    assert ser_sgn(x * ff_make(F3, c)) == ser_sgn(x) * ff_make(F3, c)


def test_exact_square_root():
    assert ser_format(ser_nth_root(ser_parse("1*T^(2)", F3), 2)) == "1*T^(1)"


def test_sqrt_disc_against_oracle():
    F5 = field_for_q(5)
    r = ser_sqrt_disc(ser_from_poly(F5, [0, 1]), ff_make(F5, 1), window=12)
    ref = sqrt_monic_even({2: 1, 0: 4}, 5, 11)
    assert r.prec >= 8
    assert {int(-v): c.value for v, c in r.terms()} == {e: c for e, c in ref.items() if -e < r.prec}
    assert ser_format(r).startswith("1*T^(1) + 2*T^(-1)")
    assert ((r * r) - ser_parse("1*T^(2) + 4", F5)).is_zero_at_prec()


def test_sqrt_disc_char2_is_a():
    F2 = field_for_q(2)
    a = ser_from_poly(F2, [0, 0, 1])
    assert ser_sqrt_disc(a, ff_make(F2, 1)) == a


def test_one_unit_root():
    x = (ser_const(F3, 1) + ser_parse("1*T^(-1)", F3)).with_window(20)
    y = ser_nth_root(x, 2)
    assert (y - ser_const(F3, 1)).val > 0
    assert (y * y - x).is_zero_at_prec()
    with pytest.raises(ValueError):
        ser_nth_root(x, 3)


def test_one_unit_part():
    pi = ser_parse("1*T^(-1)", F3)
    assert ser_one_unit_part(ser_const(F3, 1), pi) == ser_const(F3, 1)
    assert ser_one_unit_part(ser_parse("2*T^(3)", F3), pi) == ser_const(F3, 1)


def test_parse_format_roundtrip_fractional():
    F4 = field_for_q(4)
    text = "(1,1)*T^(3/2) + 1*T^(-1/2) + O(T^(-4))"
    x = ser_parse(text, F4)
    assert x.val == Fraction(-3, 2) and x.prec == 4
    assert ser_parse(ser_format(x), F4) == x


@given(laurent(F3), laurent(F3), laurent(F3))
def test_ring_laws(a, b, c):
    x, y, z = (series_from_terms(F3, t) for t in (a, b, c))
    assert ((x + y) * z - (x * z + y * z)).is_zero_at_prec()
    assert (x * y - y * x).is_zero_at_prec()


@given(laurent(F3), laurent(F3))
def test_valuation_of_product(a, b):
    x, y = series_from_terms(F3, a), series_from_terms(F3, b)
    if x.is_zero() or y.is_zero():
        return
    assert (x * y).val == x.val + y.val


@given(laurent(F3, 2, -4))
def test_inverse(a):
    x = series_from_terms(F3, a)
    if x.is_zero():
        return
    assert (x * ser_inv(x) - ser_const(F3, 1)).is_zero_at_prec()


@given(laurent(field_for_q(5), 4, -3))
def test_square_root_squares_back(a):
    F5 = field_for_q(5)
    x = series_from_terms(F5, a)
    if x.is_zero() or x.val.denominator != 1 or int(x.val) % 2 or x.sgn().value not in (1, 4):
        return
    r = ser_nth_root(x, 2)
    assert (r * r - x).is_zero_at_prec()


def test_graded_reduce():
    vecs = [ser_parse("1*T^(2) + 1*T^(-1)", F3), ser_parse("1*T^(1)", F3)]
    target = vecs[0] * ff_make(F3, 2) + vecs[1]
    rem, comb = graded_reduce(vecs, target)
    assert rem.is_zero() and [c.value for c in comb] == [2, 1]
    tail = ser_parse("1*T^(-3)", F3)
    rem, _ = graded_reduce(vecs, vecs[0] + tail)
    assert rem == tail
