import pytest
from hypothesis import given, strategies as st

from oracle import fundamental_unit
from qdrinfeld.field_core import ff_make
from qdrinfeld.quadratic import (OKElement, binet_closed, binet_q, ctx_simple, nearest_dist, ok_f, ok_norm_degree,
                                 ok_parse, ok_text, poly_mul, qtable_csv)
from qdrinfeld.series import INF, ser_format

CONTEXTS = [(2, [0, 1]), (2, [0, 0, 1]), (3, [0, 0, 1]), (3, [1, 0, 1]), (4, [0, 0, 0, 1]), (5, [0, 1]),
            (2, [1, 1, 0, 1])]


@pytest.fixture(scope="module", params=CONTEXTS, ids=lambda c: f"q{c[0]}-a{''.join(map(str, c[1]))}")
def ctx(request):
    q, a = request.param
    return ctx_simple(q, a)


def test_fundamental_unit_against_oracle():
    c = ctx_simple(3, [0, 0, 1], 1, 16)
    ref = fundamental_unit(3, {2: 1}, 1, 14)
    got = {int(-v): x.value for v, x in c.f.terms()}
    assert c.f.prec == 14
    assert got == {e: x for e, x in ref.items() if -e < c.f.prec}
    assert ser_format(c.f.truncate(7)) == "1*T^(2) + 1*T^(-2) + 2*T^(-6) + O(T^(-7))"
    assert c.f.val == -2


def test_fundamental_unit_equation(ctx):
    lhs = ctx.f * ctx.f - ctx.a * ctx.f - ctx.b
    assert lhs.is_zero_at_prec()
    assert ctx.fstar.val == ctx.d
    assert (ctx.f + ctx.fstar - ctx.a).is_zero_at_prec()


def test_uniformizer_choice():
    odd = ctx_simple(2, [0, 1])
    assert odd.coprime_d() and odd.pi.val == 1
    assert ((odd.pi * odd.f) - 1).is_zero_at_prec()      # f^(-1/d) with d = 1
    even = ctx_simple(2, [0, 0, 1])
    assert not even.coprime_d()
    cube = even.pi ** 3 * even.f * even.T()
    assert (cube - 1).is_zero_at_prec()                  # (fT)^(-1/3)


def test_binet_small():
    c = ctx_simple(3, [0, 0, 1])
    assert ser_format(binet_q(c, 0)) == "1*T^(0)"
    assert ser_format(binet_q(c, 1)) == "1*T^(2)"
    assert ser_format(binet_q(c, 2)) == "1*T^(4) + 1*T^(0)"
    assert qtable_csv(c, 2).splitlines()[1:] == ["0,1", "1,0 0 1", "2,1 0 0 0 1"]


@pytest.mark.parametrize("n", [0, 1, 5, 9])
def test_binet_closed_form(ctx, n):
    assert (binet_q(ctx, n) - binet_closed(ctx, n)).is_zero_at_prec()


def test_nearest_dist():
    c = ctx_simple(3, [0, 0, 1])
    assert nearest_dist(c, binet_q(c, 0) * c.f) == 2
    assert nearest_dist(c, binet_q(c, 2) * c.f) == 6
    assert nearest_dist(c, c.T(3)) is INF


@given(st.integers(0, 6))
def test_nearest_dist_grows_linearly(n):
    for q, a in CONTEXTS[:4]:
        c = ctx_simple(q, a)
        assert nearest_dist(c, binet_q(c, n) * c.f) == (n + 1) * c.d


def test_ok_relations():
    c = ctx_simple(3, [0, 0, 1])
    f = ok_f(c)
    sq = f * f
    assert (sq.g, sq.h) == ((1,), (0, 0, 1))      # f^2 = a f + b
    assert f.in_A_inf1() and not ok_parse(c, "T").in_A_inf1()
    assert ok_norm_degree(ok_parse(c, "T")) == 2
    assert ok_text(ok_parse(c, "fT+2")) == "[2]+[0,1]f"


def ok_strategy(c):
    coeffs = st.lists(st.integers(0, c.q - 1), max_size=4)
    return st.builds(lambda g, h: OKElement(c, tuple(g), tuple(h)), coeffs, coeffs)


C3 = ctx_simple(3, [1, 0, 1])


@given(ok_strategy(C3), ok_strategy(C3))
def test_ok_arithmetic_matches_series(x, y):
    assert ((x * y).series() - x.series() * y.series()).is_zero_at_prec()
    assert ((x + y).series() - x.series() - y.series()).is_zero_at_prec()


@given(ok_strategy(C3), ok_strategy(C3))
def test_norm_multiplicative(x, y):
    assert (x * y).norm() == poly_mul(C3.spec, x.norm(), y.norm())


@given(ok_strategy(C3))
def test_degree_and_sign_match_series(x):
    if x.is_zero():
        return
    s = x.series()
    assert x.degree() == -s.val
    assert x.sgn() == s.sgn()


@given(ok_strategy(C3))
def test_ok_text_roundtrip(x):
    assert (ok_parse(C3, ok_text(x)) - x).is_zero()


@pytest.mark.parametrize("a,b,prec", [([0, 0, 2], 1, None), ([0, 0, 1], 0, None), ([1], 1, None),
                                      ([0, 0, 1], 1, 5)])
def test_context_validation(a, b, prec):
    with pytest.raises(ValueError):
        ctx_simple(3, a, b, prec)


def test_b_in_f4():
    c = ctx_simple(4, [0, 0, 1], "x")
    assert c.b == ff_make(c.spec, "x")
    assert (c.f * c.f - c.a * c.f - c.b).is_zero_at_prec()
