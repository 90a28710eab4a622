from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from qdrinfeld.exponentials import (e_eps, e_ideal, exp_lattice, qdm_instance_resolved, qt_exp, qt_exp_components,
                                    qt_exp_resolved)
from qdrinfeld.field_core import ff_elements
from qdrinfeld.lattice import EpsilonIndex
from qdrinfeld.periods import xi
from qdrinfeld.quadratic import binet_q, ctx_simple, ok_parse
from qdrinfeld.series import INF, ser_monomial, ser_parse, zero_series

C32 = ctx_simple(3, [0, 0, 1])
EPS = EpsilonIndex(1, 0)


def small_series(c):
    terms = st.dictionaries(st.integers(-2, 1), st.integers(1, c.q - 1), max_size=3)

    def build(t):
        out = zero_series(c.spec)
        for e, k in t.items():
            out = out + ser_monomial(c.spec, ff_elements(c.spec)[k], -e)
        return out
    return terms.map(build)


def test_zero_and_lattice_points():
    assert e_eps(C32, EPS, zero_series(C32.spec)).value.is_zero()
    lam = xi(C32, EPS).xi * binet_q(C32, 1)
    assert e_eps(C32, EPS, lam).value.is_zero_at_prec()
    assert exp_lattice(C32, 0, C32.f).value.is_zero_at_prec()


@given(small_series(C32), small_series(C32))
def test_additive(x, y):
    lhs = e_eps(C32, EPS, x + y)
    rhs = e_eps(C32, EPS, x).value + e_eps(C32, EPS, y).value
    assert (lhs.value - rhs).val >= min(lhs.guaranteed_prec, rhs.prec if rhs.prec is not None else INF) - 1


@given(small_series(C32), st.integers(1, 2))
def test_scalar_linear(x, c):
    k = ff_elements(C32.spec)[c]
    assert (e_ideal(C32, 1, x * k).value - e_ideal(C32, 1, x).value * k).is_zero_at_prec()


def test_gap_growth_frozen():
    rep = qt_exp_resolved(C32, C32.one(), 0)
    assert all(rep.resolved)
    assert rep.val_gap == [21, 25, 29, 33]
    assert all(b - a >= C32.d for a, b in zip(rep.val_gap[1:], rep.val_gap[2:]))


def test_zero_converges_trivially():
    rep = qt_exp(C32, zero_series(C32.spec), 0)
    assert all(g is INF for g in rep.val_gap)


def test_limit_components_distinct():
    comps = [e.value for e in qt_exp_components(C32, ser_parse("1 + 1*T^(-1) + 1*T^(-2)", C32.spec))]
    assert (comps[0] - comps[1]).val == -3


@pytest.mark.parametrize("alpha", ["1", "2", "f"])
def test_module_diagram(alpha):
    zs = [ser_parse(t, C32.spec) for t in ["1", "1*T^(-1) + 1*T^(-2)"]]
    rep = qdm_instance_resolved(C32, EpsilonIndex(3, 0), ok_parse(C32, alpha), zs)
    assert rep.ok
    if alpha in ("1", "2"):
        # units act by scaling: agreement is exact up to the working precision
        assert all(v >= Fraction(C32.window) for _, v, _ in rep.checks)
