from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from qdrinfeld.field_core import ff_make
from qdrinfeld.lattice import EpsilonIndex
from qdrinfeld.periods import (eta, eta_slices, t_exponent, transabs_valuation, u_eps, xi, xi_convergence,
                               xi_valuation)
from qdrinfeld.quadratic import ctx_simple
from qdrinfeld.series import ser_pow

C32 = ctx_simple(3, [0, 0, 1])
C22 = ctx_simple(2, [0, 0, 1])


def test_eta_is_minus_one():
    assert eta(C32, EpsilonIndex(1, 0)).value == 2
    assert eta(C22, EpsilonIndex(1, 0)).value == 1
    assert all(s.value == 2 for _, s in eta_slices(C32, EpsilonIndex(1, 0), 6))


@given(st.sampled_from([(2, 2), (3, 2), (2, 3), (3, 3), (5, 2), (4, 2)]), st.integers(1, 3), st.data())
def test_eta_slices_constant(qd, N, data):
    q, d = qd
    c = ctx_simple(q, [0] * d + [1])
    l = data.draw(st.integers(0, d - 1))
    eps = EpsilonIndex(N, l)
    minus_one = ff_make(c.spec, -1)
    assert eta(c, eps) == minus_one
    assert all(s == minus_one for _, s in eta_slices(c, eps, d * (N + 2)))


def test_period_record():
    rec = xi(C32, EpsilonIndex(1, 0))
    assert rec.t == -1 and rec.v_xi == Fraction(1, 2)
    assert rec.to_json()["u_prefix"].startswith("1*T^(0) + 1*T^(-2) + 2*T^(-4)")
    assert xi(C32, 0).v_xi == Fraction(7, 2) and xi(C32, 1).v_xi == Fraction(1, 2)
    assert xi(C22, EpsilonIndex(1, 0)).v_xi == 0


@pytest.mark.parametrize("q,a", [(2, [0, 0, 1]), (3, [0, 0, 1]), (2, [0, 0, 0, 1]), (5, [0, 1, 1])])
def test_period_equation_and_valuation(q, a):
    c = ctx_simple(q, a)
    for target in [EpsilonIndex(1, 0), EpsilonIndex(2, c.d - 1), 0, c.d - 1]:
        rec = xi(c, target)
        assert rec.v_xi == transabs_valuation(c, target) == xi_valuation(c, target)
        lhs = ser_pow(rec.xi, q - 1) * rec.eta * ser_pow(c.pi, t_exponent(c, target))
        assert (lhs - ser_pow(rec.u, q - 1)).is_zero_at_prec()


def test_branches():
    c = ctx_simple(4, [0, 0, 1])
    base = xi(c, EpsilonIndex(1, 0))
    other = xi(c, EpsilonIndex(1, 0), branch=1)
    assert other.v_xi == base.v_xi and not (other.xi - base.xi).is_zero_at_prec()
    with pytest.raises(ValueError):
        xi(c, EpsilonIndex(1, 0), branch=3)


def test_u_validation():
    with pytest.raises(ValueError):
        u_eps(C32, EpsilonIndex(2, 0), M=1)


def test_convergence_values():
    vals = [r["val"] for r in xi_convergence(C32, 0)]
    assert vals == [Fraction(17, 2), Fraction(25, 2), Fraction(33, 2), Fraction(41, 2)]
    for l in range(C32.d):
        vals = [r["val"] for r in xi_convergence(C32, l)]
        assert all(b - a >= C32.d for a, b in zip(vals, vals[1:]))
