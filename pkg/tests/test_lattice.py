from collections import Counter
from fractions import Fraction

import pytest
import sympy
from hypothesis import given, strategies as st

from qdrinfeld.lattice import (EpsilonIndex, approx_inclusion_check, degree_count, in_lambda, lambda_basis,
                               lambda_bruteforce, lambda_span, t_closed_form, zeta_eps, zeta_ideal)
from qdrinfeld.quadratic import binet_q, ctx_simple, nearest_dist, ok_f, ok_parse
from qdrinfeld.series import INF

C32 = ctx_simple(3, [0, 0, 1])


def test_raw_basis_blocks():
    assert lambda_basis(C32, EpsilonIndex(1, 1), window=8).vectors == [(1, 0), (2, 0), (2, 1), (3, 0), (3, 1), (4, 0)]
    assert lambda_basis(C32, EpsilonIndex(1, 0), window=8).vectors[:4] == [(1, 0), (1, 1), (2, 0), (2, 1)]


@pytest.mark.parametrize("N,k", [(1, 0), (2, 1), (3, 2)])
def test_scaled_basis_tends_to_powers_of_f(N, k):
    c = ctx_simple(3, [0, 0, 1], 1, 40)
    scaled = c.sqrtD * c.f ** (-N) * binet_q(c, N + k)
    assert (scaled - c.f ** (k + 1)).val >= 2 * c.d * (N + 1) - c.d * (k + 1)


def test_hat_head_valuation():
    b = lambda_basis(C32, EpsilonIndex(2, 1), "hat", window=12)
    assert b.vectors[0] == (2, 0)
    assert b.series()[0].val == -C32.d


def test_bruteforce_matches_span_and_zeta():
    eps = EpsilonIndex(1, 0)
    brute = lambda_bruteforce(C32, eps, 7)
    basis = lambda_basis(C32, eps, window=8)
    assert set(lambda_span(C32, basis, 7)) == set(brute)
    counts = Counter(len(p) - 1 for p in brute if p)
    assert [counts[C32.d + M] for M in range(6)] == [degree_count(C32, eps, M) for M in range(6)]
    assert [degree_count(C32, eps, M) for M in range(6)] == [2, 6, 18, 54, 162, 486]


def test_bruteforce_below_first_block():
    assert lambda_bruteforce(C32, EpsilonIndex(2, 0), 3) == [()]


def test_membership_boundary():
    for l in range(1, C32.d):
        assert not in_lambda(C32, EpsilonIndex(2, l), binet_q(C32, 1))
    assert in_lambda(C32, EpsilonIndex(2, 0), binet_q(C32, 2))
    # Q_{N-1} at l = 0: ||Q_{N-1} f|| = q^-Nd equals the bound, not below it
    assert nearest_dist(C32, binet_q(C32, 1) * C32.f) == 2 * C32.d
    assert not in_lambda(C32, EpsilonIndex(2, 0), binet_q(C32, 1))


def test_zeta_values():
    z = zeta_eps(C32, EpsilonIndex(1, 0), u=Fraction(1, 9))
    u = sympy.Symbol("u")
    assert sympy.simplify(z["Z"] - (18 * u ** 4 / (1 - 3 * u) + 6 * u ** 3 + 2 * u ** 2)) == 0
    assert z["Z1"] == -1 and z["dZ1"] == Fraction(-1, 2) and z["t"] == -1 == z["t_closed"]
    assert z["Z_at_u"] == Fraction(1, 27)


@given(st.sampled_from([2, 3, 4, 5, 7]), st.integers(1, 6), st.data())
def test_zeta_symbolic_identities(q, d, data):
    c = ctx_simple(q, [0] * d + [1])
    l = data.draw(st.integers(0, d - 1))
    N = data.draw(st.integers(1, 4))
    z = zeta_eps(c, EpsilonIndex(N, l))
    assert z["Z1"] == -1
    assert z["t"] == z["t_closed"] == t_closed_form(q, d, l, N)
    zi = zeta_ideal(c, data.draw(st.integers(0, d - 1)))
    assert zi["Z1"] == -1


def test_eps_validation():
    with pytest.raises(ValueError):
        zeta_eps(C32, EpsilonIndex(0, 0))
    with pytest.raises(ValueError):
        zeta_eps(C32, EpsilonIndex(1, 2))


def test_approx_inclusion():
    rep = approx_inclusion_check(C32, EpsilonIndex(3, 0), ok_f(C32))
    assert rep.ok and rep.worst_val >= rep.delta_val
    exact = approx_inclusion_check(C32, EpsilonIndex(1, 0), ok_parse(C32, "1"))
    assert exact.ok and exact.worst_val is INF
    with pytest.raises(ValueError):
        approx_inclusion_check(C32, EpsilonIndex(1, 0), ok_parse(C32, "f^3"))
