import pytest
from hypothesis import given, strategies as st

from qdrinfeld.additive import additivity_defect, span_elements
from qdrinfeld.field_core import ff_elements
from qdrinfeld.hayes_quantum import (annihilation_check, convergence_increasing, d_constant, hayes_morphism_resolved,
                                     phi_convergence, phi_i, phi_Nl, phi_roots, psi_chain, quantum_point,
                                     quotient_basis, rho_action, rho_roots, torsion_points, torsion_report)
from qdrinfeld.quadratic import ctx_simple, ok_parse
from qdrinfeld.series import ser_format, ser_monomial, zero_series

C32 = ctx_simple(3, [0, 0, 1])
C23 = ctx_simple(2, [0, 0, 0, 1])


def points(c):
    terms = st.dictionaries(st.integers(-2, 2), st.integers(1, c.q - 1), max_size=3)

    def build(t):
        out = zero_series(c.spec)
        for e, k in t.items():
            out = out + ser_monomial(c.spec, ff_elements(c.spec)[k], -e)
        return out
    return terms.map(build)


def test_phi_coefficients():
    P = phi_i(C32, 1, verify=True)
    assert P.degree_qexp == 1
    assert ser_format(P.coeff(0).truncate(2)) == "1*T^(3) + 1*T^(1) + O(T^(-2))"
    assert (P.coeff(1) - 1).is_zero_at_prec()


def test_phi_vanishes_on_roots():
    for c in (C32, C23):
        for i in range(1, c.d):
            P = phi_i(c, i)
            for r in span_elements(c.spec, phi_roots(c, i)):
                assert P(r).is_zero_at_prec()


@given(points(C23), points(C23))
def test_phi_additive(x, y):
    P = phi_i(C23, 1)
    assert (P(x + y) - P(x) - P(y)).is_zero_at_prec()


def test_d_constant_is_root_product():
    roots = [r for r in span_elements(C32.spec, phi_roots(C32, 1)) if not r.is_zero()]
    prod = roots[0]
    for r in roots[1:]:
        prod = prod * r
    assert (d_constant(C32, 1) - prod).is_zero_at_prec()


def test_phi_Nl_converges():
    for l in range(C23.d - 1):
        rows = phi_convergence(C23, l)
        assert convergence_increasing(rows)
    assert [r["min"] for r in phi_convergence(C32, 0)] == [9, 13, 17, 21]
    assert additivity_defect(C32.spec, [], None)["additive"]
    phi_Nl(C32, 2, 0, verify=True)
    with pytest.raises(ValueError):
        phi_Nl(C32, 2, 1)


def test_zero_point():
    z = zero_series(C32.spec)
    assert quantum_point(C32, z).ok
    assert psi_chain(C32, z, 0).to_json()["points"] == ["0"] * 4


def test_quantum_point_consistency():
    assert quantum_point(C32, C32.one()).ok


def test_rho_unit_is_identity():
    assert rho_action(C32, 0, ok_parse(C32, "1")).degree_qexp == 0
    _, basis = rho_roots(C32, 0, ok_parse(C32, "f"))
    assert additivity_defect(C32.spec, basis)["additive"]


@pytest.mark.parametrize("alpha", ["f", "fT", "f+1"])
def test_morphism(alpha):
    assert hayes_morphism_resolved(C32, 1, ok_parse(C32, alpha), count=8).passed


def test_torsion_counts():
    assert torsion_points(C32, 0, ok_parse(C32, "fT"), allow_noncoprime=True).count == 27   # q^(d+1)
    assert torsion_points(C32, 0, ok_parse(C32, "2")).count == 1
    t = torsion_points(C32, 1, ok_parse(C32, "f+1"))
    assert t.count == 9 and annihilation_check(C32, t)
    with pytest.raises(ValueError):
        torsion_points(C32, 0, ok_parse(C32, "fT"))


def test_quotient_dimension_is_degree():
    for c in (C32, C23):
        for beta in ("f+1", "fT", "f^2+1"):
            b = ok_parse(c, beta)
            for i in range(c.d):
                assert quotient_basis(c, i, b).dim == b.degree()


def test_torsion_report():
    rep = torsion_report(C32, ok_parse(C32, "f+1"))
    assert rep.ok and rep.coprime and rep.counts == [9, 9]
    rep = torsion_report(C32, ok_parse(C32, "fT"), allow_noncoprime=True)
    assert rep.ok and not rep.coprime and rep.counts == [27, 27]
