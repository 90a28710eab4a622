import json

import pytest
from hypothesis import given, settings, strategies as st

from qdrinfeld.certificates import (case_of, cases_for, cert_elliptic, cert_general, cert_genus2, certificate_grid,
                                    certify, coverage_search, default_modulus, exponent_lemma_csv,
                                    exponent_lemma_rows, exponent_lemma_scan, sample_b, sample_mu)
from qdrinfeld.quadratic import ctx_simple, ok_parse


def test_exponent_lemma_anchors():
    rows = {r[:3]: r[3:] for r in exponent_lemma_rows(range(4, 6), range(2, 4))}
    assert rows[(4, 2, 3)] == (8, 21, True)
    assert rows[(5, 2, 2)] == (10, 12, True)
    assert rows[(5, 3, 3)] == (10, 57, True)
    assert (5, 3, 2) not in rows          # j = d-2 with q = 2 is handled separately
    assert exponent_lemma_csv(range(4, 5), range(3, 4)) == "d,j,q,lhs,rhs,ok\n4,2,3,8,21,true\n"


def test_exponent_lemma_full_range():
    scan = exponent_lemma_scan(range(4, 65), range(2, 65))
    assert scan["all_true"] and not scan["failures"]


@given(st.integers(4, 200), st.integers(2, 200), st.data())
def test_exponent_lemma_inequality(d, q, data):
    j = data.draw(st.integers(2, d - 2))
    if q == 2 and j == d - 2:
        return
    assert 2 * d < (d - 1 - j) * q * (q ** j - q ** (j - 1) + 1)


def test_frozen_elliptic_certificate():
    c = ctx_simple(3, [0, 0, 1])
    cert = cert_elliptic(c, ok_parse(c, "fT+2"), [1, 0])
    assert (cert.case_id, cert.verdict, cert.method) == ("2", "distinct", "valuation")
    assert (cert.lhs_val, cert.rhs_val) == (-6, -7)
    assert cert.predictions_ok
    json.dumps(cert.to_json())


def test_degree_guards():
    c = ctx_simple(2, [0, 0, 0, 1])
    b = ok_parse(c, "fT+f^2")
    with pytest.raises(ValueError):
        cert_elliptic(c, b, [1, 0, 0])
    with pytest.raises(ValueError):
        cert_general(c, b, [1, 0, 0])
    assert cert_genus2(c, b, [1, 0, 0], cutoff=40).verdict != "failed"


def test_b_congruent_to_one_is_rejected():
    c = ctx_simple(3, [0, 0, 1])
    with pytest.raises(ValueError):
        certify(c, ok_parse(c, "f+2"), [1, 0])      # f + 2 = 1 mod (f + 1)


def test_tie_is_exceptional_and_resolved():
    c = ctx_simple(2, [0, 0, 0, 1])
    cert = certify(c, ok_parse(c, "f+fT+fT^2"), [1, 1, 0])
    assert cert.case_id == "3" and cert.lhs_val == cert.rhs_val
    assert cert.exceptional and cert.verdict == "adjusted" and cert.mu_tilde is not None


@pytest.mark.parametrize("q,d", [(2, 2), (3, 2), (3, 3), (2, 4), (2, 5)])
def test_grid_never_fails(q, d):
    c = ctx_simple(q, [0] * d + [1])
    for cert in certificate_grid(c, n_b=3, n_mu=3):
        assert cert.verdict in ("distinct", "adjusted")
        assert cert.predictions_ok, [p.to_json() for p in cert.predictions if not p.ok]
        if cert.lhs_val == cert.rhs_val:
            assert cert.exceptional


@pytest.mark.parametrize("q,d", [(3, 2), (3, 3), (3, 4)])
def test_case_coverage(q, d):
    c = ctx_simple(q, [0] * d + [1])
    beta = default_modulus(c)
    cov = coverage_search(c, beta, sample_b(c, beta, 5))
    assert sorted(cov) == cases_for(d)
    for case, (b, mu) in cov.items():
        assert case_of(c, beta, b, mu) == case
        assert certify(c, b, mu, beta).predictions_ok


def test_case_one_values_d4():
    q, d = 3, 4
    c = ctx_simple(q, [0] * d + [1])
    beta = default_modulus(c)
    b, mu = coverage_search(c, beta, sample_b(c, beta, 5))["1"]
    cert = certify(c, b, mu, beta)
    assert cert.lhs_val == -(d - 1) * q and cert.rhs_val == 0
    assert cert.p_vals[-1] == -q ** (d - 1)


@settings(max_examples=8)
@given(st.integers(0, 10_000))
def test_samplers_respect_constraints(seed):
    c = ctx_simple(3, [0, 0, 1])
    beta = default_modulus(c)
    bs = sample_b(c, beta, 3, seed)
    assert bs and all(b.is_monic() and b.in_A_inf1() and b.degree() < 3 * c.d for b in bs)
    mus = sample_mu(c, beta, 3, seed)
    assert mus and all(any(x != 0 for x in mu) for mu in mus)
