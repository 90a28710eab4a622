import pytest
from hypothesis import given, strategies as st

from oracle import element_order
from qdrinfeld.field_core import (FieldError, ff_elements, ff_make, ff_order, ff_prod_nonzero, ff_root_of_unity,
                                  field_for_q, make_field)

QS = [2, 3, 4, 5, 7, 8, 9, 16, 25, 27, 32, 49, 64]


def test_make_reduces_mod_p():
    F = field_for_q(3)
    assert ff_make(F, 5) == ff_make(F, 2)
    assert ff_make(F, 0).is_zero()


def test_f4_generator_from_modulus():
    F = field_for_q(4)
    x = ff_make(F, "x")
    assert ff_order(x) == 3
    assert x * x == x + ff_make(F, 1)        # x^2 + x + 1 = 0


def test_roots_of_unity():
    F3 = field_for_q(3)
    assert ff_root_of_unity(F3, 2) == ff_make(F3, -1)
    assert ff_root_of_unity(field_for_q(2), 1) == ff_make(field_for_q(2), 1)
    w = ff_root_of_unity(F3, 4)
    assert not w.in_base()
    # exhaustive order over F_9^x
    one = w ** 0
    assert element_order(lambda a, b: a * b, one, w) == 4
    assert w.value == 6   # frozen: 2x in F_3[x]/(x^2+1)
    with pytest.raises(FieldError):
        ff_root_of_unity(F3, 5)


def test_product_of_nonzero():
    assert ff_prod_nonzero(field_for_q(3)).value == 2
    assert ff_prod_nonzero(field_for_q(5)).value == 4   # 1*2*3*4 mod 5
    assert ff_prod_nonzero(field_for_q(2)).value == 1
    assert ff_prod_nonzero(field_for_q(4)).value == 1


@pytest.mark.parametrize("bad", [(4, 1), (6, 1)])
def test_invalid_characteristic(bad):
    with pytest.raises(FieldError):
        make_field(*bad)


def test_bounds():
    with pytest.raises(FieldError):
        field_for_q(128)
    with pytest.raises(FieldError):
        field_for_q(12)
    with pytest.raises(FieldError):
        make_field(2, 2, modulus=[1, 0, 1])   # x^2 + 1 = (x+1)^2 over F_2


@pytest.mark.parametrize("q", QS)
def test_multiplicative_group_cyclic(q):
    F = field_for_q(q)
    elems = ff_elements(F)
    assert len(set(elems)) == q
    prod = elems[1]
    for e in elems[2:]:
        prod = prod * e
    assert prod == ff_make(F, -1)


@given(st.sampled_from(QS), st.data())
def test_field_axioms(q, data):
    F = field_for_q(q)
    pick = st.integers(0, q - 1)
    a, b, c = (ff_elements(F)[data.draw(pick)] for _ in range(3))
    assert a + b == b + a and a * b == b * a
    assert (a + b) * c == a * c + b * c
    assert a - a == ff_make(F, 0)
    if not a.is_zero():
        assert a * a.inverse() == ff_make(F, 1)
    assert a.frobenius() == a    # x -> x^q fixes F_q
    assert a ** q == a


@given(st.sampled_from([2, 3, 4, 5, 9]), st.data())
def test_ext2_frobenius_fixes_base(q, data):
    F = field_for_q(q)
    x = ff_elements(F, "ext2")[data.draw(st.integers(0, q * q - 1))]
    assert x ** (q * q) == x
    assert x.frobenius() == x ** q
    assert (x.frobenius() == x) == x.in_base()
