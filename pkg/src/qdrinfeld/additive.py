"""F_q-linear (additive) polynomials sum c_j x^(q^j) with series coefficients, and the
subspace recursion that builds them from a root space."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

from .field_core import FieldSpec, ff_elements
from .series import INF, SeriesElem, ser_const, ser_format, ser_frobenius, ser_inv, ser_pow, ser_scale, zero_series

ENUMERATION_BUDGET = 4096


def span_elements(field: FieldSpec, basis: Sequence[SeriesElem], budget: int = ENUMERATION_BUDGET) -> list[SeriesElem]:
    """All F_q-combinations of basis (zero first), in lexicographic coefficient order."""
    q = field.q
    if q ** len(basis) > budget:
        raise ValueError(f"span of {len(basis)} vectors over F_{q} exceeds the enumeration budget {budget}")
    elems = ff_elements(field)
    out = []
    for combo in itertools.product(range(q), repeat=len(basis)):
        acc = zero_series(field)
        for c, b in zip(combo, basis):
            if c:
                acc = acc + ser_scale(b, elems[c])
        out.append(acc)
    return out


@dataclass
class AdditivePoly:
    """coeffs[j] is the coefficient of x^(q^j); None marks an exact zero."""
    field: FieldSpec
    coeffs: list

    @property
    def degree_qexp(self) -> int:
        for j in range(len(self.coeffs) - 1, -1, -1):
            c = self.coeffs[j]
            if c is not None and not c.is_zero():
                return j
        return -1

    def coeff(self, j: int):
        if j < len(self.coeffs) and self.coeffs[j] is not None:
            return self.coeffs[j]
        return zero_series(self.field)

    def __call__(self, x: SeriesElem) -> SeriesElem:
        acc = zero_series(self.field)
        if x.is_zero():
            return acc
        xp = x
        for j, c in enumerate(self.coeffs):
            if j:
                xp = ser_frobenius(xp, 1)
            if c is not None and not c.is_zero():
                acc = acc + c * xp
        return acc

    def scaled(self, s: SeriesElem) -> "AdditivePoly":
        return AdditivePoly(self.field, [None if c is None else s * c for c in self.coeffs])

    def compose(self, inner: "AdditivePoly") -> "AdditivePoly":
        """(self o inner)(x) = sum_j c_j (sum_i r_i x^(q^i))^(q^j)."""
        out: list = [None] * (len(self.coeffs) + len(inner.coeffs) - 1)
        for j, c in enumerate(self.coeffs):
            if c is None or c.is_zero():
                continue
            for i, r in enumerate(inner.coeffs):
                if r is None or r.is_zero():
                    continue
                term = c * ser_frobenius(r, j)
                out[i + j] = term if out[i + j] is None else out[i + j] + term
        return AdditivePoly(self.field, out)

    def to_json(self) -> list[dict]:
        return [{"qexp": j, "series": ser_format(c)} for j, c in enumerate(self.coeffs) if c is not None]


def additive_from_roots(field: FieldSpec, basis: Sequence[SeriesElem], normalized: bool = True) -> AdditivePoly:
    """Additive polynomial whose roots are the F_q-span of basis (linearly independent).

    normalized: x * prod(1 - x/u) over nonzero u; otherwise the monic prod(x - u).
    Built by E_{k+1} = E_k - E_k^q / E_k(u)^(q-1) (resp. P_{k+1} = P_k^q - P_k(u)^(q-1) P_k).
    """
    one = ser_const(field, 1)
    poly = AdditivePoly(field, [one])
    q = field.q
    for u in basis:
        val = poly(u)
        if val.is_zero_at_prec():
            raise ValueError("root basis is linearly dependent to precision")
        powered = AdditivePoly(field, [None] + [None if c is None else ser_frobenius(c, 1) for c in poly.coeffs])
        if normalized:
            scale = -ser_inv(ser_pow(val, q - 1))
            new = [poly.coeff(j) + powered.coeff(j) * scale if j else poly.coeff(0)
                   for j in range(len(powered.coeffs))]
        else:
            scale = -ser_pow(val, q - 1)
            new = [powered.coeff(j) + poly.coeff(j) * scale for j in range(len(powered.coeffs))]
        poly = AdditivePoly(field, new)
    return poly


def expand_root_product(field: FieldSpec, roots: Sequence[SeriesElem]) -> list[SeriesElem]:
    """Dense coefficients of prod(x - r), index k for x^k; used to witness additivity."""
    coeffs = [ser_const(field, 1)]
    for r in roots:
        nxt = [zero_series(field)] * (len(coeffs) + 1)
        for k, c in enumerate(coeffs):
            nxt[k + 1] = nxt[k + 1] + c
            if not r.is_zero():
                nxt[k] = nxt[k] - c * r
        coeffs = nxt
    return coeffs


def additivity_defect(field: FieldSpec, basis: Sequence[SeriesElem], monic: AdditivePoly | None = None) -> dict:
    """Expand prod(x - u) densely over the span of basis and measure how far it is from additive.

    Reports, relative to the leading scale of each coefficient, the worst margin by which
    non-q-power coefficients sit below precision, and the agreement with `monic`.
    """
    roots = span_elements(field, basis)
    dense = expand_root_product(field, roots)
    q = field.q
    qpows = {q ** j: j for j in range(len(basis) + 1)}
    worst = INF
    ok = True
    for k, c in enumerate(dense):
        if k in qpows:
            if monic is not None:
                diff = c - monic.coeff(qpows[k])
                if not diff.is_zero_at_prec():
                    ok = False
            continue
        if not c.is_zero_at_prec():
            ok = False
        if c.prec is not None:
            worst = min(worst, c.prec) if worst is not INF else c.prec
    return {"additive": ok, "degree": len(dense) - 1, "nonadditive_prec": worst}
