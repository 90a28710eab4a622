"""Diophantine approximation spaces {a in A : ||a f|| < eps}, their explicit bases,
the norm zeta function Z_eps(u), and approximate-inclusion checks."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import sympy

from .quadratic import (OKElement, QuadraticContext, binet_q, nearest_dist,
                        ok_fpow_T, poly_trim)
from .series import INF, SeriesElem, graded_reduce, poly_coeffs, val_text


@dataclass(frozen=True)
class EpsilonIndex:
    """eps_{N,l} = q^-(dN+l)."""
    N: int
    l: int

    def val(self, d: int) -> int:
        return d * self.N + self.l

    def check(self, d: int) -> None:
        if self.N < 1 or not 0 <= self.l <= d - 1:
            raise ValueError(f"need N >= 1 and 0 <= l <= {d - 1}, got N={self.N}, l={self.l}")

    def ideal_index(self, d: int) -> int:
        """Index i = d-1-l of the ideal a_i approached as N grows."""
        return d - 1 - self.l


@dataclass
class LatticeBasis:
    kind: str  # raw | hat | breve
    eps: EpsilonIndex
    vectors: list  # tags (i, j) meaning Q_i T^j
    scale: SeriesElem
    degree_window: int
    ctx: QuadraticContext = field(repr=False, default=None)

    def degrees(self) -> list[int]:
        d = self.ctx.d
        return [d * i + j for i, j in self.vectors]

    def raw_series(self) -> list[SeriesElem]:
        return [binet_q(self.ctx, i) * self.ctx.T(j) for i, j in self.vectors]

    def series(self) -> list[SeriesElem]:
        raw = self.raw_series()
        if self.kind == "raw":
            return raw
        return [self.scale * v for v in raw]

    def to_json(self) -> dict:
        return {"eps": {"N": self.eps.N, "l": self.eps.l}, "kind": self.kind,
                "vectors": [{"i": i, "j": j, "degree": self.ctx.d * i + j} for i, j in self.vectors],
                "window": self.degree_window}


def default_window(ctx: QuadraticContext, eps: EpsilonIndex) -> int:
    return max(6 * ctx.d, ctx.d * (eps.N + 2))


def lambda_tags(d: int, eps: EpsilonIndex, window: int) -> list[tuple[int, int]]:
    tags = [(eps.N, j) for j in range(d - eps.l)]
    i = eps.N + 1
    while d * i <= window:
        tags.extend((i, j) for j in range(d) if d * i + j <= window)
        i += 1
    return sorted(tags, key=lambda t: d * t[0] + t[1])


def lambda_degree_set(d: int, eps: EpsilonIndex, window: int) -> set[int]:
    return {d * i + j for i, j in lambda_tags(d, eps, window)}


def lambda_basis(ctx: QuadraticContext, eps: EpsilonIndex, kind: str = "raw", window: int | None = None,
                 branch: int = 0) -> LatticeBasis:
    d = ctx.d
    eps.check(d)
    window = default_window(ctx, eps) if window is None else window
    if window < d * (eps.N + 1):
        raise ValueError(f"degree window {window} does not reach the first full block d(N+1) = {d * (eps.N + 1)}")
    tags = lambda_tags(d, eps, window)
    degs = [d * i + j for i, j in tags]
    assert len(set(degs)) == len(degs), "basis degrees must be distinct"
    if kind == "raw":
        scale = ctx.one()
    elif kind == "hat":
        scale = ctx.sqrtD / ctx.f ** eps.N
    elif kind == "breve":
        from .periods import xi
        scale = xi(ctx, eps, branch=branch).xi
    else:
        raise ValueError(f"unknown lattice kind {kind!r}")
    return LatticeBasis(kind, eps, tags, scale, window, ctx)


# -- exhaustive oracle ---------------------------------------------------------

EXHAUSTION_LIMIT = 2_000_000


def _fq_combinations(F, basis: np.ndarray, count_limit: int = EXHAUSTION_LIMIT) -> np.ndarray:
    """All F_q-combinations of the rows of basis (index-coded), as rows."""
    k, L = basis.shape
    q = F.q
    if q ** k > count_limit:
        raise ValueError(f"enumeration of {q}^{k} combinations exceeds the limit {count_limit}")
    add, mul, _ = F.base_tables
    coeffs = np.array(list(itertools.product(range(q), repeat=k)), dtype=np.int64).reshape(-1, k)
    acc = np.zeros((coeffs.shape[0], L), dtype=np.int64)
    for r in range(k):
        term = mul[coeffs[:, r][:, None], basis[r][None, :]]
        acc = add[acc, term]
    return acc


def _frac_digits(ctx: QuadraticContext, x: SeriesElem, depth: int) -> list[int]:
    """Coefficients of x at valuations 1..depth (indices)."""
    return [x.coeff(v).value for v in range(1, depth + 1)]


def lambda_bruteforce(ctx: QuadraticContext, eps: EpsilonIndex, degree_bound: int) -> list[tuple]:
    """Every a in A of degree <= degree_bound with ||a f|| < eps, by exhaustion.

    ||a f|| depends F_q-linearly on the coefficients of a, so each candidate is scored by
    summing the fractional digits of T^k f; all q^(B+1) candidates are enumerated.
    """
    F = ctx.spec
    d = ctx.d
    depth = eps.val(d)  # need v(frac(af)) >= depth + 1: digits 1..depth vanish
    B = degree_bound
    if F.q ** (B + 1) > EXHAUSTION_LIMIT:
        raise ValueError(f"exhaustion limit exceeded: q^{B + 1} candidates")
    if ctx.f.prec - B <= depth:
        raise ValueError("working precision too small for this degree bound")
    digits = np.array([_frac_digits(ctx, ctx.f * ctx.T(k), depth) for k in range(B + 1)], dtype=np.int64)
    digits = digits.reshape(B + 1, depth)
    cands = np.array(list(itertools.product(range(F.q), repeat=B + 1)), dtype=np.int64)[:, ::-1]
    add, mul, _ = F.base_tables
    acc = np.zeros((cands.shape[0], depth), dtype=np.int64)
    for k in range(B + 1):
        acc = add[acc, mul[cands[:, k][:, None], digits[k][None, :]]]
    good = cands[~acc.any(axis=1)]
    out = [poly_trim(int(c) for c in row) for row in good]
    return sorted(out, key=lambda a: (len(a), a[::-1]))


def lambda_span(ctx: QuadraticContext, basis: LatticeBasis, degree_bound: int) -> list[tuple]:
    """F_q-span of the basis vectors of degree <= degree_bound, as polynomials."""
    rows = []
    for (i, j), deg in zip(basis.vectors, basis.degrees()):
        if deg <= degree_bound:
            pc = poly_coeffs(binet_q(ctx, i) * ctx.T(j))
            rows.append(pc + [0] * (degree_bound + 1 - len(pc)))
    if not rows:
        return [()]
    combos = _fq_combinations(ctx.spec, np.array(rows, dtype=np.int64))
    out = {poly_trim(int(c) for c in row) for row in combos}
    return sorted(out, key=lambda a: (len(a), a[::-1]))


def in_lambda(ctx: QuadraticContext, eps: EpsilonIndex, a: SeriesElem) -> bool:
    return nearest_dist(ctx, a * ctx.f) >= eps.val(ctx.d) + 1


# -- zeta function -----------------------------------------------------------------

def t_closed_form(q: int, d: int, l: int, N: int | None = None) -> int:
    """(q-1)(-(d-1) - l q^(d-l)) + 1, shifted by -d(N-1)(q-1) for an eps target."""
    t = (q - 1) * (-(d - 1) - l * q ** (d - l)) + 1
    if N is not None:
        t -= d * (N - 1) * (q - 1)
    return t


def zeta_eps(ctx: QuadraticContext, eps: EpsilonIndex, u=None) -> dict:
    """Closed form of Z_eps(u) = sum over nonzero lambda of u^deg(lambda), with the tail summed."""
    q, d = ctx.q, ctx.d
    eps.check(d)
    N, l = eps.N, eps.l
    U = sympy.Symbol("u")
    head = sum(sympy.Integer(q) ** k * U ** (d * N + k) for k in range(d - l))
    tail = sympy.Integer(q) ** (d - l) * U ** (d * (N + 1)) / (1 - q * U)
    Z = (q - 1) * (head + tail)
    Z1 = sympy.nsimplify(Z.subs(U, 1))
    dZ1 = sympy.nsimplify(sympy.diff(Z, U).subs(U, 1))
    t = (q - 1) * dZ1
    out = {"Z": Z, "Z1": Fraction(int(sympy.fraction(Z1)[0]), int(sympy.fraction(Z1)[1])),
           "dZ1": Fraction(int(sympy.fraction(dZ1)[0]), int(sympy.fraction(dZ1)[1])),
           "t": int(t), "t_closed": t_closed_form(q, d, l, N)}
    if u is not None:
        val = sympy.nsimplify(Z.subs(U, sympy.Rational(Fraction(u).numerator, Fraction(u).denominator)))
        out["Z_at_u"] = Fraction(int(sympy.fraction(val)[0]), int(sympy.fraction(val)[1]))
    return out


def zeta_ideal(ctx: QuadraticContext, i: int) -> dict:
    """Z for the ideal a_i with degree set {d..d+i} and [2d, inf): t_i from the same derivative."""
    q, d = ctx.q, ctx.d
    U = sympy.Symbol("u")
    head = sum(sympy.Integer(q) ** k * U ** (d + k) for k in range(i + 1))
    tail = sympy.Integer(q) ** (i + 1) * U ** (2 * d) / (1 - q * U)
    Z = (q - 1) * (head + tail)
    dZ1 = sympy.nsimplify(sympy.diff(Z, U).subs(U, 1))
    return {"Z": Z, "Z1": int(sympy.nsimplify(Z.subs(U, 1))),
            "dZ1": Fraction(int(sympy.fraction(dZ1)[0]), int(sympy.fraction(dZ1)[1])), "t": int((q - 1) * dZ1)}


def degree_count(ctx: QuadraticContext, eps: EpsilonIndex, M: int) -> int:
    """Number of nonzero elements of degree exactly dN+M, read off Z_eps."""
    Z = zeta_eps(ctx, eps)["Z"]
    U = sympy.Symbol("u")
    n = ctx.d * eps.N + M
    return int(sympy.series(Z, U, 0, n + 1).removeO().coeff(U, n))


# -- approximate inclusion --------------------------------------------------------------

@dataclass
class InclusionReport:
    delta_val: object   # valuation of |alpha| delta in the normalized lattice
    worst_val: object   # least distance valuation found (normalized lattice)
    ok: bool
    window: int
    checked: int

    def to_json(self) -> dict:
        return {"delta_val": val_text(self.delta_val), "worst_val": val_text(self.worst_val),
                "ok": self.ok, "window": self.window, "checked": self.checked}


def approx_inclusion_check(ctx: QuadraticContext, eps: EpsilonIndex, alpha: OKElement,
                           window: int | None = None) -> InclusionReport:
    """alpha * xi Lambda lies within |alpha| delta of xi Lambda, delta = q^-dN eps |xi_{d-1-l}|."""
    from .periods import xi_valuation
    d = ctx.d
    eps.check(d)
    v_xi_eps = xi_valuation(ctx, eps)
    v_xi_ideal = xi_valuation(ctx, eps.ideal_index(d))
    v_delta = d * eps.N + eps.val(d) + v_xi_ideal
    deg_alpha = alpha.degree()
    if not v_delta > deg_alpha:
        raise ValueError(f"precondition delta < |alpha|^-1 fails: v(delta) = {v_delta} <= deg alpha = {deg_alpha}")
    window = default_window(ctx, eps) + deg_alpha if window is None else window
    if window - deg_alpha < d * (eps.N + 1):
        raise ValueError("window too small to witness the inclusion")
    basis = lambda_basis(ctx, eps, "raw", window)
    vecs = basis.raw_series()
    a_ser = alpha.series()
    target_val = v_delta - deg_alpha
    worst = INF
    checked = 0
    for (tag, deg), lam in zip(zip(basis.vectors, basis.degrees()), vecs):
        if deg + deg_alpha > window:
            continue
        r, _ = graded_reduce(vecs, a_ser * lam, full=False)
        dist = r.val + v_xi_eps if r.val is not INF else INF
        worst = min(worst, dist)
        checked += 1
    return InclusionReport(target_val, worst, worst > target_val, window, checked)


# -- ideals a_i = (f, fT, ..., fT^i) and a common view of both lattice families -----------

def ideal_tags(d: int, i: int, window: int) -> list[tuple[int, int]]:
    """Tags (k, j) meaning f^k T^j: k = 1 with j <= i, then k >= 2 with j <= d-1."""
    if not 0 <= i <= d - 1:
        raise ValueError(f"ideal index must lie in [0, {d - 1}]")
    tags = [(1, j) for j in range(i + 1) if d + j <= window]
    k = 2
    while d * k <= window:
        tags.extend((k, j) for j in range(d) if d * k + j <= window)
        k += 1
    return tags


def ideal_degree_set(d: int, i: int, window: int) -> set[int]:
    return {d * k + j for k, j in ideal_tags(d, i, window)}


def is_eps(target) -> bool:
    return isinstance(target, EpsilonIndex)


def target_tags(ctx: QuadraticContext, target, window: int) -> list[tuple[int, int]]:
    if is_eps(target):
        return lambda_tags(ctx.d, target, window)
    return ideal_tags(ctx.d, target, window)


def target_vector(ctx: QuadraticContext, target, tag: tuple[int, int]) -> SeriesElem:
    """Series of a tagged basis vector: Q_i T^j for eps targets, f^k T^j for ideals."""
    i, j = tag
    if is_eps(target):
        return binet_q(ctx, i) * ctx.T(j)
    key = ("fpow", i)
    if key not in ctx.memo:
        ctx.memo[key] = ctx.f ** i
    return ctx.memo[key] * ctx.T(j)


def target_ok_vector(ctx: QuadraticContext, target, tag: tuple[int, int]) -> OKElement:
    """Exact A[f] element of a tagged ideal basis vector."""
    if is_eps(target):
        raise ValueError("eps lattices are not ideals of A[f]")
    return ok_fpow_T(ctx, tag[0], tag[1])


def target_label(target) -> str:
    return f"eps(N={target.N},l={target.l})" if is_eps(target) else f"ideal({target})"
