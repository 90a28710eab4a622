"""Ideals a_i, the additive polynomials Phi_i and their approximants Phi_{N,l}, the homothety
chain z_{N,l}, quantum points, principal-modulus torsion rho_i[(beta)] and quantum traces."""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import Callable, Iterator

from .additive import AdditivePoly, additive_from_roots, additivity_defect, span_elements
from .exponentials import ExpEvaluation, e_ideal, exp_lattice, wider_context
from .field_core import FFElem, FieldSpec, ff_elements
from .lattice import EpsilonIndex, ideal_tags
from .periods import align_branch, root_of_unity, xi
from .quadratic import OKElement, QuadraticContext, binet_q, index_elems, ok_const, ok_fpow_T, ok_text
from .series import (INF, PrecisionExhausted, SeriesElem, _echelon, ser_format, ser_from_poly, ser_inv,
                     ser_monomial, val_text, zero_series)

RING = None  # index meaning A_inf1 itself in the graded-basis helpers


def vanishes(diff: SeriesElem, scale: SeriesElem, margin: int) -> bool:
    """diff is zero at precision, and that precision reaches margin digits below the size of scale."""
    if diff.is_zero():
        return True
    if not diff.is_zero_at_prec():
        return False
    if scale.is_zero():
        return True
    return not scale.is_zero_at_prec() and diff.val - scale.val >= margin


def certified(ev: ExpEvaluation) -> SeriesElem:
    """Exponential value truncated to what its evaluation guarantees."""
    gp = ev.guaranteed_prec
    return ev.value if gp is INF else ev.value.truncate(gp)


# -- graded bases of A_inf1 and of the ideals a_i ---------------------------------------

def graded_vector(ctx: QuadraticContext, i, deg: int) -> OKElement | None:
    """Monic basis vector of degree deg in a_i (i = RING for A_inf1), or None if deg is a gap.

    Bases: A_inf1 = <1> + <f^k T^j : k >= 1, j < d>; a_i = <f T^j : j <= i> + <f^k T^j : k >= 2, j < d>.
    """
    d = ctx.d
    if deg < 0:
        return None
    if deg == 0:
        return ok_const(ctx, 1) if i is RING else None
    k, j = divmod(deg, d)
    if k == 0:
        return None
    if k == 1 and i is not RING and j > i:
        return None
    key = ("okvec", k, j)
    if key not in ctx.memo:
        ctx.memo[key] = ok_fpow_T(ctx, k, j)
    return ctx.memo[key]


def graded_degrees(ctx: QuadraticContext, i, window: int) -> list[int]:
    return [g for g in range(window + 1) if graded_vector(ctx, i, g) is not None]


@dataclass(frozen=True, eq=False)
class IdealAi:
    ctx: QuadraticContext
    i: int

    def __post_init__(self):
        if not 0 <= self.i <= self.ctx.d - 1:
            raise ValueError(f"ideal index must lie in [0, {self.ctx.d - 1}]")

    def generators(self) -> list[OKElement]:
        return [ok_fpow_T(self.ctx, 1, j) for j in range(self.i + 1)]

    def tags(self, window: int) -> list[tuple[int, int]]:
        return ideal_tags(self.ctx.d, self.i, window)

    def fq_basis(self, window: int) -> list[OKElement]:
        return [graded_vector(self.ctx, self.i, g) for g in graded_degrees(self.ctx, self.i, window)]

    def contains(self, x: OKElement) -> bool:
        if x.is_zero():
            return True
        try:
            rest = reduce_exact(x, lambda g: graded_vector(self.ctx, self.i, g))
        except ValueError:
            return False
        return rest.is_zero()

    def coprime_to(self, beta: OKElement) -> bool:
        # every prime above a_i divides (f) = a_0
        return coprime_to_f(self.ctx, beta)


def reduce_exact(x: OKElement, vec: Callable[[int], OKElement | None]) -> OKElement:
    """Exactly subtract graded basis vectors from x until it vanishes; a degree gap raises ValueError."""
    while not x.is_zero():
        g = x.degree()
        v = vec(g)
        if v is None:
            raise ValueError(f"degree {g} has no basis vector")
        x = x - v * (x.sgn() / v.sgn())
    return x


def _scaled_vector(ctx: QuadraticContext, i, beta: OKElement, beta_deg: int, deg: int) -> OKElement | None:
    v = graded_vector(ctx, i, deg - beta_deg)
    return None if v is None else beta * v


@dataclass
class Quotient:
    """F_q-basis of M / beta M for M = a_i (or A_inf1), from graded row reduction."""
    ctx: QuadraticContext
    i: object
    beta: OKElement
    window: int
    rep_degrees: list[int]
    reps: list[OKElement]

    @property
    def dim(self) -> int:
        return len(self.reps)

    def coords(self, x: OKElement) -> list[FFElem]:
        """Coordinates of x mod beta M over reps (x must lie in M)."""
        beta_deg = self.beta.degree()
        rep_set = set(self.rep_degrees)

        def vec(g):
            if g in rep_set:
                return graded_vector(self.ctx, self.i, g)
            return _scaled_vector(self.ctx, self.i, self.beta, beta_deg, g)

        found: dict = {}
        while not x.is_zero():
            g = x.degree()
            v = vec(g)
            if v is None:
                raise ValueError(f"element has a term of degree {g} outside the module")
            c = x.sgn() / v.sgn()
            if g in rep_set:
                found[g] = c
            x = x - v * c
        zero = ff_elements(self.ctx.spec)[0]
        return [found.get(g, zero) for g in self.rep_degrees]


def quotient_basis(ctx: QuadraticContext, i, beta: OKElement, window: int | None = None) -> Quotient:
    """Representatives of M / beta M: basis vectors of M whose degree is no pivot of beta M.

    The pivots come from echelonizing the series of beta M's graded basis within the window
    (default deg beta + 4d); the count must equal deg beta.
    """
    if beta.is_zero():
        raise ValueError("modulus must be nonzero")
    if not beta.in_A_inf1():
        raise ValueError(f"modulus {ok_text(beta)} is not in A_inf1")
    key = ("quotient", i, beta.g, beta.h, window)
    if key not in ctx.memo:
        ctx.memo[key] = _quotient_basis(ctx, i, beta, window)
    return ctx.memo[key]


def _quotient_basis(ctx: QuadraticContext, i, beta: OKElement, window: int | None) -> Quotient:
    beta_deg = beta.degree()
    d = ctx.d
    window = beta_deg + 4 * d if window is None else window
    sub = [_scaled_vector(ctx, i, beta, beta_deg, g) for g in range(beta_deg, window + 1)]
    sub = [v.series() for v in sub if v is not None]
    pivots = {-v for v in _echelon(sub)} if sub else set()
    rep_degrees = [g for g in graded_degrees(ctx, i, window) if g not in pivots]
    if any(g > beta_deg + 2 * d for g in rep_degrees) or len(rep_degrees) != beta_deg:
        raise ValueError(f"coset window {window} too small for modulus of degree {beta_deg}")
    reps = [graded_vector(ctx, i, g) for g in rep_degrees]
    return Quotient(ctx, i, beta, window, rep_degrees, reps)


def fq_rank(F: FieldSpec, rows: list[list[FFElem]]) -> int:
    rows = [list(r) for r in rows if r]
    rank = 0
    ncols = len(rows[0]) if rows else 0
    for col in range(ncols):
        piv = next((r for r in range(rank, len(rows)) if not rows[r][col].is_zero()), None)
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        inv = rows[rank][col].inverse()
        rows[rank] = [x * inv for x in rows[rank]]
        for r in range(len(rows)):
            if r != rank and not rows[r][col].is_zero():
                c = rows[r][col]
                rows[r] = [a - c * b for a, b in zip(rows[r], rows[rank])]
        rank += 1
    return rank


def coprime_to_f(ctx: QuadraticContext, beta: OKElement) -> bool:
    """beta A_inf1 + f A_inf1 = A_inf1, i.e. multiplication by beta is invertible on A_inf1 / (f)."""
    quo = quotient_basis(ctx, RING, ok_fpow_T(ctx, 1, 0))
    rows = [quo.coords(beta * r) for r in quo.reps]
    return fq_rank(ctx.spec, rows) == quo.dim


def module_action(ctx: QuadraticContext, i, beta: OKElement) -> list[list[list[FFElem]]]:
    """Matrices (rows = images of the quotient reps) of multiplication by each A_inf1 / (beta) rep on a_i / beta a_i."""
    key = ("action", i, beta.g, beta.h)
    if key not in ctx.memo:
        quo = quotient_basis(ctx, i, beta)
        ring = quotient_basis(ctx, RING, beta)
        ctx.memo[key] = [[quo.coords(r * x) for x in quo.reps] for r in ring.reps]
    return ctx.memo[key]


def generates_quotient(ctx: QuadraticContext, i, beta: OKElement, v: OKElement | list) -> bool:
    """Whether v (an element or its quotient coordinates) generates a_i / beta a_i as an A_inf1-module."""
    quo = quotient_basis(ctx, i, beta)
    x = quo.coords(v) if isinstance(v, OKElement) else v
    zero = ff_elements(ctx.spec)[0]
    rows = []
    for mat in module_action(ctx, i, beta):
        row = [zero] * quo.dim
        for c, img in zip(x, mat):
            if not c.is_zero():
                row = [a + c * b for a, b in zip(row, img)]
        rows.append(row)
    return fq_rank(ctx.spec, rows) == quo.dim


# -- Phi_i, Phi_{N,l}, D_{l+1} ---------------------------------------------------------

def _check_span(q: int, k: int, budget: int) -> None:
    if q ** k > budget:
        raise ValueError(f"root span of size {q}^{k} exceeds the enumeration budget {budget}")


def phi_roots(ctx: QuadraticContext, i: int, cutoff: int | None = None, branch: int = 0) -> list[SeriesElem]:
    """Root basis e_0(xi_0 f T^k) = xi_0 exp_(f)(f T^k), k = 1..d-i."""
    d = ctx.d
    if not 0 < i <= d - 1:
        raise ValueError(f"Phi_i needs 0 < i <= {d - 1}")
    x0 = xi(ctx, 0, branch=branch).xi
    return [x0 * certified(exp_lattice(ctx, 0, ctx.f * ctx.T(k), cutoff)) for k in range(1, d - i + 1)]


def phi_i(ctx: QuadraticContext, i: int, cutoff: int | None = None, branch: int = 0,
          budget: int = 4096, verify: bool = False) -> AdditivePoly:
    """Monic Phi_i(x) = prod of (x - u) over the F_q-span of phi_roots."""
    _check_span(ctx.q, ctx.d - i, budget)
    key = ("phi", i, cutoff, branch)
    if key not in ctx.memo:
        basis = phi_roots(ctx, i, cutoff, branch)
        poly = additive_from_roots(ctx.spec, basis, normalized=False)
        if verify:
            _verify(ctx, basis, poly)
        ctx.memo[key] = poly
    return ctx.memo[key]


def _verify(ctx: QuadraticContext, basis, poly: AdditivePoly) -> dict:
    rep = additivity_defect(ctx.spec, basis, poly)
    if not rep["additive"]:
        raise PrecisionExhausted("root product is not additive at the working precision")
    return rep


def phi_Nl_roots(ctx: QuadraticContext, N: int, l: int, cutoff: int | None = None) -> list[SeriesElem]:
    """xi_eps exp_{Lambda_eps}(Q_N T^k), k = 1..d-1-l, for eps = eps_{N,d-1}."""
    d = ctx.d
    eps = EpsilonIndex(N, d - 1)
    eps.check(d)
    if not 0 <= l <= d - 2:
        raise ValueError(f"Phi_(N,l) needs 0 <= l <= {d - 2}")
    x = xi(ctx, eps).xi
    QN = binet_q(ctx, N)
    return [x * certified(exp_lattice(ctx, eps, QN * ctx.T(k), cutoff)) for k in range(1, d - l)]


def phi_Nl(ctx: QuadraticContext, N: int, l: int, cutoff: int | None = None, budget: int = 4096,
           verify: bool = False) -> AdditivePoly:
    _check_span(ctx.q, ctx.d - 1 - l, budget)
    basis = phi_Nl_roots(ctx, N, l, cutoff)
    poly = additive_from_roots(ctx.spec, basis, normalized=False)
    if verify:
        _verify(ctx, basis, poly)
    return poly


def d_constant(ctx: QuadraticContext, i: int, cutoff: int | None = None) -> SeriesElem:
    """D_i: the x-coefficient of Phi_i, equal to the product of its nonzero roots."""
    return phi_i(ctx, i, cutoff).coeff(0)


def _diff_val(x: SeriesElem, y: SeriesElem):
    diff = x - y
    return diff.val


def phi_convergence(ctx: QuadraticContext, l: int, N_range=range(1, 5), cutoff: int | None = None) -> list[dict]:
    """Per N, v(coeff_j(Phi_{N,l}) - coeff_j(Phi_{l+1})) for every q-power j."""
    limit = phi_i(ctx, l + 1, cutoff)
    out = []
    for N in N_range:
        approx = phi_Nl(ctx, N, l, cutoff)
        vals = [_diff_val(approx.coeff(j), limit.coeff(j)) for j in range(limit.degree_qexp + 1)]
        out.append({"N": N, "vals": vals, "min": min(vals)})
    return out


def convergence_increasing(rows: list[dict]) -> bool:
    """Strict increase per coefficient; coefficients that agree exactly (the monic top) stay at INF."""
    return all(all(b > a or (a is INF and b is INF) for a, b in zip(r0["vals"], r1["vals"]))
               for r0, r1 in zip(rows, rows[1:]))


# -- homothety chain and quantum points -------------------------------------------------

@dataclass
class PsiChain:
    l: int
    z: SeriesElem
    points: list          # z_{N,l} for N = 1..N_max
    scale_vals: list      # v((xi_{N+1,l} / xi_{N,l}) f)
    limit_gaps: list      # v(z_{N,l} - xi_{d-1-l} z)

    def to_json(self) -> dict:
        return {"l": self.l, "points": [ser_format(p) for p in self.points],
                "scale_vals": [val_text(v) for v in self.scale_vals],
                "limit_gaps": [val_text(v) for v in self.limit_gaps]}


def aligned_xi_eps(ctx: QuadraticContext, N: int, l: int) -> SeriesElem:
    """xi_{eps_{N,l}} on the branch for which (f^N / sqrt D) xi_eps approaches xi_{d-1-l}."""
    key = ("xi_aligned", N, l)
    if key not in ctx.memo:
        ref = xi(ctx, ctx.d - 1 - l).xi
        raw = xi(ctx, EpsilonIndex(N, l)).xi
        k, _ = align_branch(ctx, ctx.f ** N / ctx.sqrtD * raw, ref)
        ctx.memo[key] = raw * (root_of_unity(ctx) ** k) if k else raw
    return ctx.memo[key]


def psi_chain(ctx: QuadraticContext, z: SeriesElem, l: int, N_max: int = 4) -> PsiChain:
    """z_{N,l} = (xi_{N,l} f^N / sqrt D) z; consecutive points differ by the homothety (xi_{N+1}/xi_N) f."""
    d = ctx.d
    if not 0 <= l <= d - 1:
        raise ValueError(f"l must lie in [0, {d - 1}]")
    limit = xi(ctx, d - 1 - l).xi * z
    points, gaps, scales = [], [], []
    prev = None
    for N in range(1, N_max + 1):
        x = aligned_xi_eps(ctx, N, l)
        points.append(ctx.f ** N / ctx.sqrtD * x * z if not z.is_zero() else zero_series(ctx.spec))
        gaps.append((points[-1] - limit).val)
        if prev is not None:
            scales.append((x / prev * ctx.f).val)
        prev = x
    return PsiChain(l, z, points, scales, gaps)


@dataclass
class QuantumPoint:
    components: list
    source: SeriesElem | None = None
    trail: list = field(default_factory=list)

    def trace(self) -> SeriesElem:
        acc = zero_series(self.components[0].field)
        for w in self.components:
            acc = acc + w
        return acc

    def to_json(self) -> dict:
        return {"components": [ser_format(w) for w in self.components],
                "source": None if self.source is None else ser_format(self.source), "trail": self.trail}


def point_from_w0(ctx: QuadraticContext, w0: SeriesElem, cutoff: int | None = None,
                  source: SeriesElem | None = None, trail: list | None = None) -> QuantumPoint:
    """(w_0, Phi_{d-1}(w_0), ..., Phi_1(w_0))."""
    d = ctx.d
    comps = [w0] + [phi_i(ctx, d - k, cutoff)(w0) for k in range(1, d)]
    trail = list(trail or []) + [f"w_{k} = Phi_{d - k}(w_0)" for k in range(1, d)]
    return QuantumPoint(comps, source, trail)


def e_tilde(ctx: QuadraticContext, k: int, z: SeriesElem, cutoff: int | None = None) -> SeriesElem:
    """xi_0 xi_k^-1 D_{d-k} e_k(xi_0^-1 xi_k z)."""
    d = ctx.d
    x0 = xi(ctx, 0).xi
    xk = xi(ctx, k).xi
    D = d_constant(ctx, d - k, cutoff)
    inner = certified(e_ideal(ctx, k, x0 ** -1 * xk * z, cutoff))
    return x0 * xk ** -1 * D * inner


@dataclass
class QuantumPointReport:
    point: QuantumPoint
    N: int
    chain_gap: object       # v(e_{eps_{N,d-1}}(z_{N,d-1}) - w_0)
    tilde_checks: list      # per component k >= 1: (v(diff), agrees)

    @property
    def ok(self) -> bool:
        return all(a for _, a in self.tilde_checks)

    def to_json(self) -> dict:
        return {"point": self.point.to_json(), "N": self.N, "chain_gap": val_text(self.chain_gap),
                "tilde_checks": [{"val": val_text(v), "agrees": a} for v, a in self.tilde_checks]}


def quantum_point(ctx: QuadraticContext, z: SeriesElem, N: int = 4, cutoff: int | None = None) -> QuantumPointReport:
    """Quantum point of z: w_0 = e_0(xi_0 z), the limit of e_{eps_{N,d-1}} along the homothety chain.

    Components come from Phi_{d-k}(w_0) and are cross-checked against the e-tilde route.
    """
    d = ctx.d
    if z.is_zero():
        zero = zero_series(ctx.spec)
        return QuantumPointReport(QuantumPoint([zero] * d, z, ["z = 0"]), N, INF, [(INF, True)] * (d - 1))
    x0 = xi(ctx, 0).xi
    w0 = certified(e_ideal(ctx, 0, x0 * z, cutoff))
    chain = psi_chain(ctx, z, d - 1, N)
    wN = certified(exp_lattice(ctx, EpsilonIndex(N, d - 1), chain.points[-1] / aligned_xi_eps(ctx, N, d - 1), cutoff))
    wN = aligned_xi_eps(ctx, N, d - 1) * wN
    trail = [f"z_(N,{d - 1}) for N = 1..{N}", "w_0 = e_0(xi_0 z)"]
    point = point_from_w0(ctx, w0, cutoff, z, trail)
    checks = []
    for k in range(1, d):
        alt = e_tilde(ctx, k, x0 * z, cutoff)
        diff = point.components[k] - alt
        checks.append((diff.val, vanishes(diff, alt, d)))
    return QuantumPointReport(point, N, (wN - w0).val, checks)


# -- Hayes module action and torsion ---------------------------------------------------

def _as_ok(ctx: QuadraticContext, alpha) -> OKElement:
    if isinstance(alpha, OKElement):
        return alpha
    return ok_const(ctx, alpha)


def rho_roots(ctx: QuadraticContext, i: int, alpha: OKElement, cutoff: int | None = None,
              window: int | None = None) -> tuple[Quotient, list[SeriesElem]]:
    """Basis e_i(xi_i v / alpha) of e_i(alpha^-1 Lambda_i / Lambda_i), v over representatives of a_i / alpha a_i."""
    quo = quotient_basis(ctx, i, alpha, window)
    if not quo.reps:
        return quo, []
    x = xi(ctx, i).xi
    inv_alpha = ser_inv(alpha.series())
    return quo, [x * certified(exp_lattice(ctx, i, v.series() * inv_alpha, cutoff)) for v in quo.reps]


def rho_action(ctx: QuadraticContext, i: int, alpha, cutoff: int | None = None, window: int | None = None,
               budget: int = 4096) -> AdditivePoly:
    """rho_{i,alpha}(x) = alpha x prod(1 - x/u) over the nonzero u in e_i(alpha^-1 Lambda_i / Lambda_i)."""
    alpha = _as_ok(ctx, alpha)
    if alpha.is_zero():
        raise ValueError("alpha must be nonzero")
    key = ("rho", i, alpha.g, alpha.h, cutoff, window)
    if key not in ctx.memo:
        if not 0 <= i <= ctx.d - 1:
            raise ValueError(f"module index must lie in [0, {ctx.d - 1}]")
        _check_span(ctx.q, alpha.degree(), budget)
        _, basis = rho_roots(ctx, i, alpha, cutoff, window)
        ctx.memo[key] = additive_from_roots(ctx.spec, basis, normalized=True).scaled(alpha.series())
    return ctx.memo[key]


def random_points(ctx: QuadraticContext, count: int, seed: int = 0, top: int = 2, depth: int = 4) -> list[SeriesElem]:
    """Deterministic sample of nonzero Laurent polynomials with exponents in [-depth, top]."""
    rng = random.Random(seed)
    q = ctx.q
    out = []
    while len(out) < count:
        coeffs = [rng.randrange(q) for _ in range(top + depth + 1)]
        if not any(coeffs):
            continue
        out.append(ser_from_poly(ctx.spec, index_elems(ctx.spec, coeffs)) * ser_monomial(ctx.spec, 1, -depth))
    return out


@dataclass
class MorphismCheck:
    i: int
    alpha: str
    points: int
    worst_margin: object   # min over points of v(diff) - v(lhs); INF when every diff is exactly zero
    vanished: bool         # every difference is zero at precision
    min_margin: int
    window: object

    @property
    def passed(self) -> bool:
        return self.vanished and self.worst_margin >= self.min_margin

    def to_json(self) -> dict:
        return {"i": self.i, "alpha": self.alpha, "points": self.points, "window": str(self.window),
                "worst_margin": val_text(self.worst_margin), "passed": self.passed}


def hayes_morphism_check(ctx: QuadraticContext, i: int, alpha, count: int = 20, seed: int = 0,
                         cutoff: int | None = None, min_margin: int | None = None) -> MorphismCheck:
    """Phi_i(rho_{0,alpha}(x)) = rho_{d-i,alpha}(Phi_i(x)) at count sample points.

    A point passes when the difference vanishes at precision at least min_margin (default d)
    digits below the size of the left side, so cancellation cannot pass vacuously.
    """
    alpha = _as_ok(ctx, alpha)
    Phi = phi_i(ctx, i, cutoff)
    r0 = rho_action(ctx, 0, alpha, cutoff)
    r1 = rho_action(ctx, ctx.d - i, alpha, cutoff)
    worst = INF
    vanished = True
    for x in random_points(ctx, count, seed):
        lhs = Phi(r0(x))
        diff = lhs - r1(Phi(x))
        if not diff.is_zero_at_prec():
            vanished = False
        if not lhs.is_zero_at_prec():
            worst = min(worst, diff.val - lhs.val)
        elif not lhs.is_zero():
            worst = min(worst, 0)
    return MorphismCheck(i, ok_text(alpha), count, worst, vanished,
                         ctx.d if min_margin is None else min_margin, ctx.window)


def hayes_morphism_resolved(ctx: QuadraticContext, i: int, alpha, count: int = 20, seed: int = 0,
                            max_window: int = 1024) -> MorphismCheck:
    """Doubles the working window while differences vanish but the margin is too thin to count."""
    cur = ctx
    while True:
        a = alpha if not isinstance(alpha, OKElement) else OKElement(cur, alpha.g, alpha.h)
        rep = hayes_morphism_check(cur, i, a, count, seed)
        if rep.passed or not rep.vanished or cur.window * 2 > max_window:
            return rep
        cur = wider_context(cur, cur.window * 2)


@dataclass
class TorsionSet:
    i: int
    beta: OKElement
    coprime: bool
    reps: list            # OKElement representatives v of a_i / beta a_i
    basis: list           # e_i(xi_i v / beta)
    points: list          # full F_q-span, zero first

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self) -> Iterator[SeriesElem]:
        return iter(self.points)

    @property
    def count(self) -> int:
        return len(self.points)

    def to_json(self) -> dict:
        return {"i": self.i, "beta": ok_text(self.beta), "coprime": self.coprime, "count": self.count,
                "points": [ser_format(p) for p in self.points]}


def torsion_points(ctx: QuadraticContext, i: int, beta, cutoff: int | None = None, window: int | None = None,
                   allow_noncoprime: bool = False, budget: int = 4096) -> TorsionSet:
    """rho_i[(beta)] = e_i(beta^-1 Lambda_i / Lambda_i) as an explicit F_q-space of q^deg(beta) points."""
    beta = _as_ok(ctx, beta)
    if beta.is_zero():
        raise ValueError("modulus must be nonzero")
    coprime = coprime_to_f(ctx, beta)
    if not coprime and not allow_noncoprime:
        raise ValueError(f"modulus {ok_text(beta)} is not coprime to (f)")
    _check_span(ctx.q, beta.degree(), budget)
    quo, basis = rho_roots(ctx, i, beta, cutoff, window)
    return TorsionSet(i, beta, coprime, quo.reps, basis, span_elements(ctx.spec, basis, budget))


def annihilation_check(ctx: QuadraticContext, tors: TorsionSet, cutoff: int | None = None) -> bool:
    """rho_{i,beta}(t) vanishes, resolved at least d digits below the leading term beta t."""
    rho = rho_action(ctx, tors.i, tors.beta, cutoff)
    b = tors.beta.series()
    return all(vanishes(rho(t), b * t, ctx.d) for t in tors.points)


def closure_check(ctx: QuadraticContext, tors: TorsionSet, samples: int = 10, seed: int = 0) -> bool:
    """Sums of random pairs land on a listed point (nearest match by difference valuation)."""
    rng = random.Random(seed)
    pts = tors.points
    for _ in range(samples):
        a, b = pts[rng.randrange(len(pts))], pts[rng.randrange(len(pts))]
        scale = a if b.is_zero() or (not a.is_zero() and a.val <= b.val) else b
        s = a + b
        if not any(vanishes(s - p, scale, ctx.d) for p in pts):
            return False
    return True


@dataclass
class TorsionTrace:
    mu: list              # coordinates of v over the quotient representatives
    primitive: bool
    point: QuantumPoint
    trace: SeriesElem
    components_annihilated: list

    def to_json(self) -> dict:
        return {"mu": [c.value for c in self.mu], "primitive": self.primitive, "point": self.point.to_json(),
                "trace": ser_format(self.trace), "components_annihilated": self.components_annihilated}


def quantum_torsion_trace(ctx: QuadraticContext, beta, cutoff: int | None = None, allow_noncoprime: bool = False,
                          primitive_only: bool = True) -> list[TorsionTrace]:
    """Quantum points (t_0, Phi_{d-1}(t_0), ..., Phi_1(t_0)) over rho_0[(beta)] and their traces.

    Each component w_k is checked to be killed by rho_{k,beta}.
    """
    beta = _as_ok(ctx, beta)
    d = ctx.d
    tors = torsion_points(ctx, 0, beta, cutoff, allow_noncoprime=allow_noncoprime)
    rhos = [rho_action(ctx, k, beta, cutoff) for k in range(d)]
    elems = ff_elements(ctx.spec)
    out = []
    for combo in itertools.product(range(ctx.q), repeat=len(tors.reps)):
        if not any(combo):
            continue
        v = ok_const(ctx, 0)
        for c, r in zip(combo, tors.reps):
            if c:
                v = v + r * elems[c]
        prim = generates_quotient(ctx, 0, beta, v)
        if primitive_only and not prim:
            continue
        t0 = zero_series(ctx.spec)
        for c, b in zip(combo, tors.basis):
            if c:
                t0 = t0 + b * elems[c]
        point = point_from_w0(ctx, t0, cutoff, None, [f"t_0 from coset {list(combo)}"])
        b = beta.series()
        ann = [vanishes(rhos[k](w), b * w, d) for k, w in enumerate(point.components)]
        out.append(TorsionTrace([elems[c] for c in combo], prim, point, point.trace(), ann))
    return out


@dataclass
class TorsionReport:
    beta: str
    coprime: bool
    expected: int
    counts: list          # per module index i
    annihilated: list
    closed: list
    generators: int
    components_annihilated: bool
    window: object

    @property
    def ok(self) -> bool:
        return (all(c == self.expected for c in self.counts) and all(self.annihilated) and all(self.closed)
                and self.components_annihilated)

    def to_json(self) -> dict:
        return {"beta": self.beta, "coprime": self.coprime, "expected": self.expected, "counts": self.counts,
                "annihilated": self.annihilated, "closed": self.closed, "generators": self.generators,
                "components_annihilated": self.components_annihilated, "window": str(self.window), "ok": self.ok}


def torsion_report(ctx: QuadraticContext, beta, allow_noncoprime: bool = False, max_window: int = 1024) -> TorsionReport:
    """Counts, annihilation and closure of every rho_i[(beta)], plus the Phi-image relation for the
    generators of rho_0[(beta)]; the window doubles while some check fails."""
    cur = ctx
    while True:
        b = _as_ok(cur, beta)
        b = OKElement(cur, b.g, b.h)
        counts, ann, closed = [], [], []
        for i in range(cur.d):
            tors = torsion_points(cur, i, b, allow_noncoprime=allow_noncoprime)
            counts.append(tors.count)
            ann.append(annihilation_check(cur, tors))
            closed.append(closure_check(cur, tors))
        traces = quantum_torsion_trace(cur, b, allow_noncoprime=allow_noncoprime)
        comps = all(all(t.components_annihilated) for t in traces)
        rep = TorsionReport(ok_text(b), coprime_to_f(cur, b), cur.q ** b.degree(), counts, ann, closed,
                            len(traces), comps, cur.window)
        if rep.ok or cur.window * 2 > max_window:
            return rep
        cur = wider_context(cur, cur.window * 2)


def orbit_report(ctx: QuadraticContext, point: QuantumPoint, cutoff: int | None = None) -> list[dict]:
    """Exploratory: compares Phi_{d-1}(w_k) with w_{k+1} (indices mod d), exactly and up to F_q^x scalars."""
    d = ctx.d
    if d < 2:
        return []
    Phi = phi_i(ctx, d - 1, cutoff)
    out = []
    for k in range(d):
        img = Phi(point.components[k])
        nxt = point.components[(k + 1) % d]
        exact = vanishes(img - nxt, nxt, d)
        scalar = None
        for c in ff_elements(ctx.spec)[1:]:
            if vanishes(img - nxt * c, nxt, d):
                scalar = c.value
                break
        out.append({"k": k, "exact": exact, "scalar": scalar, "val": val_text((img - nxt).val)})
    return out
