"""Periods: the sign factor eta, the 1-unit product u, the exponent t and the period xi
with xi^(q-1) = eta^-1 pi^-t u^(q-1), for eps-lattices and the ideals a_i."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .field_core import FFElem, ff_make, ff_prod_nonzero, ff_root_of_unity
from .lattice import (EpsilonIndex, is_eps, target_label, target_tags, target_vector, zeta_eps,
                      zeta_ideal)
from .quadratic import QuadraticContext
from .series import SeriesElem, ser_frobenius, ser_nth_root, ser_one_unit_part, ser_pow, val_text


def t_exponent(ctx: QuadraticContext, target) -> int:
    if is_eps(target):
        target.check(ctx.d)
        return zeta_eps(ctx, target)["t"]
    key = ("t_ideal", target)
    if key not in ctx.memo:
        ctx.memo[key] = zeta_ideal(ctx, target)["t"]
    return ctx.memo[key]


def xi_valuation(ctx: QuadraticContext, target) -> Fraction:
    """v(xi) = -t/(q-1), since eta is a constant and u a 1-unit."""
    return Fraction(-t_exponent(ctx, target), ctx.q - 1)


def transabs_valuation(ctx: QuadraticContext, target) -> Fraction:
    """Closed form d(N-1) + l q^(d-l) + (d-1) - 1/(q-1) (ideal a_{d-1-l}: drop the first term)."""
    q, d = ctx.q, ctx.d
    if is_eps(target):
        N, l = target.N, target.l
        return d * (N - 1) + l * q ** (d - l) + (d - 1) - Fraction(1, q - 1)
    l = d - 1 - target
    return l * q ** (d - l) + (d - 1) - Fraction(1, q - 1)


# -- basis-vector slices -----------------------------------------------------------

@dataclass
class SliceData:
    degrees: list = field(default_factory=list)
    factors: list = field(default_factory=list)  # s_m, with the slice product equal to s_m^(q-1)
    signs: list = field(default_factory=list)    # product of sgn over the slice


def _slices(ctx: QuadraticContext, target, count: int) -> SliceData:
    """First `count` slice factors s_m = <P_{W_{m-1}}(v_m)>, W_j the span of v_1..v_j.

    Every nonzero lambda of degree deg v_m is c (v_m + w) with c != 0, w in W_{m-1}, and
    <c(v_m + w)> = <v_m + w>, so the slice contributes s_m^(q-1). The normalized values
    n_j(x) = <P_{W_j}(x)> obey n_{j+1}(x) = n_j(x)^q - s_{j+1}^(q-1) n_j(x) pi^((q-1) q^j (deg x - deg v_{j+1})).
    """
    key = ("slices", target)
    data: SliceData = ctx.memo.setdefault(key, SliceData())
    if len(data.factors) >= count:
        return data
    q, d = ctx.q, ctx.d
    W = ctx.window
    window = d * (target.N if is_eps(target) else 1) + count + 2 * d
    tags = target_tags(ctx, target, window)
    if len(tags) < count:
        raise ValueError("not enough basis vectors generated")
    minus_one = ff_make(ctx.spec, -1)
    sign_slice = ff_prod_nonzero(ctx.spec)
    while len(data.factors) < count:
        m = len(data.factors)  # zero-based index of v_{m+1}
        tag = tags[m]
        v = target_vector(ctx, target, tag)
        Dm = int(v.degree())
        if v.sgn() != 1:
            raise AssertionError("basis vectors must be monic")
        x = ser_one_unit_part(v, ctx.pi, Dm)
        for j in range(m):
            corr_val = (q - 1) * q ** j * (Dm - data.degrees[j])
            xq = ser_frobenius(x, 1)
            if corr_val >= W + 1:
                # correction is invisible at the working relative precision
                x = xq
                continue
            corr = ser_pow(data.factors[j], q - 1) * x * ser_pow(ctx.pi, corr_val)
            x = xq - corr
        data.degrees.append(Dm)
        data.factors.append(x)
        # prod over c != 0 and w in W_{m}: sgn(c(v + w)) = c, each c appearing q^m times
        data.signs.append(sign_slice ** (q ** m))
        assert data.signs[-1] == minus_one or ctx.p == 2
    return data


def _count_for_degree(ctx: QuadraticContext, target, M: int) -> int:
    tags = target_tags(ctx, target, M)
    return len(tags)


def _auto_count(ctx: QuadraticContext, target) -> int:
    """Slices needed until (q-1) q^(m-2) exceeds the working window, so later slices are 1."""
    q, W = ctx.q, ctx.window
    m = 2
    while (q - 1) * q ** (m - 2) < W + 1:
        m += 1
    return m + 1


def eta(ctx: QuadraticContext, target, M: int | None = None) -> FFElem:
    """Per-slice sign products; each must equal -1, which is then the value of eta."""
    count = _count_for_degree(ctx, target, M) if M is not None else _auto_count(ctx, target)
    if count == 0:
        raise ValueError("M lies below the first block")
    data = _slices(ctx, target, count)
    vals = set(s.value for s in data.signs[:count])
    if len(vals) != 1:
        raise AssertionError("sign slices are not constant")
    return data.signs[0]


def eta_slices(ctx: QuadraticContext, target, M: int) -> list[tuple[int, FFElem]]:
    count = _count_for_degree(ctx, target, M)
    data = _slices(ctx, target, count)
    return list(zip(data.degrees[:count], data.signs[:count]))


def u_product(ctx: QuadraticContext, target, M: int | None = None) -> tuple[SeriesElem, int]:
    """(u(M), M): product of <lambda> over nonzero lambda of degree <= M."""
    count = _count_for_degree(ctx, target, M) if M is not None else _auto_count(ctx, target)
    if count == 0:
        raise ValueError("M lies below the first block")
    data = _slices(ctx, target, count)
    key = ("uprod", target, count)
    if key not in ctx.memo:
        prod = ctx.one()
        for s in data.factors[:count]:
            prod = prod * s
        ctx.memo[key] = ser_pow(prod, ctx.q - 1)
    return ctx.memo[key], data.degrees[count - 1]


def u_eps(ctx: QuadraticContext, eps: EpsilonIndex, M: int | None = None) -> SeriesElem:
    if M is not None and M < ctx.d * eps.N:
        raise ValueError("M below the first block")
    return u_product(ctx, eps, M)[0]


def u_ideal(ctx: QuadraticContext, i: int, M: int | None = None) -> SeriesElem:
    return u_product(ctx, i, M)[0]


@dataclass
class PeriodRecord:
    target: object
    eta: FFElem
    t: int
    u: SeriesElem
    xi: SeriesElem
    M: int
    branch: int

    @property
    def v_xi(self):
        return self.xi.val

    def to_json(self) -> dict:
        from .series import ser_format
        return {"target": target_label(self.target), "t": self.t, "v_xi": val_text(self.xi.val),
                "eta": self.eta.value, "branch": self.branch, "M": self.M,
                "u_prefix": ser_format(self.u.truncate(self.u.val + 8 * 1))}


def root_of_unity(ctx: QuadraticContext) -> FFElem:
    return ff_root_of_unity(ctx.spec, ctx.q - 1)


def xi(ctx: QuadraticContext, target, M: int | None = None, branch: int = 0) -> PeriodRecord:
    """xi = zeta^branch * ((q-1)-th root of eta^-1 pi^-t u^(q-1))."""
    q = ctx.q
    if not 0 <= branch <= max(0, q - 2):
        raise ValueError(f"branch must lie in [0, {q - 2}]")
    key = ("xi", target, M)
    if key not in ctx.memo:
        t = t_exponent(ctx, target)
        e = eta(ctx, target, M)
        u, Mused = u_product(ctx, target, M)
        rhs = ser_pow(ctx.pi, -t) * ser_pow(u, q - 1) * e.inverse()
        root = ser_nth_root(rhs, q - 1)
        ctx.memo[key] = (t, e, u, Mused, root)
    t, e, u, Mused, root = ctx.memo[key]
    val = root * (root_of_unity(ctx) ** branch) if branch else root
    return PeriodRecord(target, e, t, u, val, Mused, branch)


def align_branch(ctx: QuadraticContext, x: SeriesElem, ref: SeriesElem) -> tuple[int, object]:
    """Branch k maximizing v(zeta^k x - ref); returns (k, valuation)."""
    zeta = root_of_unity(ctx)
    best = (0, None)
    for k in range(max(1, ctx.q - 1)):
        v = (x * (zeta ** k) - ref).val
        if best[1] is None or v > best[1]:
            best = (k, v)
    return best


def xi_convergence(ctx: QuadraticContext, l: int, N_range=range(1, 5), M: int | None = None) -> list[dict]:
    """v((f^N / sqrt D) xi_{eps_{N,l}} - xi_{d-1-l}) after branch alignment, per N."""
    d = ctx.d
    ref = xi(ctx, d - 1 - l, M).xi
    out = []
    for N in N_range:
        rec = xi(ctx, EpsilonIndex(N, l), M)
        scaled = ctx.f ** N / ctx.sqrtD * rec.xi
        k, v = align_branch(ctx, scaled, ref)
        out.append({"N": N, "branch": k, "val": v})
    return out
