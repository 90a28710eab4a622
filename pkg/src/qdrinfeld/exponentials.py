"""Lattice exponentials z * prod(1 - z/lambda) for the eps-lattices and the ideals a_i, their
sign-normalized versions e_eps and e_i, the quantum exponential limit, and the approximate
module product formula."""
from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from fractions import Fraction

from .additive import AdditivePoly, additive_from_roots
from .field_core import ff_make
from .lattice import (EpsilonIndex, is_eps, lambda_basis, target_label, target_tags, target_vector)
from .periods import xi, xi_valuation
from .quadratic import OKElement, QuadraticContext, binet_q
from .series import (INF, PrecisionExhausted, SeriesElem, graded_reduce, ser_format, ser_frobenius,
                     ser_inv, ser_pow, ser_scale, val_text, zero_series)


@dataclass
class ExpEvaluation:
    lattice: str
    z: SeriesElem
    cutoff: int
    value: SeriesElem
    guaranteed_prec: object

    def to_json(self) -> dict:
        return {"lattice": self.lattice, "cutoff": self.cutoff, "value": ser_format(self.value),
                "guaranteed_prec": val_text(self.guaranteed_prec)}


class _LatticeTable:
    """Lazily extended data for the recursion E_j(x) = E_{j-1}(x) - E_{j-1}(x)^q / E_{j-1}(v_j)^(q-1).

    basis(k) returns (degree, series) of the k-th vector in increasing degree.
    rows[k] = (level m, E_m(v_k)); inv_den[j] = 1 / E_{j-1}(v_j)^(q-1) (0-based).
    """

    def __init__(self, ctx: QuadraticContext, basis):
        self.ctx = ctx
        self.basis = basis
        self.degrees: list[int] = []
        self.vectors: list = []
        self.rows: list = []
        self.inv_den: list = []
        # tables are shared across trace-cert worker threads; extension must not interleave
        self._lock = threading.RLock()

    def _ensure(self, count: int) -> None:
        with self._lock:
            self._extend(count)

    def _extend(self, count: int) -> None:
        while len(self.degrees) < count:
            deg, vec = self.basis(len(self.degrees))
            if self.degrees and deg <= self.degrees[-1]:
                raise ValueError("lattice basis degrees must increase strictly")
            self.degrees.append(deg)
            self.vectors.append(vec.with_window(self.ctx.window))

    def degree(self, k: int) -> int:
        self._ensure(k + 1)
        return self.degrees[k]

    def den_valuation(self, j: int) -> int:
        """v(E_{j-1}(v_j)) in closed form: -D_j - sum_{i<j} (q-1) q^i (D_j - D_i) (0-based)."""
        self._ensure(j + 1)
        q = self.ctx.q
        Dj = self.degrees[j]
        return -Dj - sum((q - 1) * q ** i * (Dj - self.degrees[i]) for i in range(j))

    def inverse_den(self, j: int) -> SeriesElem:
        with self._lock:
            return self._inverse_den(j)

    def _inverse_den(self, j: int) -> SeriesElem:
        q = self.ctx.q
        while len(self.inv_den) <= j:
            k = len(self.inv_den)
            self._ensure(k + 1)
            while len(self.rows) <= k:
                self.rows.append((0, self.vectors[len(self.rows)]))
            level, val = self.rows[k]
            while level < k:
                val = val - ser_frobenius(val, 1) * self.inverse_den(level)
                level += 1
            self.rows[k] = (level, val)
            if val.is_zero_at_prec():
                raise PrecisionExhausted("lattice basis collapsed at working precision")
            self.inv_den.append(ser_inv(ser_pow(val, q - 1)))
        return self.inv_den[j]

    def evaluate(self, z: SeriesElem, cutoff: int):
        """E(z) over basis vectors of degree <= cutoff, stopping once corrections drop below precision."""
        q = self.ctx.q
        E = z if z.window is not None else z.with_window(self.ctx.window)
        j = 0
        while self.degree(j) <= cutoff and not E.is_zero_at_prec():
            rel = E.prec - E.val if E.prec is not None else self.ctx.window
            corr = (q - 1) * (E.val - self.den_valuation(j))
            if corr > 0 and corr >= rel:
                break
            E = E - ser_frobenius(E, 1) * self.inverse_den(j)
            j += 1
        return E


def _target_basis(ctx: QuadraticContext, target):
    cache: dict = {"tags": [], "window": 0}

    def basis(k: int):
        while len(cache["tags"]) <= k:
            cache["window"] += 4 * ctx.d
            cache["tags"] = target_tags(ctx, target, cache["window"])
        tag = cache["tags"][k]
        return ctx.d * tag[0] + tag[1], target_vector(ctx, target, tag)
    return basis


def _table(ctx: QuadraticContext, target) -> _LatticeTable:
    key = ("exp_table", target)
    if key not in ctx.memo:
        ctx.memo[key] = _LatticeTable(ctx, _target_basis(ctx, target))
    return ctx.memo[key]


def auto_cutoff(ctx: QuadraticContext, target, z_val) -> int:
    """Degree cutoff making the omitted-tail bound reach the working relative precision."""
    d = ctx.d
    base = d * (target.N + 3) if is_eps(target) else 4 * d
    if z_val is INF:
        return base
    return max(base, math.ceil(ctx.window - 1 - z_val))


def exp_lattice(ctx: QuadraticContext, target, z: SeriesElem, cutoff: int | None = None) -> ExpEvaluation:
    """exp of the unscaled lattice (Lambda_eps or a_i) at z, over lattice elements of degree <= cutoff.

    Factors beyond the point where the recursion correction falls below the working
    precision are invisible, so the loop stops there; guaranteed_prec accounts for every
    element above the cutoff via v(z) - v(lambda) >= v(z) + cutoff + 1.
    """
    label = target_label(target)
    if z.is_zero():
        return ExpEvaluation(label, z, cutoff or 0, zero_series(ctx.spec), INF)
    z_val = z.val
    if cutoff is None:
        cutoff = auto_cutoff(ctx, target, z_val)
    table = _table(ctx, target)
    if z.is_exact() and z.ram == 1:
        # exact lattice members map to exact zero
        tags = target_tags(ctx, target, cutoff)
        vecs = [target_vector(ctx, target, t) for t in tags]
        r, _ = graded_reduce(vecs, z)
        if r.is_zero():
            return ExpEvaluation(label, z, cutoff, zero_series(ctx.spec), INF)
    E = table.evaluate(z, cutoff)
    return ExpEvaluation(label, z, cutoff, E, _guaranteed(E, z_val, cutoff))


def _guaranteed(E: SeriesElem, z_val, cutoff: int):
    """Omitted factors 1 - z/lambda with deg lambda > cutoff deviate from 1 by at least v(z) + cutoff + 1."""
    if E.is_zero_at_prec():
        return E.prec
    gp = E.val + z_val + cutoff + 1
    return gp if E.prec is None else min(gp, E.prec)


def _normalized(ctx: QuadraticContext, target, z: SeriesElem, cutoff: int | None, branch: int) -> ExpEvaluation:
    if z.is_zero():
        return ExpEvaluation(target_label(target), z, cutoff or 0, zero_series(ctx.spec), INF)
    x = xi(ctx, target, branch=branch).xi
    inner = exp_lattice(ctx, target, z * ser_inv(x), cutoff)
    value = x * inner.value
    gp = inner.guaranteed_prec
    if gp is not INF:
        gp = gp + x.val
    return ExpEvaluation("normalized " + inner.lattice, z, inner.cutoff, value, gp)


def e_eps(ctx: QuadraticContext, eps: EpsilonIndex, z: SeriesElem, cutoff: int | None = None,
          branch: int = 0) -> ExpEvaluation:
    """e_eps(z) = xi_eps * exp_Lambda(xi_eps^-1 z)."""
    eps.check(ctx.d)
    return _normalized(ctx, eps, z, cutoff, branch)


def e_ideal(ctx: QuadraticContext, i: int, z: SeriesElem, cutoff: int | None = None, branch: int = 0) -> ExpEvaluation:
    """e_i(z) = xi_i * exp_{a_i}(xi_i^-1 z)."""
    return _normalized(ctx, i, z, cutoff, branch)


def e_f(ctx: QuadraticContext, z: SeriesElem, cutoff: int | None = None) -> ExpEvaluation:
    """Exponential of the principal ideal (f) = a_0 without normalization."""
    return exp_lattice(ctx, 0, z, cutoff)


def _gap(x: ExpEvaluation, y: ExpEvaluation):
    """Valuation of x - y, capped by what both evaluations guarantee."""
    diff = x.value - y.value
    cap = min(x.guaranteed_prec, y.guaranteed_prec)
    if diff.is_zero_at_prec():
        return cap
    return min(diff.val, cap)


@dataclass
class QtExpReport:
    z: SeriesElem
    l: int
    N: list
    val_gap: list
    limit: ExpEvaluation
    resolved: list = field(default_factory=list)
    window: object = None

    def increasing(self) -> bool:
        return all(b > a for a, b in zip(self.val_gap, self.val_gap[1:]))

    def to_json(self) -> dict:
        return {"z": ser_format(self.z), "l": self.l, "N": self.N,
                "val_gap": [val_text(v) for v in self.val_gap],
                "limit_component": ser_format(self.limit.value),
                "guaranteed_prec": val_text(self.limit.guaranteed_prec), "window": str(self.window)}


def qt_exp(ctx: QuadraticContext, z: SeriesElem, l: int, N_range=range(1, 5), cutoff: int | None = None) -> QtExpReport:
    """Valuations v(e_{eps_{N,l}}(z) - e_{d-1-l}(z)) over N; the limit is e_{d-1-l}(z).

    e_eps does not depend on the branch of xi_eps: zeta in F_q^x leaves the lattice fixed.
    """
    d = ctx.d
    limit = e_ideal(ctx, d - 1 - l, z, cutoff)
    gaps, resolved = [], []
    for N in N_range:
        ev = e_eps(ctx, EpsilonIndex(N, l), z, cutoff)
        g = _gap(ev, limit)
        gaps.append(g)
        cap = min(ev.guaranteed_prec, limit.guaranteed_prec)
        resolved.append(g is INF or g < cap)
    return QtExpReport(z, l, list(N_range), gaps, limit, resolved, ctx.window)


def wider_context(ctx: QuadraticContext, window) -> QuadraticContext:
    """Same context at a larger working precision, cached on the original."""
    key = ("wider", Fraction(window))
    if key not in ctx.memo:
        ctx.memo[key] = ctx.with_window(window)
    return ctx.memo[key]


def qt_exp_resolved(ctx: QuadraticContext, z: SeriesElem, l: int, N_range=range(1, 5),
                    max_window: int = 4096) -> QtExpReport:
    """qt_exp, doubling the working precision until every gap is resolved.

    Large periods amplify relative differences through the q-power terms, so some
    (z, l) pairs need far more digits than the default window.
    """
    cur = ctx
    while True:
        rep = qt_exp(cur, z, l, N_range)
        if all(rep.resolved) or cur.window * 2 > max_window:
            return rep
        cur = wider_context(ctx, cur.window * 2)


def qt_exp_components(ctx: QuadraticContext, z: SeriesElem, cutoff: int | None = None) -> list[ExpEvaluation]:
    """The d limit values e_{d-1-l}(z), l = 0..d-1."""
    return [e_ideal(ctx, ctx.d - 1 - l, z, cutoff) for l in range(ctx.d)]


# -- approximate-module product formula ---------------------------------------------------

@dataclass
class CloseSubspace:
    """Lambda_eps split by alpha: representatives of Lambda / Lambda'' and a graded basis of Lambda''.

    Lambda'' = {y in Lambda : dist(y, alpha Lambda) < |alpha| delta}, in unscaled coordinates;
    the close subspace of alpha^-1 xi Lambda is alpha^-1 xi Lambda''.
    """
    eps: EpsilonIndex
    threshold: int          # y is close iff v(dist(y, alpha Lambda)) > threshold
    window: int
    rep_tags: list
    reps: list
    kernel: list            # (degree, series) with distinct increasing degrees, degree <= window
    window_ok: bool

    @property
    def dim(self) -> int:
        return len(self.reps)


def close_subspace(ctx: QuadraticContext, eps: EpsilonIndex, alpha: OKElement, window: int | None = None) -> CloseSubspace:
    """Degree-graded row reduction of the distance heads of the basis vectors of Lambda_eps.

    The head of y is the part of its remainder modulo alpha Lambda at valuations <= threshold;
    vectors whose head is independent of the earlier ones are coset representatives, the
    others give a kernel vector of the same degree.
    """
    d = ctx.d
    deg_alpha = alpha.degree()
    threshold = d * eps.N + eps.l + d - deg_alpha
    window = window if window is not None else d * (eps.N + 4) + deg_alpha
    basis = lambda_basis(ctx, eps, "raw", window + deg_alpha)
    vecs = basis.raw_series()
    a_ser = alpha.series()
    a_vecs = [a_ser * v for v in vecs]
    field_ = ctx.spec
    pivots: dict = {}  # lead valuation -> (head, combination {index: FFElem})
    rep_idx, kernel = [], []
    for k, (tag, deg, v) in enumerate(zip(basis.vectors, basis.degrees(), vecs)):
        if deg > window:
            break
        r, _ = graded_reduce(a_vecs, v, window=threshold + 1)
        head = r.split_at(threshold + 1)[0] if r.lead is not None else r
        if head.prec is not None and head.lead is not None and head.prec <= threshold:
            raise PrecisionExhausted("distance head not resolved at working precision")
        comb = {k: ff_make(field_, 1)}
        while head.lead is not None and head.lead in pivots:
            ph, pc = pivots[head.lead]
            c = head.sgn() / ph.sgn()
            head = head - ser_scale(ph, c)
            for i, ci in pc.items():
                comb[i] = comb.get(i, ff_make(field_, 0)) - c * ci
        if head.lead is None:
            kv = zero_series(field_)
            for i, ci in comb.items():
                if not ci.is_zero():
                    kv = kv + ser_scale(vecs[i], ci.demote())
            kernel.append((deg, kv))
        else:
            pivots[head.lead] = (head, comb)
            rep_idx.append(k)
    last_block = [k for k, deg in enumerate(basis.degrees()) if window - d < deg <= window]
    window_ok = not any(k in rep_idx for k in last_block)
    return CloseSubspace(eps, threshold, window, [basis.vectors[k] for k in rep_idx],
                         [vecs[k] for k in rep_idx], kernel, window_ok)


def _close_basis(ctx: QuadraticContext, sub: CloseSubspace):
    n_kernel = len(sub.kernel)

    def basis(k: int):
        if k < n_kernel:
            return sub.kernel[k]
        # every basis vector above the window is close (window_ok)
        extra = k - n_kernel
        w = sub.window + 4 * ctx.d * (extra // ctx.d + 1)
        tags = [t for t in lambda_basis(ctx, sub.eps, "raw", w).vectors if ctx.d * t[0] + t[1] > sub.window]
        tag = tags[extra]
        return ctx.d * tag[0] + tag[1], binet_q(ctx, tag[0]) * ctx.T(tag[1])
    return basis


def ball_sup_valuation(ctx: QuadraticContext, eps: EpsilonIndex, v_M) -> Fraction:
    """v of sup |exp(z)| over |z| < M for a lattice with the absolute values of xi_eps Lambda_eps.

    |exp(z)| <= |z| prod_{|lambda| < |z|} |z / lambda|, largest as |z| -> M.
    """
    d, q = ctx.d, ctx.q
    v_xi = xi_valuation(ctx, eps)
    total = Fraction(v_M)
    deg = d * eps.N
    count_prev = 1
    while v_xi - deg > v_M:
        # elements of Lambda_eps of degree exactly deg
        n_here = count_prev * (q - 1)
        total += n_here * (v_M - (v_xi - deg))
        count_prev *= q
        deg += 1
    return total


@dataclass
class QdmReport:
    alpha: str
    eps: EpsilonIndex
    coset_dim: int
    window: int
    window_ok: bool
    v_C1: object
    v_C: object
    bound: object           # v(|alpha| delta_tilde)
    product_checks: list    # v(e_eps(alpha z) - rho(exp_tilde(z))) against precision
    lemma_checks: list      # v(exp_tilde(z) - e_eps(z)) > v(delta_tilde)
    checks: list            # v(e_eps(alpha z) - rho(e_eps(z))) > bound
    rho: AdditivePoly | None = None

    @property
    def ok(self) -> bool:
        return (self.window_ok and all(c[2] for c in self.checks)
                and all(c[2] for c in self.lemma_checks) and all(c[2] for c in self.product_checks))

    def to_json(self) -> dict:
        def rows(cs):
            return [{"z": z, "val": val_text(v), "ok": ok} for z, v, ok in cs]
        return {"alpha": self.alpha, "eps": {"N": self.eps.N, "l": self.eps.l}, "coset_dim": self.coset_dim,
                "window": self.window, "window_ok": self.window_ok, "v_C1": val_text(self.v_C1),
                "v_C": val_text(self.v_C), "bound": val_text(self.bound),
                "product_formula": rows(self.product_checks), "exp_closeness": rows(self.lemma_checks),
                "diagram": rows(self.checks), "ok": self.ok}


def _achieved(diff: SeriesElem):
    return diff.prec if diff.is_zero_at_prec() else diff.val


def qdm_instance(ctx: QuadraticContext, eps: EpsilonIndex, alpha: OKElement, zs, M_val: int | None = None,
                 window: int | None = None) -> QdmReport:
    """Product formula and diagram check for e_eps against the close subspace exponential.

    exp_tilde(z) = alpha^-1 xi exp_{Lambda''}(alpha xi^-1 z);
    rho(w) = alpha w prod(1 - w/u), u over nonzero combinations of exp_tilde at the representatives.
    Checks: e_eps(alpha z) = rho(exp_tilde(z)) to precision; |exp_tilde(z) - e_eps(z)| < delta_tilde;
    |e_eps(alpha z) - rho(e_eps(z))| < |alpha| delta_tilde, where delta_tilde = C eps and C is the
    larger of the two case constants with C_1 the supremum of |exp| on the ball |z| < M.
    """
    d = ctx.d
    eps.check(d)
    if not alpha.in_A_inf1():
        raise ValueError("alpha must lie in A_inf1")
    deg_alpha = alpha.degree()
    v_xi_i = xi_valuation(ctx, eps.ideal_index(d))
    v_delta = d * eps.N + eps.val(d) + v_xi_i
    if not v_delta > deg_alpha:
        raise ValueError("precondition delta < |alpha|^-1 fails for this eps")
    M_val = -(2 * d + 1) if M_val is None else M_val  # |z| < M = q^(2d+1)
    if M_val >= -2 * d:
        raise ValueError("need M > q^(2d)")
    for z in zs:
        if not z.is_zero() and z.val <= M_val:
            raise ValueError("sample z must satisfy |z| < M")
    a_ser = alpha.series()
    a_inv = ser_inv(a_ser)
    x_eps = xi(ctx, eps).xi
    x_inv = ser_inv(x_eps)
    v_C1 = min(Fraction(M_val), ball_sup_valuation(ctx, eps, M_val))
    v_C = min(v_C1 + 2 * d + v_xi_i, v_C1 + 3 * d + 2 * v_xi_i + M_val)
    v_dt = v_C + eps.val(d)
    bound = v_dt - deg_alpha
    if deg_alpha == 0:
        def exp_tilde(z):
            return e_eps(ctx, eps, z).value
        rho = AdditivePoly(ctx.spec, [a_ser])
        dim, window, window_ok = 0, 0, True
    else:
        sub = close_subspace(ctx, eps, alpha, window)
        key = ("close_table", eps, alpha, sub.window)
        if key not in ctx.memo:
            ctx.memo[key] = _LatticeTable(ctx, _close_basis(ctx, sub))
        table = ctx.memo[key]

        def exp_tilde(z):
            if z.is_zero():
                return z
            arg = a_ser * x_inv * z
            return a_inv * x_eps * table.evaluate(arg, auto_cutoff(ctx, eps, arg.val) + deg_alpha)
        us = [a_inv * x_eps * table.evaluate(v, auto_cutoff(ctx, eps, v.val) + deg_alpha) for v in sub.reps]
        rho = additive_from_roots(ctx.spec, us, normalized=True).scaled(a_ser)
        dim, window, window_ok = sub.dim, sub.window, sub.window_ok
    product, lemma, diagram = [], [], []
    for z in zs:
        lhs = e_eps(ctx, eps, a_ser * z).value
        et = exp_tilde(z)
        ee = e_eps(ctx, eps, z).value
        zt = ser_format(z)
        diff = lhs - rho(et)
        product.append((zt, _achieved(diff), diff.is_zero_at_prec()))
        v_l = _achieved(et - ee)
        lemma.append((zt, v_l, v_l > v_dt))
        v_g = _achieved(lhs - rho(ee))
        diagram.append((zt, v_g, v_g > bound))
    return QdmReport(repr(alpha), eps, dim, window, window_ok, v_C1, v_C, bound, product, lemma, diagram, rho)


def qdm_instance_resolved(ctx: QuadraticContext, eps: EpsilonIndex, alpha: OKElement, zs,
                          M_val: int | None = None, max_window: int = 1024) -> QdmReport:
    """qdm_instance, doubling the working precision while a check is limited by precision.

    A difference that is nonzero at precision is a genuine failure and is returned as is.
    """
    cur = ctx
    while True:
        a_cur = OKElement(cur, alpha.g, alpha.h)
        report = qdm_instance(cur, eps, a_cur, zs, M_val)
        if report.ok or cur.window * 2 > max_window or not _precision_limited(cur, eps, a_cur, zs, report):
            return report
        cur = wider_context(ctx, cur.window * 2)


def _precision_limited(ctx, eps, alpha, zs, report: QdmReport) -> bool:
    for z, (_, v, ok) in zip(zs, report.checks):
        if ok:
            continue
        lhs = e_eps(ctx, eps, alpha.series() * z).value
        if not (lhs - report.rho(e_eps(ctx, eps, z).value)).is_zero_at_prec():
            return False
    return True
