"""Real quadratic context X^2 - aX - b: the unit f, its conjugate, sqrt(D), the
uniformizer, the Binet sequence Q_n, and exact elements g + h f of A[f]."""
from __future__ import annotations

import math
import re
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .field_core import FFElem, FieldSpec, ff_make
from .series import (INF, PrecisionExhausted, SeriesElem, ser_const, ser_from_poly, ser_inv,
                     ser_nth_root, ser_sqrt_disc)

Poly = tuple  # coefficient indices in F_q, low degree first, no trailing zeros


# -- polynomials over F_q ------------------------------------------------------

def poly_trim(a: Sequence[int]) -> Poly:
    a = list(a)
    while a and a[-1] == 0:
        a.pop()
    return tuple(a)


def poly_deg(a: Poly) -> int:
    return len(a) - 1 if a else -1


def poly_add(F: FieldSpec, a: Poly, b: Poly) -> Poly:
    n = max(len(a), len(b))
    return poly_trim(F.add(a[i] if i < len(a) else 0, b[i] if i < len(b) else 0) for i in range(n))


def poly_neg(F: FieldSpec, a: Poly) -> Poly:
    return tuple(F.neg(c) for c in a)


def poly_sub(F: FieldSpec, a: Poly, b: Poly) -> Poly:
    return poly_add(F, a, poly_neg(F, b))


def poly_scale(F: FieldSpec, c: int, a: Poly) -> Poly:
    return poly_trim(F.mul(c, x) for x in a)


def poly_shift(a: Poly, k: int) -> Poly:
    return (0,) * k + a if a else a


def poly_mul(F: FieldSpec, a: Poly, b: Poly) -> Poly:
    if not a or not b:
        return ()
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                if y:
                    out[i + j] = F.add(out[i + j], F.mul(x, y))
    return poly_trim(out)


def poly_divmod(F: FieldSpec, a: Poly, b: Poly) -> tuple[Poly, Poly]:
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    r = list(a)
    inv = F.inv(b[-1])
    q = [0] * max(0, len(a) - len(b) + 1)
    for k in range(len(a) - len(b), -1, -1):
        c = F.mul(r[k + len(b) - 1], inv)
        if c:
            q[k] = c
            for j, y in enumerate(b):
                r[k + j] = F.sub(r[k + j], F.mul(c, y))
    return poly_trim(q), poly_trim(r[: len(b) - 1])


def poly_gcd(F: FieldSpec, a: Poly, b: Poly) -> Poly:
    while b:
        a, b = b, poly_divmod(F, a, b)[1]
    if a:
        a = poly_scale(F, F.inv(a[-1]), a)
    return a


def poly_deriv(F: FieldSpec, a: Poly) -> Poly:
    return poly_trim(F.mul(F.index([k % F.p]), a[k]) for k in range(1, len(a)))


def poly_text(a: Poly) -> str:
    return "[" + ",".join(str(c) for c in a) + "]"


# -- context -----------------------------------------------------------------------

@dataclass(eq=False)
class QuadraticContext:
    spec: FieldSpec
    a_coeffs: Poly
    b: FFElem
    d: int
    window: Fraction
    a: SeriesElem
    f: SeriesElem
    fstar: SeriesElem
    sqrtD: SeriesElem
    pi: SeriesElem
    qcache: dict = field(default_factory=dict)
    memo: dict = field(default_factory=dict)
    _lock: threading.Lock = field(default_factory=threading.Lock)

    @property
    def q(self) -> int:
        return self.spec.q

    @property
    def p(self) -> int:
        return self.spec.p

    def coprime_d(self) -> bool:
        return math.gcd(self.d, self.p) == 1

    # exact polynomials carry no window; precision caps come from f, sqrt(D), pi
    def one(self) -> SeriesElem:
        return ser_const(self.spec, 1)

    def T(self, k: int = 1) -> SeriesElem:
        return ser_from_poly(self.spec, [0] * k + [1])

    def poly(self, coeffs: Sequence) -> SeriesElem:
        """Series of a polynomial given by F_q element indices (the Poly encoding)."""
        return ser_from_poly(self.spec, index_elems(self.spec, coeffs))

    def summary(self) -> dict:
        return {"q": self.q, "d": self.d, "a": list(self.a_coeffs), "b": self.b.value,
                "prec": str(self.window)}

    def to_config(self) -> str:
        return f"{self.spec.to_config()} a={poly_text(self.a_coeffs)} b={self.b.value} prec={self.window}"

    def with_window(self, window) -> "QuadraticContext":
        return ctx_new(self.spec, self.a_coeffs, self.b, window)


def index_elems(spec: FieldSpec, coeffs: Sequence[int]) -> list[FFElem]:
    return [FFElem(spec, "base", int(c)) for c in coeffs]


def _root_f(spec: FieldSpec, a: SeriesElem, b: FFElem, d: int, window: Fraction) -> SeriesElem:
    """Fixed point of f -> a + b/f started at a; each step gains 2d digits."""
    target = -d + window
    f = a
    known = Fraction(d)  # v(f - a) = v(f*) = d
    while known < target:
        f = (a + ser_inv(f.exact().with_window(window)) * b).exact()
        known += 2 * d
    return f.declare_prec(target).with_window(window)


def ctx_new(spec: FieldSpec, a: Sequence, b, prec=None) -> QuadraticContext:
    a_coeffs = poly_trim(ff_make(spec, c).value for c in a)
    if any(c >= spec.q for c in a_coeffs):
        raise ValueError("coefficients of a must lie in F_q")
    d = poly_deg(a_coeffs)
    if d < 1:
        raise ValueError("a must have degree >= 1")
    if a_coeffs[-1] != 1:
        raise ValueError("a must be monic")
    b_el = ff_make(spec, b)
    if b_el.is_zero() or not b_el.in_base():
        raise ValueError("b must be a nonzero element of F_q")
    b_el = b_el.demote()
    window = Fraction(prec) if prec is not None else Fraction(20 * d)
    if window < 4 * d:
        raise ValueError("working precision must be at least 4d")
    a_ser = ser_from_poly(spec, index_elems(spec, a_coeffs))
    f = _root_f(spec, a_ser, b_el, d, window)
    fstar = -(ser_inv(f) * b_el)
    sqrtD = ser_sqrt_disc(a_ser, b_el, window).with_window(window)
    if math.gcd(d, spec.p) == 1:
        pi = ser_inv(ser_nth_root(f, d))
    else:
        fT = f * ser_from_poly(spec, [0, 1])
        pi = ser_inv(ser_nth_root(fT, d + 1))
    ctx = QuadraticContext(spec, a_coeffs, b_el, d, window, a_ser, f, fstar, sqrtD, pi)
    ctx.qcache[0] = ser_from_poly(spec, [1])
    ctx.qcache[1] = a_ser
    return ctx


def ctx_from_config(text: str) -> QuadraticContext:
    entries = dict(re.findall(r"(\w+)=(\[[^\]]*\]|\S+)", text))
    spec = FieldSpec.from_config(text)
    if "a" not in entries or "b" not in entries:
        raise ValueError("context block needs a=[...] and b=")
    a = [int(x) for x in entries["a"].strip("[]").split(",") if x.strip()]
    prec = Fraction(entries["prec"]) if "prec" in entries else None
    return ctx_new(spec, a, int(entries["b"]), prec)


def ctx_simple(q: int, a: Sequence, b=1, prec=None) -> QuadraticContext:
    from .field_core import field_for_q
    return ctx_new(field_for_q(q), a, b, prec)


def larger_order_suspected(ctx: QuadraticContext):
    """True when D = a^2 + 4b has a repeated factor (A[f] may not be maximal); None in char 2."""
    F = ctx.spec
    if F.p == 2:
        return None
    D = poly_add(F, poly_mul(F, ctx.a_coeffs, ctx.a_coeffs), (F.mul(F.index([4 % F.p]), ctx.b.value),))
    return poly_deg(poly_gcd(F, D, poly_deriv(F, D))) > 0


# -- Binet sequence ---------------------------------------------------------------

def binet_q(ctx: QuadraticContext, n: int) -> SeriesElem:
    """Q_n from Q_0 = 1, Q_1 = a, Q_{n+1} = a Q_n + b Q_{n-1} (exact polynomial)."""
    if n < 0:
        raise ValueError("n must be >= 0")
    cache = ctx.qcache
    if n in cache:
        return cache[n]
    with ctx._lock:
        top = max(cache)
        while top < n:
            cache[top + 1] = (ctx.a * cache[top] + cache[top - 1] * ctx.b).exact()
            top += 1
    return cache[n]


def binet_closed(ctx: QuadraticContext, n: int) -> SeriesElem:
    """(f^(n+1) - f*^(n+1)) / sqrt(D) evaluated in series."""
    return (ctx.f ** (n + 1) - ctx.fstar ** (n + 1)) / ctx.sqrtD


def qtable_csv(ctx: QuadraticContext, n_max: int) -> str:
    from .series import poly_coeffs
    lines = ["n,coefficients"]
    for n in range(n_max + 1):
        lines.append(f"{n}," + " ".join(str(c) for c in poly_coeffs(binet_q(ctx, n))))
    return "\n".join(lines) + "\n"


def nearest_dist(ctx: QuadraticContext, x: SeriesElem):
    """Valuation of the distance from x to A (the part with negative T-exponents)."""
    if x.is_zero():
        return INF
    if x.ram != 1 or x.level != "base":
        raise ValueError("nearest_dist needs an element of k_inf (unramified, F_q coefficients)")
    _, frac_part = x.split_at(Fraction(1))
    if frac_part.is_zero():
        return INF
    if frac_part.is_zero_at_prec():
        raise PrecisionExhausted("fractional part vanishes at the working precision")
    return frac_part.val


# -- elements of A[f] ---------------------------------------------------------------

class WindowOverflow(OverflowError):
    pass


@dataclass(frozen=True, eq=False)
class OKElement:
    """g + h f with g, h polynomials over F_q."""
    ctx: QuadraticContext
    g: Poly
    h: Poly

    def __post_init__(self):
        object.__setattr__(self, "g", poly_trim(self.g))
        object.__setattr__(self, "h", poly_trim(self.h))
        lim = 8 * self.ctx.d
        if poly_deg(self.g) > lim + self.ctx.d or poly_deg(self.h) > lim:
            raise WindowOverflow(f"OKElement degree exceeds the window {lim}")

    @property
    def F(self) -> FieldSpec:
        return self.ctx.spec

    def __eq__(self, other):
        return isinstance(other, OKElement) and self.g == other.g and self.h == other.h

    def __hash__(self):
        return hash((self.g, self.h))

    def is_zero(self) -> bool:
        return not self.g and not self.h

    def __add__(self, other: "OKElement") -> "OKElement":
        return OKElement(self.ctx, poly_add(self.F, self.g, other.g), poly_add(self.F, self.h, other.h))

    def __neg__(self) -> "OKElement":
        return OKElement(self.ctx, poly_neg(self.F, self.g), poly_neg(self.F, self.h))

    def __sub__(self, other: "OKElement") -> "OKElement":
        return self + (-other)

    def __mul__(self, other) -> "OKElement":
        F = self.F
        if isinstance(other, (int, FFElem)):
            c = ff_make(F, other).value
            return OKElement(self.ctx, poly_scale(F, c, self.g), poly_scale(F, c, self.h))
        hh = poly_mul(F, self.h, other.h)
        g = poly_add(F, poly_mul(F, self.g, other.g), poly_scale(F, self.ctx.b.value, hh))
        h = poly_add(F, poly_add(F, poly_mul(F, self.g, other.h), poly_mul(F, other.g, self.h)),
                     poly_mul(F, self.ctx.a_coeffs, hh))
        return OKElement(self.ctx, g, h)

    __rmul__ = __mul__

    def times_poly(self, c: Poly) -> "OKElement":
        return OKElement(self.ctx, poly_mul(self.F, self.g, c), poly_mul(self.F, self.h, c))

    def conj(self) -> "OKElement":
        """Image under f -> a - f."""
        F = self.F
        return OKElement(self.ctx, poly_add(F, self.g, poly_mul(F, self.h, self.ctx.a_coeffs)), poly_neg(F, self.h))

    def norm(self) -> Poly:
        """g^2 + a g h - b h^2."""
        F = self.F
        n = poly_add(F, poly_mul(F, self.g, self.g), poly_mul(F, self.ctx.a_coeffs, poly_mul(F, self.g, self.h)))
        return poly_sub(F, n, poly_scale(F, self.ctx.b.value, poly_mul(F, self.h, self.h)))

    def series(self) -> SeriesElem:
        c = self.ctx
        return c.poly(self.g) + c.poly(self.h) * c.f

    def conj_series(self) -> SeriesElem:
        c = self.ctx
        return c.poly(self.g) + c.poly(self.h) * c.fstar

    def _lead(self) -> tuple[int, FFElem] | None:
        """(degree, sign) read off the polynomials when g and h f have different degrees."""
        d = self.ctx.d
        dg = poly_deg(self.g) if self.g else None
        dh = poly_deg(self.h) + d if self.h else None
        if dh is None and dg is None:
            return None
        if dh is None or (dg is not None and dg > dh):
            return dg, FFElem(self.F, "base", self.g[-1])
        if dg is None or dh > dg:
            return dh, FFElem(self.F, "base", self.h[-1]) * FFElem(self.F, "base", self.ctx.a_coeffs[-1])
        return None

    def degree(self) -> int:
        """deg at the first infinite place, -v(g + h f)."""
        lead = self._lead()
        if lead is not None:
            return lead[0]
        s = self.series()
        if s.is_zero_at_prec():
            raise PrecisionExhausted("element indistinguishable from zero")
        return int(s.degree())

    def sgn(self) -> FFElem:
        lead = self._lead()
        return lead[1] if lead is not None else self.series().sgn()

    def is_monic(self) -> bool:
        return self.sgn() == 1

    def in_A_inf1(self) -> bool:
        """Regular away from the first infinite place: v(g + h f*) >= 0."""
        if self.is_zero():
            return True
        s = self.conj_series()
        if s.lead is not None and s.lead < 0:
            return False
        if s.prec is not None and s.prec < 0:
            raise PrecisionExhausted("conjugate not resolved down to degree 0")
        return True

    def __repr__(self) -> str:
        return f"OK(g={poly_text(self.g)}, h={poly_text(self.h)})"


def ok_ops(x: OKElement, y: OKElement, op: str) -> OKElement:
    if op == "add":
        return x + y
    if op == "sub":
        return x - y
    if op == "mul":
        return x * y
    raise ValueError(f"unknown operation {op!r}")


def ok_norm_degree(x: OKElement) -> int:
    return poly_deg(x.norm())


def ok_const(ctx: QuadraticContext, c) -> OKElement:
    v = ff_make(ctx.spec, c).value
    return OKElement(ctx, (v,), ())


def ok_f(ctx: QuadraticContext) -> OKElement:
    return OKElement(ctx, (), (1,))


def ok_poly(ctx: QuadraticContext, coeffs: Sequence) -> OKElement:
    return OKElement(ctx, tuple(ff_make(ctx.spec, c).value for c in coeffs), ())


def ok_fpow_T(ctx: QuadraticContext, k: int, j: int) -> OKElement:
    """f^k T^j."""
    out = ok_const(ctx, 1)
    for _ in range(k):
        out = out * ok_f(ctx)
    return out.times_poly((0,) * j + (1,))


def ok_parse(ctx: QuadraticContext, text: str) -> OKElement:
    """Parse 'f', 'fT', 'f+1', 'f^2T+2', 'T^3' style expressions (sums of c*f^k*T^j), or the
    '[g]+[h]f' coefficient form printed by ok_text."""
    m = re.fullmatch(r"\[([\d,]*)\]\+\[([\d,]*)\]f", text.replace(" ", ""))
    if m:
        g, h = ([int(c) for c in part.split(",") if c] for part in m.groups())
        if any(c >= ctx.q for c in g + h):
            raise ValueError(f"coefficient index out of range in {text!r}")
        return OKElement(ctx, poly_trim(g), poly_trim(h))
    out = OKElement(ctx, (), ())
    s = text.replace(" ", "").replace("-", "+-")
    for term in filter(None, s.split("+")):
        m = re.fullmatch(r"(-)?(\d+)?\*?(f(?:\^(\d+))?)?\*?(T(?:\^(\d+))?)?", term)
        if not m or not any(m.groups()[1:]):
            raise ValueError(f"cannot parse A[f] term {term!r}")
        sign, c, fpart, fk, tpart, tj = m.groups()
        coef = int(c) if c else 1
        if sign:
            coef = -coef
        k = (int(fk) if fk else 1) if fpart else 0
        j = (int(tj) if tj else 1) if tpart else 0
        out = out + ok_fpow_T(ctx, k, j) * coef
    return out


def ok_text(x: OKElement) -> str:
    return f"{poly_text(x.g)}+{poly_text(x.h)}f"
