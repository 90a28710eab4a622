"""Truncated Puiseux series in T^-1 over F_q or F_{q^2}.

A nonzero series is stored as a (D, L) coordinate array over F_p: column i holds the
coefficient of the term with valuation lead + i/step (so the term is c * T^-(lead + i/step)).
Everything with valuation >= prec is unknown; prec None means the series is exact.
"""
from __future__ import annotations

import math
import re
from fractions import Fraction
from typing import Sequence

import numpy as np

from .field_core import FFElem, FieldSpec, ff_make


class PrecisionExhausted(ArithmeticError):
    """A result cannot be resolved at the working precision."""


class _Infinity:
    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __lt__(self, other):
        return False

    def __le__(self, other):
        return other is self

    def __gt__(self, other):
        return other is not self

    def __ge__(self, other):
        return True

    def __eq__(self, other):
        return other is self

    def __hash__(self):
        return hash("inf")

    def __add__(self, other):
        return self

    __radd__ = __add__

    def __sub__(self, other):
        if other is self:
            raise ArithmeticError("inf - inf")
        return self

    def __neg__(self):
        raise ArithmeticError("negative infinity is not a valuation")

    def __repr__(self):
        return "inf"


INF = _Infinity()


def frac(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


def val_text(v) -> str:
    """Exact valuation as 'num/den', integer text, or 'inf'."""
    if v is INF:
        return "inf"
    v = frac(v)
    return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"


def _lcm(*xs: int) -> int:
    out = 1
    for x in xs:
        out = out * x // math.gcd(out, x)
    return out


def _ceil(x: Fraction) -> int:
    return -((-x.numerator) // x.denominator)


class SeriesElem:
    __slots__ = ("field", "level", "lead", "step", "c", "prec", "window")

    def __init__(self, field: FieldSpec, level: str, lead, step: int, c: np.ndarray,
                 prec=None, window=None):
        # use make_series for normalization; this constructor trusts its inputs
        self.field = field
        self.level = level
        self.lead = lead
        self.step = step
        self.c = c
        self.prec = prec
        self.window = window

    # -- basic properties ----------------------------------------------
    @property
    def D(self) -> int:
        return self.field.dim(self.level)

    @property
    def val(self):
        """Valuation v = -log_q |x|; INF for exact zero, a lower bound prec for zero-at-precision."""
        if self.lead is None:
            return INF if self.prec is None else self.prec
        return self.lead

    @property
    def ram(self) -> int:
        if self.lead is None:
            return 1
        return _lcm(self.step, self.lead.denominator)

    @property
    def lead_exp(self):
        return self.val

    def is_exact(self) -> bool:
        return self.prec is None

    def is_zero(self) -> bool:
        """True for the exact zero."""
        return self.lead is None and self.prec is None

    def is_zero_at_prec(self) -> bool:
        """True when no nonzero coefficient is known (exact zero included)."""
        return self.lead is None

    def degree(self):
        if self.lead is None:
            raise PrecisionExhausted("degree of a series indistinguishable from zero")
        return -self.lead

    def rel_prec(self):
        if self.prec is None:
            return INF
        if self.lead is None:
            return Fraction(0)
        return self.prec - self.lead

    def exponents(self) -> list[Fraction]:
        if self.lead is None:
            return []
        return [self.lead + Fraction(i, self.step) for i in range(self.c.shape[1])]

    def nonzero_terms(self) -> list[tuple[Fraction, int]]:
        """Nonzero (valuation, coefficient index) pairs in increasing valuation."""
        if self.lead is None:
            return []
        idx = self.field.indices_of(self.c)
        return [(self.lead + Fraction(int(i), self.step), int(idx[i])) for i in np.flatnonzero(idx)]

    def terms(self) -> list[tuple[Fraction, FFElem]]:
        """Nonzero (valuation, coefficient) pairs in increasing valuation."""
        return [(v, ff_make(self.field, self.field.coords(i)).demote()) for v, i in self.nonzero_terms()]

    def coeff(self, v) -> FFElem:
        """Coefficient of the term with valuation v (must be below prec)."""
        v = frac(v)
        if self.prec is not None and v >= self.prec:
            raise PrecisionExhausted(f"coefficient at valuation {v} is beyond precision {self.prec}")
        zero = ff_make(self.field, 0)
        if self.lead is None or v < self.lead:
            return zero
        pos = (v - self.lead) * self.step
        if pos.denominator != 1 or pos >= self.c.shape[1]:
            return zero
        col = self.c[:, int(pos)]
        return ff_make(self.field, list(col)).demote()

    def sgn(self) -> FFElem:
        if self.lead is None:
            raise PrecisionExhausted("sign of a series indistinguishable from zero")
        return ff_make(self.field, list(self.c[:, 0])).demote()

    # -- arithmetic dunders ------------------------------------------------
    def _coerce(self, other) -> "SeriesElem":
        if isinstance(other, SeriesElem):
            return other
        return ser_const(self.field, other)

    def __add__(self, other):
        return ser_add(self, self._coerce(other))

    def __radd__(self, other):
        return ser_add(self._coerce(other), self)

    def __neg__(self):
        return ser_scale(self, ff_make(self.field, -1))

    def __sub__(self, other):
        return ser_add(self, -self._coerce(other))

    def __rsub__(self, other):
        return ser_add(self._coerce(other), -self)

    def __mul__(self, other):
        if isinstance(other, (int, FFElem, np.integer)):
            return ser_scale(self, ff_make(self.field, other))
        return ser_mul(self, other)

    def __rmul__(self, other):
        return self.__mul__(other)

    def __truediv__(self, other):
        if isinstance(other, (int, FFElem, np.integer)):
            return ser_scale(self, ff_make(self.field, other).inverse())
        return ser_mul(self, ser_inv(other))

    def __rtruediv__(self, other):
        return ser_mul(self._coerce(other), ser_inv(self))

    def __pow__(self, e: int):
        return ser_pow(self, e)

    def __eq__(self, other):
        if not isinstance(other, SeriesElem):
            if isinstance(other, (int, FFElem)):
                other = ser_const(self.field, other)
            else:
                return NotImplemented
        return (self - other).is_zero_at_prec()

    __hash__ = None

    def __repr__(self):
        return ser_format(self)

    # -- precision handling ------------------------------------------------
    def truncate(self, prec) -> "SeriesElem":
        """Forget everything with valuation >= prec."""
        prec = frac(prec)
        if self.prec is not None and self.prec <= prec:
            return self
        if self.lead is None:
            return make_series(self.field, self.level, Fraction(0), 1, np.zeros((self.D, 0), np.int64), prec, self.window)
        return make_series(self.field, self.level, self.lead, self.step, self.c, prec, self.window)

    def exact(self) -> "SeriesElem":
        """Drop the error term (treat the known part as exact)."""
        if self.lead is None:
            return zero_series(self.field)
        return make_series(self.field, self.level, self.lead, self.step, self.c, None, self.window)

    def declare_prec(self, prec) -> "SeriesElem":
        """Same known part with a new precision; used where an algorithm certifies extra digits."""
        base = self.exact()
        return base.truncate(prec) if prec is not None else base

    def with_window(self, window) -> "SeriesElem":
        if self.lead is None:
            return SeriesElem(self.field, self.level, None, 1, self.c, self.prec, window)
        return make_series(self.field, self.level, self.lead, self.step, self.c, self.prec, window)

    def as_level(self, level: str) -> "SeriesElem":
        if level == self.level:
            return self
        if level == "base":
            raise ValueError("cannot demote an F_{q^2} series explicitly")
        D = self.field.dim("ext2")
        arr = np.zeros((D, self.c.shape[1]), np.int64)
        arr[: self.D] = self.c
        return SeriesElem(self.field, "ext2", self.lead, self.step, arr, self.prec, self.window)

    def split_at(self, v) -> tuple["SeriesElem", "SeriesElem"]:
        """(terms with valuation < v, remaining terms); the first part is exact."""
        v = frac(v)
        if self.lead is None:
            return zero_series(self.field), self
        k = max(0, min(self.c.shape[1], _ceil((v - self.lead) * self.step)))
        head = make_series(self.field, self.level, self.lead, self.step, self.c[:, :k], None, self.window)
        tail_c = self.c[:, k:]
        if tail_c.shape[1] == 0:
            tail = zero_series(self.field, self.prec)
        else:
            tail = make_series(self.field, self.level, self.lead + Fraction(k, self.step), self.step, tail_c,
                               self.prec, self.window)
        return head, tail


# -- construction helpers -------------------------------------------------

def _merge_window(*xs):
    ws = [x.window for x in xs if x.window is not None]
    return max(ws) if ws else None


def zero_series(field: FieldSpec, prec=None) -> SeriesElem:
    return SeriesElem(field, "base", None, 1, np.zeros((field.n, 0), np.int64),
                      None if prec is None else frac(prec), None)


def make_series(field: FieldSpec, level: str, lead, step: int, arr: np.ndarray, prec=None, window=None) -> SeriesElem:
    """Normalized series from a coordinate array on the grid lead + i/step."""
    p = field.p
    lead = frac(lead)
    prec = None if prec is None or prec is INF else frac(prec)
    arr = np.asarray(arr, dtype=np.int64) % p
    nzcols = np.flatnonzero(arr.any(axis=0)) if arr.size else np.zeros(0, np.int64)
    if prec is not None:
        if prec <= lead:
            return zero_series(field, prec)
        limit = _ceil((prec - lead) * step)
        nzcols = nzcols[nzcols < limit]
    if nzcols.size == 0:
        return zero_series(field, prec)
    first = int(nzcols[0])
    lead = lead + Fraction(first, step)
    if window is not None:
        cap = lead + window
        if prec is not None:
            prec = min(prec, cap)
        elif Fraction(int(nzcols[-1]) - first, step) >= window:
            prec = cap
    if prec is not None:
        length = _ceil((prec - lead) * step)
        arr = arr[:, first: first + length]
        if arr.shape[1] < length:
            arr = np.concatenate([arr, np.zeros((arr.shape[0], length - arr.shape[1]), np.int64)], axis=1)
    else:
        last = int(nzcols[-1])
        arr = arr[:, first: last + 1]
    # coarsest grid carrying all nonzero terms
    pos = np.flatnonzero(arr.any(axis=0))
    g = step
    for x in pos[1:]:
        g = math.gcd(g, int(x))
        if g == 1:
            break
    if g > 1:
        step //= g
        if prec is not None:
            length = _ceil((prec - lead) * step)
            sub = arr[:, ::g]
            if sub.shape[1] < length:
                sub = np.concatenate([sub, np.zeros((sub.shape[0], length - sub.shape[1]), np.int64)], axis=1)
            arr = sub[:, :length]
        else:
            arr = arr[:, ::g]
    # demote to F_q when all coefficients lie there
    if level == "ext2" and not arr[field.n:].any():
        arr = arr[: field.n]
        level = "base"
    return SeriesElem(field, level, lead, step, np.ascontiguousarray(arr), prec, window)


def ser_const(field: FieldSpec, c, window=None) -> SeriesElem:
    e = ff_make(field, c)
    if e.is_zero():
        return zero_series(field)
    arr = np.array(field.coords(e.value, e.level), np.int64).reshape(-1, 1)
    return make_series(field, e.level, Fraction(0), 1, arr, None, window)


def ser_monomial(field: FieldSpec, c, deg, window=None) -> SeriesElem:
    """c * T^deg (deg may be rational)."""
    e = ff_make(field, c)
    if e.is_zero():
        return zero_series(field)
    arr = np.array(field.coords(e.value, e.level), np.int64).reshape(-1, 1)
    return make_series(field, e.level, -frac(deg), 1, arr, None, window)


def ser_from_poly(field: FieldSpec, coeffs: Sequence, window=None) -> SeriesElem:
    """Exact series of the polynomial sum coeffs[k] T^k (coefficients in F_q)."""
    elems = [ff_make(field, c) for c in coeffs]
    while elems and elems[-1].is_zero():
        elems.pop()
    if not elems:
        return zero_series(field)
    level = "ext2" if any(e.level == "ext2" for e in elems) else "base"
    D = field.dim(level)
    arr = np.array([field.coords(e.value, level) for e in reversed(elems)], np.int64).T.reshape(D, -1)
    return make_series(field, level, Fraction(-(len(elems) - 1)), 1, arr, None, window)


def poly_coeffs(x: SeriesElem) -> list[int]:
    """Coefficient indices (low degree first) of an exact polynomial series."""
    if x.is_zero():
        return []
    if x.prec is not None or x.ram != 1 or x.lead > 0:
        raise ValueError("not an exact polynomial in T")
    out = [0] * (int(-x.lead) + 1)
    for v, c in x.terms():
        if v > 0:
            raise ValueError("not a polynomial in T")
        out[int(-v)] = c.value
    return out


# -- grid helpers ---------------------------------------------------------

def _regrid(x: SeriesElem, lead: Fraction, step: int, length: int, level: str) -> np.ndarray:
    D = x.field.dim(level)
    out = np.zeros((D, length), np.int64)
    if x.lead is None or length <= 0:
        return out
    off = (x.lead - lead) * step
    assert off.denominator == 1 and off >= 0 and step % x.step == 0
    off = int(off)
    stride = step // x.step
    n = x.c.shape[1]
    idx = off + stride * np.arange(n)
    keep = idx < length
    out[: x.D, idx[keep]] = x.c[:, keep]
    return out


def _min_prec(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


def ser_add(x: SeriesElem, y: SeriesElem) -> SeriesElem:
    field = x.field
    prec = _min_prec(x.prec, y.prec)
    window = _merge_window(x, y)
    if y.lead is None:
        return x if prec == x.prec else x.truncate(prec)
    if x.lead is None:
        return y if prec == y.prec else y.truncate(prec)
    level = "ext2" if "ext2" in (x.level, y.level) else "base"
    lead = min(x.lead, y.lead)
    step = _lcm(x.step, y.step, (x.lead - y.lead).denominator)
    if prec is None:
        ex = max(x.lead + Fraction(x.c.shape[1] - 1, x.step), y.lead + Fraction(y.c.shape[1] - 1, y.step))
        length = int((ex - lead) * step) + 1
    else:
        length = max(0, _ceil((prec - lead) * step))
    arr = _regrid(x, lead, step, length, level) + _regrid(y, lead, step, length, level)
    return make_series(field, level, lead, step, arr, prec, window)


def ser_scale(x: SeriesElem, c: FFElem) -> SeriesElem:
    if c.is_zero():
        return zero_series(x.field) if x.prec is None else zero_series(x.field, x.prec)
    if x.lead is None:
        return x
    level = "ext2" if "ext2" in (x.level, c.level) else "base"
    xx = x.as_level(level)
    M = x.field.scalar_matrix(c.value, level)
    arr = (M @ xx.c) % x.field.p
    return make_series(x.field, level, x.lead, x.step, arr, x.prec, x.window)


def _conv_arrays(field: FieldSpec, level: str, a: np.ndarray, b: np.ndarray, length: int) -> np.ndarray:
    p = field.p
    D = a.shape[0]
    R = field.mult_tensor(level)
    out = np.zeros((D, length), np.int64)
    la, lb = a.shape[1], b.shape[1]
    if la == 0 or lb == 0 or length == 0:
        return out
    a = a[:, :length]
    b = b[:, :length]
    for k1 in range(D):
        if not a[k1].any():
            continue
        for k2 in range(D):
            if not b[k2].any():
                continue
            conv = np.convolve(a[k1], b[k2])[:length] % p
            r = R[k1, k2]
            for k in np.flatnonzero(r):
                out[k, : conv.shape[0]] += r[k] * conv
    return out % p


def ser_mul(x: SeriesElem, y: SeriesElem) -> SeriesElem:
    field = x.field
    window = _merge_window(x, y)
    if x.lead is None or y.lead is None:
        if x.is_zero() or y.is_zero():
            return zero_series(field)
        # at least one is zero at precision
        return zero_series(field, x.val + y.val)
    prec = None
    if x.prec is not None:
        prec = x.prec + y.lead
    if y.prec is not None:
        prec = _min_prec(prec, y.prec + x.lead)
    level = "ext2" if "ext2" in (x.level, y.level) else "base"
    step = _lcm(x.step, y.step)
    lead = x.lead + y.lead
    full_len = (x.c.shape[1] - 1) * (step // x.step) + (y.c.shape[1] - 1) * (step // y.step) + 1
    if window is not None:
        cap = lead + window
        if prec is not None:
            prec = min(prec, cap)
        elif Fraction(full_len - 1, step) >= window:
            prec = cap
    if prec is None:
        length = full_len
    else:
        length = max(0, _ceil((prec - lead) * step))
    la = min(length, (x.c.shape[1] - 1) * (step // x.step) + 1)
    lb = min(length, (y.c.shape[1] - 1) * (step // y.step) + 1)
    a = _regrid(x, x.lead, step, la, level)
    b = _regrid(y, y.lead, step, lb, level)
    arr = _conv_arrays(field, level, a, b, length)
    return make_series(field, level, lead, step, arr, prec, window)


def ser_frobenius(x: SeriesElem, k: int = 1) -> SeriesElem:
    """x^(q^k), coefficientwise Frobenius plus exponent scaling."""
    if x.lead is None or k == 0:
        if x.lead is None and x.prec is not None:
            return zero_series(x.field, x.prec * x.field.q ** k)
        return x
    field = x.field
    Q = field.q ** k
    lead = x.lead * Q
    prec = None if x.prec is None else x.prec * Q
    n_old = x.c.shape[1]
    if x.window is not None:
        cap = lead + x.window
        if prec is not None:
            prec = min(prec, cap)
        elif Fraction((n_old - 1) * Q, x.step) >= x.window:
            prec = cap
    if prec is None:
        length = (n_old - 1) * Q + 1
    else:
        length = max(1, _ceil((prec - lead) * x.step))
    keep = min(n_old, (length - 1) // Q + 1)
    arr = np.zeros((x.D, length), np.int64)
    coeffs = x.c[:, :keep]
    if x.level == "ext2" and k % 2 == 1:
        coeffs = (field.conj_matrix() @ coeffs) % field.p
    arr[:, ::Q][:, :keep] = coeffs
    return make_series(field, x.level, lead, x.step, arr, prec, x.window)


def ser_pow(x: SeriesElem, e: int) -> SeriesElem:
    if e < 0:
        return ser_pow(ser_inv(x), -e)
    field = x.field
    if e == 0:
        return ser_const(field, 1, x.window)
    q = field.q
    result = None
    k = 0
    base = x
    while e:
        e, digit = divmod(e, q)
        if digit:
            part = _small_pow(base, digit)
            part = ser_frobenius(part, k) if k else part
            result = part if result is None else ser_mul(result, part)
        k += 1
    return result


def _small_pow(x: SeriesElem, e: int) -> SeriesElem:
    result = None
    base = x
    while e:
        if e & 1:
            result = base if result is None else ser_mul(result, base)
        e >>= 1
        if e:
            base = ser_mul(base, base)
    return result


def _unit_split(x: SeriesElem) -> tuple[FFElem, Fraction, SeriesElem]:
    """x = c * T^-v * u with u a 1-unit (lead 0, sign 1)."""
    c = x.sgn()
    v = x.lead
    u = ser_scale(x, c.inverse())
    u = make_series(x.field, u.level, Fraction(0), u.step, u.c, None if u.prec is None else u.prec - v, x.window)
    return c, v, u


def _one_unit_newton(u: SeriesElem, target_rel, update) -> SeriesElem:
    """Newton iteration from 1 with quadratic precision doubling up to target_rel."""
    field = u.field
    y = ser_const(field, 1)
    cur = Fraction(1, u.step)
    while True:
        cur = min(cur * 2, target_rel)
        # y is right below the old precision; one step doubles that, and the
        # tracked precision comes from u alone
        y = update(y.exact(), u.truncate(cur), cur).declare_prec(cur)
        if cur >= target_rel:
            return y


def ser_inv(x: SeriesElem) -> SeriesElem:
    if x.lead is None:
        raise PrecisionExhausted("division by a series indistinguishable from zero")
    field = x.field
    c, v, u = _unit_split(x)
    if u.prec is None and u.c.shape[1] == 1:
        inv_u = ser_const(field, 1)
    else:
        rel = u.prec if u.prec is not None else (x.window if x.window is not None else None)
        if rel is None:
            raise PrecisionExhausted("inverse of an exact non-monomial series needs a window")
        two = ser_const(field, 2)

        def step_inv(y, uu, cur):
            return ser_mul(y, two - ser_mul(uu, y))

        inv_u = _one_unit_newton(u, rel, step_inv)
        if u.prec is not None:
            inv_u = inv_u.truncate(u.prec)
    out = ser_scale(inv_u, c.inverse())
    out = make_series(field, out.level, out.lead - v, out.step, out.c,
                      None if out.prec is None else out.prec - v, x.window)
    return out


def ser_nth_root(x: SeriesElem, m: int) -> SeriesElem:
    """Deterministic m-th root, p not dividing m."""
    field = x.field
    if m <= 0 or m % field.p == 0:
        raise ValueError(f"root degree {m} must be positive and prime to p={field.p}")
    if x.lead is None:
        if x.is_zero():
            return x
        raise PrecisionExhausted("root of a series indistinguishable from zero")
    c, v, u = _unit_split(x)
    r = field.nth_root(c.value, m)
    if r is None:
        raise ValueError(f"leading coefficient {c} is not an {m}-th power in F_q^2")
    root_c = ff_make(field, field.coords(r)).demote()
    if u.prec is None and u.c.shape[1] == 1:
        root_u = ser_const(field, 1)
    else:
        rel = u.prec if u.prec is not None else x.window
        if rel is None:
            raise PrecisionExhausted("root of an exact non-monomial series needs a window")
        inv_m = ff_make(field, m).inverse()

        # inverse root r -> r + r(1 - u r^m)/m, then root = u r^(m-1)
        def step_root(y, uu, cur):
            corr = ser_const(field, 1) - ser_mul(uu, _small_pow(y, m))
            return y + ser_scale(ser_mul(y, corr), inv_m)

        inv_root = _one_unit_newton(u, rel, step_root)
        root_u = ser_mul(u, _small_pow(inv_root, m - 1)) if m > 1 else u
        if u.prec is not None:
            root_u = root_u.truncate(u.prec)
        else:
            root_u = root_u.truncate(rel)
    out = ser_scale(root_u, root_c)
    shift = v / m
    return make_series(field, out.level, out.lead + shift, out.step, out.c,
                       None if out.prec is None else out.prec + shift, x.window)


def ser_arith(x: SeriesElem, y: SeriesElem, op: str) -> SeriesElem:
    if op == "add":
        return ser_add(x, y)
    if op == "sub":
        return ser_add(x, -y)
    if op == "mul":
        return ser_mul(x, y)
    if op == "div":
        return ser_mul(x, ser_inv(y))
    raise ValueError(f"unknown operation {op!r}")


def ser_sgn(x: SeriesElem) -> FFElem:
    return x.sgn()


def ser_one_unit_part(lam: SeriesElem, pi: SeriesElem, deg: int | None = None) -> SeriesElem:
    """<lam> = lam * pi^deg / sgn(lam), deg = deg_T(lam)."""
    if pi.val != 1:
        raise ValueError("uniformizer must have valuation 1")
    if lam.lead is None:
        raise PrecisionExhausted("one-unit part of zero")
    if deg is None:
        deg = -lam.lead
    if deg != -lam.lead or frac(deg).denominator != 1:
        raise ValueError("deg must equal the T-degree of lam")
    out = ser_mul(lam, ser_pow(pi, int(deg))) if deg >= 0 else ser_mul(lam, ser_pow(ser_inv(pi), -int(deg)))
    return ser_scale(out, lam.sgn().inverse())


def ser_sqrt_disc(a: SeriesElem, b: FFElem, window=None) -> SeriesElem:
    """sqrt(a^2 + 4b) with sign 1; equals a in characteristic 2."""
    field = a.field
    if field.p == 2:
        return a
    disc = ser_mul(a, a) + ser_const(field, ff_make(field, 4) * b)
    disc = disc.with_window(window) if window is not None else disc
    return ser_nth_root(disc, 2)


def diff_val(x: SeriesElem, y: SeriesElem):
    """Valuation of x - y (a lower bound when the difference vanishes at precision)."""
    return (x - y).val


def ser_val(x: SeriesElem):
    return x.val


def ser_trace_conj(x: SeriesElem) -> SeriesElem:
    """x^q applied only to coefficients (the F_{q^2}/F_q conjugate)."""
    if x.level == "base" or x.lead is None:
        return x
    arr = (x.field.conj_matrix() @ x.c) % x.field.p
    return make_series(x.field, x.level, x.lead, x.step, arr, x.prec, x.window)


# -- text form --------------------------------------------------------------

def _exp_text(v: Fraction) -> str:
    e = -v
    return str(e.numerator) if e.denominator == 1 else f"{e.numerator}/{e.denominator}"


def ser_format(x: SeriesElem) -> str:
    parts = [f"{c.text()}*T^({_exp_text(v)})" for v, c in x.terms()]
    if x.prec is not None:
        parts.append(f"O(T^({_exp_text(x.prec)}))")
    return " + ".join(parts) if parts else "0"


_TERM = re.compile(r"^(?:(\(\s*[-\d,\s]+\)|-?\d+)\s*\*?\s*)?(?:T(?:\^\(?\s*(-?\d+(?:/\d+)?)\s*\)?)?)?$")


def ser_parse(text: str, field: FieldSpec, window=None) -> SeriesElem:
    s = text.strip()
    if s == "0":
        return zero_series(field)
    prec = None
    terms = []
    for raw in s.split("+"):
        t = raw.strip()
        if not t:
            raise ValueError(f"empty term in {text!r}")
        m = re.match(r"^O\(\s*T\^\(?\s*(-?\d+(?:/\d+)?)\s*\)?\s*\)$", t)
        if m:
            prec = -Fraction(m.group(1))
            continue
        m = _TERM.match(t)
        if not m or (m.group(1) is None and "T" not in t):
            raise ValueError(f"cannot parse term {t!r}")
        ctext, etext = m.group(1), m.group(2)
        if ctext is None:
            coef = ff_make(field, 1)
        elif ctext.startswith("("):
            coef = ff_make(field, [int(c) for c in ctext.strip("()").split(",")])
        else:
            coef = ff_make(field, int(ctext))
        if "T" in t:
            exp = Fraction(etext) if etext is not None else Fraction(1)
        else:
            exp = Fraction(0)
        terms.append((-exp, coef))
    out = zero_series(field, prec)
    acc = [ser_monomial(field, c, -v) for v, c in terms]
    for t in acc:
        out = ser_add(out, t)
    if prec is not None:
        out = out.truncate(prec)
    return out.with_window(window) if window is not None else out


# -- graded F_q-linear reduction ---------------------------------------------

def _echelon(vectors: Sequence[SeriesElem]):
    """Pivots keyed by leading valuation: (vector, combination over the inputs)."""
    field = vectors[0].field if vectors else None
    pivots: dict = {}
    n = len(vectors)
    for idx, v in enumerate(vectors):
        comb = [ff_make(field, 0)] * n
        comb[idx] = ff_make(field, 1)
        cur = v
        while cur.lead is not None and cur.lead in pivots:
            pv, pc = pivots[cur.lead]
            c = cur.sgn() / pv.sgn()
            cur = cur - ser_scale(pv, c)
            comb = [a - c * b for a, b in zip(comb, pc)]
        if cur.lead is not None:
            pivots[cur.lead] = (cur, comb)
    return pivots


def graded_reduce(vectors: Sequence[SeriesElem], target: SeriesElem, window=None, full: bool = True):
    """Reduce target by F_q-combinations of vectors, greedily by degree.

    Returns (remainder, combination) with target = remainder + sum comb[k] * vectors[k].
    full=False stops at the first leading term no vector can cancel (the distance to the span);
    full=True keeps clearing every reducible term above `window` (a valuation bound).
    """
    field = target.field
    n = len(vectors)
    comb = [ff_make(field, 0)] * n
    if not vectors:
        return target, comb
    pivots = _echelon(vectors)
    r = target
    cursor = None
    while r.lead is not None:
        # next reducible term after the cursor
        cand = None
        for v, ci in r.nonzero_terms():
            if cursor is not None and v <= cursor:
                continue
            if window is not None and v >= window:
                break
            if v in pivots:
                cand = (v, ci)
                break
            if not full:
                return r, [x.demote() for x in comb]
        if cand is None:
            break
        v, ci = cand
        c = ff_make(field, field.coords(ci)).demote()
        pv, pc = pivots[v]
        k = c / pv.sgn()
        r = r - ser_scale(pv, k)
        comb = [a + k * b for a, b in zip(comb, pc)]
        cursor = v
    return r, [x.demote() for x in comb]
