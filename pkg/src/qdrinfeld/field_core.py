"""Finite fields F_q = F_p[x]/(modulus) and the tower F_{q^2} = F_q[w]/(ext2).

Elements are encoded by an integer index: the coordinates of x^i w^j (k = i + n*j)
are the base-p digits of the index. Elements of F_q are exactly the indices < q.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

MAX_Q = 64

# fixed base moduli for the small non-prime fields, low degree first
DEFAULT_MODULI = {
    (2, 2): (1, 1, 1),
    (2, 3): (1, 1, 0, 1),
    (3, 2): (1, 0, 1),
    (2, 4): (1, 1, 0, 0, 1),
}


class FieldError(ValueError):
    pass


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    return all(p % k for k in range(2, int(p ** 0.5) + 1))


def _prime_factors(m: int) -> list[int]:
    out, k = [], 2
    while k * k <= m:
        if m % k == 0:
            out.append(k)
            while m % k == 0:
                m //= k
        k += 1
    if m > 1:
        out.append(m)
    return out


def _polymod_fp(a: list[int], m: Sequence[int], p: int) -> list[int]:
    a = [c % p for c in a]
    dm = len(m) - 1
    inv_lead = pow(m[-1], p - 2, p)
    for i in range(len(a) - 1, dm - 1, -1):
        c = a[i] * inv_lead % p
        if c:
            for j in range(dm + 1):
                a[i - dm + j] = (a[i - dm + j] - c * m[j]) % p
    a = a[:dm] + [0] * max(0, dm - len(a))
    return a


def _irreducible_fp(m: Sequence[int], p: int) -> bool:
    """Exhaustive search for monic factors of degree <= deg/2."""
    n = len(m) - 1
    if n <= 0 or m[-1] % p != 1:
        return False
    for k in range(1, n // 2 + 1):
        for low in itertools.product(range(p), repeat=k):
            cand = list(low) + [1]
            if not any(_polymod_fp(list(m), cand, p)):
                return False
    return True


def _search_irreducible_fp(p: int, n: int) -> tuple[int, ...]:
    for low in itertools.product(range(p), repeat=n):
        cand = tuple(reversed(low)) + (1,)
        if _irreducible_fp(cand, p):
            return cand
    raise FieldError(f"no irreducible polynomial of degree {n} over F_{p}")


@dataclass(frozen=True)
class FieldSpec:
    p: int
    n: int
    modulus: tuple[int, ...]
    ext2_modulus: tuple[int, int, int]

    def __post_init__(self):
        if not is_prime(self.p):
            raise FieldError(f"p={self.p} is not prime")
        if self.n < 1:
            raise FieldError("extension degree must be >= 1")
        if self.p ** self.n > MAX_Q:
            raise FieldError(f"q={self.p ** self.n} exceeds the bound {MAX_Q}")
        mod = tuple(int(c) % self.p for c in self.modulus)
        object.__setattr__(self, "modulus", mod)
        if len(mod) != self.n + 1 or not _irreducible_fp(mod, self.p):
            raise FieldError(f"modulus {list(mod)} is not a monic irreducible of degree {self.n} over F_{self.p}")
        e2 = tuple(int(c) for c in self.ext2_modulus)
        object.__setattr__(self, "ext2_modulus", e2)
        if len(e2) != 3 or e2[2] != 1 or any(not 0 <= c < self.q for c in e2):
            raise FieldError("ext2 modulus must be [c0, c1, 1] with entries in F_q")
        c0, c1 = e2[0], e2[1]
        for r in range(self.q):
            if self.add(self.add(self.mul(r, r), self.mul(c1, r)), c0) == 0:
                raise FieldError(f"ext2 modulus {list(e2)} has the root {r} in F_q")

    # -- sizes ---------------------------------------------------------
    @property
    def q(self) -> int:
        return self.p ** self.n

    @property
    def q2(self) -> int:
        return self.q * self.q

    def dim(self, level: str) -> int:
        return self.n if level == "base" else 2 * self.n

    # -- coordinates ---------------------------------------------------
    def coords(self, idx: int, level: str = "ext2") -> tuple[int, ...]:
        out = []
        for _ in range(self.dim(level)):
            idx, r = divmod(idx, self.p)
            out.append(r)
        return tuple(out)

    def index(self, coords: Sequence[int]) -> int:
        idx = 0
        for c in reversed(list(coords)):
            idx = idx * self.p + int(c) % self.p
        return idx

    @cached_property
    def coord_table(self) -> np.ndarray:
        """(q^2, 2n) array of coordinates of every index."""
        return np.array([self.coords(i) for i in range(self.q2)], dtype=np.int64)

    @cached_property
    def _powers(self) -> np.ndarray:
        return self.p ** np.arange(2 * self.n, dtype=np.int64)

    def indices_of(self, arr: np.ndarray) -> np.ndarray:
        """Indices for a (D, L) coordinate array."""
        D = arr.shape[0]
        return (self._powers[:D, None] * arr).sum(axis=0)

    # -- raw arithmetic on coordinates (used to build tables) ---------
    def _mul_base_coords(self, a, b):
        prod = [0] * (2 * self.n - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    prod[i + j] += x * y
        return _polymod_fp(prod, self.modulus, self.p)

    def _mul_ext_coords(self, a, b):
        n = self.n
        a0, a1, b0, b1 = a[:n], a[n:], b[:n], b[n:]
        m = self._mul_base_coords
        add = lambda u, v: [(x + y) % self.p for x, y in zip(u, v)]
        sub = lambda u, v: [(x - y) % self.p for x, y in zip(u, v)]
        c0 = self.coords(self.ext2_modulus[0], "base")
        c1 = self.coords(self.ext2_modulus[1], "base")
        hh = m(a1, b1)
        # w^2 = -c1 w - c0
        low = sub(m(a0, b0), m(hh, c0))
        high = sub(add(m(a0, b1), m(a1, b0)), m(hh, c1))
        return low + high

    # -- scalar arithmetic on indices ----------------------------------
    @cached_property
    def _add_table(self) -> np.ndarray | None:
        if self.q2 > 1024:
            return None
        ct = self.coord_table
        summed = (ct[:, None, :] + ct[None, :, :]) % self.p
        return (summed * self._powers).sum(axis=2)

    def add(self, a: int, b: int) -> int:
        if self.p == 2:
            return a ^ b
        tab = self._add_table
        if tab is not None:
            return int(tab[a, b])
        ca, cb = self.coords(a), self.coords(b)
        return self.index([(x + y) % self.p for x, y in zip(ca, cb)])

    def neg(self, a: int) -> int:
        if self.p == 2:
            return a
        return self.index([(-x) % self.p for x in self.coords(a)])

    def sub(self, a: int, b: int) -> int:
        return self.add(a, self.neg(b))

    def mul(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        if "exp_table" in self.__dict__:
            return int(self.exp_table[(self.log_table[a] + self.log_table[b]) % (self.q2 - 1)])
        return self.index(self._mul_ext_coords(self.coords(a), self.coords(b)))

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("inverse of zero in a finite field")
        return int(self.exp_table[(-self.log_table[a]) % (self.q2 - 1)])

    def pow(self, a: int, e: int) -> int:
        if a == 0:
            if e < 0:
                raise ZeroDivisionError("negative power of zero")
            return 1 if e == 0 else 0
        return int(self.exp_table[(self.log_table[a] * e) % (self.q2 - 1)])

    def frob(self, a: int, k: int = 1) -> int:
        """a^(q^k)."""
        return self.pow(a, self.q ** (k % 2))

    # -- multiplicative structure --------------------------------------
    @cached_property
    def generator(self) -> int:
        """Least index of full order q^2-1 in F_{q^2}^x."""
        order = self.q2 - 1
        factors = _prime_factors(order)

        def pw(a, e):
            r, base = 1, a
            while e:
                if e & 1:
                    r = self.index(self._mul_ext_coords(self.coords(r), self.coords(base)))
                base = self.index(self._mul_ext_coords(self.coords(base), self.coords(base)))
                e >>= 1
            return r

        for g in range(1, self.q2):
            if all(pw(g, order // r) != 1 for r in factors):
                return g
        raise FieldError("no generator found; ext2 modulus is not irreducible")

    @cached_property
    def exp_table(self) -> np.ndarray:
        g, order = self.generator, self.q2 - 1
        tab = np.zeros(order, dtype=np.int64)
        x = 1
        for k in range(order):
            tab[k] = x
            x = self.index(self._mul_ext_coords(self.coords(x), self.coords(g)))
        return tab

    @cached_property
    def log_table(self) -> np.ndarray:
        tab = np.full(self.q2, -1, dtype=np.int64)
        tab[self.exp_table] = np.arange(self.q2 - 1)
        return tab

    def in_base(self, a: int) -> bool:
        return a < self.q

    def nth_root(self, c: int, m: int) -> int | None:
        """Deterministic m-th root in F_{q^2}: g^k with the least k; None if none."""
        if c == 0:
            return 0
        order = self.q2 - 1
        lc = int(self.log_table[c])
        for k in range(order):
            if (k * m - lc) % order == 0:
                return int(self.exp_table[k])
        return None

    @cached_property
    def base_tables(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(add, mul, neg) tables for F_q indexed by element index."""
        q = self.q
        add = np.array([[self.add(a, b) for b in range(q)] for a in range(q)], dtype=np.int64)
        mul = np.array([[self.mul(a, b) for b in range(q)] for a in range(q)], dtype=np.int64)
        neg = np.array([self.neg(a) for a in range(q)], dtype=np.int64)
        return add, mul, neg

    # -- linear-algebra views used by series arithmetic ---------------
    @cached_property
    def _tensors(self) -> dict:
        return {}

    def mult_tensor(self, level: str) -> np.ndarray:
        """R[k1, k2, :] = coordinates of e_k1 * e_k2 at the given level."""
        key = ("R", level)
        if key not in self._tensors:
            D = self.dim(level)
            R = np.zeros((D, D, D), dtype=np.int64)
            for k1 in range(D):
                for k2 in range(D):
                    e1 = [0] * (2 * self.n)
                    e2 = [0] * (2 * self.n)
                    e1[k1] = 1
                    e2[k2] = 1
                    R[k1, k2] = self._mul_ext_coords(e1, e2)[:D]
            self._tensors[key] = R
        return self._tensors[key]

    def scalar_matrix(self, c: int, level: str) -> np.ndarray:
        """Matrix M with coords(c*y) = M @ coords(y)."""
        key = ("M", c, level)
        if key not in self._tensors:
            D = self.dim(level)
            M = np.zeros((D, D), dtype=np.int64)
            for k in range(D):
                M[:, k] = self.coords(self.mul(c, self.p ** k))[:D]
            self._tensors[key] = M
        return self._tensors[key]

    def conj_matrix(self) -> np.ndarray:
        """Matrix of y -> y^q on F_{q^2} coordinates."""
        key = ("conj",)
        if key not in self._tensors:
            D = 2 * self.n
            M = np.zeros((D, D), dtype=np.int64)
            for k in range(D):
                M[:, k] = self.coords(self.frob(self.p ** k))
            self._tensors[key] = M
        return self._tensors[key]

    def fp_root_matrix(self, level: str) -> np.ndarray:
        """Matrix of y -> y^p on coordinates (F_p-linear)."""
        key = ("p", level)
        if key not in self._tensors:
            D = self.dim(level)
            M = np.zeros((D, D), dtype=np.int64)
            for k in range(D):
                M[:, k] = self.coords(self.pow(self.p ** k, self.p))[:D]
            self._tensors[key] = M
        return self._tensors[key]

    # -- config text ----------------------------------------------------
    def to_config(self) -> str:
        mod = ",".join(str(c) for c in self.modulus)
        e2 = ",".join(str(c) for c in self.ext2_modulus)
        return f"p={self.p} n={self.n} modulus=[{mod}] ext2=[{e2}]"

    @classmethod
    def from_config(cls, text: str) -> "FieldSpec":
        entries = dict(re.findall(r"(\w+)=(\[[^\]]*\]|\S+)", text))
        if "p" not in entries:
            raise FieldError("field block needs p=")
        p = int(entries["p"])
        n = int(entries.get("n", 1))
        parse = lambda s: tuple(int(x) for x in s.strip("[]").split(",") if x.strip())
        mod = parse(entries["modulus"]) if "modulus" in entries else None
        e2 = parse(entries["ext2"]) if "ext2" in entries else None
        return make_field(p, n, mod, e2)

    def __repr__(self) -> str:
        return f"FieldSpec({self.to_config()})"


def make_field(p: int, n: int = 1, modulus: Sequence[int] | None = None,
               ext2_modulus: Sequence[int] | None = None) -> FieldSpec:
    """FieldSpec with default moduli where none are given."""
    if not is_prime(p):
        raise FieldError(f"p={p} is not prime")
    if p ** n > MAX_Q:
        raise FieldError(f"q={p ** n} exceeds the bound {MAX_Q}")
    if modulus is None:
        modulus = DEFAULT_MODULI.get((p, n)) or ((0, 1) if n == 1 else _search_irreducible_fp(p, n))
    if ext2_modulus is None:
        # smallest x^2 + c1 x + c0 without roots in F_q; probe with a provisional spec
        probe = FieldSpec.__new__(FieldSpec)
        object.__setattr__(probe, "p", p)
        object.__setattr__(probe, "n", n)
        object.__setattr__(probe, "modulus", tuple(modulus))
        object.__setattr__(probe, "ext2_modulus", (0, 0, 1))
        q = p ** n
        found = None
        for c1 in range(q):
            for c0 in range(1, q):
                if all(probe.add(probe.add(probe.mul(r, r), probe.mul(c1, r)), c0) for r in range(q)):
                    found = (c0, c1, 1)
                    break
            if found:
                break
        ext2_modulus = found
    return FieldSpec(p, n, tuple(modulus), tuple(ext2_modulus))


def field_for_q(q: int) -> FieldSpec:
    for p in range(2, q + 1):
        if is_prime(p):
            n, m = 0, q
            while m % p == 0:
                m //= p
                n += 1
            if m == 1 and n:
                return make_field(p, n)
            if n:
                break
    raise FieldError(f"q={q} is not a prime power")


@dataclass(frozen=True)
class FFElem:
    spec: FieldSpec
    level: str
    value: int

    @property
    def coeffs(self) -> tuple[int, ...]:
        return self.spec.coords(self.value, self.level)

    def _lift(self, other) -> "FFElem":
        if isinstance(other, FFElem):
            return other
        return ff_make(self.spec, other)

    def _level(self, other: "FFElem") -> str:
        return "ext2" if "ext2" in (self.level, other.level) else "base"

    def __add__(self, other):
        o = self._lift(other)
        return FFElem(self.spec, self._level(o), self.spec.add(self.value, o.value))

    __radd__ = __add__

    def __neg__(self):
        return FFElem(self.spec, self.level, self.spec.neg(self.value))

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        o = self._lift(other)
        return FFElem(self.spec, self._level(o), self.spec.mul(self.value, o.value))

    __rmul__ = __mul__

    def inverse(self) -> "FFElem":
        return FFElem(self.spec, self.level, self.spec.inv(self.value))

    def __truediv__(self, other):
        return self * self._lift(other).inverse()

    def __pow__(self, e: int):
        return FFElem(self.spec, self.level, self.spec.pow(self.value, e))

    def frobenius(self, k: int = 1) -> "FFElem":
        return FFElem(self.spec, self.level, self.spec.frob(self.value, k))

    def is_zero(self) -> bool:
        return self.value == 0

    def in_base(self) -> bool:
        return self.value < self.spec.q

    def demote(self) -> "FFElem":
        return FFElem(self.spec, "base", self.value) if self.in_base() else self

    def __eq__(self, other):
        if isinstance(other, int):
            other = ff_make(self.spec, other)
        if not isinstance(other, FFElem):
            return NotImplemented
        return self.spec == other.spec and self.value == other.value

    def __hash__(self):
        return hash((self.spec, self.value))

    def text(self) -> str:
        """Integer when in F_p, coordinate tuple otherwise."""
        if self.value < self.spec.p:
            return str(self.value)
        return "(" + ",".join(str(c) for c in self.coeffs) + ")"

    def __repr__(self) -> str:
        return self.text()

    def __int__(self) -> int:
        return self.value


def ff_make(spec: FieldSpec, value, level: str | None = None) -> FFElem:
    """Element from an integer (reduced mod p), a coefficient sequence, or 'x'/'w'."""
    if isinstance(value, FFElem):
        return value
    if isinstance(value, str):
        s = value.strip()
        if s == "x":
            coords = [0, 1] if spec.n > 1 else [(-spec.modulus[0]) % spec.p]
        elif s == "w":
            coords = [0] * spec.n + [1]
        else:
            return ff_make(spec, int(s), level)
    elif isinstance(value, (int, np.integer)):
        coords = [int(value) % spec.p]
    else:
        coords = [int(c) for c in value]
        if len(coords) > 2 * spec.n:
            raise FieldError(f"too many coefficients for F_{spec.q}^2: {coords}")
    idx = spec.index(coords)
    lev = level or ("base" if idx < spec.q and len(coords) <= spec.n else "ext2")
    if lev == "base" and idx >= spec.q:
        raise FieldError("value does not lie in F_q")
    return FFElem(spec, lev, idx)


def ff_root_of_unity(spec: FieldSpec, order: int) -> FFElem:
    """g^((q^2-1)/order) for the canonical generator g: the least power of exact order."""
    if order <= 0 or (spec.q2 - 1) % order:
        raise FieldError(f"order {order} does not divide q^2-1 = {spec.q2 - 1}")
    val = spec.pow(spec.generator, (spec.q2 - 1) // order)
    return ff_make(spec, spec.coords(val)).demote()


def ff_prod_nonzero(spec: FieldSpec) -> FFElem:
    acc = 1
    for c in range(1, spec.q):
        acc = spec.mul(acc, c)
    return FFElem(spec, "base", acc)


def ff_order(x: FFElem) -> int:
    if x.is_zero():
        raise ZeroDivisionError("zero has no multiplicative order")
    order = x.spec.q2 - 1
    k = 1
    y = x
    while y.value != 1:
        y = y * x
        k += 1
        if k > order:
            break
    return k


def ff_elements(spec: FieldSpec, level: str = "base") -> list[FFElem]:
    size = spec.q if level == "base" else spec.q2
    return [FFElem(spec, level, i) for i in range(size)]
