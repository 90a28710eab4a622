"""Independent reference arithmetic for frozen test values: Laurent series in 1/T over a prime
field as {exponent: coefficient} dicts, truncated below -prec. Shares no code with qdrinfeld."""
from __future__ import annotations

import itertools


def trim(x: dict, p: int, prec: int) -> dict:
    return {e: c % p for e, c in x.items() if c % p and e >= -prec}


def mul(x: dict, y: dict, p: int, prec: int) -> dict:
    out: dict = {}
    for (e1, c1), (e2, c2) in itertools.product(x.items(), y.items()):
        if e1 + e2 >= -prec:
            out[e1 + e2] = out.get(e1 + e2, 0) + c1 * c2
    return trim(out, p, prec)


def add(x: dict, y: dict, p: int, prec: int) -> dict:
    out = dict(x)
    for e, c in y.items():
        out[e] = out.get(e, 0) + c
    return trim(out, p, prec)


def inv(x: dict, p: int, prec: int) -> dict:
    """Long division of 1 by x."""
    top = max(x)
    lead_inv = pow(x[top], p - 2, p)
    rem = {0: 1}
    out: dict = {}
    for e in range(-top, -prec - top - 1, -1):
        c = rem.get(e + top, 0) % p
        if c:
            k = c * lead_inv % p
            out[e] = k
            rem = add(rem, {e + ex: -k * cx for ex, cx in x.items()}, p, prec + 2 * abs(top) + 2)
    return trim(out, p, prec)


def fundamental_unit(p: int, a: dict, b: int, prec: int) -> dict:
    """Root of X^2 - aX - b with a pole at infinity: iterate f -> a + b/f."""
    f = dict(a)
    for _ in range(prec + 2):
        f = add(a, {e: b * c for e, c in inv(f, p, prec + 4).items()}, p, prec)
    return f


def sqrt_monic_even(x: dict, p: int, prec: int) -> dict:
    """Square root with leading coefficient 1 of a monic series of even degree (p odd), solved
    coefficient by coefficient from the top."""
    top = max(x)
    half = top // 2
    y = {half: 1}
    inv2 = pow(2, p - 2, p)
    for e in range(half - 1, -prec - 1, -1):
        sq = mul(y, y, p, prec + 2 * abs(half) + 2)
        # coefficient of T^(half + e) in x - y^2 determines y_e via 2 y_half y_e
        need = (x.get(half + e, 0) - sq.get(half + e, 0)) % p
        if need:
            y[e] = need * inv2 % p
    return trim(y, p, prec)


def poly_eval_list(coeffs: list[int]) -> dict:
    return {i: c for i, c in enumerate(coeffs) if c}


def element_order(mul_fn, one, x) -> int:
    k, y = 1, x
    while y != one:
        y = mul_fn(y, x)
        k += 1
    return k
