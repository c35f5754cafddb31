"""Division polynomials in x alone, and integral division of points."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .arith import integer_roots
from .curves import WeierstrassCurve
from .points import Point, scalar_mul

DIVPOLY_BUDGET = 50

Poly = list[int]  # ascending coefficients


class DivPolyBudgetError(ValueError):
    pass


def _trim(p: Poly) -> Poly:
    while len(p) > 1 and p[-1] == 0:
        p.pop()
    return p


def padd(a: Poly, b: Poly) -> Poly:
    if len(a) < len(b):
        a, b = b, a
    out = list(a)
    for i, c in enumerate(b):
        out[i] += c
    return _trim(out)


def psub(a: Poly, b: Poly) -> Poly:
    return padd(a, [-c for c in b])


def _pack(p: Poly, width: int) -> int:
    nbytes = width // 8
    pos = b"".join((c if c > 0 else 0).to_bytes(nbytes, "little") for c in p)
    neg = b"".join((-c if c < 0 else 0).to_bytes(nbytes, "little") for c in p)
    return int.from_bytes(pos, "little") - int.from_bytes(neg, "little")


def _unpack(value: int, width: int, count: int) -> Poly:
    sign = -1 if value < 0 else 1
    value = abs(value)
    nbytes = width // 8
    data = value.to_bytes(count * nbytes + nbytes, "little")
    full, half = 1 << width, 1 << (width - 1)
    out, carry = [], 0
    for i in range(count):
        c = int.from_bytes(data[i * nbytes : (i + 1) * nbytes], "little") + carry
        carry = 0
        if c >= half:
            c -= full
            carry = 1
        out.append(sign * c)
    return out


def pmul(a: Poly, b: Poly) -> Poly:
    """Product by Kronecker substitution: pack into one big integer, multiply, unpack."""
    if not any(a) or not any(b):
        return [0]
    if len(a) * len(b) <= 64:
        out = [0] * (len(a) + len(b) - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    out[i + j] += x * y
        return _trim(out)
    bound = max(abs(c) for c in a).bit_length() + max(abs(c) for c in b).bit_length()
    bound += min(len(a), len(b)).bit_length() + 2
    width = -(-bound // 8) * 8
    prod = _pack(a, width) * _pack(b, width)
    return _trim(_unpack(prod, width, len(a) + len(b) - 1))


def pscale(a: Poly, k: int) -> Poly:
    return _trim([k * c for c in a])


@dataclass(frozen=True)
class DivPolyPair:
    """x([m]P) = phi(x) / psi_sq(x)."""

    m: int
    psi_sq: Poly
    phi: Poly


class _Reduced:
    """f_m = psi_m for odd m and psi_m / psi_2 for even m, all polynomials in x."""

    def __init__(self, curve: WeierstrassCurve):
        b2, b4, b6, b8 = curve.b2, curve.b4, curve.b6, curve.b8
        self.F = [b6, 2 * b4, b2, 4]
        self.F2 = pmul(self.F, self.F)
        self.cache: dict[int, Poly] = {
            0: [0],
            1: [1],
            2: [1],
            3: [b8, 3 * b6, 3 * b4, b2, 3],
            4: [b4 * b8 - b6 * b6, b2 * b8 - b4 * b6, 10 * b8, 10 * b6, 5 * b4, b2, 2],
        }

    def __call__(self, k: int) -> Poly:
        if k in self.cache:
            return self.cache[k]
        m = k // 2
        if k % 2:
            left = pmul(self(m + 2), pmul(self(m), pmul(self(m), self(m))))
            right = pmul(self(m - 1), pmul(self(m + 1), pmul(self(m + 1), self(m + 1))))
            if m % 2 == 0:
                left = pmul(self.F2, left)
            else:
                right = pmul(self.F2, right)
            res = psub(left, right)
        else:
            inner = psub(
                pmul(self(m + 2), pmul(self(m - 1), self(m - 1))),
                pmul(self(m - 2), pmul(self(m + 1), self(m + 1))),
            )
            res = pmul(self(m), inner)
        self.cache[k] = res
        return res


def division_polys(curve: WeierstrassCurve, m: int, budget: int = DIVPOLY_BUDGET) -> DivPolyPair:
    if m < 1:
        raise ValueError("m must be at least 1")
    if m > budget:
        raise DivPolyBudgetError(f"m = {m} exceeds the division polynomial budget {budget}")
    f = _Reduced(curve)
    fm = f(m)
    psi_sq = pmul(fm, fm)
    neighbours = pmul(f(m - 1), f(m + 1))
    if m % 2 == 0:
        psi_sq = pmul(f.F, psi_sq)
    else:
        neighbours = pmul(f.F, neighbours)
    phi = psub([0] + psi_sq, neighbours)
    return DivPolyPair(m, psi_sq, phi)


def evaluate(p: Poly, x) -> Fraction:
    acc = Fraction(0)
    for c in reversed(p):
        acc = acc * x + c
    return acc


def _points_with_x(curve: WeierstrassCurve, x: int) -> list[Point]:
    a1, a2, a3, a4, a6 = curve.ainvs
    linear = a1 * x + a3
    disc = linear * linear + 4 * (x**3 + a2 * x * x + a4 * x + a6)
    if disc < 0:
        return []
    root = math.isqrt(disc)
    if root * root != disc:
        return []
    ys = {(-linear + root), (-linear - root)}
    return [Point(x, y // 2) for y in sorted(ys) if y % 2 == 0]


def divide_point(curve: WeierstrassCurve, Q: Point, m: int, budget: int = DIVPOLY_BUDGET) -> Optional[Point]:
    """An integral P with [m]P = Q, or None.

    Q must be integral; on an integral model any such P is integral, since x(P)
    is then a root of the monic integer polynomial phi_m - x(Q) psi_m^2.
    """
    if Q.is_infinity or Q.x.denominator != 1 or Q.y.denominator != 1:
        raise ValueError("divide_point expects a finite integral point")
    if m == 1:
        return Q
    pair = division_polys(curve, m, budget)
    target = psub(pair.phi, pscale(pair.psi_sq, int(Q.x)))
    for x0 in integer_roots(target):
        for P in _points_with_x(curve, x0):
            if scalar_mul(curve, m, P) == Q:
                return P
    return None
