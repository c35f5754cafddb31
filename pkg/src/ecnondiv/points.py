"""Group law on rational points of a Weierstrass model, and its reductions mod p."""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from .arith import Factorization, factorize, sqrt_mod
from .curves import WeierstrassCurve


class BadReductionError(ValueError):
    pass


class PointBudgetError(RuntimeError):
    pass


@dataclass(frozen=True)
class Point:
    x: Optional[Fraction] = None
    y: Optional[Fraction] = None

    def __post_init__(self):
        if (self.x is None) != (self.y is None):
            raise ValueError("a finite point needs both coordinates")
        if self.x is not None:
            object.__setattr__(self, "x", Fraction(self.x))
            object.__setattr__(self, "y", Fraction(self.y))

    @property
    def is_infinity(self) -> bool:
        return self.x is None

    def __repr__(self):
        if self.is_infinity:
            return "Point(O)"
        return f"Point({self.x}, {self.y})"


INFINITY = Point()


def on_curve(curve: WeierstrassCurve, P: Point) -> bool:
    return P.is_infinity or curve.contains(P.x, P.y)


def negate(curve: WeierstrassCurve, P: Point) -> Point:
    if P.is_infinity:
        return P
    return Point(P.x, -P.y - curve.a1 * P.x - curve.a3)


def _chord_tangent(ainvs, x1, y1, x2, y2, div):
    """Shared slope/intercept formulas; returns None for the point at infinity."""
    a1, a2, a3, a4, a6 = ainvs
    if x1 == x2:
        if y1 + y2 + a1 * x2 + a3 == 0:
            return None
        den = 2 * y1 + a1 * x1 + a3
        lam = div(3 * x1 * x1 + 2 * a2 * x1 + a4 - a1 * y1, den)
        nu = div(-x1 * x1 * x1 + a4 * x1 + 2 * a6 - a3 * y1, den)
    else:
        lam = div(y2 - y1, x2 - x1)
        nu = div(y1 * x2 - y2 * x1, x2 - x1)
    x3 = lam * lam + a1 * lam - a2 - x1 - x2
    y3 = -(lam + a1) * x3 - nu - a3
    return x3, y3


def add(curve: WeierstrassCurve, P: Point, Q: Point) -> Point:
    if P.is_infinity:
        return Q
    if Q.is_infinity:
        return P
    r = _chord_tangent(curve.ainvs, P.x, P.y, Q.x, Q.y, lambda a, b: a / b)
    return INFINITY if r is None else Point(*r)


def scalar_mul(curve: WeierstrassCurve, k: int, P: Point) -> Point:
    if k < 0:
        return scalar_mul(curve, -k, negate(curve, P))
    result, base = INFINITY, P
    while k:
        if k & 1:
            result = add(curve, result, base)
        k >>= 1
        if k:
            base = add(curve, base, base)
    return result


def is_integral(P: Point) -> bool:
    return not P.is_infinity and P.x.denominator == 1 and P.y.denominator == 1


# ---------------------------------------------------------------------------
# reduction modulo p

FpPoint = Optional[tuple[int, int]]  # None is the point at infinity


class FpCurve:
    """Reduction of an integral model modulo a prime of good reduction."""

    def __init__(self, curve: WeierstrassCurve, p: int):
        if curve.discriminant % p == 0:
            raise BadReductionError(f"p = {p} divides the discriminant")
        self.p = p
        self.ainvs = tuple(a % p for a in curve.ainvs)
        self.b2, self.b4, self.b6 = curve.b2 % p, curve.b4 % p, curve.b6 % p
        self._counted: Optional[tuple[int, int]] = None

    def _div(self, a, b):
        return a * pow(b, -1, self.p)

    def contains(self, P: FpPoint) -> bool:
        if P is None:
            return True
        a1, a2, a3, a4, a6 = self.ainvs
        x, y = P
        return (y * y + a1 * x * y + a3 * y - x**3 - a2 * x * x - a4 * x - a6) % self.p == 0

    def neg(self, P: FpPoint) -> FpPoint:
        if P is None:
            return None
        a1, _, a3, _, _ = self.ainvs
        return (P[0], (-P[1] - a1 * P[0] - a3) % self.p)

    def add(self, P: FpPoint, Q: FpPoint) -> FpPoint:
        if P is None:
            return Q
        if Q is None:
            return P
        p = self.p
        x1, y1 = P
        x2, y2 = Q
        if x1 == x2 and (y1 + y2 + self.ainvs[0] * x2 + self.ainvs[2]) % p == 0:
            return None
        r = _chord_tangent(self.ainvs, x1, y1, x2, y2, self._div)
        return (r[0] % p, r[1] % p)

    def mul(self, k: int, P: FpPoint) -> FpPoint:
        if k < 0:
            k, P = -k, self.neg(P)
        result, base = None, P
        while k:
            if k & 1:
                result = self.add(result, base)
            k >>= 1
            if k:
                base = self.add(base, base)
        return result

    def lift_x(self, x: int) -> list[tuple[int, int]]:
        """All points with the given abscissa."""
        p = self.p
        a1, a2, a3, a4, a6 = self.ainvs
        if p == 2:
            rhs = (x**3 + a2 * x * x + a4 * x + a6) % 2
            return [(x, y) for y in (0, 1) if (y * y + a1 * x * y + a3 * y - rhs) % 2 == 0]
        F = (4 * x**3 + self.b2 * x * x + 2 * self.b4 * x + self.b6) % p
        Y = sqrt_mod(F, p)
        if Y is None:
            return []
        inv2 = (p + 1) // 2
        ys = {(Y - a1 * x - a3) * inv2 % p, (-Y - a1 * x - a3) * inv2 % p}
        return [(x, y) for y in sorted(ys)]

    def random_point(self, rng: random.Random) -> tuple[int, int]:
        while True:
            pts = self.lift_x(rng.randrange(self.p))
            if pts:
                return rng.choice(pts)

    def count_and_two_torsion(self) -> tuple[int, int]:
        """Group order and the number of affine points with 2P = O."""
        if self._counted is None:
            self._counted = self._count()
        return self._counted

    def _count(self) -> tuple[int, int]:
        p = self.p
        if p == 2:
            pts = [P for x in (0, 1) for P in self.lift_x(x)]
            return 1 + len(pts), sum(1 for P in pts if self.add(P, P) is None)
        x = np.arange(p, dtype=np.int64)
        F = (4 * x) % p
        F = (F + self.b2) * x % p
        F = (F + 2 * self.b4) * x % p
        F = (F + self.b6) % p
        squares = np.zeros(p, dtype=bool)
        squares[(x * x) % p] = True
        zeros = int(np.count_nonzero(F == 0))
        nonzero_squares = int(np.count_nonzero(squares[F])) - zeros
        return 1 + zeros + 2 * nonzero_squares, zeros


def reduce_mod_p(curve: WeierstrassCurve, P: Point, p: int) -> FpPoint:
    if curve.discriminant % p == 0:
        raise BadReductionError(f"p = {p} divides the discriminant")
    if P.is_infinity:
        return None
    if P.x.denominator % p == 0 or P.y.denominator % p == 0:
        # p-adically close to O: the reduction is the point at infinity
        return None
    return (
        P.x.numerator * pow(P.x.denominator, -1, p) % p,
        P.y.numerator * pow(P.y.denominator, -1, p) % p,
    )


@dataclass
class FpGroupInfo:
    p: int
    order: int
    exponent: int
    curve: FpCurve
    order_factorization: Factorization

    @property
    def d1(self) -> int:
        """E(F_p) = Z/d1 x Z/d2 with d1 | d2 and d2 the exponent."""
        return self.order // self.exponent


NAIVE_COUNT_LIMIT = 10**6


def _sylow_exponent(Ep: FpCurve, N: int, q: int, c: int) -> int:
    """Exact exponent (as a power of q) of the q-Sylow subgroup, by generating it.

    Random points projected into the Sylow subgroup are added to a subgroup H until
    |H| equals q^c, so the generators found span the whole q-part.
    """
    size = q**c
    cofactor = N // size
    rng = random.Random(Ep.p * 1_000_003 + q)
    H = {None}
    best = 0
    while len(H) < size:
        g = Ep.mul(cofactor, Ep.random_point(rng))
        if g in H:
            continue
        order_exp, h = 0, g
        while h is not None:
            h = Ep.mul(q, h)
            order_exp += 1
        best = max(best, order_exp)
        coset_rep, new = g, set(H)
        while coset_rep not in H:
            new.update(Ep.add(h, coset_rep) for h in H)
            coset_rep = Ep.add(coset_rep, g)
        H = new
    return best


def fp_group_info(
    curve: WeierstrassCurve, p: int, limit: int = NAIVE_COUNT_LIMIT, reduced: Optional[FpCurve] = None
) -> FpGroupInfo:
    """Order of E(F_p) by counting points, and the exact group exponent.

    The q-part of E(F_p) can only be non-cyclic when q^2 | N and q | p - 1; for
    q = 2 also the full 2-torsion must be rational.  Only those parts are
    resolved by generating the Sylow subgroup.
    """
    if p > limit:
        raise PointBudgetError(f"p = {p} is above the naive counting limit {limit}")
    Ep = reduced if reduced is not None else FpCurve(curve, p)
    N, two_torsion = Ep.count_and_two_torsion()
    fac = factorize(N)
    exponent = N
    for q, c in fac:
        if c < 2 or (p - 1) % q != 0:
            continue
        if q == 2 and p != 2 and two_torsion < 3:
            continue
        b = _sylow_exponent(Ep, N, q, c)
        exponent //= q ** (c - b)
    return FpGroupInfo(p, N, exponent, Ep, fac)


def fp_point_order(P: FpPoint, group: FpGroupInfo) -> int:
    if P is None:
        return 1
    order = group.exponent
    for q, _ in factorize(order):
        while order % q == 0 and group.curve.mul(order // q, P) is None:
            order //= q
    return order
