"""Tate's algorithm over Q_p: Kodaira symbol, Tamagawa number, minimal discriminant."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce

from .arith import factorize, legendre, vp
from .curves import WeierstrassCurve

GOOD = "good"
SPLIT = "multiplicative-split"
NONSPLIT = "multiplicative-nonsplit"
ADDITIVE = "additive"


@dataclass(frozen=True)
class LocalReduction:
    p: int
    kodaira: str
    tamagawa: int
    v_min_delta: int
    reduction_kind: str
    u_exponent: int = 0  # number of u = p rescalings needed to reach a minimal model
    minimal_ainvs: tuple[int, int, int, int, int] | None = None


def _rst(ainvs, r=0, s=0, t=0):
    """Coordinates x = x' + r, y = y' + s x' + t."""
    a1, a2, a3, a4, a6 = ainvs
    return (
        a1 + 2 * s,
        a2 - s * a1 + 3 * r - s * s,
        a3 + r * a1 + 2 * t,
        a4 - s * a3 + 2 * r * a2 - (t + r * s) * a1 + 3 * r * r - 2 * s * t,
        a6 + r * a4 + r * r * a2 + r**3 - t * a3 - t * t - r * t * a1,
    )


def _poly_mod(coeffs, p):
    out = [c % p for c in coeffs]
    while len(out) > 1 and out[-1] == 0:
        out.pop()
    return out


def _polymulmod(a, b, f, p):
    prod = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                prod[i + j] = (prod[i + j] + x * y) % p
    return _polyremmod(prod, f, p)


def _polyremmod(a, f, p):
    a = list(a)
    inv = pow(f[-1], -1, p)
    while len(a) >= len(f):
        c = a[-1] * inv % p
        if c:
            shift = len(a) - len(f)
            for i, x in enumerate(f):
                a[shift + i] = (a[shift + i] - c * x) % p
        a.pop()
    while len(a) > 1 and a[-1] == 0:
        a.pop()
    return a or [0]


def _polygcdmod(a, b, p):
    a, b = _poly_mod(a, p), _poly_mod(b, p)
    while any(b):
        a, b = b, _polyremmod(a, b, p)
    return a


def count_roots_mod(coeffs: list[int], p: int) -> int:
    """Number of distinct roots in F_p of a polynomial (ascending coefficients)."""
    f = _poly_mod(coeffs, p)
    deg = len(f) - 1
    if deg <= 0:
        return 0
    if p <= 50:
        return sum(1 for x in range(p) if sum(c * pow(x, i, p) for i, c in enumerate(f)) % p == 0)
    if deg == 1:
        return 1
    if deg == 2:
        c, b, a = f
        return 1 + legendre(b * b - 4 * a * c, p)
    # degree of gcd(x^p - x, f)
    result, base, e = [1], [0, 1], p
    while e:
        if e & 1:
            result = _polymulmod(result, base, f, p)
        base = _polymulmod(base, base, f, p)
        e >>= 1
    xp_minus_x = list(result) + [0] * max(0, 2 - len(result))
    xp_minus_x[1] = (xp_minus_x[1] - 1) % p
    g = _polygcdmod(f, xp_minus_x, p)
    return len(g) - 1


def _has_root(coeffs, p) -> bool:
    return count_roots_mod(coeffs, p) > 0


def _small_root(coeffs, p, extra=()):
    """A residue that is a root of every polynomial given (brute force, small p)."""
    for x in range(p):
        if all(sum(c * x**i for i, c in enumerate(f)) % p == 0 for f in (coeffs, *extra)):
            return x
    raise ArithmeticError("expected a common root mod p")


def _deriv(coeffs):
    return [i * c for i, c in enumerate(coeffs)][1:] or [0]


def _singular_point(ainvs, p):
    a1, a2, a3, a4, a6 = ainvs
    for x in range(p):
        for y in range(p):
            f = y * y + a1 * x * y + a3 * y - x**3 - a2 * x * x - a4 * x - a6
            fx = a1 * y - 3 * x * x - 2 * a2 * x - a4
            fy = 2 * y + a1 * x + a3
            if f % p == 0 and fx % p == 0 and fy % p == 0:
                return x, y
    raise ArithmeticError("no singular point mod p")


def tate_at(curve: WeierstrassCurve, p: int) -> LocalReduction:
    ainvs = curve.ainvs
    u_exp = 0
    inv2 = pow(2, -1, p) if p != 2 else None
    while True:
        E = WeierstrassCurve(*ainvs)
        vD = vp(E.discriminant, p)
        if vD == 0:
            return LocalReduction(p, "I0", 1, 0, GOOD, u_exp, ainvs)

        # move the singular point of the reduction to (0, 0)
        if p <= 3:
            r, t = _singular_point(ainvs, p)
        else:
            if E.c4 % p == 0:
                r = -E.b2 * pow(12, -1, p) % p
            else:
                r = -(E.c6 + E.b2 * E.c4) * pow(12 * E.c4, -1, p) % p
            t = -(ainvs[0] * r + ainvs[2]) * inv2 % p
        ainvs = _rst(ainvs, r=r, t=t)
        a1, a2, a3, a4, a6 = ainvs
        E = WeierstrassCurve(*ainvs)

        if E.b2 % p != 0:
            split = _has_root([-a2, a1, 1], p)
            cp = vD if split else (2 if vD % 2 == 0 else 1)
            return LocalReduction(p, f"I{vD}", cp, vD, SPLIT if split else NONSPLIT, u_exp, ainvs)

        if vp(a6, p) < 2:
            return LocalReduction(p, "II", 1, vD, ADDITIVE, u_exp, ainvs)
        if vp(E.b8, p) < 3:
            return LocalReduction(p, "III", 2, vD, ADDITIVE, u_exp, ainvs)
        if vp(E.b6, p) < 3:
            cp = 3 if _has_root([-(a6 // p**2), a3 // p, 1], p) else 1
            return LocalReduction(p, "IV", cp, vD, ADDITIVE, u_exp, ainvs)

        # now make p | a1, a2; p^2 | a3, a4; p^3 | a6
        if p <= 3:
            for s in range(p):
                for t in range(p * p):
                    b = _rst(ainvs, s=s, t=t)
                    if (b[0] % p, b[1] % p, b[2] % p**2, b[3] % p**2, b[4] % p**3) == (0,) * 5:
                        break
                else:
                    continue
                break
            else:
                raise ArithmeticError("could not normalise the additive model")
            ainvs = b
        else:
            s = -a1 * inv2 % p
            t = -a3 * inv2 % (p * p)
            ainvs = _rst(ainvs, s=s, t=t)
        a1, a2, a3, a4, a6 = ainvs

        b, c, d = a2 // p, a4 // p**2, a6 // p**3
        cubic = [d, c, b, 1]
        w = 27 * d * d - b * b * c * c + 4 * b**3 * d - 18 * b * c * d + 4 * c**3
        x = 3 * c - b * b
        if w % p != 0:
            cp = 1 + count_roots_mod(cubic, p)
            return LocalReduction(p, "I0*", cp, vD, ADDITIVE, u_exp, ainvs)

        if x % p != 0:
            # double root: move it to 0, then the I_m* subprocedure
            if p <= 3:
                r0 = _small_root(cubic, p, (_deriv(cubic),))
            else:
                r0 = (b * c - 9 * d) * pow(2 * x, -1, p) % p
            ainvs = _rst(ainvs, r=p * r0)
            ix = iy = 3
            mx = my = p * p
            cp = 0
            while cp == 0:
                a1, a2, a3, a4, a6 = ainvs
                xa2, xa3, xa6 = a2 // p, a3 // my, a6 // (mx * my)
                quad_y = [-xa6, xa3, 1]
                if (xa3 * xa3 + 4 * xa6) % p != 0:
                    cp = 4 if _has_root(quad_y, p) else 2
                    break
                root = _small_root(quad_y, p, (_deriv(quad_y),)) if p <= 3 else -xa3 * inv2 % p
                ainvs = _rst(ainvs, t=my * root)
                my *= p
                iy += 1
                a1, a2, a3, a4, a6 = ainvs
                xa2, xa4, xa6 = a2 // p, a4 // (p * mx), a6 // (mx * my)
                quad_x = [xa6, xa4, xa2]
                if (xa4 * xa4 - 4 * xa2 * xa6) % p != 0:
                    cp = 4 if _has_root(quad_x, p) else 2
                    break
                root = _small_root(quad_x, p, (_deriv(quad_x),)) if p <= 3 else -xa4 * pow(2 * xa2, -1, p) % p
                ainvs = _rst(ainvs, r=mx * root)
                mx *= p
                ix += 1
            m = ix + iy - 5
            return LocalReduction(p, f"I{m}*", cp, vD, ADDITIVE, u_exp, ainvs)

        # triple root
        if p <= 3:
            r0 = _small_root(cubic, p)
        else:
            r0 = -b * pow(3, -1, p) % p
        ainvs = _rst(ainvs, r=p * r0)
        a1, a2, a3, a4, a6 = ainvs
        x3, x6 = a3 // p**2, a6 // p**4
        quad = [-x6, x3, 1]
        if (x3 * x3 + 4 * x6) % p != 0:
            cp = 3 if _has_root(quad, p) else 1
            return LocalReduction(p, "IV*", cp, vD, ADDITIVE, u_exp, ainvs)
        root = _small_root(quad, p, (_deriv(quad),)) if p <= 3 else -x3 * inv2 % p
        ainvs = _rst(ainvs, t=p * p * root)
        a1, a2, a3, a4, a6 = ainvs
        if vp(a4, p) < 4:
            return LocalReduction(p, "III*", 2, vD, ADDITIVE, u_exp, ainvs)
        if vp(a6, p) < 6:
            return LocalReduction(p, "II*", 1, vD, ADDITIVE, u_exp, ainvs)
        # not minimal: rescale by u = p and start over
        ainvs = tuple(a // p**k for a, k in zip(ainvs, (1, 2, 3, 4, 6)))
        u_exp += 1


@dataclass(frozen=True)
class GlobalReduction:
    local: tuple[LocalReduction, ...]
    C_E: int
    min_discriminant: int
    log_min_delta: float
    B_E: float

    @property
    def is_minimal(self) -> bool:
        return all(r.u_exponent == 0 for r in self.local)


# The height lower bound uses the worst case N = 8, i.e. 768 = 12 * 8^2.
KRIR_DENOMINATOR = 768


def global_reduction(curve: WeierstrassCurve) -> GlobalReduction:
    disc = curve.discriminant
    fac = factorize(abs(disc))
    local = tuple(tate_at(curve, p) for p, _ in fac)
    C_E = reduce(math.lcm, (r.tamagawa for r in local), 1)
    sign = 1 if disc > 0 else -1
    min_disc = sign * math.prod(r.p**r.v_min_delta for r in local)
    log_min = sum(r.v_min_delta * math.log(r.p) for r in local)
    return GlobalReduction(local, C_E, min_disc, log_min, log_min / (KRIR_DENOMINATOR * C_E * C_E))
