"""The family E_n(t): y^2 = x^3 + t x^2 - n^2 (t + 3 n^2) x + n^6, its invariants,
its minimal model, and certified isolation of the real 2-torsion abscissae."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import TYPE_CHECKING, Callable, NamedTuple, Optional

if TYPE_CHECKING:
    from .points import Point

MODEL_E = "E"
MODEL_EPRIME = "Eprime"


class PrecisionError(ArithmeticError):
    pass


@dataclass(frozen=True)
class CurveParams:
    n: int
    t: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be a positive integer")
        if self.t == 0:
            raise ValueError("t must be nonzero")

    @property
    def delta(self) -> int:
        n2 = self.n * self.n
        return self.t * self.t + 3 * n2 * self.t + 9 * n2 * n2

    @property
    def has_eprime_model(self) -> bool:
        """True when 4 | n and t = 1 (mod 4), i.e. the E model is not minimal at 2."""
        return self.n % 4 == 0 and self.t % 4 == 1


@dataclass(frozen=True)
class WeierstrassCurve:
    """y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6 with integer coefficients."""

    a1: int
    a2: int
    a3: int
    a4: int
    a6: int
    provenance: Optional[str] = None
    params: Optional[CurveParams] = field(default=None, compare=False)

    def __post_init__(self):
        if self.discriminant == 0:
            raise ValueError("singular Weierstrass equation")

    @property
    def ainvs(self) -> tuple[int, int, int, int, int]:
        return (self.a1, self.a2, self.a3, self.a4, self.a6)

    @cached_property
    def b2(self) -> int:
        return self.a1 * self.a1 + 4 * self.a2

    @cached_property
    def b4(self) -> int:
        return self.a1 * self.a3 + 2 * self.a4

    @cached_property
    def b6(self) -> int:
        return self.a3 * self.a3 + 4 * self.a6

    @cached_property
    def b8(self) -> int:
        a1, a2, a3, a4, a6 = self.ainvs
        return a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4

    @cached_property
    def c4(self) -> int:
        return self.b2 * self.b2 - 24 * self.b4

    @cached_property
    def c6(self) -> int:
        return -self.b2**3 + 36 * self.b2 * self.b4 - 216 * self.b6

    @cached_property
    def discriminant(self) -> int:
        b2, b4, b6, b8 = self.b2, self.b4, self.b6, self.b8
        return -b2 * b2 * b8 - 8 * b4**3 - 27 * b6 * b6 + 9 * b2 * b4 * b6

    @property
    def j_invariant(self) -> Fraction:
        return Fraction(self.c4**3, self.discriminant)

    @property
    def two_torsion_poly(self) -> list[int]:
        """4x^3 + b2 x^2 + 2 b4 x + b6, ascending coefficients; equals (2y + a1 x + a3)^2 on the curve."""
        return [self.b6, 2 * self.b4, self.b2, 4]

    def contains(self, x: Fraction, y: Fraction) -> bool:
        a1, a2, a3, a4, a6 = self.ainvs
        return y * y + a1 * x * y + a3 * y == x**3 + a2 * x * x + a4 * x + a6

    def __repr__(self):
        return f"WeierstrassCurve{self.ainvs}"


def make_curve(params: CurveParams) -> WeierstrassCurve:
    n2 = params.n * params.n
    return WeierstrassCurve(
        0, params.t, 0, -n2 * (params.t + 3 * n2), n2**3, provenance=MODEL_E, params=params
    )


class ModelMap:
    """Isomorphism E -> model, x = u^2 x' + r, y = u^3 y' + s u^2 x' (t = 0)."""

    def __init__(self, source: WeierstrassCurve, target: WeierstrassCurve, u: int = 1, r: int = 0, s: int = 0):
        self.source, self.target = source, target
        self.u, self.r, self.s = u, r, s

    def __call__(self, P: "Point") -> "Point":
        from .points import Point

        if P.is_infinity:
            return P
        u2 = self.u * self.u
        x = (P.x - self.r) / u2
        y = (P.y - self.s * u2 * x) / (u2 * self.u)
        return Point(x, y)

    def inverse(self, P: "Point") -> "Point":
        from .points import Point

        if P.is_infinity:
            return P
        u2 = self.u * self.u
        return Point(u2 * P.x + self.r, u2 * self.u * P.y + self.s * u2 * P.x)

    @property
    def is_identity(self) -> bool:
        return self.u == 1 and self.r == 0 and self.s == 0


def minimal_model(params: CurveParams) -> tuple[WeierstrassCurve, ModelMap]:
    """Return the minimal model and the map from E_n(t) to it.

    When 4 | n and t = 1 (mod 4) the equation of E_n(t) is not minimal at 2; with
    n = 4m, t = 4k + 1 and x = 4x', y = 8y' + 4x' it becomes
    y'^2 + x'y' = x'^3 + k x'^2 - m^2 (4k + 1 + 48 m^2) x' + 64 m^6,
    and (0, n^3) goes to (0, 8 m^3).
    """
    E = make_curve(params)
    if not params.has_eprime_model:
        return E, ModelMap(E, E)
    m, k = params.n // 4, (params.t - 1) // 4
    m2 = m * m
    Ep = WeierstrassCurve(1, k, 0, -m2 * (4 * k + 1 + 48 * m2), 64 * m2**3, provenance=MODEL_EPRIME, params=params)
    return Ep, ModelMap(E, Ep, u=2, r=0, s=1)


# ---------------------------------------------------------------------------
# Sturm sequences and root isolation over Q


def _trim(p: list[Fraction]) -> list[Fraction]:
    while len(p) > 1 and p[-1] == 0:
        p.pop()
    return p


def _polyrem(a: list[Fraction], b: list[Fraction]) -> list[Fraction]:
    a = list(a)
    db = len(b) - 1
    while len(a) - 1 >= db and any(a):
        if a[-1] == 0:
            a.pop()
            continue
        q = a[-1] / b[-1]
        shift = len(a) - 1 - db
        for i, c in enumerate(b):
            a[shift + i] -= q * c
        a.pop()
    return _trim(a) if a else [Fraction(0)]


def sturm_sequence(coeffs: list[int]) -> list[list[Fraction]]:
    p0 = [Fraction(c) for c in coeffs]
    p1 = [i * c for i, c in enumerate(p0)][1:]
    seq = [p0, p1]
    while len(seq[-1]) > 1:
        r = _polyrem(seq[-2], seq[-1])
        if not any(r):
            break
        seq.append([-c for c in r])
    return seq


def _eval(p, x):
    acc = Fraction(0)
    for c in reversed(p):
        acc = acc * x + c
    return acc


def _sign_changes(seq, x) -> int:
    signs = [v for v in (_eval(p, x) for p in seq) if v != 0]
    return sum(1 for a, b in zip(signs, signs[1:]) if (a > 0) != (b > 0))


def count_roots_above(coeffs: list[int], x: Fraction) -> int:
    """Number of distinct real roots strictly greater than x."""
    seq = sturm_sequence(coeffs)
    lead = [(p[-1], len(p) - 1) for p in seq]
    signs = [c for c, _ in lead]
    at_inf = sum(1 for a, b in zip(signs, signs[1:]) if (a > 0) != (b > 0))
    return _sign_changes(seq, Fraction(x)) - at_inf


class Interval(NamedTuple):
    lo: Fraction
    hi: Fraction

    @property
    def mid(self) -> Fraction:
        return (self.lo + self.hi) / 2

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    def shift(self, c) -> "Interval":
        return Interval(self.lo + c, self.hi + c)

    def within(self, lo, hi) -> bool:
        return lo <= self.lo and self.hi <= hi

    def __float__(self):
        return float(self.mid)


def isolate_real_roots(coeffs: list[int]) -> list[Interval]:
    """Disjoint isolating intervals (increasing order) for the distinct real roots."""
    seq = sturm_sequence(coeffs)
    bound = Fraction(1) + max(Fraction(abs(c), abs(coeffs[-1])) for c in coeffs[:-1])

    def V(x):
        return _sign_changes(seq, x)

    out = []
    stack = [(-bound, bound, V(-bound), V(bound))]
    while stack:
        lo, hi, vlo, vhi = stack.pop()
        k = vlo - vhi
        if k == 0:
            continue
        if k == 1:
            out.append(Interval(lo, hi))
            continue
        mid = (lo + hi) / 2
        vmid = V(mid)
        if _eval(seq[0], mid) == 0:
            out.append(Interval(mid, mid))
            # roots at mid are counted in neither half; nudge the halves apart
            eps = (hi - lo) / 2**20
            while V(mid - eps) - V(mid + eps) != 1:
                eps /= 2
            stack.append((lo, mid - eps, vlo, V(mid - eps)))
            stack.append((mid + eps, hi, V(mid + eps), vhi))
            continue
        stack.append((lo, mid, vlo, vmid))
        stack.append((mid, hi, vmid, vhi))
    return sorted(out)


def refine_root(coeffs: list[int], iv: Interval, rel_bits: int, max_steps: int = 100_000) -> Interval:
    """Bisect an isolating interval of a simple root until its relative width is <= 2^-rel_bits."""
    lo, hi = iv
    if lo == hi:
        return iv
    flo = _eval(coeffs, lo)
    if flo == 0:
        return Interval(lo, lo)
    fhi = _eval(coeffs, hi)
    if fhi == 0:
        return Interval(hi, hi)
    if (flo > 0) == (fhi > 0):
        raise PrecisionError("interval does not bracket a sign change")
    steps = 0
    tol = Fraction(1, 2**rel_bits)
    while hi - lo > tol * max(abs(lo), abs(hi)):
        mid = (lo + hi) / 2
        fm = _eval(coeffs, mid)
        if fm == 0:
            return Interval(mid, mid)
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
        steps += 1
        if steps > max_steps:
            raise PrecisionError("root refinement stalled")
    return Interval(lo, hi)


@dataclass(frozen=True)
class CubicRootData:
    """Certified enclosures of the roots of 4x^3 + b2 x^2 + 2 b4 x + b6.

    ``alpha`` are the roots in the model's own x-coordinate; ``e`` are the same
    roots shifted by b2/12, i.e. the roots of the depressed cubic of y^2 = 4g(x).
    """

    alpha: tuple[Interval, Interval, Interval]
    e: tuple[Interval, Interval, Interval]
    precision: int


def cubic_roots(curve: WeierstrassCurve, precision: int = 128) -> CubicRootData:
    coeffs = curve.two_torsion_poly
    ivs = isolate_real_roots(coeffs)
    if len(ivs) != 3:
        raise PrecisionError("expected three real roots")
    alpha = tuple(refine_root(coeffs, iv, precision) for iv in ivs)
    shift = Fraction(curve.b2, 12)
    e = tuple(iv.shift(shift) for iv in alpha)
    return CubicRootData(alpha, e, precision)


EGG = "egg"
IDENTITY_COMPONENT = "identity-component"


def component_of(curve: WeierstrassCurve, P: "Point") -> str:
    """Which real component P lies on.  Exact: a real point lies on the egg iff some
    2-torsion abscissa exceeds x(P)."""
    if P.is_infinity:
        return IDENTITY_COMPONENT
    return EGG if count_roots_above(curve.two_torsion_poly, P.x) >= 1 else IDENTITY_COMPONENT
