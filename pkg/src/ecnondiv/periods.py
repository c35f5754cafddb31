"""Real and imaginary periods by the AGM, and the real part of the elliptic logarithm."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import mpmath
from mpmath import iv, mp

from .curves import (
    EGG,
    CubicRootData,
    CurveParams,
    Interval,
    PrecisionError,
    WeierstrassCurve,
    component_of,
    cubic_roots,
    make_curve,
)
from .points import Point


class InapplicableRangeError(ValueError):
    pass


def _iv(lo: Fraction, hi: Fraction):
    """Outward-rounded interval containing [lo, hi]."""
    a = iv.mpf(lo.numerator) / lo.denominator
    b = iv.mpf(hi.numerator) / hi.denominator
    return iv.mpf([a.a, b.b])


def _mpf(x: Fraction):
    return mp.mpf(x.numerator) / x.denominator


def _diff(a: Interval, b: Interval) -> Interval:
    return Interval(a.lo - b.hi, a.hi - b.lo)


def agm_enclosure(a, b, max_iter: int = 200):
    """Interval containing agm(x, y) for all x in a, y in b (positive intervals).

    For real x, y > 0 every AGM iterate after the first satisfies b_n <= agm <= a_n,
    so the hull of the last pair of iterates is an enclosure.
    """
    if a.a <= 0 or b.a <= 0:
        raise PrecisionError("AGM arguments must be positive")
    eps = iv.mpf(2) ** (-iv.prec)
    for _ in range(max_iter):
        a, b = (a + b) / 2, iv.sqrt(a * b)
        lo, hi = min(a.a, b.a), max(a.b, b.b)
        if hi - lo <= 4 * eps.b * hi + (a.delta + b.delta):
            break
    return iv.mpf([min(a.a, b.a), max(a.b, b.b)])


@dataclass(frozen=True)
class PeriodData:
    omega1: mpmath.mpf
    omega2_im: mpmath.mpf
    q: mpmath.mpf
    mu: mpmath.mpf
    precision: int
    error_bound: float
    omega1_enclosure: tuple[mpmath.mpf, mpmath.mpf]
    omega2_enclosure: tuple[mpmath.mpf, mpmath.mpf]
    roots: CubicRootData = field(repr=False)


def periods(curve: WeierstrassCurve, precision: int = 128) -> PeriodData:
    roots = cubic_roots(curve, precision + 16)
    e1, e2, e3 = roots.e
    saved = iv.prec
    iv.prec = precision + 32
    try:
        d31, d32, d21 = (_diff(e3, e1), _diff(e3, e2), _diff(e2, e1))
        if min(d31.lo, d32.lo, d21.lo) <= 0:
            raise PrecisionError("root enclosures overlap")
        s31 = iv.sqrt(_iv(*d31))
        w1 = iv.pi / agm_enclosure(s31, iv.sqrt(_iv(*d32)))
        w2 = iv.pi / agm_enclosure(s31, iv.sqrt(_iv(*d21)))
    finally:
        iv.prec = saved
    with mp.workprec(precision + 32):
        # endpoints are exact at this precision, so the enclosures stay sharp
        encl1, encl2 = (mp.mpf(w1.a), mp.mpf(w1.b)), (mp.mpf(w2.a), mp.mpf(w2.b))
        mid1, mid2 = (encl1[0] + encl1[1]) / 2, (encl2[0] + encl2[1]) / 2
        err = float(max(encl1[1] - encl1[0], encl2[1] - encl2[0]))
    with mp.workprec(precision):
        omega1, omega2 = +mid1, +mid2
        q = mp.exp(-2 * mp.pi * omega2 / omega1)
        mu = 2 * mp.pi / omega1
    return PeriodData(omega1, omega2, q, mu, precision, err, encl1, encl2, roots)


@dataclass(frozen=True)
class EllipticLog:
    re_z: mpmath.mpf
    component: str
    error_bound: float


def incomplete_f(phi, k_prime, max_iter: int = 200):
    """F(phi, k) by descending Landen transformations, with k' = sqrt(1 - k^2) given."""
    a, b = mp.mpf(1), mp.mpf(k_prime)
    eps = mp.mpf(2) ** (-mp.prec)
    steps = 0
    while abs(a - b) > eps * a and steps < max_iter:
        j = mp.nint(phi / mp.pi)
        rem = phi - j * mp.pi
        phi = phi + j * mp.pi + mp.atan2(b * mp.sin(rem), a * mp.cos(rem))
        a, b = (a + b) / 2, mp.sqrt(a * b)
        steps += 1
    return phi / (2**steps * a)


def _re_log(alpha, x: Fraction, on_egg: bool):
    a1, a2, a3 = alpha
    xm = _mpf(x)
    if on_egg:
        s2 = (xm - a1) / (a2 - a1)
    else:
        s2 = (a3 - a1) / (xm - a1)
    s2 = min(max(s2, mp.mpf(0)), mp.mpf(1))
    phi = mp.asin(mp.sqrt(s2))
    k_prime = mp.sqrt((a3 - a2) / (a3 - a1))
    return incomplete_f(phi, k_prime) / mp.sqrt(a3 - a1)


def elliptic_log_re(
    curve: WeierstrassCurve, P: Point, period_data: PeriodData, precision: Optional[int] = None
) -> EllipticLog:
    """Re(z) for the elliptic logarithm z of a real point.

    Identity-component points: z is the integral of dx/sqrt(4g) from x(P) to
    infinity.  Egg points: the integral from the smallest root to x(P); the
    imaginary half-period offset is dropped.  Both lie in [0, omega1/2].
    """
    precision = precision or period_data.precision
    if P.is_infinity:
        return EllipticLog(mp.mpf(0), component_of(curve, P), 0.0)
    comp = component_of(curve, P)
    values = []
    for prec in (precision, precision + 32):
        with mp.workprec(prec):
            alpha = tuple(_mpf(iv_.mid) for iv_ in period_data.roots.alpha)
            values.append(_re_log(alpha, P.x, comp == EGG))
    with mp.workprec(precision):
        z = +values[0]
        root_bits = period_data.roots.precision
        err = float(abs(values[1] - values[0])) + float(max(abs(z), 1)) * 2.0 ** (-min(precision, root_bits) + 8)
    return EllipticLog(z, comp, err)


# ---------------------------------------------------------------------------
# certified checks of the explicit root and period estimates for the family


@dataclass
class BoundReport:
    checks: dict[str, bool]
    enclosures: dict[str, tuple]

    @property
    def all_hold(self) -> bool:
        return all(self.checks.values())


def _model_e(curve: WeierstrassCurve) -> tuple[CurveParams, WeierstrassCurve]:
    if curve.params is None:
        raise InapplicableRangeError("curve is not a member of the family")
    return curve.params, make_curve(curve.params)


def check_root_bounds(curve: WeierstrassCurve, roots: Optional[CubicRootData] = None) -> BoundReport:
    """The explicit enclosures of e1, e2, e3 valid for t >= 3n^2 or t <= -3n^2.

    Each inequality holds only if the whole certified enclosure satisfies it.
    """
    params, model = _model_e(curve)
    n2, t = params.n**2, params.t
    n4 = n2 * n2
    if -3 * n2 < t < 3 * n2:
        raise InapplicableRangeError("root estimates need |t| >= 3 n^2")
    if roots is None or curve.provenance != model.provenance:
        roots = cubic_roots(model)
    e1, e2, e3 = roots.e
    th = Fraction(t, 3)
    f = Fraction(n4, t)
    if t > 0:
        bounds = {
            "e1": (-2 * th - n2 - 2 * f, -2 * th - n2 - f),
            "e2": (th, th + f),
            "e3": (th + n2, th + n2 + f),
        }
    else:
        bounds = {
            "e1": (th + 2 * f, th + f),
            "e2": (th + n2 + 2 * f, th + n2 + f),
            "e3": (-2 * th - n2, -2 * th),
        }
    checks, encl = {}, {}
    for name, iv_ in zip(("e1", "e2", "e3"), (e1, e2, e3)):
        lo, hi = bounds[name]
        checks[f"{name} lower"] = lo <= iv_.lo
        checks[f"{name} upper"] = iv_.hi <= hi
        encl[name] = (iv_.lo, iv_.hi)
    return BoundReport(checks, encl)


def period_bound_intervals(params: CurveParams) -> dict[str, tuple[float, Optional[float]]]:
    """Explicit intervals for omega1 and omega2/i when |t| >= 100 n^2 (None = unbounded)."""
    n2, t = params.n**2, params.t
    if -100 * n2 < t < 100 * n2:
        raise InapplicableRangeError("period estimates need |t| >= 100 n^2")
    with mp.workprec(64):
        root = mp.sqrt(abs(t))
        L = mp.log(mp.mpf(abs(t)) / n2)
        if t > 0:
            return {
                "omega2_im": (mp.mpf("3.11") / root, mp.mpf("3.15") / root),
                "omega1": ((mp.mpf("1.88") + mp.mpf("0.99") * L) / root, (mp.mpf("5.35") + mp.mpf("1.23") * L) / root),
            }
        return {
            "omega1": (mp.mpf("3.14") / root, mp.mpf("3.15") / root),
            "omega2_im": ((mp.mpf("0.39") + L) / root, None),
        }


def check_period_bounds(curve: WeierstrassCurve, period_data: Optional[PeriodData] = None) -> BoundReport:
    params, model = _model_e(curve)
    targets = period_bound_intervals(params)
    if period_data is None or curve.provenance != model.provenance:
        period_data = periods(model)
    encl = {"omega1": period_data.omega1_enclosure, "omega2_im": period_data.omega2_enclosure}
    checks = {}
    for name, (lo, hi) in targets.items():
        a, b = encl[name]
        checks[f"{name} lower"] = lo <= a
        if hi is not None:
            checks[f"{name} upper"] = b <= hi
    return BoundReport(checks, encl)
