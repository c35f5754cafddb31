"""Canonical heights: local decomposition, a doubling-limit oracle, and explicit bounds.

Normalization: h(P) = log max(|num x|, |den x|) and the canonical height is
lim h(2^k P) / (2 * 4^k), so that hat-h(P) - h(P)/2 is bounded.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import gmpy2
import mpmath
from mpmath import mp

from .arith import factorize, vp
from .curves import CurveParams, WeierstrassCurve
from .periods import InapplicableRangeError, PeriodData, elliptic_log_re, periods
from .points import Point, add, is_integral


class NonMinimalModelError(ValueError):
    pass


class DegenerateThetaError(ArithmeticError):
    pass


class OracleBudgetError(RuntimeError):
    pass


def _log_abs(v) -> float:
    """Natural log of |v| for an arbitrarily large integer, in double precision."""
    v = abs(int(v))
    bits = v.bit_length()
    if bits <= 1000:
        return math.log(v)
    shift = bits - 64
    return math.log(v >> shift) + shift * math.log(2)


def naive_height(P: Point) -> float:
    if P.is_infinity:
        return 0.0
    x = P.x
    return _log_abs(max(abs(x.numerator), x.denominator))


# ---------------------------------------------------------------------------
# non-archimedean contributions


@dataclass(frozen=True)
class NonArchContext:
    A: int
    B: int
    C: int
    D: int


def nonarch_context(curve: WeierstrassCurve, P: Point) -> NonArchContext:
    if not is_integral(P):
        raise ValueError("the local table needs an integral point")
    x, y = int(P.x), int(P.y)
    a1, a2, a3, a4, _ = curve.ainvs
    A = 3 * x * x + 2 * a2 * x + a4 - a1 * y
    B = 2 * y + a1 * x + a3
    C = 3 * x**4 + curve.b2 * x**3 + 3 * curve.b4 * x * x + 3 * curve.b6 * x + curve.b8
    return NonArchContext(A, B, C, math.gcd(A, B))


def _minimal_at(curve: WeierstrassCurve, p: int) -> bool:
    if vp(curve.discriminant, p) < 12 or vp(curve.c4, p) < 4:
        return True
    from .tate import tate_at

    return tate_at(curve, p).u_exponent == 0


def local_nonarch_exact(curve: WeierstrassCurve, P: Point, p: int, check_minimal: bool = True) -> Fraction:
    """lambda_p(P) / log p as an exact rational."""
    ctx = nonarch_context(curve, P)
    if ctx.D % p != 0:
        return Fraction(0)
    if check_minimal and not _minimal_at(curve, p):
        raise NonMinimalModelError(f"model is not minimal at p = {p}")
    v_delta = vp(curve.discriminant, p)
    v_b = vp(ctx.B, p)
    if curve.c4 % p != 0:
        m = min(Fraction(v_delta, 2), Fraction(v_b))
        return -m * (v_delta - m) / (2 * v_delta)
    v_c = vp(ctx.C, p)
    if v_c >= 3 * v_b:
        return Fraction(-v_b, 3)
    return Fraction(-v_c, 8)


def local_nonarch(curve: WeierstrassCurve, P: Point, p: int) -> float:
    return float(local_nonarch_exact(curve, P, p)) * math.log(p)


# ---------------------------------------------------------------------------
# the archimedean contribution


@dataclass(frozen=True)
class ThetaContext:
    s: mpmath.mpf
    q: mpmath.mpf
    theta: mpmath.mpf
    truncation_error: mpmath.mpf
    derivative_bound: mpmath.mpf


def theta(s, q, precision: int = 128) -> ThetaContext:
    """sum_k sin((2k+1) s) (-1)^k q^(k(k+1)/2), truncated once the weight drops below 2^-precision."""
    with mp.workprec(precision + 16):
        s, q = mp.mpf(s), mp.mpf(q)
        if not 0 <= q < 1:
            raise ValueError("nome must lie in [0, 1)")
        cutoff = mp.mpf(2) ** (-precision)
        total, deriv, k = mp.mpf(0), mp.mpf(0), 0
        while True:
            w = q ** (k * (k + 1) // 2)
            if w < cutoff and k > 0:
                break
            total += (-1) ** k * w * mp.sin((2 * k + 1) * s)
            deriv += (2 * k + 1) * w
            k += 1
            if q == 0:
                break
        tail = w / (1 - q) if q else mp.mpf(0)
    return ThetaContext(s, q, total, tail, deriv + tail * (2 * k + 1))


def _beta_sq(curve: WeierstrassCurve, P: Point) -> Fraction:
    """x^3 + b2 x^2/4 + b4 x/2 + b6/4 = ((2y + a1 x + a3) / 2)^2 on the curve."""
    B = 2 * P.y + curve.a1 * P.x + curve.a3
    return B * B / 4


def local_arch(
    curve: WeierstrassCurve, P: Point, period_data: Optional[PeriodData] = None, precision: int = 128
) -> tuple[mpmath.mpf, float]:
    """lambda_infinity(P) and an error estimate.

    (1/32) log|Delta/q| - (1/4) log|theta(s)| + (1/8) log|beta^2 / mu| with s = mu Re z.
    """
    if P.is_infinity:
        raise ValueError("lambda_infinity is not defined at O")
    if period_data is None:
        period_data = periods(curve, precision)
    beta2 = _beta_sq(curve, P)
    if beta2 == 0:
        raise DegenerateThetaError("2-torsion point: the archimedean term diverges")
    zlog = elliptic_log_re(curve, P, period_data, precision)
    with mp.workprec(precision):
        mu, q = period_data.mu, period_data.q
        th = theta(mu * zlog.re_z, q, precision)
        err_s = float(mu) * (zlog.error_bound + 2 * float(period_data.error_bound) * float(zlog.re_z + 1))
        slack = float(th.truncation_error) + float(th.derivative_bound) * err_s
        if abs(th.theta) <= slack:
            raise DegenerateThetaError("theta vanishes within its error bound")
        delta = mp.mpf(curve.discriminant)
        value = (
            mp.log(abs(delta / q)) / 32
            - mp.log(abs(th.theta)) / 4
            + mp.log(abs(mp.mpf(beta2.numerator) / beta2.denominator / mu)) / 8
        )
        rel_periods = float(period_data.error_bound / period_data.omega1)
        err = slack / float(abs(th.theta)) / 4 + rel_periods + 2.0 ** (-precision + 8)
    return value, err


# ---------------------------------------------------------------------------
# doubling oracle


def _resultant_doubling(curve: WeierstrassCurve) -> int:
    """Homogeneous resultant of the numerator and denominator forms of x(2P)."""
    b2, b4, b6, b8 = curve.b2, curve.b4, curve.b6, curve.b8
    f = [1, 0, -b4, -2 * b6, -b8]
    g = [0, 4, b2, 2 * b4, b6]
    rows = [[0] * i + f + [0] * (3 - i) for i in range(4)] + [[0] * i + g + [0] * (3 - i) for i in range(4)]
    # Bareiss fraction-free elimination
    n, sign, prev = 8, 1, 1
    M = [row[:] for row in rows]
    for k in range(n - 1):
        if M[k][k] == 0:
            for r in range(k + 1, n):
                if M[r][k] != 0:
                    M[k], M[r] = M[r], M[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                M[i][j] = (M[i][j] * M[k][k] - M[i][k] * M[k][j]) // prev
        prev = M[k][k]
    return sign * M[n - 1][n - 1]


@dataclass(frozen=True)
class OracleEstimate:
    value: float
    error: float
    steps: int


ORACLE_BIT_BUDGET = 1 << 31


def height_difference_bound(curve: WeierstrassCurve) -> float:
    """B with |hat-h(Q) - h(Q)/2| <= B for all Q; covers both sides of Silverman's bounds."""
    j = curve.j_invariant
    h_j = _log_abs(max(abs(j.numerator), j.denominator)) if j else 0.0
    return silverman_gap(curve) + h_j / 8 + _log_abs(curve.discriminant) / 12 + 0.973


def doubling_oracle_estimate(
    curve: WeierstrassCurve,
    P: Point,
    k_max: int = 20,
    tol: float = 1e-6,
    bit_budget: int = ORACLE_BIT_BUDGET,
) -> OracleEstimate:
    """h(x(2^k P)) / (2 * 4^k) with exact integer doubling.

    Since |hat-h(Q) - h(Q)/2| <= B for every Q, the value at step k is within
    B / 4^k of the limit; k is the first step where that drops below ``tol``.
    Each step keeps x = X/Z in lowest terms.  A common factor of the doubled
    numerator and denominator divides their resultant R, so the reduction
    only needs gcds against R.
    """
    if P.is_infinity:
        return OracleEstimate(0.0, 0.0, 0)
    B = height_difference_bound(curve)
    steps = max(1, math.ceil(math.log(B / tol, 4)))
    if steps > k_max:
        raise OracleBudgetError(f"tolerance {tol} needs {steps} doublings, above k_max = {k_max}")
    R = abs(_resultant_doubling(curve))
    b2, b4, b6, b8 = (gmpy2.mpz(v) for v in (curve.b2, curve.b4, curve.b6, curve.b8))
    X, Z = gmpy2.mpz(P.x.numerator), gmpy2.mpz(P.x.denominator)
    for k in range(1, steps + 1):
        X2, Z2 = X * X, Z * Z
        XZ = X * Z
        num = X2 * X2 - b4 * X2 * Z2 - 2 * b6 * XZ * Z2 - b8 * Z2 * Z2
        den = Z * (4 * X2 * X + b2 * X2 * Z + 2 * b4 * XZ * Z + b6 * Z2 * Z)
        if den == 0:
            return OracleEstimate(0.0, 0.0, k)
        g = gmpy2.gcd(gmpy2.gcd(num % R, den % R), R) if R else gmpy2.gcd(num, den)
        if g > 1:
            num, den = num // g, den // g
        if den < 0:
            num, den = -num, -den
        X, Z = num, den
        bits = max(abs(X).bit_length(), Z.bit_length())
        if bits > bit_budget:
            raise OracleBudgetError(f"coordinates reached {bits} bits at k = {k}")
    value = _log_abs(max(abs(X), Z)) / (2 * 4**steps)
    return OracleEstimate(value, B / 4**steps, steps)


def doubling_oracle(curve: WeierstrassCurve, P: Point, k_max: int = 20, tol: float = 1e-6) -> float:
    return doubling_oracle_estimate(curve, P, k_max, tol).value


# ---------------------------------------------------------------------------
# canonical height


@dataclass
class HeightBreakdown:
    point: Point
    naive_h: float
    local_finite: dict[int, float] = field(default_factory=dict)
    local_arch: Optional[float] = None
    canonical: float = 0.0
    error_bound: float = 0.0
    method: str = "local"


def torsion_order(curve: WeierstrassCurve, P: Point) -> Optional[int]:
    """Order of P if it is torsion, else None (rational torsion has order <= 12)."""
    Q = P
    for k in range(1, 13):
        if Q.is_infinity:
            return k
        if Q.x.denominator > 4:
            return None
        Q = add(curve, Q, P)
    return None


def _oracle_breakdown(curve: WeierstrassCurve, P: Point, h: float) -> HeightBreakdown:
    est = doubling_oracle_estimate(curve, P)
    return HeightBreakdown(P, h, canonical=est.value, error_bound=est.error, method="oracle")


def canonical_height(curve: WeierstrassCurve, P: Point, precision: int = 128, period_data: Optional[PeriodData] = None) -> HeightBreakdown:
    if P.is_infinity:
        return HeightBreakdown(P, 0.0, method="torsion")
    h = naive_height(P)
    if torsion_order(curve, P) is not None:
        return HeightBreakdown(P, h, method="torsion")
    if not is_integral(P):
        return _oracle_breakdown(curve, P, h)
    ctx = nonarch_context(curve, P)
    finite = {}
    try:
        for p, _ in factorize(abs(ctx.D)) if ctx.D else ():
            finite[p] = local_nonarch(curve, P, p)
    except NonMinimalModelError:
        # the local table needs a minimal model; the height itself does not
        return _oracle_breakdown(curve, P, h)
    arch, err = local_arch(curve, P, period_data, precision)
    total = float(arch) + sum(finite.values())
    return HeightBreakdown(P, h, finite, float(arch), total, err + 1e-15 * len(finite), "local")


# ---------------------------------------------------------------------------
# explicit bounds for the family


def _require_large(params: CurveParams, strict: bool) -> None:
    n2, t = params.n**2, params.t
    if strict:
        ok = t >= max(100 * n2, n2 * n2) or t <= min(-100 * n2, -2 * n2 * n2)
        if not ok:
            raise InapplicableRangeError("need t >= max(100n^2, n^4) or t <= min(-100n^2, -2n^4)")
    elif abs(t) < 100 * n2:
        raise InapplicableRangeError("need |t| >= 100 n^2")


def upper_bound_h0(params: CurveParams) -> float:
    """Upper bound for the canonical height of (0, n^3) (or its image on the minimal model)."""
    _require_large(params, strict=False)
    return math.log(abs(params.t)) + (0.19 if params.has_eprime_model else 1.57)


# Allowance for the corrected omega1 constant when t < 0 (the true value of
# omega1 sqrt|t| reaches 3.165 at t = -100 n^2); it shifts the nome bound
# by far less than this.
NEGATIVE_T_MARGIN = 0.01


def lower_bound_hP(params: CurveParams, conservative: bool = True) -> float:
    """Lower bound for hat-h(P) over integral P with l P = (0, n^3), l >= 2.

    ``conservative`` selects the constants used for certificates: 0.06 for t > 0,
    the weaker |beta| estimate for n = 2 with t < 0, a small allowance for t < 0,
    and, on the model with a1 = 1, the sum of the local lower bounds.
    """
    _require_large(params, strict=True)
    n, t = params.n, params.t
    L, ln, l2 = math.log(abs(t)), math.log(n), math.log(2)
    if params.has_eprime_model:
        if not conservative:
            return 13 / 80 * L + 3 / 8 * ln + 0.04 if t > 0 else 3 / 16 * L + 1 / 4 * ln + 0.10
        if t > 0:
            return 13 / 80 * L - ln / 8 + 3 / 8 * l2 + 0.04
        return 3 / 16 * L - ln / 8 + l2 / 4 + 0.10 - NEGATIVE_T_MARGIN
    if t > 0:
        return 13 / 80 * L - ln / 8 + (0.06 if conservative else 0.09)
    if not conservative:
        return 3 / 16 * L - ln / 8
    if n == 2:
        return 3 / 16 * L - 7 / 12 * l2 + 0.27 - NEGATIVE_T_MARGIN
    return 3 / 16 * L - ln / 8 - NEGATIVE_T_MARGIN


def silverman_gap(curve: WeierstrassCurve) -> float:
    """B with hat-h(P) - h(P)/2 <= B for every rational point P."""
    j = curve.j_invariant
    log_j = max(_log_abs(j.numerator) - _log_abs(j.denominator), 0.0) if j else 0.0
    b2 = Fraction(curve.b2, 12)
    log_b2 = max(_log_abs(b2.numerator) - _log_abs(b2.denominator), 0.0) if b2 else 0.0
    return _log_abs(curve.discriminant) / 12 + log_j / 12 + log_b2 / 2 + math.log(2) / 2 + 1.07
