"""Exact integer and rational helpers: factoring, valuations, integer roots."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import gmpy2

# Composite parts left after trial division are handed to Pollard rho only
# below this bound.  Desk-scale discriminants of the family stay far below it.
FACTOR_BUDGET = 10**60
TRIAL_LIMIT = 10**6

_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)


class FactoringBudgetError(ArithmeticError):
    """Raised when a number is too large for the configured factoring budget."""


@dataclass(frozen=True)
class Factorization:
    value: int
    factors: tuple[tuple[int, int], ...]

    def __iter__(self):
        return iter(self.factors)

    def primes(self) -> list[int]:
        return [p for p, _ in self.factors]

    def as_dict(self) -> dict[int, int]:
        return dict(self.factors)


def is_prime(n: int) -> bool:
    """Miller-Rabin with the first 13 prime bases.

    Deterministic for n < 3.3e24; beyond that it is a strong probable-prime test.
    """
    if n < 2:
        return False
    for p in _MR_BASES:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


@lru_cache(maxsize=None)
def _small_primes(limit: int) -> tuple[int, ...]:
    sieve = bytearray([1]) * (limit + 1)
    sieve[0:2] = b"\x00\x00"
    for i in range(2, math.isqrt(limit) + 1):
        if sieve[i]:
            sieve[i * i :: i] = bytearray(len(sieve[i * i :: i]))
    return tuple(i for i in range(limit + 1) if sieve[i])


def primes_up_to(limit: int) -> tuple[int, ...]:
    return _small_primes(limit)


def _pollard_brent(n: int, rng: random.Random) -> int:
    if n % 2 == 0:
        return 2
    while True:
        y, c, m = rng.randrange(1, n), rng.randrange(1, n), 128
        g = r = q = 1
        while g == 1:
            x = y
            for _ in range(r):
                y = (y * y + c) % n
            k = 0
            while k < r and g == 1:
                ys = y
                for _ in range(min(m, r - k)):
                    y = (y * y + c) % n
                    q = q * abs(x - y) % n
                g = math.gcd(q, n)
                k += m
            r *= 2
        if g == n:
            g = 1
            while g == 1:
                ys = (ys * ys + c) % n
                g = math.gcd(abs(x - ys), n)
        if g != n:
            return g


def _split(n: int, out: dict[int, int], mult: int, rng: random.Random) -> None:
    if n == 1:
        return
    if is_prime(n):
        out[n] = out.get(n, 0) + mult
        return
    for k in (2, 3, 5, 7):
        root, exact = gmpy2.iroot(n, k)
        if exact:
            _split(int(root), out, mult * k, rng)
            return
    d = _pollard_brent(n, rng)
    _split(d, out, mult, rng)
    _split(n // d, out, mult, rng)


def factorize(m: int, budget: int = FACTOR_BUDGET) -> Factorization:
    """Prime factorization of m >= 1.

    Trial division by primes below 10**6, then perfect-power detection and
    Pollard-Brent rho on what is left.  The rho stage runs only when the
    cofactor is at most ``budget``; otherwise FactoringBudgetError is raised.
    The rho seed is fixed, so results (and timings) are reproducible.
    """
    if m < 1:
        raise ValueError("factorize expects a positive integer")
    value, out = m, {}
    for p in _small_primes(1000):
        if m % p == 0:
            e = 0
            while m % p == 0:
                m //= p
                e += 1
            out[p] = e
    if m > 1 and not is_prime(m):
        for p in _small_primes(TRIAL_LIMIT)[168:]:
            if p * p > m:
                break
            if m % p == 0:
                e = 0
                while m % p == 0:
                    m //= p
                    e += 1
                out[p] = e
    if m > 1:
        if m > budget and not is_prime(m):
            raise FactoringBudgetError(f"cofactor {m} exceeds factoring budget {budget}")
        _split(m, out, 1, random.Random(0x5EED))
    return Factorization(value, tuple(sorted(out.items())))


def is_squarefree(m: int, budget: int = FACTOR_BUDGET) -> bool:
    return all(e == 1 for _, e in factorize(m, budget))


def valuation(x: int | Fraction, p: int) -> int:
    """p-adic valuation of a nonzero rational."""
    if x == 0:
        raise ValueError("valuation of zero is undefined")
    x = Fraction(x)
    num, den = abs(x.numerator), x.denominator
    v = 0
    while num % p == 0:
        num //= p
        v += 1
    while den % p == 0:
        den //= p
        v -= 1
    return v


def vp(x: int, p: int) -> int:
    """Valuation of an integer, with v_p(0) treated as +infinity (a large int)."""
    if x == 0:
        return 10**9
    return gmpy2.remove(gmpy2.mpz(x), p)[1]


def divisors(fac: Factorization) -> list[int]:
    divs = [1]
    for p, e in fac:
        divs = [d * p**k for d in divs for k in range(e + 1)]
    return sorted(divs)


def poly_eval(coeffs: list[int], x: int) -> int:
    acc = 0
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


_FILTER_PRIME = (1 << 61) - 1


def integer_roots(coeffs: list[int], budget: int = FACTOR_BUDGET) -> list[int]:
    """Distinct integer roots of a monic integer polynomial (ascending coefficients).

    Every integer root divides the constant term once the power of x is
    stripped, and lies within the Cauchy bound.  Candidates are screened
    modulo a Mersenne prime before the exact evaluation.
    """
    coeffs = list(coeffs)
    while len(coeffs) > 1 and coeffs[-1] == 0:
        coeffs.pop()
    if len(coeffs) < 2:
        raise ValueError("integer_roots expects degree >= 1")
    if coeffs[-1] != 1:
        raise ValueError("polynomial must be monic")
    roots = set()
    if coeffs[0] == 0:
        roots.add(0)
        while coeffs[0] == 0:
            coeffs.pop(0)
    if len(coeffs) == 1:
        return sorted(roots)
    bound = 1 + max(abs(c) for c in coeffs[:-1])
    reduced = [c % _FILTER_PRIME for c in coeffs]
    for d in divisors(factorize(abs(coeffs[0]), budget)):
        if d > bound:
            break
        for r in (d, -d):
            if poly_eval(reduced, r % _FILTER_PRIME) % _FILTER_PRIME:
                continue
            if poly_eval(coeffs, r) == 0:
                roots.add(r)
    return sorted(roots)


def legendre(a: int, p: int) -> int:
    a %= p
    if a == 0:
        return 0
    return 1 if pow(a, (p - 1) // 2, p) == 1 else -1


def sqrt_mod(a: int, p: int) -> int | None:
    """A square root of a modulo an odd prime p (Tonelli-Shanks), or None."""
    a %= p
    if a == 0:
        return 0
    if p == 2:
        return a
    if pow(a, (p - 1) // 2, p) != 1:
        return None
    if p % 4 == 3:
        return pow(a, (p + 1) // 4, p)
    q, s = p - 1, 0
    while q % 2 == 0:
        q //= 2
        s += 1
    z = 2
    while pow(z, (p - 1) // 2, p) != p - 1:
        z += 1
    m, c, t, r = s, pow(z, q, p), pow(a, q, p), pow(a, (q + 1) // 2, p)
    while t != 1:
        i, t2 = 0, t
        while t2 != 1:
            t2 = t2 * t2 % p
            i += 1
        b = pow(c, 1 << (m - i - 1), p)
        m, c, t, r = i, b * b % p, t * b * b % p, r * b % p
    return r
