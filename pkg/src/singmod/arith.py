"""Integer and rational foundations: factorization, multiplicative functions,
Kronecker symbol."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .errors import DomainError

# Exact rationals are the stdlib Fraction: always reduced, denominator > 0.
Rational = Fraction

_TRIAL_LIMIT = 1 << 16
_MAX_ABS = 1 << 63


def _small_primes(limit: int) -> list[int]:
    sieve = bytearray([1]) * (limit + 1)
    sieve[0:2] = b"\x00\x00"
    for i in range(2, math.isqrt(limit) + 1):
        if sieve[i]:
            sieve[i * i :: i] = bytearray(len(range(i * i, limit + 1, i)))
    return [i for i in range(limit + 1) if sieve[i]]


SMALL_PRIMES = _small_primes(_TRIAL_LIMIT)


@dataclass(frozen=True)
class Factored:
    value: int
    factors: tuple[tuple[int, int], ...]

    def __post_init__(self):
        prod = 1
        last = 1
        for p, e in self.factors:
            if p <= last or e < 1:
                raise ValueError("factors must have increasing primes and positive exponents")
            last = p
            prod *= p**e
        if prod != abs(self.value):
            raise ValueError("factorization does not multiply back to |value|")

    @property
    def primes(self) -> list[int]:
        return [p for p, _ in self.factors]

    @property
    def omega(self) -> int:
        return len(self.factors)

    def is_squarefree(self) -> bool:
        return all(e == 1 for _, e in self.factors)

    def divisors(self) -> list[int]:
        divs = [1]
        for p, e in self.factors:
            divs = [d * p**k for d in divs for k in range(e + 1)]
        return sorted(divs)


# Deterministic Miller-Rabin witnesses for n < 3.3e24.
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)


def is_probable_prime(n: int) -> bool:
    """Miller-Rabin with a witness set that is deterministic below 3.3e24."""
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
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _pollard_rho(n: int) -> int:
    if n % 2 == 0:
        return 2
    # Fixed seed keeps factor() deterministic.
    rng = random.Random(n)
    while True:
        c = rng.randrange(1, n)
        y = rng.randrange(0, n)
        m, g, r, q = 128, 1, 1, 1
        x = ys = y
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


def _split_large(n: int, out: dict[int, int]) -> None:
    if n == 1:
        return
    if is_probable_prime(n):
        out[n] = out.get(n, 0) + 1
        return
    d = _pollard_rho(n)
    _split_large(d, out)
    _split_large(n // d, out)


@lru_cache(maxsize=1 << 16)
def factor(n: int) -> Factored:
    """Prime factorization of a nonzero integer with |n| <= 2^63.

    >>> factor(446185740).omega
    9
    """
    if n == 0:
        raise DomainError("cannot factor zero")
    if abs(n) > _MAX_ABS:
        raise DomainError("factor() supports |n| <= 2^63")
    m = abs(n)
    found: dict[int, int] = {}
    for p in SMALL_PRIMES:
        if p * p > m:
            break
        if m % p == 0:
            e = 0
            while m % p == 0:
                m //= p
                e += 1
            found[p] = e
    if m > 1:
        if m < _TRIAL_LIMIT * _TRIAL_LIMIT:
            found[m] = found.get(m, 0) + 1
        else:
            _split_large(m, found)
    return Factored(n, tuple(sorted(found.items())))


def omega(n: int) -> int:
    return factor(n).omega


def euler_phi(n: int) -> int:
    if n < 1:
        raise DomainError("phi is defined for positive integers")
    result = n
    for p, _ in factor(n).factors:
        result = result // p * (p - 1)
    return result


def mobius(n: int) -> int:
    if n < 1:
        raise DomainError("mobius is defined for positive integers")
    f = factor(n)
    if not f.is_squarefree():
        return 0
    return -1 if f.omega % 2 else 1


def squarefree_part(n: int) -> tuple[int, int]:
    """Write n = s * r^2 with s squarefree (sign kept on s); return (s, r)."""
    s = -1 if n < 0 else 1
    r = 1
    for p, e in factor(n).factors:
        r *= p ** (e // 2)
        if e % 2:
            s *= p
    return s, r


def jacobi(a: int, n: int) -> int:
    if n <= 0 or n % 2 == 0:
        raise DomainError("jacobi symbol needs an odd positive modulus")
    a %= n
    result = 1
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


def kronecker(D: int, n: int) -> int:
    """Kronecker symbol (D/n), extended to all integers n."""
    if n == 0:
        return 1 if abs(D) == 1 else 0
    result = 1
    if n < 0:
        n = -n
        if D < 0:
            result = -result
    v = 0
    while n % 2 == 0:
        n //= 2
        v += 1
    if v:
        if D % 2 == 0:
            return 0
        if v % 2 and D % 8 in (3, 5):
            result = -result
    if n == 1:
        return result
    return result * jacobi(D, n)


def sqrt_mod_prime(a: int, p: int) -> int | None:
    """A square root of a modulo an odd prime p (Tonelli-Shanks), or None."""
    a %= p
    if a == 0:
        return 0
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
