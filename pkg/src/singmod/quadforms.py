"""Discriminants, reduced positive definite binary quadratic forms, class
numbers and the 2-part of the class group.

A form (a, b, c) stands for a*x^2 + b*x*y + c*y^2 of discriminant
b^2 - 4ac < 0.  The reduced set for a discriminant is the set of primitive
triples with -a < b <= a < c or 0 <= b <= a = c; it is in bijection with
the form classes, and the form with a = 1 is the principal ("dominant") one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

from .arith import factor, kronecker, omega, sqrt_mod_prime
from .errors import DomainError


@dataclass(frozen=True, order=True)
class Discriminant:
    delta: int
    fundamental: int
    conductor: int

    @property
    def d(self) -> int:
        return self.fundamental

    @property
    def f(self) -> int:
        return self.conductor

    @property
    def abs(self) -> int:
        return -self.delta

    def is_fundamental(self) -> bool:
        return self.conductor == 1

    def to_json(self) -> dict:
        return {"delta": str(self.delta), "d": str(self.fundamental), "f": str(self.conductor)}

    def __int__(self) -> int:
        return self.delta


def is_discriminant(delta: int) -> bool:
    return delta < 0 and delta % 4 in (0, 1)


def is_fundamental(D: int) -> bool:
    if not is_discriminant(D):
        return False
    if D % 4 == 1:
        return factor(D).is_squarefree()
    m = D // 4
    return m % 4 in (2, 3) and factor(m).is_squarefree()


@lru_cache(maxsize=1 << 14)
def split_discriminant(delta: int) -> Discriminant:
    """Split delta = D * f^2 with D a fundamental discriminant."""
    delta = int(delta)
    if not is_discriminant(delta):
        raise DomainError(f"{delta} is not a negative discriminant (need delta < 0, delta = 0,1 mod 4)")
    f = 1
    for p, e in factor(delta).factors:
        f *= p ** (e // 2)
    D = delta // (f * f)
    if D % 4 in (2, 3):
        # the squarefree kernel is 2,3 mod 4: one factor 2 of f belongs to D
        D *= 4
        f //= 2
    return Discriminant(delta, D, f)


def as_discriminant(delta) -> Discriminant:
    if isinstance(delta, Discriminant):
        return delta
    return split_discriminant(int(delta))


@dataclass(frozen=True, order=True)
class ReducedForm:
    a: int
    b: int
    c: int

    def __post_init__(self):
        a, b, c = self.a, self.b, self.c
        if a <= 0 or b * b - 4 * a * c >= 0:
            raise DomainError(f"({a},{b},{c}) is not positive definite")
        if math.gcd(math.gcd(a, b), c) != 1:
            raise DomainError(f"({a},{b},{c}) is not primitive")
        if not (-a < b <= a < c or 0 <= b <= a == c):
            raise DomainError(f"({a},{b},{c}) is not reduced")

    @property
    def discriminant(self) -> int:
        return self.b * self.b - 4 * self.a * self.c

    @property
    def is_dominant(self) -> bool:
        return self.a == 1

    @property
    def is_subdominant(self) -> bool:
        return self.a == 2

    def is_ambiguous(self) -> bool:
        return self.b == 0 or self.b == self.a or self.a == self.c

    def inverse(self) -> "ReducedForm":
        return reduce_form(self.a, -self.b, self.c)

    def tau(self) -> tuple[int, int, int]:
        """tau = (b + sqrt(delta)) / (2a) as the exact triple (b, a, delta)."""
        return (self.b, self.a, self.discriminant)

    def to_json(self) -> list:
        return [self.a, self.b, self.c]

    def __iter__(self):
        return iter((self.a, self.b, self.c))


def reduce_form(a: int, b: int, c: int) -> ReducedForm:
    """Reduced representative of the SL2(Z)-class of a primitive definite form."""
    if a <= 0 or b * b - 4 * a * c >= 0:
        raise DomainError(f"({a},{b},{c}) is not positive definite")
    if math.gcd(math.gcd(a, b), c) != 1:
        raise DomainError(f"({a},{b},{c}) is not primitive")
    delta = b * b - 4 * a * c
    while True:
        if not -a < b <= a:
            b = (b + a - 1) % (2 * a) - a + 1
            c = (b * b - delta) // (4 * a)
        if c < a:
            a, b, c = c, -b, a
            continue
        if a == c and b < 0:
            b = -b
        return ReducedForm(a, b, c)


# -- square roots modulo prime powers ---------------------------------------

def _roots_prime_power(D: int, p: int, e: int) -> list[int]:
    """All x mod p^e with x^2 = D mod p^e."""
    mod = p
    if p == 2:
        roots = [x for x in range(2) if (x * x - D) % 2 == 0]
    else:
        r = sqrt_mod_prime(D, p)
        if r is None:
            return []
        roots = sorted({r, (-r) % p})
    for _ in range(e - 1):
        nxt = mod * p
        if p != 2 and D % p:
            lifted = []
            for r in roots:
                # Hensel step; derivative 2r is a unit
                t = ((D - r * r) // mod) * pow(2 * r, -1, p) % p
                lifted.append(r + t * mod)
            roots = lifted
        else:
            roots = [r + t * mod for r in roots for t in range(p)
                     if ((r + t * mod) ** 2 - D) % nxt == 0]
        mod = nxt
    return roots


def sqrt_mod(D: int, m: int) -> list[int]:
    """Sorted list of all x in [0, m) with x^2 = D mod m."""
    roots, mod = [0], 1
    for p, e in factor(m).factors:
        pe = p**e
        rs = _roots_prime_power(D, p, e)
        if not rs:
            return []
        # CRT-combine current roots mod `mod` with roots mod pe
        inv = pow(mod, -1, pe)
        roots = [(x + mod * ((y - x) * inv % pe)) for x in roots for y in rs]
        mod *= pe
    return sorted(r % m for r in roots)


def _b_values(delta: int, a: int) -> list[int]:
    """b in (-a, a] with b^2 = delta mod 4a."""
    out = set()
    for r in sqrt_mod(delta, 4 * a):
        b = (r + a - 1) % (2 * a) - a + 1
        out.add(b)
    return sorted(out)


def forms_with_denominator(delta, a: int) -> list[ReducedForm]:
    delta = int(as_discriminant(delta).delta)
    forms = []
    for b in _b_values(delta, a):
        c = (b * b - delta) // (4 * a)
        if c < a or (c == a and b < 0):
            continue
        if math.gcd(math.gcd(a, b), c) != 1:
            continue
        forms.append(ReducedForm(a, b, c))
    return forms


def reduced_forms(delta) -> list[ReducedForm]:
    """The full reduced set for delta, sorted by (a, b)."""
    n = as_discriminant(delta).abs
    out = []
    for a in range(1, math.isqrt(n // 3) + 1):
        out.extend(forms_with_denominator(-n, a))
    return out


def class_number(delta) -> int:
    return len(reduced_forms(delta))


def admits_denominator(delta, a: int) -> bool:
    if a < 1:
        raise DomainError("denominators are positive")
    return bool(forms_with_denominator(delta, a))


def principal_form(delta) -> ReducedForm:
    n = as_discriminant(delta).abs
    if n % 4 == 0:
        return ReducedForm(1, 0, n // 4)
    return ReducedForm(1, 1, (n + 1) // 4)


# -- composition -------------------------------------------------------------

def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    """(u, v, d) with u*a + v*b = d = gcd(a, b) >= 0."""
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        return -x0, -y0, -a
    return x0, y0, a


def compose(f: ReducedForm, g: ReducedForm) -> ReducedForm:
    """Gauss composition of two classes of equal discriminant."""
    delta = f.discriminant
    if g.discriminant != delta:
        raise DomainError("cannot compose forms of different discriminants")
    (a1, b1, _), (a2, b2, c2) = tuple(f), tuple(g)
    if a1 > a2:
        (a1, b1, _), (a2, b2, c2) = tuple(g), tuple(f)
    s = (b1 + b2) // 2
    n = b2 - s
    if a2 % a1 == 0:
        y1, d = 0, a1
    else:
        u, _, d = _xgcd(a2, a1)
        y1 = u
    if s % d == 0:
        y2, x2, d1 = -1, 0, d
    else:
        u, v, d1 = _xgcd(s, d)
        x2, y2 = u, -v
    v1, v2 = a1 // d1, a2 // d1
    r = (y1 * y2 * n - x2 * c2) % v1
    b3 = b2 + 2 * v2 * r
    a3 = v1 * v2
    c3 = (b3 * b3 - delta) // (4 * a3)
    return reduce_form(a3, b3, c3)


def form_power(f: ReducedForm, k: int) -> ReducedForm:
    if k < 0:
        return form_power(f.inverse(), -k)
    result = principal_form(f.discriminant)
    base = f
    while k:
        if k & 1:
            result = compose(result, base)
        base = compose(base, base)
        k >>= 1
    return result


# -- 2-torsion ---------------------------------------------------------------

def ambiguous_forms(delta) -> list[ReducedForm]:
    """Reduced forms with b = 0, b = a or a = c, found from divisors of |delta|."""
    n = as_discriminant(delta).abs
    found = set()
    divs = factor(n).divisors()
    if n % 4 == 0:
        for a in factor(n // 4).divisors():
            c = n // 4 // a
            if a <= c and math.gcd(a, c) == 1:
                found.add((a, 0, c))
    for a in divs:
        w = n // a + a
        if w % 4 == 0:
            c = w // 4
            if c >= a and math.gcd(a, c) == 1:
                found.add((a, a, c))
    for u in divs:
        v = n // u
        if u < v < 3 * u and (u + v) % 4 == 0:
            a, b = (u + v) // 4, (v - u) // 2
            if math.gcd(a, b) == 1:
                found.add((a, b, a))
    return sorted(ReducedForm(*t) for t in found)


@dataclass(frozen=True)
class ClassGroupSummary:
    h: int
    two_torsion: int
    is_two_elementary: bool
    is_almost_two_elementary: bool

    @property
    def two_rank(self) -> int:
        return self.two_torsion.bit_length() - 1

    def to_json(self) -> dict:
        return {
            "h": str(self.h),
            "two_torsion": str(self.two_torsion),
            "two_elementary": self.is_two_elementary,
            "almost_two_elementary": self.is_almost_two_elementary,
        }


def summary_from(h: int, two_torsion: int) -> ClassGroupSummary:
    if two_torsion & (two_torsion - 1) or h % two_torsion:
        raise ArithmeticError(f"inconsistent 2-torsion {two_torsion} for class number {h}")
    return ClassGroupSummary(
        h=h,
        two_torsion=two_torsion,
        is_two_elementary=h == two_torsion,
        is_almost_two_elementary=(2 * two_torsion) % h == 0,
    )


def class_group_summary(delta, h: int | None = None) -> ClassGroupSummary:
    """Class number and 2-torsion; h may be supplied when already known."""
    disc = as_discriminant(delta)
    if h is None:
        h = class_number(disc)
    return summary_from(h, len(ambiguous_forms(disc)))


def genus_two_rank(delta) -> int:
    """2-rank from the genus count (Gauss), independent of form enumeration."""
    n = as_discriminant(delta).abs
    r = len([p for p, _ in factor(n).factors if p != 2])
    if n % 4 == 3:
        mu = r
    else:
        m = n // 4
        if m % 4 == 3:
            mu = r
        elif m % 4 in (1, 2):
            mu = r + 1
        elif m % 8 == 4:
            mu = r + 1
        else:
            mu = r + 2
    return mu - 1


def two_rank_claims(delta) -> list[str]:
    """Check the 2-rank bracket against omega(delta); return discrepancies."""
    disc = as_discriminant(delta)
    rho = class_group_summary(disc).two_rank
    w = omega(disc.delta)
    problems = []
    if rho not in (w, w - 1, w - 2):
        problems.append(f"rank {rho} outside [{w - 2}, {w}]")
    if disc.delta % 16 == 4 and rho != w - 2:
        problems.append(f"delta = 4 mod 16 but rank {rho} != omega - 2 = {w - 2}")
    if disc.conductor == 1 and rho not in (w - 1, w - 2):
        problems.append(f"fundamental but rank {rho} not in [{w - 2}, {w - 1}]")
    return problems


# -- class number formula ----------------------------------------------------

def psi(ell: int, delta) -> int:
    """ell * prod_{p | ell} (1 - (delta/p)/p), an integer."""
    if ell < 1:
        raise DomainError("ell must be positive")
    dv = int(as_discriminant(delta).delta) if not isinstance(delta, int) else delta
    num, den = ell, 1
    for p, _ in factor(ell).factors:
        num *= p - kronecker(dv, p)
        den *= p
    return num // den


def unit_index(delta, ell: int) -> int:
    dv = int(delta.delta) if isinstance(delta, Discriminant) else int(delta)
    if ell > 1 and dv == -3:
        return 3
    if ell > 1 and dv == -4:
        return 2
    return 1


def class_number_formula(delta, ell: int, h: int | None = None) -> int:
    """h(delta * ell^2) from h(delta)."""
    disc = as_discriminant(delta)
    if h is None:
        h = class_number(disc)
    num = h * psi(ell, disc.delta)
    u = unit_index(disc, ell)
    if num % u:
        raise ArithmeticError("class number formula gave a non-integer")
    return num // u


# -- denominator statistics ---------------------------------------------------

def max_forms_per_denominator(a: int) -> int:
    """s(a): the most b in (-a, a] sharing one value of b^2 mod 4a."""
    counts: dict[int, int] = {}
    for b in range(-a + 1, a + 1):
        r = b * b % (4 * a)
        counts[r] = counts.get(r, 0) + 1
    return max(counts.values())


def denominator_count_bounds(A: int) -> int:
    """Upper bound sum_{a < A} s(a) on the number of forms with a < A."""
    if A < 1:
        raise DomainError("A must be positive")
    return sum(max_forms_per_denominator(a) for a in range(1, A))
