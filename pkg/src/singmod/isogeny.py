"""Isogeny criteria for CM points, in exact arithmetic.

Points tau = (b + sqrt(delta)) / (2a) are carried as integer triples
(b, a, delta); two points are compared inside Q(sqrt(delta)) after
checking that their discriminants differ by a rational square.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .arith import factor
from .errors import DomainError
from .quadforms import Discriminant, ReducedForm, as_discriminant


@dataclass(frozen=True)
class RatioSet:
    n: int
    ratios: tuple[Fraction, ...]

    def __contains__(self, x) -> bool:
        return Fraction(x) in self.ratios

    def __iter__(self):
        return iter(self.ratios)

    def __len__(self):
        return len(self.ratios)


def q_set(n: int) -> RatioSet:
    """{r/s : r*s = n}."""
    if n < 1:
        raise DomainError("n must be positive")
    ratios = {Fraction(d, n // d) for d in factor(n).divisors()}
    return RatioSet(n, tuple(sorted(ratios)))


def _sqrt_ratio(delta_w: int, delta_z: int) -> Fraction | None:
    """sqrt(delta_w / delta_z) if rational, else None."""
    r = Fraction(delta_w, delta_z)
    num, den = math.isqrt(r.numerator), math.isqrt(r.denominator)
    if num * num == r.numerator and den * den == r.denominator:
        return Fraction(num, den)
    return None


def _im_at_least(point, n: int) -> bool:
    b, a, delta = point
    # Im = sqrt|delta| / (2a) >= n
    return -delta >= 4 * a * a * n * n


def isogenous_upper_triangular(z, w, n: int) -> bool:
    """Whether w = (p z + q) / s for integers p, s > 0 with p s = n, gcd(p, q, s) = 1.

    z and w are exact points (b, a, delta) meaning (b + sqrt(delta)) / (2a);
    the criterion is only asserted when Im z >= n.
    """
    if n < 1:
        raise DomainError("n must be positive")
    if not _im_at_least(z, n):
        raise DomainError("criterion requires Im z >= n")
    bz, az, dz = z
    bw, aw, dw = w
    ratio = _sqrt_ratio(dw, dz)
    if ratio is None:
        return False
    # (p z + q)/s = w  <=>  p/(az s) = ratio/aw  and  p bz/(2 az s) + q/s = bw/(2 aw)
    for p in factor(n).divisors():
        s = n // p
        if Fraction(p, az * s) != ratio / aw:
            continue
        q = s * Fraction(bw, 2 * aw) - p * Fraction(bz, 2 * az)
        if q.denominator == 1 and math.gcd(math.gcd(p, q.numerator), s) == 1:
            return True
    return False


def admissible_denominators(n: int, source: tuple[int, int], target_f: int, delta_bound_ok: bool) -> list[int]:
    """All positive integers a_y with (a_y / target_f) / (a / f) in Q(n).

    `delta_bound_ok` asserts |delta_x|^(1/2) >= 2 n a, without which the
    ratio constraint is not available.
    """
    if not delta_bound_ok:
        raise DomainError("the denominator rule needs |delta_x|^(1/2) >= 2 n a_x")
    a, f = source
    scale = Fraction(a * target_f, f)
    out = {scale * r for r in q_set(n)}
    return sorted(int(x) for x in out if x.denominator == 1)


def _dominant_core_ratio(dx: Discriminant, dy: Discriminant) -> tuple[int, int] | None:
    """(e_x, e_y) coprime with dx / e_x^2 = dy / e_y^2, or None."""
    r = _sqrt_ratio(dx.delta, dy.delta)
    if r is None:
        return None
    return r.numerator, r.denominator


def construct_isogeny_degree(x: tuple[ReducedForm, Discriminant], y: tuple[ReducedForm, Discriminant]) -> int | None:
    """Degree of an explicit isogeny between two CM points, when one is known.

    Same discriminant with coprime denominators gives a_x a_y; two dominant
    points whose discriminants differ by coprime square factors e_x^2, e_y^2
    give e_x e_y; two subdominant points of one discriminant are equal or
    4-isogenous.
    """
    fx, dx = x[0], as_discriminant(x[1])
    fy, dy = y[0], as_discriminant(y[1])
    if dx.delta == dy.delta:
        if math.gcd(fx.a, fy.a) == 1:
            return fx.a * fy.a
        if fx.a == 2 and fy.a == 2:
            return 1 if fx == fy else 4
        return None
    if fx.a == 1 and fy.a == 1:
        es = _dominant_core_ratio(dx, dy)
        if es is not None:
            return es[0] * es[1]
    return None


def point_of(form: ReducedForm) -> tuple[int, int, int]:
    return form.tau()
