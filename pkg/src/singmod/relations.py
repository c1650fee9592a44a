"""Multiplicative relations among singular moduli: lattice norm bounds, the
linear-relation and inequality criteria, and exact verification.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from mpmath import mp

from .arith import factor
from .ball import Ball
from .errors import DomainError, PrecisionError, ResourceError
from .quadforms import Discriminant, ReducedForm, as_discriminant

# -- lattice norm bounds ----------------------------------------------------------


def c_ell(ell: int) -> int:
    """3^(4^ell + 2^(ell+1) + 8)."""
    if ell < 1:
        raise DomainError("ell must be positive")
    return 3 ** (4**ell + 2 ** (ell + 1) + 8)


def height_floor_exponent(d: int) -> int:
    """Heights of non-torsion points in an abelian extension of a degree-d field
    are at least 3^-(d^2 + 2d + 6); this returns d^2 + 2d + 6."""
    return d * d + 2 * d + 6


def _ceil_times_sqrt(m: int, x: int) -> int:
    """ceil(m * sqrt(x)) for m, x >= 0."""
    n = m * m * x
    if n == 0:
        return 0
    r = math.isqrt(n - 1) + 1
    return r


def masser_basis_bound(k: int, X: int, ell: int) -> int:
    """ceil(24 (c(ell) k X^(1/2))^(k-1)), computed exactly."""
    if k < 1 or X < 1:
        raise DomainError("k and X must be positive")
    t = k - 1
    base = 24 * (c_ell(ell) * k) ** t
    if t % 2 == 0:
        return base * X ** (t // 2)
    return _ceil_times_sqrt(base * X ** (t // 2), X)


def masser_generic_bound(k: int, h, eta, omega: int) -> int:
    """ceil(omega (k h / eta)^(k-1)) for rational h >= 0 and eta > 0."""
    h, eta = Fraction(h), Fraction(eta)
    if eta <= 0:
        raise DomainError("eta must be positive")
    if h < 0 or k < 1:
        raise DomainError("need h >= 0 and k >= 1")
    return math.ceil(omega * (k * h / eta) ** (k - 1))


def masser_bound_from_heights(k: int, X: int, ell: int, height_factor: int = 4) -> int:
    """Masser's bound with h = height_factor * X^(1/2) (rounded up to an integer
    square root), eta from the degree-2^ell height floor, omega = 24.

    height_factor 4 covers relations among moduli; 8 covers quotients x_i / x_i'.
    """
    d = 2**ell
    h = height_factor * (math.isqrt(X - 1) + 1 if X > 1 else 1)
    eta = Fraction(1, 3 ** height_floor_exponent(d))
    return masser_generic_bound(k, h, eta, 24)


# -- relation instances ----------------------------------------------------------


@dataclass(frozen=True)
class Term:
    delta: Discriminant
    form: ReducedForm
    exponent: int

    @property
    def a(self) -> int:
        return self.form.a


@dataclass(frozen=True)
class RelationInstance:
    terms: tuple[Term, ...]

    def __post_init__(self):
        if not self.terms:
            raise DomainError("a relation needs at least one term")
        for t in self.terms:
            if t.exponent == 0:
                raise DomainError("exponents must be nonzero")
            if t.form.discriminant != t.delta.delta:
                raise DomainError(f"form {tuple(t.form)} does not have discriminant {t.delta.delta}")

    @classmethod
    def of(cls, items) -> "RelationInstance":
        """From (delta, form, exponent) triples; forms may be given as (a, b, c)."""
        terms = []
        for delta, form, m in items:
            if not isinstance(form, ReducedForm):
                form = ReducedForm(*form)
            terms.append(Term(as_discriminant(delta), form, int(m)))
        return cls(tuple(terms))

    @property
    def k(self) -> int:
        return len(self.terms)

    @property
    def X(self) -> int:
        return max(t.delta.abs for t in self.terms)

    @property
    def Y(self) -> int:
        return min(t.delta.abs for t in self.terms)

    @property
    def norm_m(self) -> int:
        return max(abs(t.exponent) for t in self.terms)

    @property
    def fundamental(self) -> int:
        ds = {t.delta.fundamental for t in self.terms}
        if len(ds) != 1:
            raise DomainError("terms do not share one fundamental discriminant")
        return ds.pop()

    @property
    def f(self) -> int:
        return math.gcd(*[t.delta.conductor for t in self.terms])

    @property
    def core_abs_delta(self) -> int:
        """|D f^2| with f the gcd of the conductors."""
        return -self.fundamental * self.f**2

    def e(self, t: Term) -> int:
        return t.delta.conductor // self.f

    def m_prime(self) -> list[int]:
        return [self.e(t) * t.exponent for t in self.terms]

    @property
    def norm_m_prime(self) -> int:
        return max(abs(v) for v in self.m_prime())


# -- certified decisions ------------------------------------------------------------


def _decide(build, start_bits: int = 64, cap: int = 4096):
    """Evaluate build() -> (lhs, rhs) balls at rising precision until lhs vs rhs
    is decided; returns (lhs > rhs, lhs, rhs)."""
    bits = start_bits
    while bits <= cap:
        with mp.workprec(bits):
            lhs, rhs = build()
            verdict = rhs.lt(lhs)
        if verdict is not None:
            return verdict, lhs, rhs
        bits *= 2
    raise PrecisionError("comparison undecided at the precision cap (equal within radius)")


def _log(x) -> Ball:
    return Ball.exact(Fraction(x)).log()


def root_y_condition(k: int, A, X, Y) -> tuple[bool, Ball, Ball]:
    """Y^(1/2) > (1/3) A k (log X + log A + log k + 20)."""
    A, X, Y = Fraction(A), Fraction(X), Fraction(Y)

    def build():
        lhs = Ball.exact(Y).sqrt()
        rhs = Ball.exact(A * k / 3) * (_log(X) + _log(A) + _log(k) + 20)
        return lhs, rhs

    return _decide(build)


def delta_condition(k: int, A, eps, X, abs_delta) -> tuple[bool, Ball, Ball]:
    """|delta|^(1/2) >= max{k/eps log X, (1/3) A (log(k/eps) + 4)}.

    Decided as a strict inequality; a tie raises PrecisionError.
    """
    A, eps, X, abs_delta = Fraction(A), Fraction(eps), Fraction(X), Fraction(abs_delta)
    if not 0 < eps <= Fraction(1, 2) or A < 1:
        raise DomainError("need A >= 1 and 0 < eps <= 1/2")

    def build():
        lhs = Ball.exact(abs_delta).sqrt()
        r1 = Ball.exact(k / eps) * _log(X)
        r2 = Ball.exact(A / 3) * (_log(k / eps) + 4)
        rhs = r1 if r2.lt(r1) else r2 if r1.lt(r2) else Ball(max(r1.mid.real, r2.mid.real), max(r1.rad, r2.rad) + abs(r1.mid - r2.mid))
        return lhs, rhs

    return _decide(build)


def check_linear_relation_hypothesis(inst: RelationInstance, A) -> bool:
    """Whether the instance satisfies the root-Y condition with this A."""
    inst.fundamental  # raises on mixed fundamental discriminants
    if any(t.a > A for t in inst.terms):
        raise DomainError("every denominator must be at most A")
    return root_y_condition(inst.k, A, inst.X, inst.Y)[0]


@dataclass(frozen=True)
class LinearRelation:
    coefficients: tuple[Fraction, ...]
    sum: Fraction


def derive_linear_relation(inst: RelationInstance, A) -> LinearRelation:
    """sum f(x_i)/a(x_i) m_i, which must vanish when the relation holds."""
    if not check_linear_relation_hypothesis(inst, A):
        raise DomainError("root-Y condition fails; no linear relation can be derived")
    coeffs = tuple(Fraction(t.delta.conductor, t.a) * t.exponent for t in inst.terms)
    return LinearRelation(coeffs, sum(coeffs, Fraction(0)))


@dataclass(frozen=True)
class InequalityBounds:
    pos_lhs: Fraction
    pos_rhs: Fraction
    neg_lhs: Fraction
    neg_rhs: Fraction

    def holds(self) -> bool:
        return self.pos_lhs <= self.pos_rhs and self.neg_lhs <= self.neg_rhs


def inequality_bounds(inst: RelationInstance, A, eps) -> InequalityBounds:
    """The two sides of the positive- and negative-exponent inequalities.

    The |delta| condition is checked first, with |delta| = |D| f^2 for the
    gcd f of the conductors.
    """
    A, eps = Fraction(A), Fraction(eps)
    inst.fundamental
    ok, _, _ = delta_condition(inst.k, A, eps, inst.X, inst.core_abs_delta)
    if not ok:
        raise DomainError("|delta| condition fails for these A, eps")
    mp_ = inst.m_prime()
    slack = eps * inst.norm_m_prime
    pos_lhs = sum((Fraction(m, t.a) for t, m in zip(inst.terms, mp_) if t.a < A and m > 0), Fraction(0))
    pos_rhs = sum((Fraction(-m) / min(t.a, A) for t, m in zip(inst.terms, mp_) if m < 0), Fraction(0)) + slack
    neg_lhs = sum((Fraction(-m, t.a) for t, m in zip(inst.terms, mp_) if t.a < A and m < 0), Fraction(0))
    neg_rhs = sum((Fraction(m) / min(t.a, A) for t, m in zip(inst.terms, mp_) if m > 0), Fraction(0)) + slack
    return InequalityBounds(pos_lhs, pos_rhs, neg_lhs, neg_rhs)


def parameter_region_root_y(k: int, A, X_min: int, y_ratio) -> bool:
    """Root-Y condition for every k' <= k, A' <= A, X >= X_min, Y >= X / y_ratio.

    The right side grows with k and A, so the corner decides those; in X,
    sqrt(X / c) - (A k / 3) log X is increasing once sqrt(X) >= 2 sqrt(c) A k / 3.
    """
    c = Fraction(y_ratio)
    A = Fraction(A)
    if not root_y_condition(k, A, X_min, Fraction(X_min) / c)[0]:
        return False
    # monotone from X_min on: X_min >= (2 A k / 3)^2 c
    return Fraction(X_min) >= (2 * A * k / 3) ** 2 * c


def parameter_region_delta(k: int, A, eps, X_min: int, y_ratio) -> bool:
    """The |delta| condition over the same region, for a fixed eps."""
    c = Fraction(y_ratio)
    eps = Fraction(eps)
    if not delta_condition(k, A, eps, X_min, Fraction(X_min) / c)[0]:
        return False
    return Fraction(X_min) >= (2 * k / eps) ** 2 * c


def hypothesis_report(ok: bool, lhs: Ball, rhs: Ball, name: str) -> dict:
    return {
        "hypothesis": bool(ok),
        "lhs": lhs.to_str(25),
        "rhs": rhs.to_str(25),
        "verdict": f"{name} {'holds' if ok else 'fails'}",
    }


# -- exact verification and brute force -------------------------------------------------


def _as_exact_integer(v) -> int:
    if isinstance(v, Ball):
        n = v.certified_integer()
        if n is None:
            raise DomainError("value is not certified to an integer")
        return n
    if isinstance(v, Fraction):
        if v.denominator != 1:
            raise DomainError("exact check needs integer values")
        return v.numerator
    if isinstance(v, int):
        return v
    raise DomainError(f"unsupported value {v!r}")


def verify_relation_exact(values, exponents) -> bool:
    """prod v_i^m_i == 1, checked in exact integer arithmetic."""
    if len(values) != len(exponents):
        raise DomainError("values and exponents differ in length")
    ints = [_as_exact_integer(v) for v in values]
    if any(v == 0 for v in ints):
        raise DomainError("zero value")
    num, den = 1, 1
    for v, m in zip(ints, exponents):
        if m > 0:
            num *= v**m
        elif m < 0:
            den *= v ** (-m)
    return num == den


def hermite_basis(vectors) -> list[tuple[int, ...]]:
    """Echelon Z-basis of the lattice spanned by integer vectors."""
    rows = [list(v) for v in vectors if any(v)]
    if not rows:
        return []
    n = len(rows[0])
    basis = []
    col = 0
    while rows and col < n:
        active = [r for r in rows if r[col] != 0]
        rest = [r for r in rows if r[col] == 0]
        if not active:
            col += 1
            continue
        while len(active) > 1:
            active.sort(key=lambda r: abs(r[col]))
            pivot = active[0]
            nxt = [pivot]
            for r in active[1:]:
                q = r[col] // pivot[col]
                r = [x - q * y for x, y in zip(r, pivot)]
                (nxt if r[col] != 0 else rest).append(r)
            active = nxt
        pivot = active[0]
        if pivot[col] < 0:
            pivot = [-x for x in pivot]
        basis.append(pivot)
        rows = [r for r in rest if any(r)]
        col += 1
    # reduce entries above each pivot
    for i, row in enumerate(basis):
        pc = next(j for j, x in enumerate(row) if x)
        for k in range(i):
            q = basis[k][pc] // row[pc]
            if q:
                basis[k] = [x - q * y for x, y in zip(basis[k], row)]
    return [tuple(r) for r in basis]


def in_lattice(basis, v) -> bool:
    """Membership of v in the lattice with echelon basis `basis`."""
    v = list(v)
    for row in basis:
        pc = next(j for j, x in enumerate(row) if x)
        if v[pc] % row[pc]:
            return False
        q = v[pc] // row[pc]
        v = [x - q * y for x, y in zip(v, row)]
    return not any(v)


BRUTEFORCE_BUDGET = 30_000_000


def _exponent_matrix(values: list[int]) -> tuple[np.ndarray, np.ndarray]:
    primes = sorted({p for v in values for p, _ in factor(v).factors})
    mat = np.zeros((len(primes), len(values)), dtype=np.int64)
    for j, v in enumerate(values):
        for p, e in factor(v).factors:
            mat[primes.index(p), j] = e
    signs = np.array([1 if v < 0 else 0 for v in values], dtype=np.int64)
    return mat, signs


def relation_vectors(values, norm_cap: int) -> list[tuple[int, ...]]:
    """All nonzero m with |m_i| <= norm_cap and prod v_i^m_i = 1."""
    ints = [_as_exact_integer(v) for v in values]
    if any(v == 0 for v in ints):
        raise DomainError("zero value")
    k = len(ints)
    if (2 * norm_cap + 1) ** k > BRUTEFORCE_BUDGET:
        raise ResourceError(f"box of size {(2 * norm_cap + 1) ** k} exceeds the enumeration budget")
    mat, signs = _exponent_matrix(ints)
    rng = np.arange(-norm_cap, norm_cap + 1, dtype=np.int64)
    found = []
    # vectorize over the last coordinate block, loop over the leading ones
    lead = max(0, k - 3)
    tail_grid = np.array(list(itertools.product(rng, repeat=k - lead)), dtype=np.int64).reshape(-1, k - lead)
    for head in itertools.product(range(-norm_cap, norm_cap + 1), repeat=lead):
        h = np.array(head, dtype=np.int64)
        expo = tail_grid @ mat[:, lead:].T + (mat[:, :lead] @ h if lead else 0)
        sgn = (tail_grid @ signs[lead:] + (signs[:lead] @ h if lead else 0)) % 2
        ok = np.all(expo == 0, axis=1) & (sgn == 0)
        for row in tail_grid[ok]:
            v = tuple(int(x) for x in head) + tuple(int(x) for x in row)
            if any(v):
                found.append(v)
    verified = [v for v in found if verify_relation_exact(ints, v)]
    if len(verified) != len(found):
        raise ArithmeticError("factor-vector screen disagrees with exact verification")
    return verified


def relation_lattice_bruteforce(values, norm_cap: int) -> list[tuple[int, ...]]:
    """Basis of the lattice spanned by all relations in the box |m_i| <= norm_cap."""
    return hermite_basis(relation_vectors(values, norm_cap))
