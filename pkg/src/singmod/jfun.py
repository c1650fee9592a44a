"""The j-function: exact q-expansion coefficients, certified evaluation on the
fundamental domain, and certified checks of the explicit expansion constants
valid for Im(tau) >= 5.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath
from mpmath import iv, mp, mpf

from .ball import Ball
from .errors import DomainError, PrecisionError
from .quadforms import Discriminant, ReducedForm, as_discriminant, reduced_forms

MAX_COEFFICIENTS = 10_000
PRECISION_CAP = 16384

# -- exact coefficients -------------------------------------------------------


def _sigma_table(n: int, k: int) -> list[int]:
    sig = [0] * (n + 1)
    for d in range(1, n + 1):
        dk = d**k
        for m in range(d, n + 1, d):
            sig[m] += dk
    return sig


def _mul_series(a: list[int], b: list[int], n: int) -> list[int]:
    out = [0] * (n + 1)
    for i, ai in enumerate(a[: n + 1]):
        if ai:
            for j in range(0, n + 1 - i):
                out[i + j] += ai * b[j]
    return out


def _inverse_eta24(n: int) -> list[int]:
    """Coefficients of prod (1 - q^m)^(-24) via the log-derivative recurrence."""
    sig1 = _sigma_table(n, 1)
    p = [1] + [0] * n
    for m in range(1, n + 1):
        p[m] = 24 * sum(sig1[k] * p[m - k] for k in range(1, m + 1)) // m
    return p


_COEFF_CACHE: list[int] = []


def _coefficients_upto(n: int) -> list[int]:
    """[c_{-1}, c_0, ..., c_n] from E4^3 / Delta, cached."""
    global _COEFF_CACHE
    if len(_COEFF_CACHE) >= n + 2:
        return _COEFF_CACHE[: n + 2]
    m = max(n + 1, 2 * len(_COEFF_CACHE), 64)
    sig3 = _sigma_table(m, 3)
    e4 = [1] + [240 * s for s in sig3[1:]]
    e4cube = _mul_series(_mul_series(e4, e4, m), e4, m)
    # c_{k} is the coefficient of q^(k+1) in E4^3 / prod(1-q^m)^24
    _COEFF_CACHE = _mul_series(e4cube, _inverse_eta24(m), m)
    return _COEFF_CACHE[: n + 2]


@dataclass(frozen=True)
class Coefficients:
    """c_{-1}, c_0, ..., c_n of the j-function."""

    c: tuple[int, ...]

    def __getitem__(self, k: int) -> int:
        if k < -1:
            raise IndexError(k)
        return self.c[k + 1]

    def __len__(self):
        return len(self.c)

    @property
    def n(self) -> int:
        return len(self.c) - 2


def j_coefficients(n: int) -> Coefficients:
    if n < 0 or n > MAX_COEFFICIENTS:
        raise DomainError(f"coefficient index must be in [0, {MAX_COEFFICIENTS}]")
    return Coefficients(tuple(_coefficients_upto(n)))


# -- a rigorous majorant for the coefficients -----------------------------------
#
# All c_k are positive, so c_k r^k <= j(i t) whenever r = exp(-2 pi t) is real.
# We bound j at r = exp(-pi/4) from above using j = E4^3 / Delta with
# elementary tail estimates, in interval arithmetic.  Then
#     sum_{k > n} c_k |q|^k <= M * sum_{k > n} (|q|/r)^k.

_MAJ_T = Fraction(1, 8)
_MAJORANT: tuple[mpf, mpf] | None = None


def coefficient_majorant() -> tuple[mpf, mpf]:
    """(M, r) with c_k <= M r^(-k) for every k >= -1 (rigorous upper bounds)."""
    global _MAJORANT
    if _MAJORANT is not None:
        return _MAJORANT
    N = 200
    old = iv.prec
    iv.prec = 200
    try:
        r = iv.exp(-2 * iv.pi * iv.mpf(_MAJ_T.numerator) / _MAJ_T.denominator)
        sig3 = _sigma_table(N, 3)
        e4 = iv.mpf(1)
        rn = iv.mpf(1)
        prod = iv.mpf(1)
        for m in range(1, N + 1):
            rn = rn * r
            e4 = e4 + 240 * sig3[m] * rn
            prod = prod * (1 - rn) ** 24
        rN1 = rn * r
        # sigma_3(m) <= m^4; sum_{m>N} m^4 r^m <= (N+1)^4 r^(N+1) / (1 - rho)
        rho = r * iv.mpf(N + 2) ** 4 / iv.mpf(N + 1) ** 4
        e4_tail = 240 * iv.mpf(N + 1) ** 4 * rN1 / (1 - rho)
        e4_upper = (e4 + e4_tail).b
        # log(1 - x) >= -x/(1 - x), summed over m > N
        log_tail = -24 * rN1 / ((1 - r) * (1 - rN1))
        delta_lower = (r * prod * iv.exp(log_tail)).a
        M = iv.mpf(e4_upper) ** 3 / iv.mpf(delta_lower)
        _MAJORANT = (mpf(M.b), mpf(r.a))
    finally:
        iv.prec = old
    return _MAJORANT


def tail_bound(q_abs_upper, n: int) -> mpf:
    """Upper bound for sum_{k > n} c_k |q|^k given an upper bound on |q|."""
    M, r = coefficient_majorant()
    x = mpmath.fdiv(q_abs_upper, r, prec=64, rounding="u")
    if x >= 1:
        raise DomainError("|q| too large for the coefficient majorant")
    num = mpmath.fmul(M, mpmath.power(x, n + 1), prec=64, rounding="u")
    return mpmath.fdiv(num, 1 - x, prec=64, rounding="u") * (1 + mpf(2) ** -50)


def _terms_needed(q_abs_upper, target_log2: float) -> int:
    """Smallest n with tail_bound(|q|, n) below 2^target_log2 (estimate)."""
    M, r = coefficient_majorant()
    ratio = mpmath.mpf(q_abs_upper) / r
    per_term = -float(mpmath.log(ratio, 2))
    extra = float(mpmath.log(M, 2)) - float(mpmath.log(1 - ratio, 2)) - target_log2
    return max(2, math.ceil(extra / per_term) + 1)


# -- evaluation -----------------------------------------------------------------

_SQRT3_HALF = math.sqrt(3) / 2
_IM_TOLERANCE = 1e-12


def _to_ball(tau) -> Ball:
    if isinstance(tau, Ball):
        return tau
    if isinstance(tau, (int, float, complex)):
        # binary floating inputs are exact
        return Ball(mpmath.mpc(tau), 0)
    return Ball.exact(mpmath.mpc(tau))


def _eval_j_once(tau: Ball, bits: int) -> Ball:
    two_pi_i = (Ball.pi() * 2).mul_i()
    q = (two_pi_i * tau).exp()
    qa = q.abs_upper()
    n = _terms_needed(qa, -(bits + 8))
    if n > MAX_COEFFICIENTS:
        raise PrecisionError("coefficient cap reached")
    c = _coefficients_upto(n)
    acc = Ball.exact(c[n + 1])
    for k in range(n - 1, -1, -1):
        acc = acc * q + c[k + 1]
    value = q.inverse() + acc
    return Ball(value.mid, value.rad + tail_bound(qa, n))


def _target_met(ball: Ball, bits: int) -> bool:
    eps = mpf(2) ** (-bits)
    return ball.rad <= eps * ball.abs_lower() + eps


def _check_height(tau: Ball):
    if tau.mid.imag - tau.rad < _SQRT3_HALF - _IM_TOLERANCE:
        raise DomainError("Im(tau) must be at least sqrt(3)/2")


def eval_j_with(make_tau, precision_bits: int) -> Ball:
    """Evaluate j at the point produced by make_tau() at the current precision.

    Precision doubles until the radius meets 2^-p |j| + 2^-p or the cap is hit.
    """
    with mp.workprec(64):
        probe = make_tau()
    _check_height(probe)
    height = float(probe.mid.imag)
    prec = precision_bits + 48 + int(2 * math.pi * height / math.log(2))
    cap = max(PRECISION_CAP, prec)
    while prec <= cap:
        with mp.workprec(prec):
            tau = make_tau()
            _check_height(tau)
            try:
                value = _eval_j_once(tau, precision_bits)
            except PrecisionError:
                break
            if _target_met(value, precision_bits):
                return value
        prec *= 2
    raise PrecisionError(f"could not reach {precision_bits} bits within the {PRECISION_CAP}-bit cap")


def eval_j(tau, precision_bits: int) -> Ball:
    """Certified enclosure of j(tau) for Im(tau) >= sqrt(3)/2.

    tau may be a Ball, an exact binary number, or a zero-argument callable
    that builds the point at the ambient precision (so it can be refined).
    """
    if callable(tau):
        return eval_j_with(tau, precision_bits)
    t = _to_ball(tau)
    return eval_j_with(lambda: t, precision_bits)


def tau_ball(form: ReducedForm) -> Ball:
    """(b + i sqrt|delta|) / (2a) at the current precision."""
    n = -form.discriminant
    return (Ball.sqrt_int(n).mul_i() + form.b) / (2 * form.a)


@dataclass(frozen=True)
class SingularPoint:
    form: ReducedForm
    delta: Discriminant
    tau: Ball
    q: Ball


def singular_point(form: ReducedForm, delta, bits: int = 128) -> SingularPoint:
    disc = as_discriminant(delta)
    if form.discriminant != disc.delta:
        raise DomainError("form does not belong to this discriminant")
    with mp.workprec(bits + 16):
        t = tau_ball(form)
        q = ((Ball.pi() * 2).mul_i() * t).exp()
    return SingularPoint(form, disc, t, q)


def singular_modulus(form: ReducedForm, delta, precision_bits: int = 128) -> Ball:
    disc = as_discriminant(delta)
    if form.discriminant != disc.delta:
        raise DomainError("form does not belong to this discriminant")
    return eval_j_with(lambda: tau_ball(form), precision_bits)


def singular_moduli(delta, precision_bits: int = 128) -> list[tuple[ReducedForm, Ball]]:
    disc = as_discriminant(delta)
    return [(f, singular_modulus(f, disc, precision_bits)) for f in reduced_forms(disc)]


def certified_integer_modulus(delta, precision_bits: int = 64) -> int:
    """The integer singular modulus of a class-number-one discriminant."""
    forms = reduced_forms(delta)
    if len(forms) != 1:
        raise DomainError("value is an integer only for class number one")
    bits = precision_bits
    while bits <= PRECISION_CAP:
        ball = singular_modulus(forms[0], delta, bits)
        n = ball.certified_integer()
        if n is not None:
            return n
        bits *= 2
    raise PrecisionError("could not certify the integer value")


# -- Lemma: |log(1+u)| <= |u|/(1-|u|), with truncated series -----------------


def log1p_enclosure(u, order: int) -> Ball:
    """Enclosure of log(1+u) from the degree-`order` Taylor polynomial.

    The truncation error after n terms is at most |u|^(n+1) / ((n+1)(1-|u|)).
    """
    if order < 1:
        raise DomainError("order must be positive")
    u = _to_ball(u)
    ua = u.abs_upper()
    if ua >= 1:
        raise DomainError("|u| must be below 1")
    total = Ball(0)
    power = Ball(1)
    for k in range(1, order + 1):
        power = power * u
        term = power / k
        total = total + term if k % 2 else total - term
    tail = mpmath.fdiv(mpmath.power(ua, order + 1), (order + 1) * (1 - ua), prec=64, rounding="u")
    return Ball(total.mid, total.rad + tail * (1 + mpf(2) ** -50))


# -- log|x| estimate -----------------------------------------------------------


def log_abs_estimate(delta, a: int, precision_bits: int = 128) -> tuple[Ball, Ball]:
    """(pi sqrt|delta| / a, exp(-3 sqrt|delta| / a)) for a <= 0.1 sqrt|delta|."""
    disc = as_discriminant(delta)
    if a < 1 or 100 * a * a > disc.abs:
        raise DomainError("estimate needs 1 <= a <= 0.1 sqrt|delta|")
    with mp.workprec(precision_bits + 32):
        s = Ball.sqrt_int(disc.abs) / a
        return Ball.pi() * s, (s * -3).exp()


def log_abs_sound_bound(delta, a: int, precision_bits: int = 128) -> tuple[Ball, Ball]:
    """(pi sqrt|delta| / a, 800 exp(-pi sqrt|delta| / a)), valid for Im(tau) >= 5."""
    disc = as_discriminant(delta)
    if a < 1 or 100 * a * a > disc.abs:
        raise DomainError("estimate needs 1 <= a <= 0.1 sqrt|delta|")
    with mp.workprec(precision_bits + 32):
        est = Ball.pi() * Ball.sqrt_int(disc.abs) / a
        return est, (-est).exp() * 800


def log_abs_value(form: ReducedForm, delta, precision_bits: int = 128) -> Ball:
    x = singular_modulus(form, delta, precision_bits)
    with mp.workprec(precision_bits + 32):
        return x.abs().log()


def lower_bound_check(delta, precision_bits: int | None = None) -> bool:
    """Every singular modulus of delta has |x| >= |delta|^-3 (certified)."""
    disc = as_discriminant(delta)
    if disc.delta == -3:
        raise DomainError("delta = -3 is excluded (j = 0)")
    bits = precision_bits or 64 + 3 * disc.abs.bit_length()
    threshold = Fraction(1, disc.abs**3)
    for f in reduced_forms(disc):
        while True:
            x = singular_modulus(f, disc, bits)
            with mp.workprec(bits + 32):
                verdict = Ball.exact(threshold).lt(x.abs())
            if verdict is not None:
                break
            bits *= 2
            if bits > PRECISION_CAP:
                raise PrecisionError("could not decide the lower bound")
        if not verdict:
            return False
    return True


# -- explicit constants for Im(tau) >= 5 ------------------------------------------


class _TaylorModel:
    """P(q) + O(err |q|^s) with exact rational data, valid for |q| <= R."""

    def __init__(self, poly, err, R: Fraction, s: int, D: int):
        self.R, self.s, self.D = R, s, D
        self.poly = [Fraction(0)] * (D + 1)
        self.err = Fraction(err)
        for k, c in enumerate(poly):
            self._add_term(k, Fraction(c))

    def _add_term(self, k, c):
        if k <= self.D:
            self.poly[k] += c
        else:
            self.err += abs(c) * self.R ** (k - self.s)

    def _sup(self) -> Fraction:
        return sum(abs(c) * self.R**k for k, c in enumerate(self.poly))

    def _new(self, poly, err):
        return _TaylorModel(poly, err, self.R, self.s, self.D)

    def __add__(self, other):
        return self._new([a + b for a, b in zip(self.poly, other.poly)], self.err + other.err)

    def scale(self, c: Fraction):
        return self._new([c * a for a in self.poly], abs(c) * self.err)

    def __mul__(self, other):
        out = self._new([], 0)
        for i, a in enumerate(self.poly):
            if a:
                for j, b in enumerate(other.poly):
                    out._add_term(i + j, a * b)
        out.err += self.err * other._sup() + other.err * self._sup() + self.err * other.err * self.R**self.s
        return out

    def log1p(self):
        """log(1 + u) for a model u without constant term."""
        assert self.poly[0] == 0
        U = sum(abs(c) * self.R ** (k - 1) for k, c in enumerate(self.poly) if k) + self.err * self.R ** (self.s - 1)
        if U * self.R >= 1:
            raise DomainError("|u| not below 1")
        n = self.D
        total = self._new([], 0)
        power = self._new([1], 0)
        for k in range(1, n + 1):
            power = power * self
            total = total + power.scale(Fraction((-1) ** (k + 1), k))
        tail = U ** (n + 1) * self.R ** (n + 1 - self.s) / ((n + 1) * (1 - U * self.R))
        total.err += tail
        return total

    def remainder_coefficient(self, keep: int) -> Fraction:
        """Bound C with |P(q) - sum_{k<keep} p_k q^k + err| <= C |q|^keep."""
        assert keep <= self.s
        c = sum(abs(self.poly[k]) * self.R ** (k - keep) for k in range(keep, self.D + 1))
        return c + self.err * self.R ** (self.s - keep)


def _frac_up(x: Fraction) -> mpf:
    return mpmath.fdiv(x.numerator, x.denominator, rounding="u")


def _upper_fraction(x: mpf, bits: int = 200) -> Fraction:
    """A rational upper bound for the real number x."""
    return Fraction(math.ceil(x * mpf(2) ** bits) + 1, 2**bits)


def _series_sum_upper(q_upper: mpf, start: int, shift: int, bits: int) -> mpf:
    """Upper bound for sum_{k >= start} c_k q^(k - shift) at real q in (0, q_upper]."""
    n = max(start + 1, _terms_needed(q_upper, -(bits + 8)))
    c = _coefficients_upto(n)
    old = iv.prec
    iv.prec = bits + 32
    try:
        q = iv.mpf(q_upper)
        s = iv.mpf(0)
        qk = q ** (start - shift)
        for k in range(start, n + 1):
            s += c[k + 1] * qk
            qk *= q
        s += iv.mpf(tail_bound(q_upper, n)) / q**shift
        return mpf(s.b)
    finally:
        iv.prec = old


@dataclass(frozen=True)
class ConstantCheck:
    name: str
    constant: Fraction
    majorant: mpf
    margin: mpf
    ok: bool

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "constant": str(self.constant),
            "majorant": mpmath.nstr(self.majorant, 20),
            "margin": mpmath.nstr(self.margin, 20),
            "ok": self.ok,
        }


def verify_expansion_constants(precision_bits: int = 256) -> list[ConstantCheck]:
    """Certify each explicit constant of the Im(tau) >= 5 expansions."""
    checks = []

    def record(name, constant, majorant):
        constant = Fraction(constant)
        c = mpf(constant.numerator) / constant.denominator
        checks.append(ConstantCheck(name, constant, majorant, c - majorant, majorant < c))

    with mp.workprec(precision_bits + 32):
        q5 = mpmath.fmul(mpmath.exp(-10 * mpmath.pi), 1 + mpf(2) ** -precision_bits, rounding="u")
        q_floor = mpmath.fmul(mpmath.exp(-mpmath.pi * mpmath.sqrt(3)), 1 + mpf(2) ** -precision_bits, rounding="u")
        R = _upper_fraction(q5)

        # |j_0 q^-1| <= e^{10 pi} j_0(5i) and |j_1 q^-2| <= e^{20 pi} j_1(5i)
        k7 = _series_sum_upper(q5, 1, 1, precision_bits)
        k8 = _series_sum_upper(q5, 2, 2, precision_bits)
        record("j0_at_5i", 200000, k7)
        record("j1_at_5i", 30000000, k8)

        # log(qj) to first order, seeded with the displayed constant 2e5
        qj1 = _TaylorModel([0, 744], 200000, R, 2, 2)
        log1 = qj1.log1p()
        record("log_qj_first_order", 500000, _frac_up(log1.remainder_coefficient(2)))

        # log(qj) to second order, seeded with the displayed constant 3e7
        qj2 = _TaylorModel([0, 744, 196884], 30000000, R, 3, 3)
        log2 = qj2.log1p()
        assert log2.poly[1] == 744 and log2.poly[2] == -79884
        record("log_qj_second_order", 200000000, _frac_up(log2.remainder_coefficient(3)))

        # log|j| - 2 pi v = Re log(qj), bounded using the first-order constant 5e5
        k9 = 744 + Fraction(500000) * R
        record("log_abs_j", 800, _frac_up(k9))

        # |j| <= e^{2 pi v} + 744 + j_0 at the fundamental-domain floor
        k12a = mpmath.fadd(744, _series_sum_upper(q_floor, 1, 0, precision_bits), rounding="u")
        record("j0_floor_plus_744", 2079, k12a)
        # log(1 + 2079 e^{-2 pi V}) <= 2079 e^{-2 pi V} / (1 - 2079 e^{-2 pi V}) for V >= 5
        k12b = Fraction(2079) / (1 - 2079 * R)
        record("log_cap_constant", 3000, _frac_up(k12b))
    return checks
