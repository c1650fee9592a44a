"""Midpoint-radius complex balls on top of mpmath.

Midpoints are computed at the ambient ``mp.prec``; every operation adds an
explicit rounding allowance to the radius, and radii themselves are
accumulated with upward rounding.  Elementary functions (exp, log, sqrt, pi)
are taken from mpmath and assumed accurate to a few ulps; the allowance used
for them is 32 ulps.
"""

from __future__ import annotations

from fractions import Fraction

import mpmath
from mpmath import mp, mpc, mpf

from .errors import DomainError

RAD_PREC = 64


def _up(x) -> mpf:
    return mpmath.fadd(x, 0, prec=RAD_PREC, rounding="u")


def _add_up(*xs) -> mpf:
    s = mpf(0)
    for x in xs:
        s = mpmath.fadd(s, x, prec=RAD_PREC, rounding="u")
    return s


def _mul_up(*xs) -> mpf:
    p = mpf(1)
    for x in xs:
        p = mpmath.fmul(p, x, prec=RAD_PREC, rounding="u")
    return p


def _div_up(x, y) -> mpf:
    return mpmath.fdiv(x, y, prec=RAD_PREC, rounding="u")


def _sub_down(x, y) -> mpf:
    return mpmath.fsub(x, y, prec=RAD_PREC, rounding="d")


def _eps() -> mpf:
    """Allowance for one correctly-rounded arithmetic operation (8 ulps)."""
    return mpf(2) ** (3 - mp.prec)


def _eps_fn() -> mpf:
    return mpf(2) ** (5 - mp.prec)


_SLACK = 1 + mpf(2) ** -60


def _abs_up(z) -> mpf:
    return _mul_up(mpmath.fabs(z), _SLACK)


def _abs_down(z) -> mpf:
    return mpmath.fmul(mpmath.fabs(z), 1 - mpf(2) ** -60, prec=RAD_PREC, rounding="d")


def _parts(x) -> tuple[mpf, mpf]:
    """Real and imaginary parts of x as mpf, without rounding."""
    if isinstance(x, mpc):
        return x.real, x.imag
    if isinstance(x, mpf):
        return x, mpf(0)
    if isinstance(x, int):
        with mp.workprec(max(mp.prec, x.bit_length() + 1)):
            return mpf(x), mpf(0)
    z = mpc(x)
    return z.real, z.imag


def _within(z, w, rad) -> bool:
    """|z - w| <= rad, decided exactly whatever the ambient precision."""
    z, w = _parts(z), _parts(w)
    dr = mpmath.fsub(z[0], w[0], exact=True)
    di = mpmath.fsub(z[1], w[1], exact=True)
    sq = mpmath.fadd(mpmath.fmul(dr, dr, exact=True), mpmath.fmul(di, di, exact=True), exact=True)
    return sq <= mpmath.fmul(rad, rad, exact=True)


class Ball:
    """Closed disk {z : |z - mid| <= rad} guaranteed to contain the true value."""

    __slots__ = ("mid", "rad")

    def __init__(self, mid, rad=0):
        self.mid = mpc(mid)
        self.rad = _up(rad)
        if self.rad < 0:
            raise ValueError("negative radius")

    # -- constructors ---------------------------------------------------------
    @classmethod
    def exact(cls, x) -> "Ball":
        """Ball around an exact int, Fraction or (complex) number, with rounding slack."""
        if isinstance(x, Ball):
            return x
        if isinstance(x, Fraction):
            mid = mpf(x.numerator) / x.denominator
        else:
            mid = mpc(x)
        return cls(mid, _mul_up(_abs_up(mid), _eps()))

    @classmethod
    def sqrt_int(cls, n: int) -> "Ball":
        if n < 0:
            raise DomainError("sqrt of a negative integer")
        mid = mpmath.sqrt(mpf(n))
        return cls(mid, _mul_up(_abs_up(mid), _eps_fn()))

    @classmethod
    def pi(cls) -> "Ball":
        return cls(+mp.pi, _mul_up(4, _eps_fn()))

    # -- accessors ------------------------------------------------------------
    @property
    def real(self) -> "Ball":
        return Ball(self.mid.real, self.rad)

    @property
    def imag(self) -> "Ball":
        return Ball(self.mid.imag, self.rad)

    def is_real(self) -> bool:
        return self.mid.imag == 0

    def abs_upper(self) -> mpf:
        return _add_up(_abs_up(self.mid), self.rad)

    def abs_lower(self) -> mpf:
        v = _sub_down(_abs_down(self.mid), self.rad)
        return v if v > 0 else mpf(0)

    def upper(self) -> mpf:
        """Upper bound of the real part."""
        return _add_up(self.mid.real, self.rad)

    def lower(self) -> mpf:
        return _sub_down(self.mid.real, self.rad)

    def contains(self, x) -> bool:
        return _within(self.mid, x, self.rad)

    def overlaps(self, other: "Ball") -> bool:
        return _within(self.mid, other.mid, _add_up(self.rad, other.rad))

    def certified_integer(self) -> int | None:
        """The unique integer inside the ball, if the radius is below 1/2."""
        if self.rad >= 0.5:
            return None
        n = int(mpmath.nint(self.mid.real))
        return n if self.contains(n) else None

    # -- arithmetic -----------------------------------------------------------
    def __neg__(self):
        return Ball(-self.mid, self.rad)

    def __add__(self, other):
        other = Ball.exact(other)
        mid = self.mid + other.mid
        return Ball(mid, _add_up(self.rad, other.rad, _mul_up(_abs_up(mid), _eps())))

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-Ball.exact(other))

    def __rsub__(self, other):
        return Ball.exact(other) + (-self)

    def __mul__(self, other):
        other = Ball.exact(other)
        a, b = _abs_up(self.mid), _abs_up(other.mid)
        mid = self.mid * other.mid
        rad = _add_up(_mul_up(a, other.rad), _mul_up(b, self.rad),
                      _mul_up(self.rad, other.rad), _mul_up(a, b, _eps()))
        return Ball(mid, rad)

    __rmul__ = __mul__

    def inverse(self) -> "Ball":
        low = _sub_down(_abs_down(self.mid), self.rad)
        if low <= 0:
            raise DomainError("ball contains zero; cannot invert")
        mid = 1 / self.mid
        m = _abs_up(mid)
        # |1/(z+d) - 1/z| <= r / (|z| (|z| - r))
        rad = _add_up(_div_up(self.rad, mpmath.fmul(_abs_down(self.mid), low, prec=RAD_PREC, rounding="d")),
                      _mul_up(m, _eps()))
        return Ball(mid, rad)

    def __truediv__(self, other):
        if isinstance(other, int) and other != 0:
            mid = self.mid / other
            return Ball(mid, _add_up(_div_up(self.rad, abs(other)), _mul_up(_abs_up(mid), _eps())))
        return self * Ball.exact(other).inverse()

    def __rtruediv__(self, other):
        return Ball.exact(other) * self.inverse()

    def __pow__(self, k: int):
        if not isinstance(k, int):
            raise TypeError("only integer powers")
        if k < 0:
            return self.inverse() ** (-k)
        result, base = Ball(1), self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def mul_i(self) -> "Ball":
        return Ball(self.mid * 1j, self.rad)

    def conj(self) -> "Ball":
        return Ball(mpmath.conj(self.mid), self.rad)

    def exp(self) -> "Ball":
        mid = mpmath.exp(self.mid)
        m = _abs_up(mid)
        # |e^(z+d) - e^z| <= |e^z| (e^r - 1) <= |e^z| r e^r
        er = _mul_up(mpmath.exp(self.rad), _SLACK)
        return Ball(mid, _add_up(_mul_up(m, self.rad, er), _mul_up(m, _eps_fn())))

    def abs(self) -> "Ball":
        mid = mpmath.fabs(self.mid)
        return Ball(mid, _add_up(self.rad, _mul_up(mid, _eps())))

    def log(self) -> "Ball":
        """Natural log of a ball lying in the open right half of the real line."""
        if not self.is_real():
            raise DomainError("log is only provided for real balls")
        low = self.lower()
        if low <= 0:
            raise DomainError("log of a ball touching the nonpositive axis")
        x = self.mid.real
        mid = mpmath.log(x)
        t = _div_up(self.rad, _abs_down(x))
        # |log(1 + d/x)| <= t / (1 - t)
        rad = _add_up(_div_up(t, _sub_down(1, t)), _mul_up(_abs_up(mid), _eps_fn()), _mul_up(1, _eps_fn()))
        return Ball(mid, rad)

    def sqrt(self) -> "Ball":
        """Square root of a nonnegative real ball."""
        if not self.is_real() or self.lower() < 0:
            raise DomainError("sqrt is only provided for nonnegative real balls")
        x = self.mid.real
        mid = mpmath.sqrt(x)
        low = self.lower()
        # |sqrt(x+d) - sqrt(x)| <= r / (sqrt(x) + sqrt(x - r))
        denom = mpmath.fadd(_abs_down(mid), mpmath.sqrt(low) * (1 - mpf(2) ** -60), prec=RAD_PREC, rounding="d")
        rad = _div_up(self.rad, denom) if denom > 0 else _up(mpmath.sqrt(self.rad) * _SLACK)
        return Ball(mid, _add_up(rad, _mul_up(_abs_up(mid), _eps_fn())))

    # -- comparisons (certified; None when undecided) ---------------------------
    def lt(self, other) -> bool | None:
        other = Ball.exact(other)
        if self.upper() < other.lower():
            return True
        if self.lower() >= other.upper():
            return False
        return None

    def __repr__(self):
        return f"Ball({mpmath.nstr(self.mid, 20)} +/- {mpmath.nstr(self.rad, 5)})"

    def to_str(self, digits: int = 30) -> str:
        re = mpmath.nstr(self.mid.real, digits)
        im = self.mid.imag
        body = re if im == 0 else f"{re}{'+' if im >= 0 else '-'}{mpmath.nstr(abs(im), digits)}i"
        return f"{body} +/- {mpmath.nstr(self.rad, 5)}"
