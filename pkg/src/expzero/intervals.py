"""Exact rational intervals, complex rectangles, and rigorous enclosures.

All endpoints are Fractions; arithmetic on intervals is exact.  Enclosures
of exp/log/sin/cos/arccos go through mpmath's interval context at an
explicit binary precision and are converted back to exact rational
endpoints, so outward rounding is preserved end to end and no binary
float ever feeds back into the exact layer.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import mpmath
from mpmath import iv
from mpmath.libmp import from_rational, round_ceiling, round_floor

from .errors import CapExceeded
from .floatguard import as_fraction


@dataclass(frozen=True)
class Ival:
    """Closed rational interval [lo, hi]."""

    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    @staticmethod
    def make(lo, hi) -> "Ival":
        return Ival(as_fraction(lo), as_fraction(hi))

    @staticmethod
    def point(x) -> "Ival":
        q = as_fraction(x)
        return Ival(q, q)

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def mid(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def __add__(self, other: "Ival") -> "Ival":
        if isinstance(other, Ival):
            return Ival(self.lo + other.lo, self.hi + other.hi)
        q = as_fraction(other)
        return Ival(self.lo + q, self.hi + q)

    __radd__ = __add__

    def __neg__(self) -> "Ival":
        return Ival(-self.hi, -self.lo)

    def __sub__(self, other) -> "Ival":
        return self + (-other if isinstance(other, Ival) else -as_fraction(other))

    def __rsub__(self, other) -> "Ival":
        return (-self) + as_fraction(other)

    def __mul__(self, other) -> "Ival":
        if isinstance(other, Ival):
            cands = (self.lo * other.lo, self.lo * other.hi,
                     self.hi * other.lo, self.hi * other.hi)
            return Ival(min(cands), max(cands))
        q = as_fraction(other)
        a, b = self.lo * q, self.hi * q
        return Ival(a, b) if a <= b else Ival(b, a)

    __rmul__ = __mul__

    def recip(self) -> "Ival":
        if self.lo <= 0 <= self.hi:
            raise ZeroDivisionError("interval contains zero")
        return Ival(1 / self.hi, 1 / self.lo)

    def __truediv__(self, other) -> "Ival":
        if isinstance(other, Ival):
            return self * other.recip()
        q = as_fraction(other)
        if q == 0:
            raise ZeroDivisionError
        return self * (Fraction(1) / q)

    def sq(self) -> "Ival":
        # tighter than self*self when the interval straddles 0
        a, b = self.lo * self.lo, self.hi * self.hi
        hi = max(a, b)
        lo = Fraction(0) if self.lo <= 0 <= self.hi else min(a, b)
        return Ival(lo, hi)

    def abs(self) -> "Ival":
        if self.lo >= 0:
            return self
        if self.hi <= 0:
            return -self
        return Ival(Fraction(0), max(-self.lo, self.hi))

    def hull(self, other: "Ival") -> "Ival":
        return Ival(min(self.lo, other.lo), max(self.hi, other.hi))

    def intersect(self, other: "Ival") -> "Ival":
        lo, hi = max(self.lo, other.lo), min(self.hi, other.hi)
        if lo > hi:
            raise ValueError("disjoint intervals")
        return Ival(lo, hi)

    def contains(self, x) -> bool:
        q = as_fraction(x)
        return self.lo <= q <= self.hi

    def contains_zero(self) -> bool:
        return self.lo <= 0 <= self.hi

    def sign(self):
        """+1 / -1 when the interval is sign-definite, 0 for [0,0], else None."""
        if self.lo > 0:
            return 1
        if self.hi < 0:
            return -1
        if self.lo == self.hi == 0:
            return 0
        return None

    def __str__(self):
        return f"[{self.lo}, {self.hi}]"


@dataclass(frozen=True)
class Rect:
    """Complex rectangle re + i*im with rational-interval sides."""

    re: Ival
    im: Ival

    @staticmethod
    def point(re, im=0) -> "Rect":
        return Rect(Ival.point(re), Ival.point(im))

    @staticmethod
    def from_real(x: Ival) -> "Rect":
        return Rect(x, Ival.point(0))

    def __add__(self, other: "Rect") -> "Rect":
        return Rect(self.re + other.re, self.im + other.im)

    def __neg__(self) -> "Rect":
        return Rect(-self.re, -self.im)

    def __sub__(self, other: "Rect") -> "Rect":
        return Rect(self.re - other.re, self.im - other.im)

    def __mul__(self, other) -> "Rect":
        if isinstance(other, Rect):
            return Rect(self.re * other.re - self.im * other.im,
                        self.re * other.im + self.im * other.re)
        if isinstance(other, Ival):
            return Rect(self.re * other, self.im * other)
        q = as_fraction(other)
        return Rect(self.re * q, self.im * q)

    __rmul__ = __mul__

    def conj(self) -> "Rect":
        return Rect(self.re, -self.im)

    def abs_sq(self) -> Ival:
        return self.re.sq() + self.im.sq()

    def contains_zero(self) -> bool:
        return self.re.contains_zero() and self.im.contains_zero()

    @property
    def width(self) -> Fraction:
        return max(self.re.width, self.im.width)

    def hull(self, other: "Rect") -> "Rect":
        return Rect(self.re.hull(other.re), self.im.hull(other.im))

    def __str__(self):
        return f"({self.re} + i*{self.im})"


# ---------------------------------------------------------------------------
# mpmath bridge

_SPECIALS = (mpmath.libmp.finf, mpmath.libmp.fninf, mpmath.libmp.fnan)


def _rat_from_raw(raw) -> Fraction:
    """Exact Fraction from a raw mpf tuple (sign, man, exp, bc)."""
    if raw in _SPECIALS:
        raise OverflowError("non-finite enclosure endpoint")
    sign, man, exp, _bc = raw
    if man == 0:
        return Fraction(0)
    val = Fraction(man) * (Fraction(2) ** exp if exp >= 0 else Fraction(1, 2 ** -exp))
    return -val if sign else val


def _ival_from_ivmpf(x) -> Ival:
    lo, hi = x._mpi_
    return Ival(_rat_from_raw(lo), _rat_from_raw(hi))


def _ivmpf_from_rat(q: Fraction, prec: int):
    lo = from_rational(q.numerator, q.denominator, prec, round_floor)
    hi = from_rational(q.numerator, q.denominator, prec, round_ceiling)
    return iv.mpf((mpmath.make_mpf(lo), mpmath.make_mpf(hi)))


def _ivmpf_from_ival(x: Ival, prec: int):
    lo = from_rational(x.lo.numerator, x.lo.denominator, prec, round_floor)
    hi = from_rational(x.hi.numerator, x.hi.denominator, prec, round_ceiling)
    return iv.mpf((mpmath.make_mpf(lo), mpmath.make_mpf(hi)))


class _prec_ctx:
    def __init__(self, prec: int):
        self.prec = prec

    def __enter__(self):
        self._saved = iv.prec
        iv.prec = self.prec

    def __exit__(self, *exc):
        iv.prec = self._saved


def _unary(fn_name: str, x: Ival, prec: int) -> Ival:
    with _prec_ctx(prec):
        val = getattr(iv, fn_name)(_ivmpf_from_ival(x, prec))
        return _ival_from_ivmpf(val)


def iexp(x: Ival, prec: int = 64) -> Ival:
    return _unary("exp", x, prec)


def ilog(x: Ival, prec: int = 64) -> Ival:
    if x.lo <= 0:
        raise ValueError("log needs a positive interval")
    return _unary("log", x, prec)


def isin(x: Ival, prec: int = 64) -> Ival:
    return _unary("sin", x, prec).intersect(Ival.make(-1, 1))

def icos(x: Ival, prec: int = 64) -> Ival:
    return _unary("cos", x, prec).intersect(Ival.make(-1, 1))


def isqrt(x: Ival, prec: int = 64) -> Ival:
    if x.lo < 0:
        raise ValueError("sqrt needs a nonnegative interval")
    return _unary("sqrt", x, prec)


def ipi(prec: int = 64) -> Ival:
    with _prec_ctx(prec):
        return _ival_from_ivmpf(iv.pi)


def _acos_point(q: Fraction, prec: int) -> Ival:
    """Enclosure of arccos at a single rational point of [-1, 1]."""
    if q >= 1:
        return Ival.point(0)
    if q <= -1:
        return ipi(prec)
    if q < 0:
        # reflect into the well-conditioned quadrant: acos(q) = pi - acos(-q)
        return ipi(prec) - _acos_point(-q, prec)
    with _prec_ctx(prec):
        y = iv.sqrt(_ivmpf_from_rat(1 - q * q, prec))
        x = _ivmpf_from_rat(q, prec)
        return _ival_from_ivmpf(iv.atan2(y, x))


def iacos(x: Ival, prec: int = 64) -> Ival:
    """Enclosure of arccos over an interval (clamped to [-1, 1]).

    arccos is monotone decreasing, so the endpoints are evaluated
    individually; this stays rigorous across the whole domain including
    the atan2 branch boundary at -1.
    """
    x = x.intersect(Ival.make(-1, 1))
    hi_enc = _acos_point(x.lo, prec)
    lo_enc = _acos_point(x.hi, prec)
    return Ival(min(lo_enc.lo, hi_enc.lo), max(lo_enc.hi, hi_enc.hi)).intersect(
        Ival(Fraction(0), ipi(prec).hi))


def iexp_rect(z: Rect, prec: int = 64) -> Rect:
    """e^z for a complex rectangle: e^x * (cos y + i sin y)."""
    mag = iexp(z.re, prec)
    return Rect(mag * icos(z.im, prec), mag * isin(z.im, prec))


def refine_to_width(make_enclosure, target_width: Fraction,
                    prec0: int = 64, max_prec: int = 1 << 14) -> Ival:
    """Run make_enclosure(prec) with doubling precision until the width target.

    Deterministic ladder; raises CapExceeded past max_prec.
    """
    prec = prec0
    best = None
    while prec <= max_prec:
        enc = make_enclosure(prec)
        if enc.width <= target_width:
            return enc
        best = enc
        prec *= 2
    raise CapExceeded(f"precision ladder exhausted at {max_prec} bits "
                      f"(width {best.width if best is not None else '?'} > {target_width})")
