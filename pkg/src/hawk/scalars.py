"""Arbitrary-precision scalars and interval enclosures.

A ``Scalar`` is a ``gmpy2.mpfr`` value: a dyadic rational carrying its own
working precision (default 256 bits).  All game state (centers, radii, slab
widths) is made of Scalars, so every stored quantity is an exact rational
number and the algebraic predicates in :mod:`hawk.geometry` can be decided
exactly.  Quantities that are genuinely irrational (powers with fractional
exponents, logarithms) are handled through :class:`Interval`, whose endpoints
are computed with directed rounding so the enclosure is sound.

Scalars serialize as precision-annotated decimal tokens, e.g.
``"256:0.1000...e0"``, with enough digits that parsing the token at the same
precision reproduces the value bit for bit.

Implementation note: gmpy2 context objects are used only through their
operation methods (``ctx.add`` etc.), never as context managers; re-entering
a cached context corrupts the thread state in gmpy2 2.3.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction
from functools import lru_cache
from typing import Union

import gmpy2
from gmpy2 import mpfr, mpq, mpz

from .errors import PrecisionError

Scalar = mpfr  # type alias: the one arbitrary-precision real type

DEFAULT_PRECISION = 256
MAX_PRECISION = 4096

ScalarLike = Union[int, str, float, Fraction, mpfr, mpq]


@lru_cache(maxsize=None)
def _ctx(prec: int, rounding) -> gmpy2.context:
    return gmpy2.context(precision=prec, round=rounding)


def ctx_nearest(prec: int) -> gmpy2.context:
    return _ctx(prec, gmpy2.RoundToNearest)


def ctx_down(prec: int) -> gmpy2.context:
    return _ctx(prec, gmpy2.RoundDown)


def ctx_up(prec: int) -> gmpy2.context:
    return _ctx(prec, gmpy2.RoundUp)


_DECIMAL_RE = re.compile(r"^([+-]?)(\d*)(?:\.(\d*))?(?:[eE]([+-]?\d+))?$")


def decimal_to_fraction(text: str) -> Fraction:
    """Exact rational value of a decimal literal like '-1.25e-3'."""
    m = _DECIMAL_RE.match(text.strip())
    if not m or not (m.group(2) or m.group(3)):
        raise ValueError(f"not a decimal literal: {text!r}")
    sign, ipart, fpart, exp = m.groups()
    fpart = fpart or ""
    digits = int((ipart or "0") + fpart) if (ipart or fpart) else 0
    value = Fraction(digits, 10 ** len(fpart))
    if exp:
        value *= Fraction(10) ** int(exp)
    return -value if sign == "-" else value


def rational(value: ScalarLike) -> mpq:
    """Exact rational value of any ScalarLike (decimal strings included)."""
    if isinstance(value, mpq):
        return value
    if isinstance(value, Fraction):
        return mpq(value.numerator, value.denominator)
    if isinstance(value, str):
        f = decimal_to_fraction(value)
        return mpq(f.numerator, f.denominator)
    return mpq(value)  # int, float, mpfr: all exactly representable


_to_mpq = rational


def _exact_mpfr(n: mpz) -> mpfr:
    return mpfr(n, max(2, n.bit_length() + 1))


def _convert(value: ScalarLike, prec: int, ctx) -> Scalar:
    if isinstance(value, mpfr) and value.precision <= prec:
        return mpfr(value, prec)
    q = _to_mpq(value)
    return ctx.div(_exact_mpfr(q.numerator), _exact_mpfr(q.denominator))


def scalar(value: ScalarLike, prec: int = DEFAULT_PRECISION) -> Scalar:
    """Round `value` to a Scalar at `prec` bits (to nearest)."""
    return _convert(value, prec, ctx_nearest(prec))


def scalar_down(value: ScalarLike, prec: int = DEFAULT_PRECISION) -> Scalar:
    return _convert(value, prec, ctx_down(prec))


def scalar_up(value: ScalarLike, prec: int = DEFAULT_PRECISION) -> Scalar:
    return _convert(value, prec, ctx_up(prec))


def exact(x: Union[Scalar, int, mpq, Fraction]) -> mpq:
    """The exact rational value of a Scalar (every mpfr is dyadic)."""
    if isinstance(x, Fraction):
        return mpq(x.numerator, x.denominator)
    return mpq(x)


def as_fraction(x: Union[Scalar, mpq]) -> Fraction:
    q = exact(x)
    return Fraction(int(q.numerator), int(q.denominator))


# --- serialization ----------------------------------------------------------

def _digits_for(prec: int) -> int:
    # enough decimal digits that nearest-parse at `prec` bits round-trips
    return math.ceil(prec * math.log10(2)) + 2


def scalar_to_token(x: Scalar) -> str:
    prec = x.precision
    digits, exp10, _ = x.digits(10, _digits_for(prec))
    sign = "-" if digits.startswith("-") else ""
    mantissa = digits.lstrip("-")
    return f"{prec}:{sign}0.{mantissa}e{exp10}"


def scalar_from_token(token: str) -> Scalar:
    prec_str, _, body = token.partition(":")
    if not body:
        raise ValueError(f"malformed scalar token {token!r}")
    return mpfr(body, int(prec_str))


# --- rational parsing (config values) ---------------------------------------

def parse_rational(text: str) -> Fraction:
    """Parse a config number: '3/4', '0.25', '2^-40', '1e-3', or an int."""
    text = text.strip()
    if "/" in text:
        num, den = text.split("/")
        return Fraction(int(num), int(den))
    if "^" in text:
        base, exp = text.split("^")
        return Fraction(int(base)) ** int(exp)
    return decimal_to_fraction(text)


# --- three-valued certificates ----------------------------------------------

class Cert3:
    """Sound three-valued answer: YES and NO are certified, UNKNOWN is not."""

    __slots__ = ("name",)
    _instances: dict = {}

    def __new__(cls, name: str):
        inst = cls._instances.get(name)
        if inst is None:
            inst = super().__new__(cls)
            inst.name = name
            cls._instances[name] = inst
        return inst

    def __repr__(self):
        return self.name

    def __bool__(self):
        raise TypeError("Cert3 is not a boolean; compare against YES/NO/UNKNOWN")


YES = Cert3("YES")
NO = Cert3("NO")
UNKNOWN = Cert3("UNKNOWN")


def cert_from_bool(b) -> Cert3:
    return YES if b else NO


# --- intervals ---------------------------------------------------------------

class Interval:
    """Closed interval [lo, hi] with outward-rounded arithmetic.

    Endpoints are mpfr values at a common working precision.  Every operation
    rounds the lower endpoint down and the upper endpoint up, so the result
    always encloses the exact real result.
    """

    __slots__ = ("lo", "hi", "prec")

    def __init__(self, lo: Scalar, hi: Scalar, prec: int):
        if lo > hi:
            raise ValueError(f"inverted interval [{lo}, {hi}]")
        self.lo = lo
        self.hi = hi
        self.prec = prec

    @classmethod
    def point(cls, value: ScalarLike, prec: int = DEFAULT_PRECISION) -> "Interval":
        if isinstance(value, mpfr) and value.precision <= prec:
            return cls(value, value, prec)
        return cls(scalar_down(value, prec), scalar_up(value, prec), prec)

    @classmethod
    def zero(cls, prec: int = DEFAULT_PRECISION) -> "Interval":
        z = mpfr(0)
        return cls(z, z, prec)

    def __repr__(self):
        return f"[{self.lo}, {self.hi}]"

    def width(self) -> Scalar:
        return ctx_up(self.prec).sub(self.hi, self.lo)

    def mid(self) -> Scalar:
        c = ctx_nearest(self.prec)
        return c.div(c.add(self.lo, self.hi), mpfr(2))

    # arithmetic

    def __add__(self, other: "Interval") -> "Interval":
        p = max(self.prec, other.prec)
        return Interval(ctx_down(p).add(self.lo, other.lo),
                        ctx_up(p).add(self.hi, other.hi), p)

    def __sub__(self, other: "Interval") -> "Interval":
        p = max(self.prec, other.prec)
        return Interval(ctx_down(p).sub(self.lo, other.hi),
                        ctx_up(p).sub(self.hi, other.lo), p)

    def __neg__(self) -> "Interval":
        return Interval(-self.hi, -self.lo, self.prec)

    def __mul__(self, other: "Interval") -> "Interval":
        p = max(self.prec, other.prec)
        down, up = ctx_down(p), ctx_up(p)
        pairs = ((self.lo, other.lo), (self.lo, other.hi),
                 (self.hi, other.lo), (self.hi, other.hi))
        lo = min(down.mul(a, b) for a, b in pairs)
        hi = max(up.mul(a, b) for a, b in pairs)
        return Interval(lo, hi, p)

    def __truediv__(self, other: "Interval") -> "Interval":
        if other.lo <= 0 <= other.hi:
            raise ZeroDivisionError("interval divisor straddles zero")
        p = max(self.prec, other.prec)
        down, up = ctx_down(p), ctx_up(p)
        pairs = ((self.lo, other.lo), (self.lo, other.hi),
                 (self.hi, other.lo), (self.hi, other.hi))
        lo = min(down.div(a, b) for a, b in pairs)
        hi = max(up.div(a, b) for a, b in pairs)
        return Interval(lo, hi, p)

    def abs(self) -> "Interval":
        if self.lo >= 0:
            return self
        if self.hi <= 0:
            return -self
        return Interval(mpfr(0), max(-self.lo, self.hi), self.prec)

    def sqrt(self) -> "Interval":
        if self.lo < 0:
            raise ValueError("sqrt of an interval with negative part")
        return Interval(ctx_down(self.prec).sqrt(self.lo),
                        ctx_up(self.prec).sqrt(self.hi), self.prec)

    def exp(self) -> "Interval":
        return Interval(ctx_down(self.prec).exp(self.lo),
                        ctx_up(self.prec).exp(self.hi), self.prec)

    def log(self) -> "Interval":
        if self.lo <= 0:
            raise ValueError("log of an interval touching zero")
        return Interval(ctx_down(self.prec).log(self.lo),
                        ctx_up(self.prec).log(self.hi), self.prec)

    def pow_int(self, n: int) -> "Interval":
        if n == 0:
            one = mpfr(1)
            return Interval(one, one, self.prec)
        if n < 0:
            return Interval.point(1, self.prec) / self.pow_int(-n)
        result = self
        for _ in range(n - 1):
            result = result * self
        return result

    def pow_fraction(self, c: Fraction) -> "Interval":
        """x^c for x > 0; exact-power fast paths, exp(c*log x) otherwise."""
        if c.denominator == 1:
            return self.pow_int(c.numerator)
        if self.lo <= 0:
            raise ValueError("fractional power of a non-positive interval")
        if c.denominator == 2:
            return self.pow_int(c.numerator).sqrt()
        return (self.log() * Interval.point(c, self.prec)).exp()

    # comparisons (certified)

    def compare_le(self, other: "Interval") -> Cert3:
        """Certified self <= other."""
        if self.hi <= other.lo:
            return YES
        if self.lo > other.hi:
            return NO
        return UNKNOWN

    def compare_lt(self, other: "Interval") -> Cert3:
        if self.hi < other.lo:
            return YES
        if self.lo >= other.hi:
            return NO
        return UNKNOWN

    def contains_value(self, v: ScalarLike) -> bool:
        q = _to_mpq(v)
        return self.lo <= q <= self.hi


def interval_sum(items, prec: int = DEFAULT_PRECISION) -> Interval:
    total = Interval.zero(prec)
    for it in items:
        total = total + it
    return total


def escalate(decide, start_prec: int = DEFAULT_PRECISION,
             max_prec: int = MAX_PRECISION, what: str = "decision") -> Cert3:
    """Run `decide(prec)` at doubling precision until it stops returning UNKNOWN.

    Raises PrecisionError once max_prec is exceeded; mirrors the harness
    policy of escalating rule-critical checks up to 4096 bits.
    """
    prec = start_prec
    while True:
        result = decide(prec)
        if result is not UNKNOWN:
            return result
        if prec >= max_prec:
            raise PrecisionError(f"{what} undecidable at precision {max_prec}")
        prec = min(2 * prec, max_prec)
