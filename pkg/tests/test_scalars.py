"""Scalar serialization, rational parsing, and interval soundness."""

import random
from fractions import Fraction

import gmpy2
import pytest
from gmpy2 import mpfr, mpq
from hypothesis import given, settings, strategies as st

from hawk.errors import PrecisionError
from hawk.scalars import (Cert3, Interval, NO, UNKNOWN, YES, decimal_to_fraction,
                          escalate, exact, parse_rational, rational, scalar,
                          scalar_down, scalar_from_token, scalar_to_token,
                          scalar_up)


class TestTokens:
    def test_roundtrip_simple(self):
        x = scalar("0.1")
        assert scalar_from_token(scalar_to_token(x)) == x

    def test_roundtrip_preserves_precision(self):
        x = scalar("3.25", 320)
        token = scalar_to_token(x)
        assert token.startswith("320:")
        y = scalar_from_token(token)
        assert y == x and y.precision == 320

    def test_zero_and_negative(self):
        for text in ("0", "-12.75", "-1e-30"):
            x = scalar(text)
            assert scalar_from_token(scalar_to_token(x)) == x

    def test_roundtrip_random(self):
        rng = random.Random(42)
        for _ in range(300):
            num = rng.getrandbits(200) - 2 ** 199
            x = scalar(Fraction(num, 2 ** rng.randrange(1, 300)))
            assert scalar_from_token(scalar_to_token(x)) == x

    def test_malformed(self):
        with pytest.raises(ValueError):
            scalar_from_token("noprefix")


class TestParsing:
    @pytest.mark.parametrize("text,value", [
        ("3/4", Fraction(3, 4)),
        ("0.25", Fraction(1, 4)),
        ("2^-40", Fraction(1, 2 ** 40)),
        ("1e-3", Fraction(1, 1000)),
        ("-1.5e2", Fraction(-150)),
        ("7", Fraction(7)),
    ])
    def test_parse_rational(self, text, value):
        assert parse_rational(text) == value

    def test_decimal_exactness(self):
        assert decimal_to_fraction("0.1") == Fraction(1, 10)

    def test_reject_garbage(self):
        with pytest.raises(ValueError):
            parse_rational("three")


class TestDirectedRounding:
    def test_down_up_bracket(self):
        third = Fraction(1, 3)
        lo, hi = scalar_down(third), scalar_up(third)
        assert lo < third < hi
        assert hi - lo > 0

    def test_exact_dyadic_is_tight(self):
        v = Fraction(5, 8)
        assert scalar_down(v) == scalar_up(v) == scalar(v)

    def test_exact_value_of_scalar(self):
        x = scalar("0.1")
        q = exact(x)
        assert isinstance(q, mpq)
        assert abs(q - mpq(1, 10)) < mpq(1, 2 ** 250)


class TestInterval:
    def test_point_contains(self):
        iv = Interval.point(Fraction(1, 3))
        assert iv.contains_value(Fraction(1, 3))

    @given(st.fractions(min_value=-100, max_value=100),
           st.fractions(min_value=-100, max_value=100))
    @settings(max_examples=200, deadline=None)
    def test_arith_encloses_exact(self, a, b):
        ia, ib = Interval.point(a), Interval.point(b)
        assert (ia + ib).contains_value(a + b)
        assert (ia - ib).contains_value(a - b)
        assert (ia * ib).contains_value(a * b)
        if b != 0 and (b > 0 or b < 0):
            if not (ib.lo <= 0 <= ib.hi):
                assert (ia / ib).contains_value(Fraction(a) / b)

    def test_sqrt_encloses(self):
        iv = Interval.point(2).sqrt()
        ref = gmpy2.context(precision=500).sqrt(mpfr(2, 500))
        assert iv.lo < ref < iv.hi

    def test_pow_fraction_matches_mpmath(self):
        import mpmath
        mpmath.mp.prec = 400
        for base, expo in [(7, Fraction(3, 2)), (10, Fraction(5, 3)),
                           (3, Fraction(19, 10))]:
            iv = Interval.point(base).pow_fraction(expo)
            ref = mpmath.power(base, mpmath.mpf(expo.numerator) / expo.denominator)
            assert float(iv.lo) <= float(ref) <= float(iv.hi)
            assert float(iv.width()) < 1e-60 * float(ref)

    def test_pow_int_negative(self):
        iv = Interval.point(2).pow_int(-2)
        assert iv.contains_value(Fraction(1, 4))

    def test_compare(self):
        a = Interval.point(1)
        b = Interval.point(2)
        assert a.compare_le(b) is YES
        assert b.compare_le(a) is NO
        wide = Interval(scalar(0), scalar(3), 256)
        assert wide.compare_le(a) is UNKNOWN

    def test_divide_through_zero_raises(self):
        with pytest.raises(ZeroDivisionError):
            Interval.point(1) / Interval(scalar(-1), scalar(1), 256)


class TestCert3:
    def test_singletons(self):
        assert Cert3("YES") is YES

    def test_not_boolean(self):
        with pytest.raises(TypeError):
            bool(YES)


class TestEscalate:
    def test_resolves_at_higher_precision(self):
        calls = []

        def decide(prec):
            calls.append(prec)
            return UNKNOWN if prec < 1024 else YES

        assert escalate(decide) is YES
        assert calls == [256, 512, 1024]

    def test_gives_up(self):
        with pytest.raises(PrecisionError):
            escalate(lambda prec: UNKNOWN, max_prec=512)
