"""Shared fixtures and helpers for the hawk test suite."""

from fractions import Fraction

import gmpy2
import pytest

from hawk.diophantine import Params

R0 = Fraction(1, 2 ** 40)

# a generic dyadic opening center (odd numerators, no low-denominator
# rationals within ~2^-12 of it, far beyond any opening radius we use)
GX = Fraction(24289721553, 2 ** 36)
GY = Fraction(14042951349, 2 ** 36)


@pytest.fixture(scope="session")
def unit_params() -> Params:
    """Round parameters at unit scale for the small hand examples."""
    return Params(s=Fraction(1, 2), t=Fraction(1, 2), epsilon=Fraction(1, 10),
                  ell=Fraction(2), big_r=Fraction(10), q_cap=10 ** 4)


def hp(value, prec: int = 600) -> gmpy2.mpfr:
    """High-precision reference value via an explicit gmpy2 context."""
    ctx = gmpy2.context(precision=prec)
    if isinstance(value, tuple) and value[0] == "sqrt":
        return ctx.sqrt(gmpy2.mpfr(value[1], prec))
    return gmpy2.mpfr(value, prec)
