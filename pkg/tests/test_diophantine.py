"""Danger rectangles, badness scores, enumeration, banding, calibration."""

import random
from fractions import Fraction
from math import gcd

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from hawk.diophantine import (CalibrationResult, Params, RatPoint,
                              badness_argmin, badness_score,
                              calibrate_epsilon, certify_ball, check_probe,
                              class_rects, dangerous_pairs, delta_class,
                              delta_rect, delta_rect_raw, enumerate_dangerous,
                              fit_bound, generation, generation_band,
                              generation_of_q)
from hawk.errors import HawkError
from hawk.geometry import Rect, ball, ball_meets_rect, point
from hawk.scalars import YES, exact, scalar

F = Fraction


def params(s=F(1, 2), eps=F(1, 10), ell=F(2), big_r=F(10), q_cap=10 ** 4,
           prec=256):
    return Params(s=s, t=1 - s, epsilon=eps, ell=ell, big_r=big_r,
                  q_cap=q_cap, prec=prec)


class TestParams:
    def test_weights_must_sum_to_one(self):
        with pytest.raises(HawkError):
            Params(s=F(1, 2), t=F(1, 3), epsilon=F(1), ell=F(2),
                   big_r=F(10), q_cap=10)

    def test_positive_weights(self):
        with pytest.raises(HawkError):
            Params(s=F(0), t=F(1), epsilon=F(1), ell=F(2), big_r=F(10),
                   q_cap=10)

    def test_r_above_one(self):
        with pytest.raises(HawkError):
            params(big_r=F(1))


class TestRatPoint:
    def test_canonical_ok(self):
        RatPoint(1, 1, 2)

    def test_reducible_rejected(self):
        with pytest.raises(HawkError):
            RatPoint(2, 2, 4)

    def test_zero_over_one(self):
        RatPoint(0, 0, 1)  # gcd(0, 0, 1) = 1


class TestDeltaRect:
    def test_q1_collapses(self):
        r = delta_rect(RatPoint(0, 0, 1), params())
        for hw in (r.halfwidth_x, r.halfwidth_y):
            assert F(1, 10) <= exact(hw) <= F(1, 10) * (1 + F(1, 2 ** 200))

    def test_q2_power_value(self):
        mpmath.mp.prec = 400
        r = delta_rect(RatPoint(1, 1, 2), params())
        ref = mpmath.mpf("0.1") / mpmath.power(2, mpmath.mpf(3) / 2)
        for hw in (r.halfwidth_x, r.halfwidth_y):
            assert abs(float(hw) - float(ref)) < 1e-17
        assert float(r.center.x) == 0.5 and float(r.center.y) == 0.5

    def test_weighted_asymmetry(self):
        p = params(s=F(9, 10))
        r = delta_rect_raw(1, 1, 4, p)
        assert r.halfwidth_x < r.halfwidth_y
        assert delta_class(r) == 2

    def test_monotone_shrink_in_q(self):
        p = params()
        prev = None
        for q in range(1, 30):
            r = delta_rect_raw(1, 1, q, p)
            if prev is not None:
                assert r.halfwidth_x < prev.halfwidth_x
                assert r.halfwidth_y < prev.halfwidth_y
            prev = r

    def test_center_error_absorbed(self):
        # the stored rect must contain the ideal rect despite center rounding
        p = params()
        r = delta_rect_raw(1, 2, 3, p)
        ideal_cx = F(1, 3)
        ideal_hw = F(1, 10) / F(3) ** F(3, 2).numerator  # loose lower bound
        assert exact(r.halfwidth_x) + 0 >= abs(exact(r.center.x) - ideal_cx)


def brute_badness(x: Fraction, y: Fraction, big_q: int, s: Fraction):
    """Independent oracle: mpmath double loop over q and both coordinates."""
    mpmath.mp.prec = 350
    t = 1 - s
    best = None
    for q in range(1, big_q + 1):
        dx = abs(q * x - round(q * x))
        dy = abs(q * y - round(q * y))
        val = max(mpmath.power(q, float(s)) * mpmath.mpf(dx.numerator) / dx.denominator if dx else mpmath.mpf(0),
                  mpmath.power(q, float(t)) * mpmath.mpf(dy.numerator) / dy.denominator if dy else mpmath.mpf(0))
        best = val if best is None else min(best, val)
    return best


class TestBadness:
    def test_rational_point_zero(self):
        assert float(badness_score(scalar("0.5"), scalar("0.5"), 2,
                                   params()).hi) == 0.0

    def test_origin_zero(self):
        assert float(badness_score(scalar(0), scalar(0), 7, params()).hi) == 0.0

    def test_golden_ratio_positive(self):
        import gmpy2
        ctx = gmpy2.context(precision=300)
        g = ctx.div(ctx.sub(ctx.sqrt(gmpy2.mpfr(5, 300)), gmpy2.mpfr(1)),
                    gmpy2.mpfr(2))
        x = scalar(g)
        score = badness_score(x, x, 1000, params())
        assert float(score.lo) > 0
        xf = Fraction(int(exact(x).numerator), int(exact(x).denominator))
        oracle = brute_badness(xf, xf, 1000, F(1, 2))
        assert abs(float(score.lo) - float(oracle)) < 1e-12

    def test_nonincreasing_in_q(self):
        x, y = scalar(F(113, 355)), scalar(F(2, 7) + F(1, 2 ** 30))
        prev = None
        for big_q in (1, 2, 5, 10, 50, 100):
            score = badness_score(x, y, big_q, params())
            if prev is not None:
                assert exact(score.hi) <= exact(prev.hi) + F(1, 2 ** 200)
            prev = score

    def test_rational_zero_at_denominator(self):
        # dyadic rationals are exactly representable as Scalars
        x, y = scalar(F(3, 8)), scalar(F(5, 8))
        assert float(badness_score(x, y, 8, params()).hi) == 0.0
        assert float(badness_score(x, y, 7, params()).lo) > 0

    def test_argmin(self):
        _, q = badness_argmin(scalar("0.5"), scalar("0.5"), 10, params())
        assert q == 2


class TestEnumerate:
    def test_far_region_q1(self):
        pts = enumerate_dangerous(ball("5.3", "7.2", "0.1"), 1, 1, params())
        assert pts == []

    def test_origin_contains_integer_point(self):
        pts = enumerate_dangerous(ball(0, 0, "0.001"), 1, 1, params())
        assert [(p.p, p.r, p.q) for p in pts] == [(0, 0, 1)]

    def test_invalid_range(self):
        with pytest.raises(HawkError):
            enumerate_dangerous(ball(0, 0, 1), 3, 2, params())
        with pytest.raises(HawkError):
            enumerate_dangerous(ball(0, 0, 1), 1, 10 ** 5, params())

    @staticmethod
    def naive_scan(region, q_lo, q_hi, p):
        out = []
        for q in range(q_lo, q_hi + 1):
            for pp in range(-20, 21):
                for rr in range(-20, 21):
                    if gcd(gcd(abs(pp), abs(rr)), q) != 1:
                        continue
                    if ball_meets_rect(region, delta_rect_raw(pp, rr, q, p)) is YES:
                        out.append((pp, rr, q))
        return sorted(out)

    def test_matches_naive_scan(self):
        p = params()
        rng = random.Random(3)
        for _ in range(12):
            region = ball(F(rng.randrange(-1800, 1800), 1000),
                          F(rng.randrange(-1800, 1800), 1000),
                          F(rng.randrange(1, 700), 1000))
            q_hi = rng.randrange(1, 13)
            got = sorted((pt.p, pt.r, pt.q)
                         for pt in enumerate_dangerous(region, 1, q_hi, p))
            assert got == self.naive_scan(region, 1, q_hi, p)

    def test_sorted_unique(self):
        pts = enumerate_dangerous(ball("0.5", "0.5", "0.4"), 1, 8, params())
        keys = [(p.q, p.p, p.r) for p in pts]
        assert keys == sorted(keys) and len(set(keys)) == len(keys)


class TestCertify:
    def test_fail_with_witness(self):
        rep = certify_ball(ball("0.5", "0.5", "0.25"), 2, params())
        assert not rep.passed
        assert rep.witness == (1, 1, 2)
        assert "FAIL" in rep.format_text()

    def test_agrees_with_badness(self):
        p = params(eps=F(1, 10 ** 6))
        region = ball("0.3", "0.3", F(1, 10 ** 9))
        rep = certify_ball(region, 50, p)
        score = badness_score(region.center.x, region.center.y, 50, p)
        if rep.passed:
            assert exact(score.lo) > p.epsilon
        else:
            assert exact(score.lo) <= p.epsilon * (1 + F(1, 2 ** 100))

    def test_far_ball_passes_q1(self):
        rep = certify_ball(ball("0.41", "0.37", "0.01"), 1, params())
        assert rep.passed and rep.witness is None
        assert "bound" in rep.format_text()

    def test_pass_implies_positive_badness_inside(self):
        p = params(eps=F(1, 10 ** 6))
        region = ball(F(323, 1000), F(471, 1000), F(1, 10 ** 9))
        rep = certify_ball(region, 50, p)
        assert rep.passed
        rng = random.Random(11)
        for _ in range(100):
            dx = F(rng.randrange(-1000, 1001), 1000) * F(1, 10 ** 9)
            dy = F(rng.randrange(-1000, 1001), 1000) * F(1, 10 ** 9)
            score = badness_score(scalar(F(323, 1000) + dx),
                                  scalar(F(471, 1000) + dy), 50, p)
            assert exact(score.lo) > p.epsilon

    def test_nested_includes_nonreduced(self):
        # ball around (1/2, 1/2): q=4 representation (2,2,4) also violates
        rep = certify_ball(ball("0.5", "0.5", F(1, 10 ** 6)),
                           4, params(eps=F(1, 10)))
        assert not rep.passed


class TestGeneration:
    def test_example_band(self):
        # ell=2, R=10, eps=0.1, s=t=1/2, q=10: halfwidth 10^-2.5 -> band 2
        assert generation_of_q(10, params()) == 2

    def test_clamp_to_one(self):
        p = params(eps=F(1, 2))  # eps >= ell/(2R) = 0.1
        assert generation_of_q(1, p) == 1

    def test_monotone_in_q(self):
        p = params()
        gens = [generation_of_q(q, p) for q in range(1, 3000)]
        assert all(a <= b for a, b in zip(gens, gens[1:]))

    def test_partition_via_bands(self):
        p = params()
        for q in range(1, 2500):
            n = generation_of_q(q, p)
            lo, hi = generation_band(n, p)
            assert lo <= q <= hi
            if n > 1:
                lo2, hi2 = generation_band(n - 1, p)
                assert q > hi2

    def test_exact_boundary(self):
        # ell=2, R=4, eps=1/4, s=t=1/2, q=4: halfwidth 1/32 = (ell/2) R^-n
        # exactly between bands: 4^-n < 1/32 <= 4^-(n-1)... 1/32 in (4^-3, 4^-2]
        p = params(eps=F(1, 4), big_r=F(4))
        assert generation_of_q(4, p) == 2

    def test_ratpoint_interface(self):
        assert generation(RatPoint(1, 1, 10), params()) == 2


class TestCalibration:
    def test_tiny_epsilon_trivially_passes(self):
        base = params()
        corpus = [(ball("0.31", "0.47", F(1, 2 ** 20)), 2, 1)]
        res = calibrate_epsilon(corpus, base, [F(1, 10 ** 9)])
        assert res.ok and res.epsilon == F(1, 10 ** 9)

    def test_single_rect_class_fits_when_low_in_band(self):
        # a probe whose dangerous set is one rectangle in the lower band
        base = params(big_r=F(100))
        eps = F(1, 2) * F(1, 100) ** 2  # q=1 sits at the bottom of band 2
        failure = check_probe(ball(F(1, 2 ** 30), F(1, 2 ** 30), F(1, 64)),
                              1, 1, base.with_epsilon(eps))
        assert failure is None

    def test_top_of_band_single_rect_fails(self):
        # halfwidth exactly at the band top exceeds the (1/3) ell R^-n bound
        base = params(big_r=F(100))
        eps = F(1, 100)  # q=1: halfwidth = (ell/2) R^-1, top of band 1
        failure = check_probe(ball(F(1, 2 ** 30), F(1, 2 ** 30), F(1, 64)),
                              0, 1, base.with_epsilon(eps))
        assert failure is not None
        assert failure.n == 1

    def test_grid_walks_to_passing_value(self):
        base = params(big_r=F(100))
        corpus = [(ball(F(1, 2 ** 30), F(1, 2 ** 30), F(1, 64)), 0, 1)]
        grid = [F(1, 100), F(1, 300), F(1, 1000)]
        res = calibrate_epsilon(corpus, base, grid)
        assert res.ok and res.epsilon == F(1, 300)

    def test_none_pass_warns(self):
        base = params(big_r=F(100))
        probe_ball = ball(F(1, 2 ** 30), F(1, 2 ** 30), F(1, 64))
        corpus = [(probe_ball, 0, 1), (probe_ball, 0, 2)]
        grid = [F(1, 100), F(1, 100 ** 2)]  # q=1 at a band top either way
        res = calibrate_epsilon(corpus, base, grid)
        assert not res.ok
        assert res.epsilon == F(1, 100 ** 2)
        assert "lemma-violation" in res.warning()

    def test_empty_grid(self):
        with pytest.raises(HawkError):
            calibrate_epsilon([], params(), [])

    def test_grid_must_descend(self):
        with pytest.raises(HawkError):
            calibrate_epsilon([], params(), [F(1, 4), F(1, 2)])


class TestClassRects:
    def test_split_by_shape(self):
        p = params(s=F(2, 3), eps=F(1, 2 ** 90), ell=F(1, 2 ** 39),
                   big_r=F(301))
        n = generation_of_q(1, p)
        by_class = class_rects(ball(F(43, 2 ** 46), F(29, 2 ** 46),
                                    F(1, 2 ** 40)), n, p)
        assert len(by_class[1]) + len(by_class[2]) >= 1
        for delta, rects in by_class.items():
            for r in rects:
                assert delta_class(r) == delta

    def test_fit_bound_value(self):
        assert fit_bound(3, params()) == F(2) / (3 * 10 ** 3)
