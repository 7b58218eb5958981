"""Geometry kernel: predicate examples, soundness, and the min-width slab."""

import math
import random
from fractions import Fraction

import gmpy2
import pytest
from gmpy2 import mpfr, mpq
from hypothesis import given, settings, strategies as st

from hawk.errors import GeometryError
from hawk.geometry import (Ball, Line, Point2, Rect, Slab, ball,
                           ball_in_ball, ball_in_rect, ball_in_slab,
                           ball_meets_rect, ball_meets_slab, dist_point_line,
                           legal_ball_avoiding_slab, line_from_normal,
                           min_width_slab, point, rect_in_slab)
from hawk.scalars import Interval, NO, UNKNOWN, YES, exact, scalar, scalar_down

X_AXIS = line_from_normal(0, 1, 0)


def sq(x, y, half="0.5"):
    return Rect(point(x, y), scalar(half), scalar(half))


class TestConstruction:
    def test_zero_radius_rejected(self):
        with pytest.raises(GeometryError):
            ball(0, 0, 0)

    def test_zero_halfwidth_slab_rejected(self):
        with pytest.raises(GeometryError):
            Slab(X_AXIS, scalar(0))

    def test_non_unit_normal_rejected(self):
        with pytest.raises(GeometryError):
            Line(scalar(1), scalar(1), scalar(0))

    def test_canonical_sign(self):
        a = line_from_normal(0, -1, 3)
        b = line_from_normal(0, 1, -3)
        assert a == b

    def test_zero_normal_rejected(self):
        with pytest.raises(GeometryError):
            line_from_normal(0, 0, 1)


class TestDistPointLine:
    def test_horizontal_axis_distance(self):
        d = dist_point_line(point(3, "0.4"), X_AXIS)
        assert d.contains_value(exact(scalar("0.4")))
        assert float(d.width()) < 1e-70

    def test_point_on_line(self):
        d = dist_point_line(point(7, 0), X_AXIS)
        assert d.lo == 0

    def test_diagonal_sqrt2(self):
        line = line_from_normal(1, 1, 0)
        d = dist_point_line(point(1, 1), line)
        ref = gmpy2.context(precision=500).sqrt(mpfr(2, 500))
        assert d.lo <= ref <= d.hi

    def test_width_within_contract(self):
        rng = random.Random(5)
        for _ in range(50):
            px, py = (Fraction(rng.getrandbits(40), 2 ** 35) for _ in range(2))
            line = line_from_normal(rng.random(), rng.random() + 0.1,
                                    rng.random())
            d = dist_point_line(point(px, py), line)
            bound = Fraction(8, 2 ** 256) * max(
                Fraction(1), abs(exact(line.offset)), abs(px), abs(py))
            assert exact(d.width()) <= bound


class TestBallInBall:
    def test_identity(self):
        b = ball(0, 0, 1)
        assert ball_in_ball(b, b) is YES

    def test_internal_tangent(self):
        assert ball_in_ball(ball("0.5", 0, "0.5"), ball(0, 0, 1)) is YES

    def test_overhang(self):
        assert ball_in_ball(ball("0.6", 0, "0.5"), ball(0, 0, 1)) is NO


class TestBallMeetsSlab:
    S = Slab(X_AXIS, scalar("0.5"))

    def test_far(self):
        assert ball_meets_slab(ball(0, 5, 1), self.S) is NO

    def test_touching(self):
        assert ball_meets_slab(ball(0, "1.5", 1), self.S) is YES

    def test_margin_beyond_rounding(self):
        assert ball_meets_slab(ball(0, "1.500001", 1), self.S) is NO


class TestBallMeetsRect:
    R = Rect(point(0, 0), scalar("0.1"), scalar("0.1"))

    def test_center_inside(self):
        assert ball_meets_rect(ball(0, 0, 1), self.R) is YES

    def test_far(self):
        assert ball_meets_rect(ball(10, 0, 1), self.R) is NO

    def test_tangent_gap(self):
        assert ball_meets_rect(ball("0.2", 0, "0.1"), self.R) is YES

    def test_corner_distance(self):
        # gap along the diagonal from (0.2, 0.2) to the corner is 0.1*sqrt(2)
        assert ball_meets_rect(ball("0.2", "0.2", "0.14"), self.R) is NO
        assert ball_meets_rect(ball("0.2", "0.2", "0.15"), self.R) is YES


class TestRectInSlab:
    def test_fits(self):
        r = Rect(point(0, 0), scalar("0.1"), scalar("0.01"))
        assert rect_in_slab(r, Slab(X_AXIS, scalar("0.01"))) is YES

    def test_too_thin(self):
        r = Rect(point(0, 0), scalar("0.1"), scalar("0.01"))
        assert rect_in_slab(r, Slab(X_AXIS, scalar("0.009"))) is NO

    def test_diagonal_corners(self):
        r = Rect(point(0, 0), scalar(1), scalar(1))
        line = line_from_normal(1, -1, 0)
        wide = Slab(line, scalar("1.4142135624"))
        narrow = Slab(line, scalar("1.41"))
        assert rect_in_slab(r, wide) is YES
        assert rect_in_slab(r, narrow) is NO


class TestContainmentHelpers:
    def test_ball_in_slab(self):
        assert ball_in_slab(ball(0, "0.2", "0.1"), Slab(X_AXIS, scalar("0.3"))) is YES
        assert ball_in_slab(ball(0, "0.25", "0.1"), Slab(X_AXIS, scalar("0.3"))) is NO

    def test_ball_in_rect(self):
        r = Rect(point(0, 0), scalar("0.5"), scalar("0.25"))
        assert ball_in_rect(ball("0.2", 0, "0.3"), r) is NO
        assert ball_in_rect(ball("0.2", 0, "0.05"), r) is YES


def _rand_ball(rng, span=4):
    cx = Fraction(rng.getrandbits(30) - 2 ** 29, 2 ** 27)
    cy = Fraction(rng.getrandbits(30) - 2 ** 29, 2 ** 27)
    r = Fraction(rng.getrandbits(20) + 1, 2 ** 18)
    return ball(cx, cy, r)


def _rand_slab(rng):
    line = line_from_normal(Fraction(rng.getrandbits(20) - 2 ** 19, 2 ** 16),
                            Fraction(rng.getrandbits(20) + 1, 2 ** 16),
                            Fraction(rng.getrandbits(20) - 2 ** 19, 2 ** 16))
    return Slab(line, scalar(Fraction(rng.getrandbits(16) + 1, 2 ** 15)))


class TestSoundness:
    """Recomputing each predicate with 1024-bit interval arithmetic over the
    same stored coordinates never contradicts the exact YES/NO answer, and on
    this random family the interval oracle itself is never undecided."""

    N = 2500  # x4 predicates = 10^4 instances
    PREC = 1024

    def _iv(self, x):
        return Interval.point(exact(x), self.PREC)

    def _ball_in_ball_iv(self, inner, outer):
        dx = self._iv(inner.center.x) - self._iv(outer.center.x)
        dy = self._iv(inner.center.y) - self._iv(outer.center.y)
        lhs = (dx * dx + dy * dy).sqrt() + self._iv(inner.radius)
        return lhs.compare_le(self._iv(outer.radius))

    def _dist_iv(self, b, s):
        v = (self._iv(s.line.nx) * self._iv(b.center.x)
             + self._iv(s.line.ny) * self._iv(b.center.y)
             - self._iv(s.line.offset))
        return v.abs()

    def _ball_meets_slab_iv(self, b, s):
        return self._dist_iv(b, s).compare_le(
            self._iv(s.halfwidth) + self._iv(b.radius))

    def _ball_meets_rect_iv(self, b, r):
        zero = Interval.zero(self.PREC)
        dx = (self._iv(b.center.x) - self._iv(r.center.x)).abs() \
            - self._iv(r.halfwidth_x)
        dy = (self._iv(b.center.y) - self._iv(r.center.y)).abs() \
            - self._iv(r.halfwidth_y)
        dx = Interval(max(zero.lo, dx.lo), max(zero.hi, dx.hi), self.PREC)
        dy = Interval(max(zero.lo, dy.lo), max(zero.hi, dy.hi), self.PREC)
        rr = self._iv(b.radius)
        return (dx * dx + dy * dy).compare_le(rr * rr)

    def _rect_in_slab_iv(self, r, s):
        hw = self._iv(s.halfwidth)
        answers = []
        for cx, cy in r.corners():
            v = (self._iv(s.line.nx) * Interval.point(cx, self.PREC)
                 + self._iv(s.line.ny) * Interval.point(cy, self.PREC)
                 - self._iv(s.line.offset)).abs()
            answers.append(v.compare_le(hw))
        if all(a is YES for a in answers):
            return YES
        if any(a is NO for a in answers):
            return NO
        return UNKNOWN

    def test_no_flips_at_higher_precision(self):
        rng = random.Random(99)
        undecided = 0
        for _ in range(self.N):
            b1, b2 = _rand_ball(rng), _rand_ball(rng)
            s = _rand_slab(rng)
            r = Rect(b2.center, b2.radius, scalar(exact(b2.radius) / 2))
            for fast, oracle in (
                    (ball_in_ball(b1, b2), self._ball_in_ball_iv(b1, b2)),
                    (ball_meets_slab(b1, s), self._ball_meets_slab_iv(b1, s)),
                    (ball_meets_rect(b1, r), self._ball_meets_rect_iv(b1, r)),
                    (rect_in_slab(r, s), self._rect_in_slab_iv(r, s))):
                if oracle is UNKNOWN:
                    undecided += 1
                else:
                    assert fast is oracle
        assert undecided == 0


@st.composite
def slab_and_ball(draw):
    nx = draw(st.integers(min_value=-50, max_value=50))
    ny = draw(st.integers(min_value=1, max_value=50))
    off = draw(st.fractions(min_value=-4, max_value=4))
    hw = draw(st.fractions(min_value=Fraction(1, 100), max_value=2))
    cx = draw(st.fractions(min_value=-4, max_value=4))
    cy = draw(st.fractions(min_value=-4, max_value=4))
    r = draw(st.fractions(min_value=Fraction(1, 100), max_value=2))
    return (Slab(line_from_normal(nx, ny, off), scalar(hw)), ball(cx, cy, r))


class TestInvariance:
    @given(slab_and_ball())
    @settings(max_examples=150, deadline=None)
    def test_negated_normal_same_answers(self, sb):
        slab, b = sb
        flipped_line = Line(-slab.line.nx, -slab.line.ny, -slab.line.offset)
        flipped = Slab(flipped_line, slab.halfwidth)
        assert ball_meets_slab(b, flipped) is ball_meets_slab(b, slab)
        r = Rect(b.center, b.radius, b.radius)
        assert rect_in_slab(r, flipped) is rect_in_slab(r, slab)

    @given(slab_and_ball(), st.fractions(min_value=Fraction(1, 50), max_value=3))
    @settings(max_examples=150, deadline=None)
    def test_monotone_slab_growth(self, sb, extra):
        slab, b = sb
        r = Rect(b.center, b.radius, b.radius)
        bigger = Slab(slab.line, scalar(exact(slab.halfwidth) + extra))
        if rect_in_slab(r, slab) is YES:
            assert rect_in_slab(r, bigger) is YES

    @given(slab_and_ball(), st.fractions(min_value=Fraction(1, 100),
                                         max_value=Fraction(99, 100)))
    @settings(max_examples=150, deadline=None)
    def test_monotone_ball_shrink(self, sb, factor):
        _, b = sb
        outer = ball(0, 0, 8)
        if ball_in_ball(b, outer) is YES:
            smaller = Ball(b.center, scalar(exact(b.radius) * factor))
            assert ball_in_ball(smaller, outer) is YES


def grid_min_width(rects, steps=100_000):
    """Direction-scan oracle for the minimal slab width (numpy, refined)."""
    import numpy as np
    pts = []
    for r in rects:
        for cx, cy in r.corners():
            pts.append((float(cx), float(cy)))
    pts = np.array(pts)
    theta = np.linspace(0.0, math.pi, steps, endpoint=False)
    normals = np.stack([np.cos(theta), np.sin(theta)], axis=1)
    proj = normals @ pts.T
    widths = proj.max(axis=1) - proj.min(axis=1)
    k = int(widths.argmin())

    def width_at(angle):
        n = np.array([math.cos(angle), math.sin(angle)])
        p = pts @ n
        return float(p.max() - p.min())

    lo = theta[(k - 1) % steps]
    hi = theta[(k + 1) % steps]
    if lo > hi:
        lo -= math.pi
    golden = (math.sqrt(5) - 1) / 2
    a, b = lo, hi
    for _ in range(200):
        m1 = b - golden * (b - a)
        m2 = a + golden * (b - a)
        if width_at(m1) <= width_at(m2):
            b = m2
        else:
            a = m1
    refined = min(width_at((a + b) / 2), float(widths[k]))
    return refined / 2, float(widths[k]) / 2


class TestMinWidthSlab:
    def test_empty_input(self):
        with pytest.raises(GeometryError, match="no rectangles"):
            min_width_slab([])

    def test_single_box(self):
        r = Rect(point(0, 0), scalar("0.3"), scalar("0.2"))
        slab = min_width_slab([r])
        assert rect_in_slab(r, slab) is YES
        assert abs(float(slab.halfwidth) - 0.2) < 1e-9
        assert abs(float(slab.line.ny)) == 1.0  # x-axis direction

    def test_two_unit_squares(self):
        rects = [sq(0, 0), sq(10, 0)]
        slab = min_width_slab(rects)
        assert abs(float(slab.halfwidth) - 0.5) < 1e-9
        assert all(rect_in_slab(r, slab) is YES for r in rects)

    def test_three_unit_squares_vs_grid(self):
        rects = [sq(0, 0), sq(5, 0), sq(0, 5)]
        slab = min_width_slab(rects)
        refined, _ = grid_min_width(rects)
        ours = float(slab.halfwidth)
        assert abs(ours - refined) <= 1e-6 * max(1.0, refined)
        assert all(rect_in_slab(r, slab) is YES for r in rects)

    def test_lattice_instances_vs_grid(self):
        rng = random.Random(7)
        for _ in range(12):
            rects = []
            for _ in range(rng.randrange(1, 7)):
                cx, cy = rng.randrange(-2, 3), rng.randrange(-2, 3)
                hx, hy = rng.choice([1, 2]), rng.choice([1, 2])
                rects.append(Rect(point(Fraction(cx, 4), Fraction(cy, 4)),
                                  scalar(Fraction(hx, 4)),
                                  scalar(Fraction(hy, 4))))
            slab = min_width_slab(rects)
            ours = float(slab.halfwidth)
            refined, raw = grid_min_width(rects, steps=200_000)
            assert ours <= raw + 1e-12
            assert abs(ours - refined) <= 1e-6
            assert all(rect_in_slab(r, slab) is YES for r in rects)


class TestLegalBallAvoidingSlab:
    def test_example_cross_slab(self):
        b = ball(0, 0, 1)
        s = Slab(X_AXIS, scalar_down(Fraction(1, 10)))
        out = legal_ball_avoiding_slab(b, s, Fraction(1, 10))
        assert ball_in_ball(out, b) is YES
        assert ball_meets_slab(out, s) is NO
        assert exact(out.radius) >= Fraction(1, 10) * exact(b.radius)

    def test_far_slab(self):
        b = ball(0, 0, 1)
        s = Slab(line_from_normal(0, 1, 50), scalar("0.01"))
        out = legal_ball_avoiding_slab(b, s, Fraction(1, 5))
        assert ball_in_ball(out, b) is YES
        assert ball_meets_slab(out, s) is NO

    def test_through_center_near_limit(self):
        b = ball(0, 0, 1)
        beta = Fraction(1, 3) - Fraction(1, 2 ** 20)
        s = Slab(X_AXIS, scalar_down(beta))
        out = legal_ball_avoiding_slab(b, s, beta)
        assert ball_in_ball(out, b) is YES
        assert ball_meets_slab(out, s) is NO

    def test_randomized_postconditions(self):
        rng = random.Random(31337)
        for _ in range(200):
            b = _rand_ball(rng)
            beta = Fraction(rng.randrange(1, 3333), 10 ** 4)
            hw = beta * exact(b.radius) * Fraction(rng.randrange(1, 1000), 1000)
            line = line_from_normal(rng.random() - 0.5, rng.random() + 0.01,
                                    rng.random() * 4 - 2)
            s = Slab(line, scalar_down(Fraction(hw)))
            out = legal_ball_avoiding_slab(b, s, beta)
            assert ball_in_ball(out, b) is YES
            assert ball_meets_slab(out, s) is NO
            assert exact(out.radius) >= beta * exact(b.radius)

    def test_bad_beta(self):
        with pytest.raises(GeometryError):
            legal_ball_avoiding_slab(ball(0, 0, 1), Slab(X_AXIS, scalar("0.1")),
                                     Fraction(1, 2))
