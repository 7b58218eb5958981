"""Weighted rational approximation: danger rectangles, scores, banding.

For a weight pair (s, t) with s + t = 1, each rational point P = (p/q, r/q)
owns an axis-aligned danger rectangle with halfwidths eps/q^(1+s) and
eps/q^(1+t).  A point whose ball avoids every danger rectangle up to
denominator Q has its truncated badness score min_q max(q^s||qx||, q^t||qy||)
certified above eps.

Parameters (weights, eps, band ratio R, scale ell) are exact rationals;
stored rectangle geometry is dyadic with outward rounding, so rectangle
predicates stay exact while the rectangles themselves conservatively enclose
the ideal ones.  Banding assigns every rational a generation: the stage at
which its rectangle's larger halfwidth becomes commensurate with stage-size
balls; all band boundaries are decided in exact integer arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from fractions import Fraction
from functools import lru_cache
from math import gcd
from typing import Iterable, Iterator, Optional, Sequence

import gmpy2
from gmpy2 import mpq, mpz

from .errors import HawkError, GeometryError
from .geometry import Ball, Point2, Rect, Slab, ball_meets_rect, min_width_slab
from .scalars import (DEFAULT_PRECISION, Interval, Scalar, YES, exact,
                      scalar, scalar_up)


@dataclass(frozen=True)
class Params:
    """Approximation parameters; every field is an exact rational."""

    s: Fraction
    t: Fraction
    epsilon: Fraction
    ell: Fraction
    big_r: Fraction  # the band ratio R
    q_cap: int
    prec: int = DEFAULT_PRECISION

    def __post_init__(self):
        if self.s + self.t != 1:
            raise HawkError(f"weights must satisfy s + t = 1, got {self.s} + {self.t}")
        if not (self.s > 0 and self.t > 0):
            raise HawkError("weights must be positive")
        if not self.epsilon > 0:
            raise HawkError("epsilon must be positive")
        if not self.ell > 0:
            raise HawkError("ell must be positive")
        if not self.big_r > 1:
            raise HawkError("band ratio R must exceed 1")
        if self.q_cap < 1:
            raise HawkError("q_cap must be at least 1")

    def with_epsilon(self, epsilon: Fraction) -> "Params":
        return replace(self, epsilon=Fraction(epsilon))


@dataclass(frozen=True)
class RatPoint:
    """Canonical rational point (p/q, r/q): q >= 1 and gcd(p, r, q) = 1."""

    p: int
    r: int
    q: int

    def __post_init__(self):
        if self.q < 1:
            raise HawkError("denominator must be positive")
        if gcd(gcd(abs(self.p), abs(self.r)), self.q) != 1:
            raise HawkError(f"({self.p},{self.r},{self.q}) is not gcd-reduced")

    def coords(self) -> tuple:
        return (mpq(self.p, self.q), mpq(self.r, self.q))


# --- danger rectangles ---------------------------------------------------------


@lru_cache(maxsize=65536)
def _halfwidths_q(q: int, params: Params) -> tuple:
    """Outward upper bounds of eps/q^(1+s), eps/q^(1+t) as exact rationals."""
    prec = params.prec
    eps = Interval.point(params.epsilon, prec)
    qi = Interval.point(q, prec)
    wx = eps / qi.pow_fraction(1 + params.s)
    wy = eps / qi.pow_fraction(1 + params.t)
    return (exact(wx.hi), exact(wy.hi))


def delta_rect_raw(p: int, r: int, q: int, params: Params) -> Rect:
    """Danger rectangle of the representation (p, r, q) (no gcd reduction).

    The stored center is rounded once; both halfwidths absorb the center
    rounding error, so the stored box contains the ideal one.
    """
    prec = params.prec
    wx, wy = _halfwidths_q(q, params)
    cx = scalar(mpq(p, q), prec)
    cy = scalar(mpq(r, q), prec)
    ex = abs(exact(cx) - mpq(p, q))
    ey = abs(exact(cy) - mpq(r, q))
    return Rect(Point2(cx, cy), scalar_up(wx + ex, prec), scalar_up(wy + ey, prec))


def delta_rect(point: RatPoint, params: Params) -> Rect:
    return delta_rect_raw(point.p, point.r, point.q, params)


def delta_class(rect: Rect) -> int:
    """Shape class: 1 when halfwidth_x >= halfwidth_y, else 2."""
    return 1 if rect.halfwidth_x >= rect.halfwidth_y else 2


# --- badness score -------------------------------------------------------------


@lru_cache(maxsize=65536)
def _q_power(q: int, expo: Fraction, prec: int) -> Interval:
    return Interval.point(q, prec).pow_fraction(expo)


def _nearest_int_dist(v: mpq) -> mpq:
    fl = v.numerator // v.denominator
    frac = v - fl
    return min(frac, 1 - frac)


def badness_argmin(x: Scalar, y: Scalar, big_q: int,
                   params: Params) -> tuple:
    """Badness enclosure plus the denominator attaining the minimum."""
    if big_q < 1:
        raise HawkError("Q must be at least 1")
    prec = params.prec
    xq, yq = exact(x), exact(y)
    best: Optional[Interval] = None
    best_q = 1
    for q in range(1, big_q + 1):
        dx = _nearest_int_dist(q * xq)
        dy = _nearest_int_dist(q * yq)
        if dx == 0 and dy == 0:
            return Interval.zero(prec), q
        vx = _q_power(q, params.s, prec) * Interval.point(dx, prec) \
            if dx != 0 else Interval.zero(prec)
        vy = _q_power(q, params.t, prec) * Interval.point(dy, prec) \
            if dy != 0 else Interval.zero(prec)
        val = Interval(max(vx.lo, vy.lo), max(vx.hi, vy.hi), prec)
        if best is None or val.hi < best.hi:
            best_q = q
        if best is None:
            best = val
        else:
            best = Interval(min(best.lo, val.lo), min(best.hi, val.hi), prec)
    return best, best_q


def badness_score(x: Scalar, y: Scalar, big_q: int, params: Params) -> Interval:
    """Enclosure of min_{1<=q<=Q} max(q^s ||qx||, q^t ||qy||)."""
    return badness_argmin(x, y, big_q, params)[0]


# --- enumeration ----------------------------------------------------------------


def dangerous_pairs(region: Ball, q_lo: int, q_hi: int, params: Params,
                    canonical_only: bool = True) -> Iterator[tuple]:
    """Yield ((p, r, q), Rect) for representations whose rectangle meets region.

    Candidates per q are limited to the integer windows around the region, so
    the cost is O(sum of window sizes), never a scan of the whole lattice.
    The window reach uses the halfwidths at q_lo (they shrink with q, plus a
    relative guard for the stored rectangles' outward rounding), which keeps
    the per-q filter in plain integer arithmetic; candidates that survive it
    are tested against their exact rectangle.
    """
    cx, cy = exact(region.center.x), exact(region.center.y)
    rad = exact(region.radius)
    wx0, wy0 = _halfwidths_q(q_lo, params)
    guard = mpq(1) + mpq(1, 2 ** 100)
    slack = (abs(cx) + abs(cy) + 1) / mpq(2 ** 200)
    ax = cx - rad - wx0 * guard - slack
    bx = cx + rad + wx0 * guard + slack
    ay = cy - rad - wy0 * guard - slack
    by = cy + rad + wy0 * guard + slack
    nax, dax = int(ax.numerator), int(ax.denominator)
    nbx, dbx = int(bx.numerator), int(bx.denominator)
    nay, day = int(ay.numerator), int(ay.denominator)
    nby, dby = int(by.numerator), int(by.denominator)
    for q in range(q_lo, q_hi + 1):
        p_lo = -((-q * nax) // dax)
        p_hi = (q * nbx) // dbx
        if p_lo > p_hi:
            continue
        r_lo = -((-q * nay) // day)
        r_hi = (q * nby) // dby
        if r_lo > r_hi:
            continue
        for p in range(p_lo, p_hi + 1):
            for r in range(r_lo, r_hi + 1):
                if canonical_only and gcd(gcd(abs(p), abs(r)), q) != 1:
                    continue
                rect = delta_rect_raw(p, r, q, params)
                if ball_meets_rect(region, rect) is YES:
                    yield (p, r, q), rect


def enumerate_dangerous(region: Ball, q_lo: int, q_hi: int,
                        params: Params) -> list:
    """Canonical rational points with q in range whose rectangle meets region."""
    if not (1 <= q_lo <= q_hi <= params.q_cap):
        raise HawkError(f"invalid q range [{q_lo}, {q_hi}] with cap {params.q_cap}")
    return [RatPoint(p, r, q)
            for (p, r, q), _ in dangerous_pairs(region, q_lo, q_hi, params)]


# --- certification ---------------------------------------------------------------


@dataclass(frozen=True)
class CertReport:
    passed: bool
    epsilon: Fraction
    big_q: int
    ball: Ball
    witness: Optional[tuple]  # (p, r, q) of the first violation

    def bound_statement(self) -> str:
        if not self.passed:
            return "no bound certified"
        return (f"for all z in the ball, min over 1<=q<={self.big_q} of "
                f"max(q^s||q zx||, q^t||q zy||) > {self.epsilon}")

    def to_record(self) -> dict:
        rec = {"pass": self.passed, "epsilon": str(self.epsilon),
               "Q": self.big_q}
        rec.update({f"ball_{k}": v for k, v in self.ball.to_record().items()})
        if self.witness is not None:
            rec["witness"] = "{}/{}/{}".format(*self.witness)
        return rec

    def format_text(self) -> str:
        lines = [f"certification: {'PASS' if self.passed else 'FAIL'}",
                 f"epsilon: {self.epsilon}",
                 f"Q: {self.big_q}"]
        if self.witness is not None:
            p, r, q = self.witness
            lines.append(f"witness: P = ({p}/{q}, {r}/{q})")
        else:
            lines.append(f"bound: {self.bound_statement()}")
        return "\n".join(lines)


def certify_ball(region: Ball, big_q: int, params: Params) -> CertReport:
    """Check the region against every representation (p, r, q), q <= Q.

    Non-reduced representations are included on purpose: avoiding them too
    makes the certified bound hold for every integer q <= Q, not only the
    reduced denominators.
    """
    if big_q < 1:
        raise HawkError("Q must be at least 1")
    for (p, r, q), _ in dangerous_pairs(region, 1, big_q, params,
                                        canonical_only=False):
        return CertReport(False, params.epsilon, big_q, region, (p, r, q))
    return CertReport(True, params.epsilon, big_q, region, None)


# --- generation banding -----------------------------------------------------------


def _min_weight_ratio(params: Params) -> tuple:
    expo = 1 + min(params.s, params.t)
    return expo.numerator, expo.denominator


def generation_of_q(q: int, params: Params) -> int:
    """Band index n >= 1 with (ell/2) R^-(n+1) < eps q^-(1+min(s,t)) <= (ell/2) R^-n.

    Exact: the defining inequality is raised to the weight denominator so
    only integer arithmetic decides band membership; clamped to 1 for
    rationals whose halfwidth exceeds ell/(2R).
    """
    a, b = _min_weight_ratio(params)
    # gen >= n  <=>  R^(n*b) <= X  where  X = (ell/(2 eps))^b * q^a
    x_val = (params.ell / (2 * params.epsilon)) ** b * Fraction(q) ** a
    rb = params.big_r ** b
    if x_val < rb:
        return 1
    # float log estimate, then exact adjustment
    bits = x_val.numerator.bit_length() - x_val.denominator.bit_length()
    est = max(1, int(bits * math.log(2) /
                     (b * math.log(float(params.big_r)))))
    n = est
    while params.big_r ** ((n + 1) * b) <= x_val:
        n += 1
    while n > 1 and params.big_r ** (n * b) > x_val:
        n -= 1
    return n


def generation(point: RatPoint, params: Params) -> int:
    return generation_of_q(point.q, params)


def _first_q_at_or_past(n: int, params: Params) -> int:
    """Smallest q >= 1 with generation_of_q(q) >= n (n >= 2)."""
    a, b = _min_weight_ratio(params)
    y_val = (2 * params.epsilon / params.ell) ** b * params.big_r ** (n * b)
    num, den = y_val.numerator, y_val.denominator
    # smallest q with q^a * den >= num
    if num <= den:
        return 1
    root, _ = gmpy2.iroot(mpz(num // den), a)
    q = max(1, int(root))
    while q ** a * den < num:
        q += 1
    while q > 1 and (q - 1) ** a * den >= num:
        q -= 1
    return q


@lru_cache(maxsize=8192)
def generation_band(n: int, params: Params) -> tuple:
    """Inclusive denominator range [q_lo, q_hi] of generation n (may be empty).

    The result is already clipped to [1, q_cap]; an empty band is returned
    as (lo, hi) with lo > hi.
    """
    if n < 1:
        raise HawkError("generation index must be >= 1")
    lo = 1 if n == 1 else _first_q_at_or_past(n, params)
    hi = _first_q_at_or_past(n + 1, params) - 1
    return (max(1, lo), min(hi, params.q_cap))


def class_rects(region: Ball, n: int, params: Params) -> dict:
    """Generation-n dangerous rectangles meeting region, split by shape class."""
    lo, hi = generation_band(n, params)
    out: dict = {1: [], 2: []}
    if lo > hi:
        return out
    for (_, _, _), rect in dangerous_pairs(region, lo, hi, params):
        out[delta_class(rect)].append(rect)
    return out


def fit_bound(n: int, params: Params) -> Fraction:
    """Slab halfwidth the banding promises for generation n: (1/3) ell R^-n."""
    return params.ell / (3 * params.big_r ** n)


# --- epsilon calibration -----------------------------------------------------------


@dataclass(frozen=True)
class ProbeFailure:
    epsilon: Fraction
    probe_index: int
    n: int
    delta: int
    fitted_halfwidth: str
    bound: Fraction


@dataclass(frozen=True)
class CalibrationResult:
    epsilon: Fraction
    ok: bool
    failures: tuple
    tried: tuple

    def warning(self) -> Optional[str]:
        if self.ok:
            return None
        return ("lemma-violation: no grid value passed all probes; "
                f"returning smallest grid value {self.epsilon}")


def check_probe(region: Ball, m: int, k: int, params: Params) -> Optional[ProbeFailure]:
    """Does every shape class of generation m+k meeting the probe fit its slab?"""
    n = m + k
    bound = fit_bound(n, params)
    for delta, rects in class_rects(region, n, params).items():
        if not rects:
            continue
        slab = min_width_slab(rects, params.prec)
        if exact(slab.halfwidth) > bound:
            return ProbeFailure(params.epsilon, -1, n, delta,
                                str(exact(slab.halfwidth)), bound)
    return None


def calibrate_epsilon(corpus: Sequence[tuple], base: Params,
                      grid: Sequence[Fraction]) -> CalibrationResult:
    """Largest grid epsilon for which every probe's classes fit their slabs.

    `corpus` holds (Ball, m, k) probes; `grid` must be sorted descending.
    If nothing passes, the smallest grid value is returned with a
    lemma-violation warning recorded in the result.
    """
    if not grid:
        raise HawkError("empty calibration grid")
    grid = [Fraction(g) for g in grid]
    if any(grid[i] <= grid[i + 1] for i in range(len(grid) - 1)):
        raise HawkError("calibration grid must be strictly descending")
    all_failures = []
    for eps in grid:
        params = base.with_epsilon(eps)
        failures = []
        for idx, (region, m, k) in enumerate(corpus):
            failure = check_probe(region, m, k, params)
            if failure is not None:
                failures.append(replace(failure, probe_index=idx))
                break
        if not failures:
            return CalibrationResult(eps, True, (), tuple(grid))
        all_failures.extend(failures)
    return CalibrationResult(grid[-1], False, tuple(all_failures), tuple(grid))
