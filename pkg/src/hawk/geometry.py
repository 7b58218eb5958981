"""Certified planar geometry: balls, lines, slabs, axis-aligned rectangles.

Every stored coordinate is a Scalar (a dyadic rational), so the algebraic
predicates below are decided *exactly* with gmpy2 rationals: squared-distance
comparisons avoid square roots, and a line's distance function is evaluated
against its stored near-unit normal.  YES/NO answers are therefore sound with
respect to the stored objects at any precision, and UNKNOWN never arises for
them.  Operations that produce new coordinates (normalizing a direction,
splitting a feasibility window) round once into Scalars and re-verify their
postconditions exactly before returning.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from gmpy2 import mpfr, mpq

from .errors import GeometryError
from .scalars import (DEFAULT_PRECISION, Cert3, Interval, NO, Scalar,
                      ScalarLike, UNKNOWN, YES, cert_from_bool, exact,
                      rational, scalar, scalar_down, scalar_up,
                      scalar_to_token, scalar_from_token)

_TWO = mpq(2)


@dataclass(frozen=True)
class Point2:
    x: Scalar
    y: Scalar

    def to_record(self) -> dict:
        return {"x": scalar_to_token(self.x), "y": scalar_to_token(self.y)}

    @classmethod
    def from_record(cls, rec: dict) -> "Point2":
        return cls(scalar_from_token(rec["x"]), scalar_from_token(rec["y"]))


def point(x: ScalarLike, y: ScalarLike, prec: int = DEFAULT_PRECISION) -> Point2:
    return Point2(scalar(x, prec), scalar(y, prec))


@dataclass(frozen=True)
class Ball:
    """Euclidean disc with positive radius."""

    center: Point2
    radius: Scalar

    def __post_init__(self):
        if not self.radius > 0:
            raise GeometryError(f"ball radius must be positive, got {self.radius}")

    def to_record(self) -> dict:
        return {"x": scalar_to_token(self.center.x),
                "y": scalar_to_token(self.center.y),
                "r": scalar_to_token(self.radius)}

    @classmethod
    def from_record(cls, rec: dict) -> "Ball":
        return cls(Point2(scalar_from_token(rec["x"]), scalar_from_token(rec["y"])),
                   scalar_from_token(rec["r"]))


def ball(x: ScalarLike, y: ScalarLike, r: ScalarLike,
         prec: int = DEFAULT_PRECISION) -> Ball:
    return Ball(point(x, y, prec), scalar(r, prec))


@dataclass(frozen=True)
class Line:
    """Line {p : normal . p = offset} with a stored near-unit normal.

    (normal, offset) and (-normal, -offset) denote the same line; the
    constructor canonicalizes the sign so equal lines compare equal.
    """

    nx: Scalar
    ny: Scalar
    offset: Scalar

    def __post_init__(self):
        nx, ny = exact(self.nx), exact(self.ny)
        prec = max(self.nx.precision, self.ny.precision)
        err = nx * nx + ny * ny - 1
        bound = mpq(4, 2 ** prec)  # |n|^2 within 2^(2-prec) of 1
        if err > bound or err < -bound:
            raise GeometryError("line normal is not a unit vector")
        if ny < 0 or (ny == 0 and nx < 0):
            object.__setattr__(self, "nx", -self.nx)
            object.__setattr__(self, "ny", -self.ny)
            object.__setattr__(self, "offset", -self.offset)

    def to_record(self) -> dict:
        return {"nx": scalar_to_token(self.nx), "ny": scalar_to_token(self.ny),
                "off": scalar_to_token(self.offset)}

    @classmethod
    def from_record(cls, rec: dict) -> "Line":
        return cls(scalar_from_token(rec["nx"]), scalar_from_token(rec["ny"]),
                   scalar_from_token(rec["off"]))


def line_from_normal(nx: ScalarLike, ny: ScalarLike, offset: ScalarLike,
                     prec: int = DEFAULT_PRECISION) -> Line:
    """Normalize (nx, ny) to unit length and build the line n.p = offset.

    The offset is interpreted against the *normalized* normal, i.e. the input
    (nx, ny, offset) is rescaled by 1/|n|.  The reciprocal norm is computed
    with 32 guard bits so the stored normal meets the unit-length invariant
    after its own rounding step.
    """
    nxq, nyq = rational(nx), rational(ny)
    nsq = nxq * nxq + nyq * nyq
    if nsq == 0:
        raise GeometryError("zero normal vector")
    inv = Interval.point(1, prec + 32) / Interval.point(nsq, prec + 32).sqrt()
    mid = exact(inv.mid())
    ux = scalar(nxq * mid, prec)
    uy = scalar(nyq * mid, prec)
    off = scalar(rational(offset) * mid, prec)
    return Line(ux, uy, off)


def line_through_points(a: Point2, b: Point2, prec: int = DEFAULT_PRECISION) -> Line:
    dx = exact(b.x) - exact(a.x)
    dy = exact(b.y) - exact(a.y)
    # normal is the left perpendicular of the direction
    nxq, nyq = -dy, dx
    offq = nxq * exact(a.x) + nyq * exact(a.y)
    return line_from_normal(nxq, nyq, offq, prec)


@dataclass(frozen=True)
class Slab:
    """Thickened line: all points within `halfwidth` of `line`."""

    line: Line
    halfwidth: Scalar

    def __post_init__(self):
        if not self.halfwidth > 0:
            raise GeometryError("slab halfwidth must be positive")

    def to_record(self) -> dict:
        rec = self.line.to_record()
        rec["hw"] = scalar_to_token(self.halfwidth)
        return rec

    @classmethod
    def from_record(cls, rec: dict) -> "Slab":
        return cls(Line.from_record(rec), scalar_from_token(rec["hw"]))


@dataclass(frozen=True)
class Rect:
    """Axis-aligned box: max-norm ball with per-axis halfwidths."""

    center: Point2
    halfwidth_x: Scalar
    halfwidth_y: Scalar

    def __post_init__(self):
        if not (self.halfwidth_x > 0 and self.halfwidth_y > 0):
            raise GeometryError("rect halfwidths must be positive")

    def corners(self) -> tuple:
        cx, cy = exact(self.center.x), exact(self.center.y)
        hx, hy = exact(self.halfwidth_x), exact(self.halfwidth_y)
        return ((cx - hx, cy - hy), (cx + hx, cy - hy),
                (cx + hx, cy + hy), (cx - hx, cy + hy))

    def to_record(self) -> dict:
        return {"x": scalar_to_token(self.center.x),
                "y": scalar_to_token(self.center.y),
                "hx": scalar_to_token(self.halfwidth_x),
                "hy": scalar_to_token(self.halfwidth_y)}

    @classmethod
    def from_record(cls, rec: dict) -> "Rect":
        return cls(Point2(scalar_from_token(rec["x"]), scalar_from_token(rec["y"])),
                   scalar_from_token(rec["hx"]), scalar_from_token(rec["hy"]))


# --- exact cores --------------------------------------------------------------


def _line_dist_q(px: mpq, py: mpq, line: Line) -> mpq:
    v = exact(line.nx) * px + exact(line.ny) * py - exact(line.offset)
    return -v if v < 0 else v


def dist_point_line(p: Point2, line: Line, prec: int = DEFAULT_PRECISION) -> Interval:
    """Enclosure of the true distance from `p` to the stored line set.

    The stored normal is only unit to within 2^(1-prec), so the exact
    |normal . p - offset| is divided by an enclosure of |normal|; the result
    contains dist(p, {q : normal . q = offset}) and its width stays within
    2^(3-prec) * max(1, |offset|, |p|).
    """
    d = _line_dist_q(exact(p.x), exact(p.y), line)
    nxq, nyq = exact(line.nx), exact(line.ny)
    norm = Interval.point(nxq * nxq + nyq * nyq, prec).sqrt()
    return Interval(scalar_down(d, prec), scalar_up(d, prec), prec) / norm


def ball_in_ball(inner: Ball, outer: Ball) -> Cert3:
    """|c_in - c_out| + r_in <= r_out, decided exactly on squared distances."""
    dx = exact(inner.center.x) - exact(outer.center.x)
    dy = exact(inner.center.y) - exact(outer.center.y)
    gap = exact(outer.radius) - exact(inner.radius)
    if gap < 0:
        return NO
    return cert_from_bool(dx * dx + dy * dy <= gap * gap)


def ball_meets_slab(b: Ball, s: Slab) -> Cert3:
    """dist(center, line) <= halfwidth + radius."""
    d = _line_dist_q(exact(b.center.x), exact(b.center.y), s.line)
    return cert_from_bool(d <= exact(s.halfwidth) + exact(b.radius))


def ball_in_slab(b: Ball, s: Slab) -> Cert3:
    """Whole ball inside the slab: dist(center, line) + radius <= halfwidth."""
    d = _line_dist_q(exact(b.center.x), exact(b.center.y), s.line)
    return cert_from_bool(d + exact(b.radius) <= exact(s.halfwidth))


def ball_meets_rect(b: Ball, r: Rect) -> Cert3:
    """Euclidean clamped-coordinate distance from center to box vs radius."""
    dx = exact(b.center.x) - exact(r.center.x)
    dy = exact(b.center.y) - exact(r.center.y)
    if dx < 0:
        dx = -dx
    if dy < 0:
        dy = -dy
    dx = max(mpq(0), dx - exact(r.halfwidth_x))
    dy = max(mpq(0), dy - exact(r.halfwidth_y))
    rq = exact(b.radius)
    return cert_from_bool(dx * dx + dy * dy <= rq * rq)


def ball_in_rect(b: Ball, r: Rect) -> Cert3:
    """Whole ball inside the box (per-axis, since the box is a max-norm ball)."""
    dx = exact(b.center.x) - exact(r.center.x)
    dy = exact(b.center.y) - exact(r.center.y)
    if dx < 0:
        dx = -dx
    if dy < 0:
        dy = -dy
    rq = exact(b.radius)
    return cert_from_bool(dx + rq <= exact(r.halfwidth_x)
                          and dy + rq <= exact(r.halfwidth_y))


def rect_in_slab(r: Rect, s: Slab) -> Cert3:
    """All four corners within halfwidth of the slab's line."""
    hw = exact(s.halfwidth)
    for cx, cy in r.corners():
        if _line_dist_q(cx, cy, s.line) > hw:
            return NO
    return YES


# --- minimum-width slab --------------------------------------------------------


def _convex_hull(points: Sequence[tuple]) -> list:
    """Monotone-chain hull over exact rational points, counterclockwise."""
    pts = sorted(set(points))
    if len(pts) <= 2:
        return pts

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower = []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper = []
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


def min_width_slab(rects: Sequence[Rect], prec: int = DEFAULT_PRECISION) -> Slab:
    """Smallest-width slab containing every rectangle.

    The minimum-width enclosing slab of a point set is flush with an edge of
    the convex hull, so the exact optimum direction is found by comparing, for
    each hull edge, the squared flush width max_v cross(e, v-a)^2 / |e|^2 --
    a pure rational comparison.  The returned slab uses that direction's
    normalized normal, the midline offset, and a halfwidth inflated by a
    relative 2^-40 so containment of every corner still certifies after the
    one rounding step (well within the (1 + 2^-24) optimality contract).
    """
    if not rects:
        raise GeometryError("no rectangles")
    corners = []
    for r in rects:
        corners.extend(r.corners())
    hull = _convex_hull(corners)
    if len(hull) < 3:
        # cannot happen for valid rects (each contributes a 2-d box)
        raise GeometryError("degenerate corner set")

    best = None  # (max_cross_sq, edge_len_sq, index)
    n = len(hull)
    for i in range(n):
        ax, ay = hull[i]
        bx, by = hull[(i + 1) % n]
        ex, ey = bx - ax, by - ay
        elen_sq = ex * ex + ey * ey
        max_cross = mpq(0)
        for vx, vy in hull:
            c = ex * (vy - ay) - ey * (vx - ax)
            if c < 0:
                c = -c
            if c > max_cross:
                max_cross = c
        mc_sq = max_cross * max_cross
        if best is None or mc_sq * best[1] < best[0] * elen_sq:
            best = (mc_sq, elen_sq, i)

    _, _, i = best
    ax, ay = hull[i]
    bx, by = hull[(i + 1) % n]
    ex, ey = bx - ax, by - ay
    line = line_from_normal(-ey, ex, -ey * ax + ex * ay, prec)

    nxq, nyq, offq = exact(line.nx), exact(line.ny), exact(line.offset)
    projections = [nxq * vx + nyq * vy for vx, vy in corners]
    smin, smax = min(projections), max(projections)
    mid_off = scalar((smin + smax) / _TWO, prec)
    need = max(smax - exact(mid_off), exact(mid_off) - smin)
    halfwidth = scalar_up(need * mpq(2 ** 40 + 1, 2 ** 40), prec)
    centered = Line(line.nx, line.ny, mid_off)
    return Slab(centered, halfwidth)


# --- constructive avoidance witness -------------------------------------------


def legal_ball_avoiding_slab(b: Ball, s: Slab, beta: ScalarLike,
                             prec: int = DEFAULT_PRECISION) -> Ball:
    """A ball of radius >= beta*r inside `b` and disjoint from `s`.

    Shifts the center along the slab normal, away from the line, by the
    midpoint of the feasibility window [gamma + r' - u, r - r']; feasibility
    is guaranteed for beta < 1/3 and slab halfwidth <= beta*r.  The
    constructed ball is re-verified exactly; a few shrinking retries guard
    against the single rounding step, after which the search gives up.
    """
    beta_q = rational(beta)
    if not (0 < beta_q < mpq(1, 3)):
        raise GeometryError("beta must lie in (0, 1/3)")
    gamma = exact(s.halfwidth)
    r = exact(b.radius)

    cx, cy = exact(b.center.x), exact(b.center.y)
    nxq, nyq = exact(s.line.nx), exact(s.line.ny)
    signed = nxq * cx + nyq * cy - exact(s.line.offset)
    sigma = 1 if signed >= 0 else -1
    u = signed if signed >= 0 else -signed

    r_new = scalar_up(beta_q * r, prec)
    rq = exact(r_new)
    lo = gamma + rq - u
    if lo < 0:
        lo = mpq(0)
    hi = r - rq
    if lo >= hi:
        # empty feasibility window: only possible when the slab exceeds
        # beta * radius by more than the 1 - 3*beta structural margin
        raise GeometryError("no legal ball at this precision")
    for attempt in range(8):
        # walk the shift from the window midpoint toward the window top
        w = mpq(2 + attempt, 4 + attempt)
        delta = lo + (hi - lo) * w
        ccx = scalar(cx + sigma * delta * nxq, prec)
        ccy = scalar(cy + sigma * delta * nyq, prec)
        candidate = Ball(Point2(ccx, ccy), r_new)
        if ball_in_ball(candidate, b) is YES and ball_meets_slab(candidate, s) is NO:
            return candidate
    raise GeometryError("no legal ball at this precision")
