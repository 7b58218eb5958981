"""Static SVG pictures of a match trace.

One panel per selected stage, auto-zoomed to that stage's ball: the current
ball, Bob's next ball, the slabs Alice deleted that turn, and on the final
panel the outcome point with the danger rectangles near the final ball.
All offsets are computed in exact rationals before the one float conversion
per pixel, so panels stay correct at radii far below float cancellation.
Rendering is output-only and deterministic: equal traces give equal bytes.
"""

from __future__ import annotations

from typing import List

from gmpy2 import mpq

from .errors import TraceError
from .geometry import Ball, Slab, ball_meets_slab
from .scalars import NO, exact
from .trace import ParsedTrace, params_from_record

PANEL = 240  # px
PAD = 10
MAX_PANELS = 8


def _fmt(v: float) -> str:
    return f"{v:.4f}"


class _Panel:
    def __init__(self, center_ball: Ball, origin_x: int):
        self.cx = exact(center_ball.center.x)
        self.cy = exact(center_ball.center.y)
        self.radius = exact(center_ball.radius)
        self.scale = (PANEL / 2 - PAD) / (1.35 * float(center_ball.radius))
        self.ox = origin_x

    def to_px(self, x: mpq, y: mpq) -> tuple:
        px = self.ox + PANEL / 2 + float(x - self.cx) * self.scale
        py = PANEL / 2 - float(y - self.cy) * self.scale
        return px, py

    def circle(self, b: Ball, stroke: str, width: float = 1.2) -> str:
        px, py = self.to_px(exact(b.center.x), exact(b.center.y))
        r = float(b.radius) * self.scale
        return (f'<circle cx="{_fmt(px)}" cy="{_fmt(py)}" r="{_fmt(r)}" '
                f'fill="none" stroke="{stroke}" stroke-width="{width}"/>')

    def dot(self, x: mpq, y: mpq, fill: str) -> str:
        px, py = self.to_px(x, y)
        return f'<circle cx="{_fmt(px)}" cy="{_fmt(py)}" r="2.5" fill="{fill}"/>'

    def slab(self, s: Slab, color: str) -> str:
        nx, ny = exact(s.line.nx), exact(s.line.ny)
        d = nx * self.cx + ny * self.cy - exact(s.line.offset)
        w = exact(s.halfwidth)
        if abs(d) > 2 * self.radius + w:
            return ""
        fx, fy = self.cx - d * nx, self.cy - d * ny
        length = 3 * self.radius
        dx, dy = -ny, nx
        corners = [(fx + sx * length * dx + sy * w * nx,
                    fy + sx * length * dy + sy * w * ny)
                   for sx, sy in ((-1, -1), (1, -1), (1, 1), (-1, 1))]
        pts = " ".join(f"{_fmt(px)},{_fmt(py)}"
                       for px, py in (self.to_px(x, y) for x, y in corners))
        return (f'<polygon points="{pts}" fill="{color}" fill-opacity="0.25" '
                f'stroke="{color}" stroke-width="0.6"/>')

    def rect(self, x: mpq, y: mpq, hx: mpq, hy: mpq, color: str) -> str:
        x0, y0 = self.to_px(x - hx, y + hy)
        w = max(2 * float(hx) * self.scale, 1.0)
        h = max(2 * float(hy) * self.scale, 1.0)
        return (f'<rect x="{_fmt(x0)}" y="{_fmt(y0)}" width="{_fmt(w)}" '
                f'height="{_fmt(h)}" fill="{color}" fill-opacity="0.5"/>')

    def label(self, text: str) -> str:
        return (f'<text x="{_fmt(self.ox + 6)}" y="14" font-size="10" '
                f'font-family="monospace">{text}</text>')


def render_svg(parsed: ParsedTrace) -> str:
    header = parsed.header
    balls: List[Ball] = [Ball.from_record(header["b0"])]
    alice_slabs: List[list] = []
    for rec in parsed.moves():
        if rec["player"] == "bob":
            balls.append(Ball.from_record(rec["ball"]))
        else:
            alice_slabs.append([Slab.from_record(s) for s in rec["slabs"]])

    if header["game"] == "absolute":
        # re-assert the visual invariant before drawing it
        for n, slabs in enumerate(alice_slabs):
            if n + 1 < len(balls):
                for s in slabs:
                    if ball_meets_slab(balls[n + 1], s) is not NO:
                        raise TraceError(
                            f"trace violates slab avoidance at move {n}")

    n_stages = len(balls)
    if n_stages <= MAX_PANELS:
        indices = list(range(n_stages))
    else:
        step = (n_stages - 1) / (MAX_PANELS - 1)
        indices = sorted({round(i * step) for i in range(MAX_PANELS)})

    params = params_from_record(header["params"])
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" '
             f'width="{len(indices) * PANEL}" height="{PANEL}" '
             f'viewBox="0 0 {len(indices) * PANEL} {PANEL}">',
             '<rect width="100%" height="100%" fill="white"/>']

    final = balls[-1]
    for slot, n in enumerate(indices):
        panel = _Panel(balls[n], slot * PANEL)
        parts.append(f'<clipPath id="c{slot}"><rect x="{slot * PANEL}" '
                     f'y="0" width="{PANEL}" height="{PANEL}"/></clipPath>')
        parts.append(f'<g clip-path="url(#c{slot})">')
        parts.append(panel.circle(balls[n], "#1f4e79"))
        if n + 1 < len(balls):
            parts.append(panel.circle(balls[n + 1], "#2e8b57"))
        if n < len(alice_slabs):
            for s in alice_slabs[n]:
                drawn = panel.slab(s, "#b22222")
                if drawn:
                    parts.append(drawn)
        if n == n_stages - 1:
            from .diophantine import dangerous_pairs
            zoom = Ball(final.center, final.radius * 4)
            shown = 0
            for (_, _, _), rect in dangerous_pairs(
                    zoom, 1, min(params.q_cap, 1000), params):
                parts.append(panel.rect(exact(rect.center.x),
                                        exact(rect.center.y),
                                        exact(rect.halfwidth_x),
                                        exact(rect.halfwidth_y), "#ff8c00"))
                shown += 1
                if shown >= 64:
                    break
            parts.append(panel.dot(exact(final.center.x),
                                   exact(final.center.y), "#000000"))
        parts.append(panel.label(f"n={n} r={float(balls[n].radius):.2e}"))
        parts.append('</g>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
