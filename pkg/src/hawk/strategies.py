"""Alice strategies (trigger, adapter) and a bestiary of Bob adversaries.

The trigger strategy plays the potential game: it waits for Bob's radius to
cross the geometric thresholds R^-m r0 / 2 and, at each crossing, covers the
dangerous rectangles of the next K_max generations around the scaled ball
B(x_j, R^-m r0) with one slab per (generation, shape-class), each thickened
to 3 R^-(m+k) r0.  The slab-fit bound promised by the banding is monitored:
a fitted slab wider than (1/3) ell R^-(m+k) records a LEMMA_VIOLATION event
but the deletion is still played.

The adapter converts any potential-game strategy into an absolute-game one:
it mirrors Bob's balls into a virtual potential match, keeps that match's
deletion ledger, and each turn deletes the beta*r_n slab whose covered
ledger mass (the phi potential) is at least half the maximum over a finite
candidate set.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterator, List, Optional, Sequence, Tuple

from gmpy2 import mpq

from .diophantine import (Params, class_rects, dangerous_pairs, fit_bound,
                          generation_band)
from .engine import (AbsoluteRules, MoveAliceAbs, MoveAlicePot,
                     PotentialRules, Transcript, new_match, submit_alice,
                     submit_bob)
from .errors import StrategyError
from .geometry import (Ball, Line, Point2, Slab, ball_in_ball, ball_in_slab,
                       ball_meets_slab, legal_ball_avoiding_slab,
                       line_from_normal, min_width_slab)
from .scalars import (Cert3, DEFAULT_PRECISION, Interval, NO, Scalar,
                      UNKNOWN, YES, exact, interval_sum, rational, scalar,
                      scalar_down, scalar_to_token, scalar_up)


# --- choose_R -------------------------------------------------------------------


def _budget_ok(r_int: int, beta: Fraction, c: Fraction) -> bool:
    """Does R satisfy the summed deletion budget 2*3^c*R^-c/(1-R^-c) <= (beta^2/2)^c?

    Equivalent closed form: R^c >= 1 + 2*(6/beta^2)^c.  Exact for integer c;
    certified interval comparison (with escalation) otherwise.
    """
    target = 1 + 2 * (6 / beta ** 2) ** c if c.denominator == 1 else None
    if target is not None:
        return Fraction(r_int) ** c.numerator >= target
    prec = DEFAULT_PRECISION
    while True:
        lhs = Interval.point(r_int, prec).pow_fraction(c)
        rhs = Interval.point(1, prec) + \
            Interval.point(2, prec) * Interval.point(6 / beta ** 2,
                                                     prec).pow_fraction(c)
        res = rhs.compare_le(lhs)
        if res is not UNKNOWN:
            return res is YES
        if prec >= 4096:
            raise StrategyError("choose_R comparison undecidable")
        prec *= 2


def choose_R(beta, c) -> int:
    """Smallest integer R >= 1/beta meeting the deletion-budget inequality."""
    beta, c = Fraction(beta), Fraction(c)
    if not (beta > 0 and c > 0):
        raise StrategyError("choose_R requires beta > 0 and c > 0")
    floor_r = max(2, math.ceil(1 / beta))
    # float estimate of the closed form, then exact scan around it
    est = (1 + 2 * (6 / float(beta) ** 2) ** float(c)) ** (1 / float(c))
    r_int = max(floor_r, int(est) - 2)
    while not _budget_ok(r_int, beta, c):
        r_int += 1
    while r_int - 1 >= floor_r and _budget_ok(r_int - 1, beta, c):
        r_int -= 1
    return r_int


# --- trigger strategy ------------------------------------------------------------


@dataclass
class TriggerState:
    m_next: int
    j_of_m: dict
    big_r: Fraction
    ell: Fraction
    k_max: int


def k_max_for(big_r: Fraction, r0: Fraction, r_stop: Fraction) -> int:
    """ceil(log_R(r0 / r_stop)) + 1; slabs beyond it are below the radius floor."""
    x = Fraction(r0) / Fraction(r_stop)
    k = 0
    power = Fraction(1)
    while power < x:
        k += 1
        power *= big_r
    return k + 1


def trigger_detect(transcript: Transcript, state: TriggerState,
                   r0: Fraction) -> Optional[int]:
    """Fire the pending trigger if Bob's new radius crossed its threshold.

    At most one trigger can fire per Bob move when R >= 1/beta; a double
    crossing is asserted as a misconfiguration.
    """
    j = transcript.n_bob_moves()
    r_j = exact(transcript.current_radius())
    m = state.m_next
    threshold = rational(r0 / 2 * state.big_r ** -m)
    if r_j > threshold:
        return None
    if j < 1:
        raise StrategyError("trigger fired on Bob's opening ball")
    if r_j <= rational(r0 / 2 * state.big_r ** -(m + 1)):
        raise StrategyError(
            "two triggers fired on one move; is R below 1/beta?")
    state.j_of_m[m] = j
    state.m_next = m + 1
    return m


class TriggerAlice:
    """Potential-game Alice: covers banded danger around scaled trigger balls."""

    def __init__(self, rules: PotentialRules, params: Params, ball0: Ball,
                 r_stop: Fraction):
        r0 = Fraction(int(exact(ball0.radius).numerator),
                      int(exact(ball0.radius).denominator))
        if params.ell != 2 * r0:
            raise StrategyError(
                f"params.ell must equal 2*r0 = {2 * r0}, got {params.ell}")
        if params.big_r < 1 / rules.beta:
            raise StrategyError("band ratio R must be at least 1/beta")
        self.rules = rules
        self.params = params
        self.r0 = r0
        self.state = TriggerState(m_next=0, j_of_m={},
                                  big_r=Fraction(params.big_r), ell=params.ell,
                                  k_max=k_max_for(params.big_r, r0,
                                                  Fraction(r_stop)))

    # membership of the scaled ball in the clear-through-scale family
    def _scale_membership(self, bt: Ball, m: int) -> Tuple[bool, Optional[tuple]]:
        for n in range(1, m + 1):
            lo, hi = generation_band(n, self.params)
            if lo > hi:
                continue
            hit = next(dangerous_pairs(bt, lo, hi, self.params), None)
            if hit is not None:
                (p, r, q), _ = hit
                return False, (p, r, q, n)
        return True, None

    def _budget_closed_form(self, m: int, prec: int) -> Interval:
        """2 * sum_{k=1..K} (3 R^-(m+k) r0)^c as an enclosure."""
        c = self.rules.c
        terms = []
        for k in range(1, self.state.k_max + 1):
            w = 3 * self.r0 / self.state.big_r ** (m + k)
            terms.append(Interval.point(w, prec).pow_fraction(c))
        return Interval.point(2, prec) * interval_sum(terms, prec)

    def move(self, transcript: Transcript) -> Tuple[MoveAlicePot, list]:
        events: list = []
        m = trigger_detect(transcript, self.state, self.r0)
        if m is None:
            return MoveAlicePot(()), events
        j = self.state.j_of_m[m]
        prec = self.params.prec
        r_j = transcript.current_radius()
        events.append(("trigger", {"m": m, "j": j,
                                   "r_j": scalar_to_token(r_j)}))

        x_j = transcript.current_ball().center
        bt_radius = scalar_up(rational(self.r0 / self.state.big_r ** m), prec)
        bt = Ball(x_j, bt_radius)

        member, culprit = self._scale_membership(bt, m)
        covered_stage = None
        if not member:
            for stage, slab in transcript.ledger():
                if ball_in_slab(bt, slab) is YES:
                    covered_stage = stage
                    break
        events.append(("scale_check", {
            "m": m, "j": j, "member": member,
            "covered_stage": covered_stage,
            "culprit": "{}/{}/{}@gen{}".format(*culprit) if culprit else ""}))
        if not member:
            return MoveAlicePot(()), events

        slabs = []
        for k in range(1, self.state.k_max + 1):
            n = m + k
            bound = fit_bound(n, self.params)
            width = scalar_down(rational(3 * self.r0 /
                                         self.state.big_r ** n), prec)
            by_class = class_rects(bt, n, self.params)
            for delta in (1, 2):
                rects = by_class[delta]
                if not rects:
                    continue
                fitted = min_width_slab(rects, prec)
                if exact(fitted.halfwidth) > rational(bound):
                    events.append(("lemma_violation", {
                        "m": m, "k": k, "n": n, "delta": delta,
                        "rects": len(rects),
                        "fitted": scalar_to_token(fitted.halfwidth),
                        "bound": str(bound)}))
                slabs.append(Slab(fitted.line, width))

        closed = self._budget_closed_form(m, prec)
        cap = Interval.point(rational(self.rules.beta) * exact(r_j),
                             prec).pow_fraction(self.rules.c)
        if closed.compare_le(cap) is not YES:
            raise StrategyError(
                f"trigger budget not certified at m={m}; choose_R violated?")
        events.append(("budget", {
            "m": m, "emitted": len(slabs),
            "closed_form_hi": scalar_to_token(closed.hi),
            "cap_lo": scalar_to_token(cap.lo), "certified": "YES"}))
        return MoveAlicePot(slabs), events


# --- potential bookkeeping (phi) ---------------------------------------------------


def slab_contains_slab(outer: Slab, inner: Slab,
                       prec: int = DEFAULT_PRECISION) -> Cert3:
    """inner subset of outer, for (near-)parallel lines.

    Lines are parallel when |cross(n_out, n_in)| <= 2^-(prec/2); distinct
    non-parallel lines never nest, so the parallel branch is exhaustive.
    """
    nx_o, ny_o = exact(outer.line.nx), exact(outer.line.ny)
    nx_i, ny_i = exact(inner.line.nx), exact(inner.line.ny)
    cross = nx_o * ny_i - ny_o * nx_i
    if cross < 0:
        cross = -cross
    if cross > mpq(1, 2 ** (prec // 2)):
        return NO
    off_i = exact(inner.line.offset)
    if nx_o * nx_i + ny_o * ny_i < 0:
        off_i = -off_i
    gap = exact(outer.line.offset) - off_i
    if gap < 0:
        gap = -gap
    inside = gap + exact(inner.halfwidth) <= exact(outer.halfwidth)
    return YES if inside else NO


def _pow_c(value: mpq, c: Fraction, prec: int) -> Interval:
    if c.denominator == 1:
        return Interval.point(value ** c.numerator, prec)
    return Interval.point(value, prec).pow_fraction(c)


def phi(region: Ball, candidate: Slab, ledger: Sequence[tuple], c: Fraction,
        prec: int = DEFAULT_PRECISION) -> Interval:
    """Sum of halfwidth^c over ledger slabs inside `candidate` that meet `region`."""
    total = Interval.zero(prec)
    for _, slab in ledger:
        if slab_contains_slab(candidate, slab, prec) is not YES:
            continue
        if ball_meets_slab(region, slab) is not YES:
            continue
        total = total + _pow_c(exact(slab.halfwidth), c, prec)
    return total


def phi_total(region: Ball, ledger: Sequence[tuple], c: Fraction,
              prec: int = DEFAULT_PRECISION) -> Interval:
    """Sum of halfwidth^c over all ledger slabs meeting `region`."""
    total = Interval.zero(prec)
    for _, slab in ledger:
        if ball_meets_slab(region, slab) is YES:
            total = total + _pow_c(exact(slab.halfwidth), c, prec)
    return total


class PhiLedgerView:
    """Read-only phi computations over a potential-game deletion ledger."""

    def __init__(self, ledger: Sequence[tuple], c: Fraction,
                 prec: int = DEFAULT_PRECISION):
        self.ledger = list(ledger)
        self.c = Fraction(c)
        self.prec = prec

    def phi(self, region: Ball, candidate: Slab) -> Interval:
        return phi(region, candidate, self.ledger, self.c, self.prec)

    def phi_total(self, region: Ball) -> Interval:
        return phi_total(region, self.ledger, self.c, self.prec)


# --- adapter: potential strategy -> absolute game ----------------------------------


def _far_line(region: Ball, prec: int) -> Line:
    off = exact(region.center.x) + 3 * exact(region.radius) + 1
    return line_from_normal(1, 0, off, prec)


class AdapterAlice:
    """Absolute-game Alice driven by a virtual potential-game strategy.

    Bob's balls are mirrored into a virtual potential match (validated by the
    real engine, which also maintains the ledger).  Each turn the adapter
    scores a finite candidate set -- every relevant ledger line, midlines of
    parallel relevant pairs, and a far fallback -- by the phi potential and
    deletes the beta*r_n thickening of a candidate scoring at least half the
    maximum.
    """

    def __init__(self, rules: AbsoluteRules, inner: TriggerAlice,
                 inner_rules: PotentialRules, ball0: Ball,
                 prec: int = DEFAULT_PRECISION):
        if inner_rules.beta > rules.beta:
            raise StrategyError(
                "inner potential beta must not exceed the absolute beta, "
                "otherwise mirrored Bob moves could violate the inner ratio rule")
        self.rules = rules
        self.inner = inner
        self.virtual = new_match(inner_rules, ball0)
        self.prec = prec

    def move(self, transcript: Transcript) -> Tuple[MoveAliceAbs, list]:
        events: list = []
        # mirror Bob's newest ball into the virtual potential match
        if transcript.n_bob_moves() > self.virtual.n_bob_moves():
            submit_bob(self.virtual, transcript.current_ball())
        inner_move, inner_events = self.inner.move(self.virtual)
        submit_alice(self.virtual, inner_move)
        events.extend(inner_events)

        region = transcript.current_ball()
        r_n = exact(region.radius)
        width = scalar_down(rational(self.rules.beta) * r_n, self.prec)
        ledger = self.virtual.ledger()
        c = self.virtual.rules.c

        relevant = [(stage, slab) for stage, slab in ledger
                    if ball_meets_slab(region, slab) is YES]
        lines: List[Line] = [slab.line for _, slab in relevant]
        for i in range(len(relevant)):
            for j in range(i + 1, len(relevant)):
                li = relevant[i][1].line
                lj = relevant[j][1].line
                cross = exact(li.nx) * exact(lj.ny) - exact(li.ny) * exact(lj.nx)
                if abs(cross) > mpq(1, 2 ** (self.prec // 2)):
                    continue
                oj = exact(lj.offset)
                if exact(li.nx) * exact(lj.nx) + exact(li.ny) * exact(lj.ny) < 0:
                    oj = -oj
                mid = scalar((exact(li.offset) + oj) / 2, self.prec)
                lines.append(Line(li.nx, li.ny, mid))
        if not lines:
            lines = [_far_line(region, self.prec)]

        scored = [(phi(region, Slab(line, width), ledger, c, self.prec), line)
                  for line in lines]
        best_idx = max(range(len(scored)), key=lambda i: scored[i][0].hi)
        best_phi, best_line = scored[best_idx]
        max_hi = max(s.hi for s, _ in scored)
        if max_hi > 0 and not (2 * best_phi.lo >= max_hi):
            raise StrategyError("adapter could not certify the half-max choice")

        ratio = phi_total(region, ledger, c, self.prec)
        events.append(("phi", {
            "n": transcript.n_bob_moves(),
            "phi_chosen_hi": scalar_to_token(best_phi.hi),
            "phi_total_hi": scalar_to_token(ratio.hi),
            "r_n": scalar_to_token(region.radius),
            "candidates": len(lines)}))
        return MoveAliceAbs(Slab(best_line, width)), events


# --- simple Alices ------------------------------------------------------------------


class EmptyAlice:
    """Deletes nothing: empty collection, or a minimal far slab when forced."""

    def __init__(self, rules, prec: int = DEFAULT_PRECISION):
        self.rules = rules
        self.prec = prec

    def move(self, transcript: Transcript):
        if isinstance(self.rules, PotentialRules):
            return MoveAlicePot(()), []
        region = transcript.current_ball()
        width = scalar_down(rational(self.rules.beta) * exact(region.radius)
                            / 2 ** 20, self.prec)
        return MoveAliceAbs(Slab(_far_line(region, self.prec), width)), []


# --- Bob adversaries -----------------------------------------------------------------


def _step_toward(center: Point2, target: tuple, max_step: mpq,
                 prec: int) -> Point2:
    """Point on the segment from center toward target, at most max_step away."""
    cx, cy = exact(center.x), exact(center.y)
    tx, ty = target
    dx, dy = tx - cx, ty - cy
    dist_sq = dx * dx + dy * dy
    if dist_sq <= max_step * max_step:
        return Point2(scalar(tx, prec), scalar(ty, prec))
    dist_f = math.sqrt(float(dist_sq))
    lam = mpq(float(max_step) / dist_f * (1 - 2 ** -30))
    for _ in range(60):
        nx2 = (dx * lam) ** 2 + (dy * lam) ** 2
        if nx2 <= max_step * max_step:
            return Point2(scalar(cx + dx * lam, prec), scalar(cy + dy * lam, prec))
        lam = lam * mpq(1023, 1024)
    return Point2(scalar(cx, prec), scalar(cy, prec))


class _BobBase:
    def __init__(self, rules, prec: int = DEFAULT_PRECISION):
        self.rules = rules
        self.prec = prec
        self.beta = Fraction(rules.beta)

    def _must_avoid(self, transcript: Transcript) -> Optional[Slab]:
        if isinstance(self.rules, AbsoluteRules):
            last = transcript.last_alice_move()
            if last is not None:
                return last.slab
        return None

    def _legal(self, transcript: Transcript, candidate: Ball) -> bool:
        current = transcript.current_ball()
        if exact(candidate.radius) < rational(self.beta) * exact(current.radius):
            return False
        if ball_in_ball(candidate, current) is not YES:
            return False
        slab = self._must_avoid(transcript)
        if slab is not None and ball_meets_slab(candidate, slab) is not NO:
            return False
        return True

    def _fallback(self, transcript: Transcript) -> Ball:
        current = transcript.current_ball()
        slab = self._must_avoid(transcript)
        if slab is None:
            return Ball(current.center,
                        scalar_up(rational(self.beta) * exact(current.radius),
                                  self.prec))
        return legal_ball_avoiding_slab(current, slab, self.beta, self.prec)


class BobRandom(_BobBase):
    """Uniformly random legal center at a radius ratio drawn in [beta, 0.9]."""

    def __init__(self, rules, seed: int, prec: int = DEFAULT_PRECISION):
        super().__init__(rules, prec)
        self.rng = random.Random(seed)

    def move(self, transcript: Transcript) -> Ball:
        current = transcript.current_ball()
        r = exact(current.radius)
        cx, cy = exact(current.center.x), exact(current.center.y)
        for _ in range(64):
            u = Fraction(self.rng.random())
            ratio = self.beta + (Fraction(9, 10) - self.beta) * u
            if ratio < self.beta:
                ratio = self.beta
            r_new = scalar_up(rational(ratio) * r, self.prec)
            margin = r - exact(r_new)
            if margin <= 0:
                continue
            d = margin * Fraction(self.rng.random()) * Fraction(31, 32)
            theta = self.rng.random() * 2 * math.pi
            ox = d * mpq(math.cos(theta))
            oy = d * mpq(math.sin(theta))
            candidate = Ball(Point2(scalar(cx + ox, self.prec),
                                    scalar(cy + oy, self.prec)), r_new)
            if self._legal(transcript, candidate):
                return candidate
        return self._fallback(transcript)


class BobTarget(_BobBase):
    """Shrinks as fast as allowed while keeping a rational point in the ball."""

    def __init__(self, rules, target_x: Fraction, target_y: Fraction,
                 prec: int = DEFAULT_PRECISION):
        super().__init__(rules, prec)
        self.target = (rational(Fraction(target_x)), rational(Fraction(target_y)))

    def move(self, transcript: Transcript) -> Ball:
        current = transcript.current_ball()
        r = exact(current.radius)
        r_new = scalar_up(rational(self.beta) * r, self.prec)
        budget = r - exact(r_new)
        for num, den in ((1, 1), (3, 4), (1, 2), (1, 4)):
            max_step = budget * mpq(num, den)
            if max_step < 0:
                continue
            center = _step_toward(current.center, self.target, max_step,
                                  self.prec)
            candidate = Ball(center, r_new)
            if self._legal(transcript, candidate):
                return candidate
        return self._fallback(transcript)


class BobGreedy(_BobBase):
    """Descends toward the candidate ball meeting the most danger rectangles.

    Only rectangles no smaller than an eighth of the candidate radius are
    counted (smaller ones cannot matter at the next scale); the denominator
    reach for that cutoff is estimated in floats since this adversary is a
    heuristic, while move legality stays exactly enforced.
    """

    def __init__(self, rules, params: Params, seed: int,
                 prec: int = DEFAULT_PRECISION):
        super().__init__(rules, prec)
        self.params = params
        self.rng = random.Random(seed)

    def _danger_count(self, candidate: Ball) -> int:
        eps = float(self.params.epsilon)
        r = float(candidate.radius)
        if r <= 0:
            return 0
        expo = 1 + float(min(self.params.s, self.params.t))
        q_top = int((8 * eps / r) ** (1 / expo)) if 8 * eps > r * 1e-18 else 0
        q_top = min(q_top, self.params.q_cap)
        if q_top < 1:
            return 0
        return sum(1 for _ in dangerous_pairs(candidate, 1, q_top, self.params))

    def move(self, transcript: Transcript) -> Ball:
        current = transcript.current_ball()
        r = exact(current.radius)
        cx, cy = exact(current.center.x), exact(current.center.y)
        ratio = self.beta + (Fraction(1, 2) - self.beta) / 2
        r_new = scalar_up(rational(ratio) * r, self.prec)
        margin = r - exact(r_new)
        candidates = [Ball(current.center, r_new)]
        for _ in range(7):
            d = margin * Fraction(self.rng.random()) * Fraction(31, 32)
            theta = self.rng.random() * 2 * math.pi
            candidates.append(Ball(Point2(
                scalar(cx + d * mpq(math.cos(theta)), self.prec),
                scalar(cy + d * mpq(math.sin(theta)), self.prec)), r_new))
        legal = [b for b in candidates if self._legal(transcript, b)]
        if not legal:
            return self._fallback(transcript)
        counts = [self._danger_count(b) for b in legal]
        best = max(range(len(legal)), key=lambda i: counts[i])
        return legal[best]


class BobScripted(_BobBase):
    """Replays recorded balls; an illegal or missing move is a strategy error."""

    def __init__(self, rules, balls: Sequence[Ball], prec: int = DEFAULT_PRECISION):
        super().__init__(rules, prec)
        self._iter = iter(balls)

    def move(self, transcript: Transcript) -> Ball:
        try:
            candidate = next(self._iter)
        except StopIteration:
            raise StrategyError("scripted Bob ran out of moves")
        if not self._legal(transcript, candidate):
            raise StrategyError("scripted Bob move is illegal")
        return candidate
