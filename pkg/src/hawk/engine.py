"""Rule-enforcing state machines for the two slab-deletion games.

A transcript is the single source of truth for one match: the rules, Bob's
opening ball, the alternating move list (Alice first after the opening), and
the finish status.  Moves are validated at submission time with exact
rational arithmetic; a rejected move raises :class:`MoveRejected` carrying
the violated clause and leaves the transcript untouched.  Every accepted
move stores the certificates that justified it, and those certificates are
serialized with the move so a replay can re-verify them.

Game rules enforced here:

* absolute game: Alice deletes one slab of halfwidth in (0, beta * r_n];
  Bob must shrink by at most factor beta (r' >= beta * r_n), stay inside
  his previous ball, and miss Alice's latest slab.
* potential game: Alice deletes a finite batch of slabs whose halfwidth^c
  sum stays within (beta * r_n)^c; Bob only nests and shrinks.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Sequence, Union

from gmpy2 import mpq

from .diophantine import Params, certify_ball, dangerous_pairs, CertReport
from .errors import HawkError, MoveRejected, OutOfTurnError, PrecisionError
from .geometry import (Ball, Point2, Slab, ball_in_ball, ball_in_rect,
                       ball_in_slab, ball_meets_slab)
from .scalars import (Cert3, Interval, NO, Scalar, UNKNOWN, YES, exact,
                      MAX_PRECISION, rational)


@dataclass(frozen=True)
class AbsoluteRules:
    beta: Fraction

    kind = "absolute"

    def __post_init__(self):
        if not (0 < self.beta < Fraction(1, 3)):
            raise HawkError("absolute game requires 0 < beta < 1/3")


@dataclass(frozen=True)
class PotentialRules:
    beta: Fraction
    c: Fraction

    kind = "potential"

    def __post_init__(self):
        if not self.beta > 0:
            raise HawkError("potential game requires beta > 0")
        if not self.c > 0:
            raise HawkError("potential game requires c > 0")


Rules = Union[AbsoluteRules, PotentialRules]


@dataclass(frozen=True)
class MoveAliceAbs:
    slab: Slab


@dataclass(frozen=True)
class MoveAlicePot:
    slabs: tuple  # tuple of Slab; may be empty ("do nothing")

    def __init__(self, slabs: Sequence[Slab] = ()):
        object.__setattr__(self, "slabs", tuple(slabs))


AliceMove = Union[MoveAliceAbs, MoveAlicePot]


@dataclass
class MoveRecord:
    player: str  # "alice" | "bob"
    payload: object  # AliceMove or Ball
    certs: dict


@dataclass
class Event:
    kind: str
    data: dict
    at_move: int


IN_PROGRESS = "in_progress"


@dataclass
class Transcript:
    """Append-only legal move history of one match."""

    rules: Rules
    ball0: Ball
    moves: List[MoveRecord] = field(default_factory=list)
    events: List[Event] = field(default_factory=list)
    status: str = IN_PROGRESS  # or "finished:<reason>"

    # -- inspection ------------------------------------------------------

    def whose_turn(self) -> str:
        return "alice" if len(self.moves) % 2 == 0 else "bob"

    def bob_balls(self) -> list:
        return [self.ball0] + [m.payload for m in self.moves if m.player == "bob"]

    def n_bob_moves(self) -> int:
        return len(self.moves) // 2

    def current_ball(self) -> Ball:
        for m in reversed(self.moves):
            if m.player == "bob":
                return m.payload
        return self.ball0

    def current_radius(self) -> Scalar:
        return self.current_ball().radius

    def last_alice_move(self) -> Optional[AliceMove]:
        for m in reversed(self.moves):
            if m.player == "alice":
                return m.payload
        return None

    def alice_moves(self) -> list:
        return [m.payload for m in self.moves if m.player == "alice"]

    def ledger(self) -> list:
        """All deleted potential-game slabs as (stage, Slab) pairs, in order."""
        out = []
        stage = 0
        for m in self.moves:
            if m.player == "alice":
                if isinstance(m.payload, MoveAlicePot):
                    for slab in m.payload.slabs:
                        out.append((stage, slab))
                stage += 1
        return out

    def finished(self) -> bool:
        return self.status != IN_PROGRESS

    def finish(self, reason: str) -> None:
        if self.finished():
            raise HawkError(f"match already finished ({self.status})")
        self.status = f"finished:{reason}"

    def add_event(self, kind: str, **data) -> None:
        self.events.append(Event(kind, data, len(self.moves)))


def new_match(rules: Rules, ball0: Ball) -> Transcript:
    """Open a match: Bob has chosen ball0, Alice is to move."""
    return Transcript(rules=rules, ball0=ball0)


# --- move validation ---------------------------------------------------------


def _pow_c_cert_le(widths: Sequence[Scalar], cap: mpq, c: Fraction) -> Cert3:
    """Certified sum(w^c) <= cap^c; exact for integer c, intervals otherwise."""
    if cap <= 0:
        return NO
    if c.denominator == 1:
        total = sum((exact(w) ** c.numerator for w in widths), mpq(0))
        return YES if total <= cap ** c.numerator else NO
    if len(widths) == 1 and exact(widths[0]) == cap:
        return YES  # boundary single-slab move, equal bases
    prec = 256
    while True:
        total = Interval.zero(prec)
        for w in widths:
            total = total + Interval.point(exact(w), prec).pow_fraction(c)
        bound = Interval.point(cap, prec).pow_fraction(c)
        res = total.compare_le(bound)
        if res is not UNKNOWN:
            return res
        if prec >= MAX_PRECISION:
            raise PrecisionError(
                f"slab budget undecidable at precision {MAX_PRECISION}")
        prec *= 2


def submit_alice(transcript: Transcript, move: AliceMove) -> Transcript:
    """Record Alice's move if its rule inequality certifies, else reject."""
    if transcript.finished():
        raise OutOfTurnError("match is finished")
    if transcript.whose_turn() != "alice":
        raise OutOfTurnError("it is Bob's turn")
    rules = transcript.rules
    r_n = exact(transcript.current_radius())

    if isinstance(rules, AbsoluteRules):
        if not isinstance(move, MoveAliceAbs):
            raise MoveRejected("wrong move type for the absolute game")
        cap = rational(rules.beta) * r_n
        if exact(move.slab.halfwidth) > cap:
            raise MoveRejected("slab halfwidth exceeds beta * r_n",
                               f"halfwidth {move.slab.halfwidth} > {cap}")
        certs = {"width_within_beta": "YES"}
    else:
        if not isinstance(move, MoveAlicePot):
            raise MoveRejected("wrong move type for the potential game")
        cap = rational(rules.beta) * r_n
        widths = [s.halfwidth for s in move.slabs]
        verdict = _pow_c_cert_le(widths, cap, rules.c)
        if verdict is not YES:
            raise MoveRejected("slab budget exceeds (beta * r_n)^c",
                               f"{len(widths)} slabs against cap {cap}^{rules.c}")
        certs = {"budget_within_cap": "YES", "n_slabs": str(len(move.slabs))}

    transcript.moves.append(MoveRecord("alice", move, certs))
    return transcript


def submit_bob(transcript: Transcript, proposal: Ball) -> Transcript:
    """Record Bob's ball if radius, nesting (and avoidance) certify."""
    if transcript.finished():
        raise OutOfTurnError("match is finished")
    if transcript.whose_turn() != "bob":
        raise OutOfTurnError("it is Alice's turn")
    rules = transcript.rules
    current = transcript.current_ball()
    floor = rational(rules.beta) * exact(current.radius)
    if exact(proposal.radius) < floor:
        raise MoveRejected("radius below beta * r_n",
                           f"{proposal.radius} < {floor}")
    if ball_in_ball(proposal, current) is not YES:
        raise MoveRejected("ball not contained in current ball")
    certs = {"radius_ratio": "YES", "nested": "YES"}
    if isinstance(rules, AbsoluteRules):
        last = transcript.last_alice_move()
        assert isinstance(last, MoveAliceAbs)
        if ball_meets_slab(proposal, last.slab) is not NO:
            raise MoveRejected("ball meets the deleted slab")
        certs["avoids_slab"] = "NO"  # certified non-intersection
    transcript.moves.append(MoveRecord("bob", proposal, certs))
    return transcript


# --- outcome and adjudication ---------------------------------------------------


def outcome(transcript: Transcript) -> tuple:
    """Center of the last ball plus its radius as the enclosure bound."""
    last = transcript.current_ball()
    return (last.center, last.radius)


ALICE_DEFAULT = "ALICE_DEFAULT"
TARGET_CERTIFIED = "TARGET_CERTIFIED"
BOB_WITNESS = "BOB_WITNESS"
INCONCLUSIVE = "INCONCLUSIVE"


@dataclass(frozen=True)
class Verdict:
    kind: str
    stalled: bool = False
    slab_stage: Optional[int] = None  # ALICE_DEFAULT: ledger stage containing the ball
    witness: Optional[tuple] = None  # BOB_WITNESS: (p, r, q)
    report: Optional[CertReport] = None

    def to_record(self) -> dict:
        rec = {"verdict": self.kind, "stalled": self.stalled}
        if self.slab_stage is not None:
            rec["slab_stage"] = self.slab_stage
        if self.witness is not None:
            rec["witness"] = "{}/{}/{}".format(*self.witness)
        if self.report is not None:
            rec["certify_pass"] = self.report.passed
        return rec


def adjudicate(transcript: Transcript, target: Params, big_q: int) -> Verdict:
    """Classify a finished match.

    Order of checks: the outcome provably lands in a deleted slab (Alice's
    default win), then full avoidance certification up to denominator Q,
    then the final ball sitting inside one danger rectangle (Bob's witness);
    anything else is inconclusive, with a stall annotation when the match
    ended by move cap instead of by reaching the radius floor.
    """
    if not transcript.finished():
        raise HawkError("adjudication requires a finished match")
    final = transcript.current_ball()
    stalled = not transcript.status.endswith(":r_stop")

    for stage, slab in transcript.ledger():
        if ball_in_slab(final, slab) is YES:
            return Verdict(ALICE_DEFAULT, stalled=stalled, slab_stage=stage)

    report = certify_ball(final, big_q, target)
    if report.passed:
        return Verdict(TARGET_CERTIFIED, stalled=stalled, report=report)

    for (p, r, q), rect in dangerous_pairs(final, 1, big_q, target):
        if ball_in_rect(final, rect) is YES:
            return Verdict(BOB_WITNESS, stalled=stalled, witness=(p, r, q),
                           report=report)

    return Verdict(INCONCLUSIVE, stalled=stalled, report=report)
