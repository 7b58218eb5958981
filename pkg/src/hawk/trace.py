"""Line-delimited match traces: schema "hawk-trace/1".

One JSON record per line.  The header carries rules, the opening ball,
parameters, precision, and seeds; every subsequent line is a move (with its
certification digests), a strategy event, the finish marker, or the
adjudication.  Scalars appear as precision-annotated decimal tokens and all
keys are emitted sorted, so a rerun of the same configuration produces a
byte-identical file and replay is exact.
"""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Iterator, Optional

from .diophantine import Params
from .engine import (AbsoluteRules, Event, MoveAliceAbs, MoveAlicePot,
                     MoveRecord, PotentialRules, Rules, Transcript, Verdict,
                     new_match, submit_alice, submit_bob, adjudicate)
from .errors import TraceError
from .geometry import Ball, Slab
from .scalars import parse_rational

SCHEMA = "hawk-trace/1"


def _dump(obj: dict) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def _rules_record(rules: Rules) -> dict:
    rec = {"beta": str(rules.beta)}
    if isinstance(rules, PotentialRules):
        rec["c"] = str(rules.c)
    return rec


def _rules_from_record(game: str, rec: dict) -> Rules:
    beta = parse_rational(rec["beta"])
    if game == "absolute":
        return AbsoluteRules(beta=beta)
    return PotentialRules(beta=beta, c=parse_rational(rec["c"]))


def params_record(params: Params) -> dict:
    return {"s": str(params.s), "t": str(params.t),
            "epsilon": str(params.epsilon), "ell": str(params.ell),
            "R": str(params.big_r), "q_cap": params.q_cap,
            "prec": params.prec}


def params_from_record(rec: dict) -> Params:
    return Params(s=parse_rational(rec["s"]), t=parse_rational(rec["t"]),
                  epsilon=parse_rational(rec["epsilon"]),
                  ell=parse_rational(rec["ell"]),
                  big_r=parse_rational(rec["R"]),
                  q_cap=int(rec["q_cap"]), prec=int(rec["prec"]))


class TraceWriter:
    """Accumulates trace lines in chronological order."""

    def __init__(self, game: str, rules: Rules, ball0: Ball, params: Params,
                 q_certify: int, n_max: int, r_stop: Fraction,
                 precision: int, seeds: dict, names: dict):
        self.lines = [_dump({
            "schema": SCHEMA, "game": game, "rules": _rules_record(rules),
            "b0": ball0.to_record(), "params": params_record(params),
            "q_certify": q_certify, "n_max": n_max, "r_stop": str(r_stop),
            "precision": precision, "seeds": seeds, "names": names})]

    def move(self, index: int, record: MoveRecord) -> None:
        rec = {"i": index, "kind": "move", "player": record.player,
               "certs": record.certs}
        payload = record.payload
        if record.player == "bob":
            rec["ball"] = payload.to_record()
        elif isinstance(payload, MoveAliceAbs):
            rec["slabs"] = [payload.slab.to_record()]
        else:
            rec["slabs"] = [s.to_record() for s in payload.slabs]
        self.lines.append(_dump(rec))

    def event(self, event: Event) -> None:
        rec = {"kind": "event", "event": event.kind, "at": event.at_move}
        rec.update(event.data)
        self.lines.append(_dump(rec))

    def finish(self, reason: str) -> None:
        self.lines.append(_dump({"kind": "finish", "reason": reason}))

    def adjudication(self, verdict: Verdict) -> None:
        rec = {"kind": "adjudication"}
        rec.update(verdict.to_record())
        self.lines.append(_dump(rec))

    def text(self) -> str:
        return "\n".join(self.lines) + "\n"


# --- reading and replay ------------------------------------------------------------


class ParsedTrace:
    def __init__(self, header: dict, records: list):
        self.header = header
        self.records = records

    def moves(self) -> Iterator[dict]:
        return (r for r in self.records if r.get("kind") == "move")

    def events(self, kind: Optional[str] = None) -> list:
        out = [r for r in self.records if r.get("kind") == "event"]
        if kind is not None:
            out = [r for r in out if r.get("event") == kind]
        return out

    def finish_reason(self) -> str:
        for r in self.records:
            if r.get("kind") == "finish":
                return r["reason"]
        raise TraceError("trace has no finish record")

    def adjudication(self) -> dict:
        for r in self.records:
            if r.get("kind") == "adjudication":
                return r
        raise TraceError("trace has no adjudication record")


def parse_trace(text: str) -> ParsedTrace:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise TraceError("empty trace")
    try:
        header = json.loads(lines[0])
        records = [json.loads(ln) for ln in lines[1:]]
    except json.JSONDecodeError as e:
        raise TraceError(f"trace is not valid line-delimited JSON: {e}")
    if header.get("schema") != SCHEMA:
        raise TraceError(f"unsupported trace schema {header.get('schema')!r}")
    return ParsedTrace(header, records)


def rebuild_transcript(parsed: ParsedTrace) -> Transcript:
    """Re-submit every recorded move through a fresh engine.

    Any move the engine now rejects marks a corrupted or forged trace.
    """
    header = parsed.header
    rules = _rules_from_record(header["game"], header["rules"])
    transcript = new_match(rules, Ball.from_record(header["b0"]))
    for rec in parsed.moves():
        if rec["player"] == "alice":
            slabs = [Slab.from_record(s) for s in rec["slabs"]]
            if isinstance(rules, AbsoluteRules):
                if len(slabs) != 1:
                    raise TraceError("absolute-game move must have one slab")
                submit_alice(transcript, MoveAliceAbs(slabs[0]))
            else:
                submit_alice(transcript, MoveAlicePot(slabs))
        else:
            submit_bob(transcript, Ball.from_record(rec["ball"]))
    transcript.finish(parsed.finish_reason())
    return transcript


def replay(parsed: ParsedTrace) -> tuple:
    """Replay a trace; returns (recorded adjudication, recomputed Verdict)."""
    transcript = rebuild_transcript(parsed)
    params = params_from_record(parsed.header["params"])
    verdict = adjudicate(transcript, params, int(parsed.header["q_certify"]))
    return parsed.adjudication(), verdict


def replay_matches(parsed: ParsedTrace) -> bool:
    recorded, recomputed = replay(parsed)
    rec2 = {"kind": "adjudication"}
    rec2.update(recomputed.to_record())
    return recorded == rec2
