"""Match and tournament drivers: strategy construction, play loop, reports.

A match alternates Alice and Bob from the opening ball until the radius
floor r_stop is reached or n_max Bob moves have been played, then
adjudicates.  Everything that happens is appended to the trace in
chronological order, so identical configurations reproduce identical trace
bytes.  Tournaments run their cells in a process pool; each worker returns
finished trace text, and the summary table is assembled in deterministic
cell order afterward.
"""

from __future__ import annotations

import random
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Optional

from .config import MatchConfig, TournamentConfig, load_match_config
from .diophantine import (CalibrationResult, Params, badness_score,
                          calibrate_epsilon, certify_ball)
from .engine import (AbsoluteRules, PotentialRules, Transcript, Verdict,
                     adjudicate, new_match, submit_alice, submit_bob)
from .errors import ConfigError, StrategyError, TraceError
from .geometry import Ball, ball
from .scalars import exact, rational, scalar_from_token
from .strategies import (AdapterAlice, BobGreedy, BobRandom, BobScripted,
                         BobTarget, EmptyAlice, TriggerAlice, choose_R,
                         k_max_for)
from .trace import TraceWriter, parse_trace


# --- parameter resolution -----------------------------------------------------------


def canonical_targets(q_max: int) -> list:
    """Canonical rational points (p, r, q) with 0 <= p, r <= q <= q_max."""
    out = []
    for q in range(1, q_max + 1):
        for p in range(0, q + 1):
            for r in range(0, q + 1):
                if gcd(gcd(p, r), q) == 1:
                    out.append((p, r, q))
    return out


def probe_corpus(base: Params, ball0_center: tuple, r0: Fraction,
                 r_stop: Fraction, q_max: int, seed: int) -> list:
    """Auto corpus for epsilon calibration.

    Generic probes walk the trigger radii at a jittered copy of the opening
    center; adversarial probes sit just off every canonical rational with
    q <= q_max at full opening radius, which exerces each generation's
    single-rectangle fit as the grid moves the bands.
    """
    big_r = base.big_r
    rng = random.Random(seed)
    probes = []
    k_top = k_max_for(big_r, r0, r_stop)
    m = 0
    rad = Fraction(r0)
    while rad >= r_stop:
        jitter = Fraction(rng.getrandbits(24) | 1, 2 ** 64)
        gx, gy = ball0_center[0] + jitter, ball0_center[1] - jitter
        for k in range(1, k_top + 1):
            probes.append((ball(gx, gy, rad, base.prec), m, k))
        m += 1
        rad = rad / big_r
    off_x, off_y = Fraction(43, 2 ** 46), Fraction(29, 2 ** 46)
    for p, r, q in canonical_targets(q_max):
        tx, ty = Fraction(p, q) + off_x, Fraction(r, q) + off_y
        for k in range(1, k_top + 1):
            probes.append((ball(tx, ty, r0, base.prec), 0, k))
    return probes


DEFAULT_GRID_TOP = 84
DEFAULT_GRID_BOTTOM = 124


@dataclass
class ResolvedMatch:
    rules: object
    params: Params
    ball0: Ball
    q_certify: int
    calibration: Optional[CalibrationResult]
    inner_rules: Optional[PotentialRules]
    inner_params: Optional[Params]


def _default_grid(r0: Fraction) -> tuple:
    # descending powers of two spanning the scales where covering slabs
    # straddle the radius floor
    shift = max(0, -(r0.numerator.bit_length() - r0.denominator.bit_length()))
    return tuple(Fraction(1, 2 ** x)
                 for x in range(DEFAULT_GRID_TOP + shift - 40,
                                DEFAULT_GRID_BOTTOM + shift - 40))


def resolve_match(cfg: MatchConfig) -> ResolvedMatch:
    """Fill in auto parameters (ell, R, calibrated epsilon) for one match."""
    r0 = cfg.ball0_r
    ell = cfg.ell if cfg.ell is not None else 2 * r0
    calibration = None

    if cfg.game == "potential":
        rules = PotentialRules(beta=cfg.beta, c=cfg.c)
        inner_rules = None
    else:
        rules = AbsoluteRules(beta=cfg.beta)
        inner_rules = PotentialRules(
            beta=cfg.inner_beta if cfg.inner_beta is not None else cfg.beta,
            c=cfg.inner_c if cfg.inner_c is not None else (cfg.c or Fraction(1)))

    if cfg.game == "potential":
        big_r = cfg.big_r if cfg.big_r is not None else \
            Fraction(choose_R(cfg.beta, cfg.c))
    else:
        big_r = cfg.inner_r if cfg.inner_r is not None else \
            Fraction(choose_R(inner_rules.beta, inner_rules.c))

    base = Params(s=cfg.s, t=cfg.t, epsilon=Fraction(1, 2),
                  ell=ell, big_r=big_r, q_cap=cfg.q_cap, prec=cfg.precision)

    if cfg.epsilon is not None:
        params = base.with_epsilon(cfg.epsilon)
    else:
        grid = cfg.calibrate_grid or _default_grid(r0)
        corpus = probe_corpus(base, (cfg.ball0_x, cfg.ball0_y), r0,
                              cfg.r_stop, cfg.calibrate_qmax, cfg.seed)
        calibration = calibrate_epsilon(corpus, base, grid)
        params = base.with_epsilon(calibration.epsilon)

    b0 = ball(cfg.ball0_x, cfg.ball0_y, r0, cfg.precision)
    inner_params = params if cfg.game == "absolute" else None
    return ResolvedMatch(rules=rules, params=params, ball0=b0,
                         q_certify=cfg.q_certify, calibration=calibration,
                         inner_rules=inner_rules, inner_params=inner_params)


# --- strategy construction ----------------------------------------------------------


def build_alice(cfg: MatchConfig, resolved: ResolvedMatch):
    if cfg.alice == "empty":
        return EmptyAlice(resolved.rules, cfg.precision)
    if cfg.alice == "trigger":
        if cfg.game != "potential":
            raise ConfigError("the trigger strategy plays the potential game; "
                              "use alice=adapter for the absolute game")
        return TriggerAlice(resolved.rules, resolved.params, resolved.ball0,
                            cfg.r_stop)
    if cfg.alice == "adapter":
        if cfg.game != "absolute":
            raise ConfigError("the adapter plays the absolute game")
        inner = TriggerAlice(resolved.inner_rules, resolved.inner_params,
                             resolved.ball0, cfg.r_stop)
        return AdapterAlice(resolved.rules, inner, resolved.inner_rules,
                            resolved.ball0, cfg.precision)
    raise ConfigError(f"unknown alice {cfg.alice!r}")


def _read_script(path: str, prec: int) -> list:
    balls = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 3:
                raise ConfigError(f"script line needs 'x y r': {line!r}")
            values = [scalar_from_token(p) if ":" in p else p for p in parts]
            balls.append(ball(values[0], values[1], values[2], prec))
    return balls


def build_bob(cfg: MatchConfig, resolved: ResolvedMatch):
    seed = cfg.bob_seed if cfg.bob_seed is not None else cfg.seed
    if cfg.bob == "random":
        return BobRandom(resolved.rules, seed, cfg.precision)
    if cfg.bob == "target":
        tx, ty = cfg.bob_target
        return BobTarget(resolved.rules, tx, ty, cfg.precision)
    if cfg.bob == "greedy":
        return BobGreedy(resolved.rules, resolved.params, seed, cfg.precision)
    if cfg.bob == "scripted":
        return BobScripted(resolved.rules, _read_script(cfg.bob_script,
                                                        cfg.precision),
                           cfg.precision)
    raise ConfigError(f"unknown bob {cfg.bob!r}")


# --- match loop ----------------------------------------------------------------------


@dataclass
class MatchResult:
    config: MatchConfig
    params: Params
    transcript: Transcript
    verdict: Verdict
    trace_text: str
    report_text: str
    stats: dict


def play_match(cfg: MatchConfig) -> MatchResult:
    resolved = resolve_match(cfg)
    transcript = new_match(resolved.rules, resolved.ball0)
    alice = build_alice(cfg, resolved)
    bob = build_bob(cfg, resolved)

    writer = TraceWriter(
        game=cfg.game, rules=resolved.rules, ball0=resolved.ball0,
        params=resolved.params, q_certify=resolved.q_certify,
        n_max=cfg.n_max, r_stop=cfg.r_stop, precision=cfg.precision,
        seeds={"master": cfg.seed,
               "bob": cfg.bob_seed if cfg.bob_seed is not None else cfg.seed},
        names={"alice": cfg.alice, "bob": cfg.bob})
    if resolved.calibration is not None:
        transcript.add_event("calibration", epsilon=str(resolved.params.epsilon),
                             ok=resolved.calibration.ok)
        writer.event(transcript.events[-1])

    reason = None
    while reason is None:
        move, events = alice.move(transcript)
        submit_alice(transcript, move)
        writer.move(len(transcript.moves) - 1, transcript.moves[-1])
        for kind, data in events:
            transcript.add_event(kind, **data)
            writer.event(transcript.events[-1])
        proposal = bob.move(transcript)
        submit_bob(transcript, proposal)
        writer.move(len(transcript.moves) - 1, transcript.moves[-1])
        if exact(proposal.radius) <= rational(cfg.r_stop):
            reason = "r_stop"
        elif transcript.n_bob_moves() >= cfg.n_max:
            reason = "n_max"

    transcript.finish(reason)
    writer.finish(reason)
    verdict = adjudicate(transcript, resolved.params, resolved.q_certify)
    writer.adjudication(verdict)

    final = transcript.current_ball()
    score = badness_score(final.center.x, final.center.y,
                          resolved.q_certify, resolved.params)
    stats = _collect_stats(transcript, verdict, score)
    if cfg.alice == "adapter":
        stats["inner_ledger"] = alice.virtual.ledger()
    report = _format_report(cfg, resolved, transcript, verdict, stats)
    return MatchResult(config=cfg, params=resolved.params,
                       transcript=transcript, verdict=verdict,
                       trace_text=writer.text(), report_text=report,
                       stats=stats)


def _collect_stats(transcript: Transcript, verdict: Verdict, score) -> dict:
    events = transcript.events
    checks = [e for e in events if e.kind == "scale_check"]
    return {
        "moves": transcript.n_bob_moves(),
        "finish": transcript.status,
        "triggers": sum(1 for e in events if e.kind == "trigger"),
        "lemma_violations": sum(1 for e in events
                                if e.kind == "lemma_violation"),
        "scale_checks": len(checks),
        "scale_members": sum(1 for e in checks if e.data["member"]),
        "scale_failures_covered": sum(
            1 for e in checks
            if not e.data["member"] and e.data["covered_stage"] is not None),
        "scale_failures_uncovered": sum(
            1 for e in checks
            if not e.data["member"] and e.data["covered_stage"] is None),
        "badness_lo": float(score.lo),
        "final_radius": float(transcript.current_ball().radius),
        "verdict": verdict.kind,
    }


def _format_report(cfg, resolved, transcript, verdict, stats) -> str:
    lines = [
        "hawk match report",
        f"game: {cfg.game}   alice: {cfg.alice}   bob: {cfg.bob}   "
        f"seed: {cfg.seed}",
        f"verdict: {verdict.kind}" + ("  (stalled)" if verdict.stalled else ""),
        f"epsilon: {resolved.params.epsilon}",
        f"Q_certify: {resolved.q_certify}   q_cap: {resolved.params.q_cap}",
        f"moves: {stats['moves']}   finish: {transcript.status}",
        f"final radius: {stats['final_radius']:.3e}",
        f"triggers: {stats['triggers']}   "
        f"lemma violations: {stats['lemma_violations']}",
        f"badness lower bound at Q={resolved.q_certify}: "
        f"{stats['badness_lo']:.3e}",
    ]
    if verdict.report is not None:
        lines.append("")
        lines.append(verdict.report.format_text())
    return "\n".join(lines) + "\n"


# --- tournaments ---------------------------------------------------------------------


_BOB_SPEC_RE = re.compile(r"^(\w+)(?:\(([^)]*)\))?$")


def derive_cell_config(base_text: str, alice: str, bob_spec: str,
                       seed: int) -> MatchConfig:
    cfg = load_match_config(base_text, seed_override=seed)
    m = _BOB_SPEC_RE.match(bob_spec.strip())
    if not m:
        raise ConfigError(f"bad bob spec {bob_spec!r}")
    bob, arg = m.group(1), m.group(2)
    target = cfg.bob_target
    if arg:
        parts = [p.strip() for p in arg.split(",")]
        if len(parts) == 2:
            target = (Fraction(parts[0]), Fraction(parts[1]))
        elif len(parts) == 3:
            p, r, q = (int(x) for x in parts)
            target = (Fraction(p, q), Fraction(r, q))
        else:
            raise ConfigError(f"bad bob target in {bob_spec!r}")
    from dataclasses import replace
    return replace(cfg, alice=alice, bob=bob, bob_target=target,
                   bob_seed=seed)


def _cell_worker(args) -> tuple:
    base_text, alice, bob_spec, seed = args
    cfg = derive_cell_config(base_text, alice, bob_spec, seed)
    result = play_match(cfg)
    row = {"alice": alice, "bob": bob_spec, "seed": seed,
           "verdict": result.verdict.kind,
           "lemma_violations": result.stats["lemma_violations"],
           "badness_lo": result.stats["badness_lo"]}
    return row, result.trace_text


@dataclass
class TournamentResult:
    table_text: str
    rows: list
    traces: list  # (cell_label, trace_text)


def run_tournament(tcfg: TournamentConfig, parallel: bool = True,
                   wall_time: Optional[float] = None) -> TournamentResult:
    jobs = [(tcfg.base, alice, bob, seed)
            for alice, bob in tcfg.cells for seed in tcfg.seeds]
    if parallel and len(jobs) > 1:
        with ProcessPoolExecutor() as pool:
            outcomes = list(pool.map(_cell_worker, jobs))
    else:
        outcomes = [_cell_worker(job) for job in jobs]

    rows = [row for row, _ in outcomes]
    traces = [(f"{row['alice']}__{row['bob']}__{row['seed']}", text)
              for (row, text) in outcomes]

    verdicts = ("ALICE_DEFAULT", "TARGET_CERTIFIED", "BOB_WITNESS",
                "INCONCLUSIVE")
    header = ["alice", "bob", "matches", *verdicts, "lemma_violations",
              "mean_badness_lo"]
    lines = ["\t".join(header)]
    for alice, bob in tcfg.cells:
        cell_rows = [r for r in rows
                     if r["alice"] == alice and r["bob"] == bob]
        counts = {v: sum(1 for r in cell_rows if r["verdict"] == v)
                  for v in verdicts}
        mean_lo = (sum(r["badness_lo"] for r in cell_rows) / len(cell_rows)
                   if cell_rows else 0.0)
        lines.append("\t".join([
            alice, bob, str(len(cell_rows)),
            *(str(counts[v]) for v in verdicts),
            str(sum(r["lemma_violations"] for r in cell_rows)),
            f"{mean_lo:.6e}"]))
    table = "\n".join(lines) + "\n"
    if wall_time is not None:
        table += f"# wall_time_s={wall_time:.3f}\n"
    return TournamentResult(table_text=table, rows=rows, traces=traces)
