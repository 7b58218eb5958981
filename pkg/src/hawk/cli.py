"""Command-line interface: play, tournament, certify, calibrate, render, replay.

Exit codes: 0 for an Alice win (TARGET_CERTIFIED or ALICE_DEFAULT), 2 for
BOB_WITNESS, 3 for INCONCLUSIVE, 4 when calibration finds no passing grid
value, 64 for invalid configuration, 65 for an unreadable or inconsistent
trace, 70 for a strategy failure (e.g. an illegal scripted move).
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

from .config import load_match_config, load_tournament_config
from .diophantine import badness_argmin, certify_ball
from .engine import ALICE_DEFAULT, BOB_WITNESS, INCONCLUSIVE, TARGET_CERTIFIED
from .errors import (CalibrationError, ConfigError, HawkError, StrategyError,
                     TraceError)
from .geometry import ball
from .runner import (play_match, probe_corpus, resolve_match, run_tournament,
                     _default_grid)
from .scalars import parse_rational
from .trace import parse_trace, replay
from .render import render_svg

EXIT_BY_VERDICT = {TARGET_CERTIFIED: 0, ALICE_DEFAULT: 0,
                   BOB_WITNESS: 2, INCONCLUSIVE: 3}
EX_CALIBRATION = 4
EX_CONFIG = 64
EX_TRACE = 65
EX_STRATEGY = 70


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as e:
        raise ConfigError(f"cannot read {path}: {e}")


def _load_cfg(args) -> object:
    return load_match_config(
        _read(args.config),
        seed_override=args.seed,
        precision_override=args.precision,
        q_cap_override=args.q_cap)


def cmd_play(args) -> int:
    cfg = _load_cfg(args)
    result = play_match(cfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "trace.jsonl").write_text(result.trace_text)
    (out / "report.txt").write_text(result.report_text)
    print(result.report_text, end="")
    return EXIT_BY_VERDICT[result.verdict.kind]


def cmd_tournament(args) -> int:
    tcfg = load_tournament_config(_read(args.config))
    t0 = time.monotonic()
    result = run_tournament(tcfg, parallel=not args.serial)
    wall = time.monotonic() - t0
    out = Path(args.out)
    (out / "traces").mkdir(parents=True, exist_ok=True)
    for label, text in result.traces:
        (out / "traces" / f"{label}.jsonl").write_text(text)
    (out / "tournament.tsv").write_text(result.table_text)
    print(result.table_text, end="")
    print(f"# wall_time_s={wall:.3f}", file=sys.stderr)
    return 0


def cmd_certify(args) -> int:
    cfg = _load_cfg(args)
    resolved = resolve_match(cfg)
    params = resolved.params
    x = parse_rational(args.x)
    y = parse_rational(args.y)
    radius = parse_rational(args.radius)
    region = ball(x, y, radius, cfg.precision)
    big_q = args.q if args.q is not None else resolved.q_certify
    report = certify_ball(region, big_q, params)
    score, q_min = badness_argmin(region.center.x, region.center.y,
                                  big_q, params)
    print(report.format_text())
    print(f"badness score at the center: [{float(score.lo):.6e}, "
          f"{float(score.hi):.6e}], minimizing q = {q_min}")
    return 0 if report.passed else 2


def cmd_calibrate(args) -> int:
    cfg = _load_cfg(args)
    from dataclasses import replace
    resolved = resolve_match(replace(cfg, epsilon=None))
    calibration = resolved.calibration
    eps = resolved.params.epsilon
    lines = [f"epsilon = {eps}"]
    if calibration.warning():
        lines.append(f"; WARNING {calibration.warning()}")
        for f in calibration.failures[:8]:
            lines.append(f";   eps={f.epsilon} gen={f.n} delta={f.delta} "
                         f"fitted={f.fitted_halfwidth} bound={f.bound}")
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(f"[params]\n{text}")
    print(text, end="")
    return 0 if calibration.ok else EX_CALIBRATION


def cmd_render(args) -> int:
    try:
        parsed = parse_trace(Path(args.trace).read_text())
        svg = render_svg(parsed)
    except (OSError, TraceError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EX_TRACE
    Path(args.out).write_text(svg)
    print(f"wrote {args.out}")
    return 0


def cmd_replay(args) -> int:
    try:
        parsed = parse_trace(Path(args.trace).read_text())
        recorded, recomputed = replay(parsed)
    except (OSError, TraceError, HawkError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EX_TRACE
    rec2 = {"kind": "adjudication"}
    rec2.update(recomputed.to_record())
    if recorded != rec2:
        print(f"adjudication mismatch:\n recorded   {recorded}\n "
              f"recomputed {rec2}", file=sys.stderr)
        return EX_TRACE
    print(f"replay ok: {recomputed.kind}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hawk",
        description="simulator and certifier for the planar slab-deletion games")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config=True):
        if config:
            p.add_argument("--config", required=True)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--precision", type=int, default=None)
        p.add_argument("--q-cap", dest="q_cap", type=int, default=None)

    p = sub.add_parser("play", help="run one match")
    common(p)
    p.add_argument("--out", default="out")
    p.set_defaults(func=cmd_play)

    p = sub.add_parser("tournament", help="run a strategy matrix")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default="out")
    p.add_argument("--serial", action="store_true")
    p.set_defaults(func=cmd_tournament)

    p = sub.add_parser("certify", help="certify a point or ball")
    common(p)
    p.add_argument("--x", required=True)
    p.add_argument("--y", required=True)
    p.add_argument("--radius", default="1/1000000000000000000000000000000")
    p.add_argument("--q", type=int, default=None)
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("calibrate", help="search the epsilon grid")
    common(p)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("render", help="draw a trace as SVG")
    p.add_argument("--trace", required=True)
    p.add_argument("--out", default="trace.svg")
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("replay", help="re-validate a trace and its verdict")
    p.add_argument("--trace", required=True)
    p.set_defaults(func=cmd_replay)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EX_CONFIG
    except CalibrationError as e:
        print(f"calibration error: {e}", file=sys.stderr)
        return EX_CALIBRATION
    except StrategyError as e:
        print(f"strategy error: {e}", file=sys.stderr)
        return EX_STRATEGY
    except TraceError as e:
        print(f"trace error: {e}", file=sys.stderr)
        return EX_TRACE


if __name__ == "__main__":
    sys.exit(main())
