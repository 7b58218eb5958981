"""Match and tournament configuration: flat key-value text with sections.

Numbers are exact rationals in any of the forms "1/5", "0.25", "2^-40",
"1e-30", or plain integers.  The only environment override is the master
RNG seed (HAWK_SEED), honored when [match] carries no seed.

Sections: [match] game/alice/bob/n_max/r_stop/precision/seed,
[rules] beta (and c for the potential game), [params] s/t/epsilon/ell/R/
q_cap/q_certify, [ball0] x/y/r, [bob] seed/target/script, [alice.inner]
beta/c/R for the adapter's virtual game, [calibrate] grid/target_qmax,
[tournament] cells/seeds.
"""

from __future__ import annotations

import configparser
import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .errors import ConfigError
from .scalars import DEFAULT_PRECISION, parse_rational

GAMES = ("absolute", "potential")
ALICES = ("trigger", "adapter", "empty")
BOBS = ("random", "target", "greedy", "scripted")


@dataclass
class MatchConfig:
    game: str
    alice: str
    bob: str
    beta: Fraction
    c: Optional[Fraction]
    s: Fraction
    t: Fraction
    epsilon: Optional[Fraction]  # None means "calibrate"
    ell: Optional[Fraction]  # None means auto (2 * r0)
    big_r: Optional[Fraction]  # None means auto (choose_R)
    q_cap: int
    q_certify: int
    ball0_x: Fraction
    ball0_y: Fraction
    ball0_r: Fraction
    n_max: int
    r_stop: Fraction
    precision: int
    seed: int
    bob_seed: Optional[int] = None
    bob_target: Optional[tuple] = None  # (x, y) Fractions
    bob_script: Optional[str] = None
    inner_beta: Optional[Fraction] = None
    inner_c: Optional[Fraction] = None
    inner_r: Optional[Fraction] = None
    calibrate_grid: Optional[tuple] = None
    calibrate_qmax: int = 5

    def __post_init__(self):
        if self.game not in GAMES:
            raise ConfigError(f"unknown game {self.game!r}")
        if self.alice not in ALICES:
            raise ConfigError(f"unknown alice strategy {self.alice!r}")
        if self.bob not in BOBS:
            raise ConfigError(f"unknown bob strategy {self.bob!r}")
        if self.game == "absolute" and not self.beta < Fraction(1, 3):
            raise ConfigError("absolute game requires beta < 1/3")
        if self.beta <= 0:
            raise ConfigError("beta must be positive")
        if self.game == "potential" and (self.c is None or self.c <= 0):
            raise ConfigError("potential game requires c > 0")
        if self.s + self.t != 1 or self.s <= 0 or self.t <= 0:
            raise ConfigError("weights must be positive with s + t = 1")
        if self.big_r is not None and self.big_r < 1 / self.beta:
            raise ConfigError("band ratio R must be at least 1/beta")
        if self.ball0_r <= 0:
            raise ConfigError("opening radius must be positive")
        if self.r_stop <= 0 or self.r_stop >= self.ball0_r:
            raise ConfigError("r_stop must lie in (0, r0)")
        if self.n_max < 1:
            raise ConfigError("n_max must be at least 1")
        if self.bob == "target" and self.bob_target is None:
            raise ConfigError("bob=target requires a target point")
        if self.bob == "scripted" and self.bob_script is None:
            raise ConfigError("bob=scripted requires a script path")


def _get(cp: configparser.ConfigParser, section: str, key: str,
         fallback=None) -> Optional[str]:
    if cp.has_option(section, key):
        value = cp.get(section, key).strip()
        return value if value else fallback
    return fallback


def _rational_or(cp, section, key, fallback=None, auto=None):
    raw = _get(cp, section, key)
    if raw is None:
        return fallback
    if auto is not None and raw.lower() in auto:
        return None
    try:
        return parse_rational(raw)
    except (ValueError, ZeroDivisionError) as e:
        raise ConfigError(f"[{section}] {key}: {e}")


def _parse_grid(raw: str) -> tuple:
    """Grid syntax: '2^-84 .. 2^-104' (descending powers) or a comma list."""
    raw = raw.strip()
    if ".." in raw:
        lo_s, hi_s = [p.strip() for p in raw.split("..")]
        lo, hi = parse_rational(lo_s), parse_rational(hi_s)
        if lo <= hi:
            raise ConfigError("grid range must be descending")
        grid = []
        value = lo
        while value >= hi:
            grid.append(value)
            value = value / 2
        return tuple(grid)
    return tuple(parse_rational(p) for p in raw.split(","))


def load_match_config(text: str, seed_override: Optional[int] = None,
                      precision_override: Optional[int] = None,
                      q_cap_override: Optional[int] = None) -> MatchConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        cp.read_string(text)
    except configparser.Error as e:
        raise ConfigError(f"malformed config: {e}")
    for section in ("match", "rules", "params", "ball0"):
        if not cp.has_section(section):
            raise ConfigError(f"missing [{section}] section")

    seed_raw = _get(cp, "match", "seed")
    if seed_override is not None:
        seed = seed_override
    elif seed_raw is not None:
        seed = int(seed_raw)
    elif os.environ.get("HAWK_SEED"):
        seed = int(os.environ["HAWK_SEED"])
    else:
        raise ConfigError("no master seed: set [match] seed or HAWK_SEED")

    target_raw = _get(cp, "bob", "target")
    target = None
    if target_raw is not None:
        parts = target_raw.replace(",", " ").split()
        if len(parts) == 2:
            target = (parse_rational(parts[0]), parse_rational(parts[1]))
        elif len(parts) == 3:
            p, r, q = (int(x) for x in parts)
            target = (Fraction(p, q), Fraction(r, q))
        else:
            raise ConfigError("bob target must be 'x y' or 'p r q'")

    grid_raw = _get(cp, "calibrate", "grid") if cp.has_section("calibrate") else None

    try:
        return MatchConfig(
            game=_get(cp, "match", "game", "potential"),
            alice=_get(cp, "match", "alice", "trigger"),
            bob=_get(cp, "match", "bob", "random"),
            beta=_rational_or(cp, "rules", "beta"),
            c=_rational_or(cp, "rules", "c"),
            s=_rational_or(cp, "params", "s"),
            t=_rational_or(cp, "params", "t"),
            epsilon=_rational_or(cp, "params", "epsilon",
                                 auto=("calibrate",)),
            ell=_rational_or(cp, "params", "ell", auto=("auto",)),
            big_r=_rational_or(cp, "params", "r", auto=("auto",)),
            q_cap=(q_cap_override if q_cap_override is not None
                   else int(_get(cp, "params", "q_cap", "10000"))),
            q_certify=int(_get(cp, "params", "q_certify", "1000")),
            ball0_x=_rational_or(cp, "ball0", "x"),
            ball0_y=_rational_or(cp, "ball0", "y"),
            ball0_r=_rational_or(cp, "ball0", "r"),
            n_max=int(_get(cp, "match", "n_max", "200")),
            r_stop=_rational_or(cp, "match", "r_stop",
                                fallback=Fraction(1, 10 ** 30)),
            precision=(precision_override if precision_override is not None
                       else int(_get(cp, "match", "precision",
                                     str(DEFAULT_PRECISION)))),
            seed=seed,
            bob_seed=(int(_get(cp, "bob", "seed"))
                      if _get(cp, "bob", "seed") else None),
            bob_target=target,
            bob_script=_get(cp, "bob", "script"),
            inner_beta=_rational_or(cp, "alice.inner", "beta")
            if cp.has_section("alice.inner") else None,
            inner_c=_rational_or(cp, "alice.inner", "c")
            if cp.has_section("alice.inner") else None,
            inner_r=_rational_or(cp, "alice.inner", "r", auto=("auto",))
            if cp.has_section("alice.inner") else None,
            calibrate_grid=_parse_grid(grid_raw) if grid_raw else None,
            calibrate_qmax=int(_get(cp, "calibrate", "target_qmax", "5"))
            if cp.has_section("calibrate") else 5,
        )
    except (TypeError, ValueError) as e:
        raise ConfigError(f"invalid config value: {e}")


def _split_outside_parens(text: str) -> list:
    """Split on commas that are not nested in parentheses."""
    parts, depth, start = [], 0, 0
    for i, ch in enumerate(text):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch == "," and depth == 0:
            parts.append(text[start:i])
            start = i + 1
    parts.append(text[start:])
    return [p for p in (p.strip() for p in parts) if p]


@dataclass
class TournamentConfig:
    base: str  # raw match-config text the cells inherit from
    cells: tuple  # tuple of (alice, bob_spec) pairs
    seeds: tuple  # tuple of ints


def load_tournament_config(text: str) -> TournamentConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        cp.read_string(text)
    except configparser.Error as e:
        raise ConfigError(f"malformed config: {e}")
    if not cp.has_section("tournament"):
        raise ConfigError("missing [tournament] section")
    cells_raw = _get(cp, "tournament", "cells")
    seeds_raw = _get(cp, "tournament", "seeds")
    if not cells_raw or not seeds_raw:
        raise ConfigError("[tournament] requires cells and seeds")
    cells = []
    for cell in _split_outside_parens(cells_raw):
        cell = cell.strip()
        if "/" not in cell:
            raise ConfigError(f"cell {cell!r} must be alice/bob")
        alice, bob = cell.split("/", 1)
        cells.append((alice.strip(), bob.strip()))
    if ".." in seeds_raw:
        lo, hi = (int(p) for p in seeds_raw.split(".."))
        seeds = tuple(range(lo, hi + 1))
    else:
        seeds = tuple(int(p) for p in seeds_raw.split())
    return TournamentConfig(base=text, cells=tuple(cells), seeds=seeds)
