"""Shared data model: teams, formations, tactics, match records, game states."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

POSITIONS = ("GK", "DEF", "MID", "FWD")

DEFAULT_REGULATION_MINUTES = 90.0
DEFAULT_INJURY_TIME = 4.0


class DataError(ValueError):
    """Raised when an input record violates a structural invariant."""


@dataclass(frozen=True)
class Formation:
    """Outfield players split across the three lines (goalkeeper implicit).

    Five-band strings like 4-2-3-1 are canonicalized by folding interior
    bands into the midfield count; the original string is kept as ``label``.
    """

    defenders: int
    midfielders: int
    forwards: int
    label: str | None = None

    def __post_init__(self):
        for n in (self.defenders, self.midfielders, self.forwards):
            if not isinstance(n, int) or n < 1:
                raise DataError(f"formation lines must be positive integers, got {self}")
        if self.defenders + self.midfielders + self.forwards != 10:
            raise DataError(f"formation lines must sum to 10, got {self}")

    @property
    def key(self) -> str:
        return f"{self.defenders}-{self.midfielders}-{self.forwards}"

    def __str__(self) -> str:
        return self.label or self.key

    @classmethod
    def parse(cls, text: str) -> "Formation":
        parts = [int(p) for p in text.strip().split("-")]
        if len(parts) < 3:
            raise DataError(f"cannot parse formation {text!r}")
        d, *mid, f = parts
        return cls(d, sum(mid), f, label=text.strip() if len(parts) > 3 else None)


def all_formations() -> list[Formation]:
    """All 36 compositions of 10 outfield players into three positive lines."""
    out = []
    for d in range(1, 9):
        for m in range(1, 10 - d):
            f = 10 - d - m
            if f >= 1:
                out.append(Formation(d, m, f))
    return out


def formation_distance(f1: Formation, f2: Formation) -> int:
    """L1 distance between line counts; each unit is half a player move."""
    return (
        abs(f1.defenders - f2.defenders)
        + abs(f1.midfielders - f2.midfielders)
        + abs(f1.forwards - f2.forwards)
    )


@dataclass(frozen=True)
class StyleFeatures:
    """Per-match averages describing how a team plays."""

    passes: float
    shots: float
    goals_for: float
    goals_against: float
    tackles: float

    FIELDS = ("passes", "shots", "goals_for", "goals_against", "tackles")

    def __post_init__(self):
        for name in self.FIELDS:
            v = getattr(self, name)
            if not math.isfinite(v) or v < 0:
                raise DataError(f"style feature {name}={v} must be finite and >= 0")

    def as_vector(self) -> list[float]:
        return [getattr(self, name) for name in self.FIELDS]


@dataclass(frozen=True)
class TacticChoice:
    """A (formation, style-cluster) pair: one pre-match action."""

    formation: Formation
    style: int

    def __post_init__(self):
        if self.style < 0:
            raise DataError(f"style index must be >= 0, got {self.style}")

    @property
    def key(self) -> str:
        return f"{self.formation.key}|{self.style}"


@dataclass(frozen=True)
class OutcomeDistribution:
    """(home win, draw, away win) probabilities."""

    p_home: float
    p_draw: float
    p_away: float

    def __post_init__(self):
        for p in (self.p_home, self.p_draw, self.p_away):
            if not (0.0 <= p <= 1.0):
                raise DataError(f"outcome probability {p} outside [0,1]")
        if abs(self.p_home + self.p_draw + self.p_away - 1.0) > 1e-9:
            raise DataError(f"outcome probabilities must sum to 1, got {self}")

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.p_home, self.p_draw, self.p_away)

    def win_prob(self, side: str) -> float:
        return self.p_home if side == "home" else self.p_away

    def lose_prob(self, side: str) -> float:
        return self.p_away if side == "home" else self.p_home


@dataclass(frozen=True)
class GameState:
    """Scoreline plus clock, the state of the in-match game."""

    home_goals: int
    away_goals: int
    minute: float = 0.0

    def __post_init__(self):
        if self.home_goals < 0 or self.away_goals < 0:
            raise DataError(f"goal counts must be >= 0, got {self}")
        if self.minute < 0:
            raise DataError(f"minute must be >= 0, got {self}")

    @property
    def scoreline(self) -> tuple[int, int]:
        return (self.home_goals, self.away_goals)


def goal_difference(state: GameState, side: str) -> int:
    """Own goals minus opponent goals from the given side's perspective."""
    diff = state.home_goals - state.away_goals
    return diff if side == "home" else -diff


@dataclass(frozen=True)
class PlayerProfile:
    id: str
    position: str
    contribution: float

    def __post_init__(self):
        if self.position not in POSITIONS:
            raise DataError(f"unknown position {self.position!r}")
        if not (0.0 <= self.contribution <= 1.0):
            raise DataError(f"contribution {self.contribution} outside [0,1]")


@dataclass(frozen=True)
class Substitution:
    minute: float
    side: str
    player_in: str
    player_out: str


@dataclass
class MatchRecord:
    """One played match: tactics, goal events, lineups, substitutions."""

    round: int
    home_team: str
    away_team: str
    home_tactic: TacticChoice
    away_tactic: TacticChoice
    goal_events: list[tuple[float, str]]  # (minute, "home"|"away"), time ordered
    final_score: tuple[int, int]
    home_lineup: list[str]
    away_lineup: list[str]
    home_bench: list[str] = field(default_factory=list)
    away_bench: list[str] = field(default_factory=list)
    substitutions: list[Substitution] = field(default_factory=list)

    def __post_init__(self):
        self.validate()

    def validate(self):
        home_goals = sum(1 for _, s in self.goal_events if s == "home")
        away_goals = sum(1 for _, s in self.goal_events if s == "away")
        if (home_goals, away_goals) != tuple(self.final_score):
            raise DataError(
                f"{self.home_team} v {self.away_team}: final score {self.final_score} "
                f"does not match goal events ({home_goals}, {away_goals})"
            )
        for lineup, name in ((self.home_lineup, "home"), (self.away_lineup, "away")):
            if len(lineup) != 11:
                raise DataError(f"{name} lineup must have 11 players, got {len(lineup)}")
        for side, bench in (("home", self.home_bench), ("away", self.away_bench)):
            subs = [s for s in self.substitutions if s.side == side]
            if len(subs) > 3:
                raise DataError(f"{side} side made {len(subs)} substitutions (max 3)")
            for s in subs:
                if s.player_in not in bench:
                    raise DataError(
                        f"substitute {s.player_in} not on the {side} bench"
                    )

    @property
    def result(self) -> str:
        """'home', 'draw' or 'away'."""
        h, a = self.final_score
        return "home" if h > a else ("away" if a > h else "draw")

    def tactic_of(self, team: str) -> TacticChoice:
        if team == self.home_team:
            return self.home_tactic
        if team == self.away_team:
            return self.away_tactic
        raise KeyError(team)

    def side_of(self, team: str) -> str:
        if team == self.home_team:
            return "home"
        if team == self.away_team:
            return "away"
        raise KeyError(team)

    def opponent_of(self, team: str) -> str:
        return self.away_team if team == self.home_team else self.home_team


# ---------------------------------------------------------------------------
# Serialization: MatchRecord as JSONL, StyleFeatures as CSV.


def tactic_to_dict(t: TacticChoice) -> dict:
    return {
        "formation": {
            "defenders": t.formation.defenders,
            "midfielders": t.formation.midfielders,
            "forwards": t.formation.forwards,
            "label": t.formation.label,
        },
        "style": t.style,
    }


def tactic_from_dict(d: dict) -> TacticChoice:
    f = d["formation"]
    return TacticChoice(
        Formation(f["defenders"], f["midfielders"], f["forwards"], f.get("label")),
        d["style"],
    )


def match_to_dict(m: MatchRecord) -> dict:
    return {
        "round": m.round,
        "home_team": m.home_team,
        "away_team": m.away_team,
        "home_tactic": tactic_to_dict(m.home_tactic),
        "away_tactic": tactic_to_dict(m.away_tactic),
        "goal_events": [[minute, side] for minute, side in m.goal_events],
        "final_score": list(m.final_score),
        "home_lineup": list(m.home_lineup),
        "away_lineup": list(m.away_lineup),
        "home_bench": list(m.home_bench),
        "away_bench": list(m.away_bench),
        "substitutions": [
            [s.minute, s.side, s.player_in, s.player_out] for s in m.substitutions
        ],
    }


def match_from_dict(d: dict) -> MatchRecord:
    return MatchRecord(
        round=d["round"],
        home_team=d["home_team"],
        away_team=d["away_team"],
        home_tactic=tactic_from_dict(d["home_tactic"]),
        away_tactic=tactic_from_dict(d["away_tactic"]),
        goal_events=[(float(m), s) for m, s in d["goal_events"]],
        final_score=(d["final_score"][0], d["final_score"][1]),
        home_lineup=list(d["home_lineup"]),
        away_lineup=list(d["away_lineup"]),
        home_bench=list(d["home_bench"]),
        away_bench=list(d["away_bench"]),
        substitutions=[
            Substitution(float(m), s, pin, pout)
            for m, s, pin, pout in d.get("substitutions", [])
        ],
    )


def dump_matches_jsonl(matches: list[MatchRecord]) -> str:
    return "".join(json.dumps(match_to_dict(m)) + "\n" for m in matches)


def load_matches_jsonl(text: str) -> list[MatchRecord]:
    """Parse one match per line; a bad line raises DataError naming the line."""
    out = []
    for i, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            out.append(match_from_dict(json.loads(line)))
        except (DataError, KeyError, ValueError, TypeError) as exc:
            raise DataError(f"line {i}: {exc}") from exc
    return out


STYLE_CSV_HEADER = "team_id,passes,shots,goals_for,goals_against,tackles"


def dump_style_csv(rows: list[tuple[str, StyleFeatures]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(STYLE_CSV_HEADER.split(","))
    for team_id, feats in rows:
        w.writerow([team_id] + [repr(v) for v in feats.as_vector()])
    return buf.getvalue()


def load_style_csv(text: str) -> list[tuple[str, StyleFeatures]]:
    reader = csv.DictReader(io.StringIO(text))
    out = []
    for row in reader:
        out.append(
            (
                row["team_id"],
                StyleFeatures(
                    float(row["passes"]),
                    float(row["shots"]),
                    float(row["goals_for"]),
                    float(row["goals_against"]),
                    float(row["tackles"]),
                ),
            )
        )
    return out
