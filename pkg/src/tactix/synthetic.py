"""Synthetic leagues with planted ground truth, plus the match simulator.

Every learned component gets an oracle from here: planted style labels for
clustering, planted attack/defense rates for the strength model, scripted
tactic habits for the formation predictor, and analytic outcome
probabilities for the payoff network.  Ground truth is written to a
sidecar never consumed by training code.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .domain import (
    DataError,
    DEFAULT_INJURY_TIME,
    DEFAULT_REGULATION_MINUTES,
    Formation,
    MatchRecord,
    OutcomeDistribution,
    PlayerProfile,
    StyleFeatures,
    Substitution,
    TacticChoice,
)
from .strength import poisson_grid_probs

# Formations a generated squad (6 DEF, 6 MID, 4 FWD outfielders) can field.
FORMATION_POOL = ["4-4-2", "4-5-1", "4-3-3", "3-5-2", "5-4-1", "3-4-3", "5-3-2", "4-2-4"]

SQUAD_SHAPE = {"GK": 2, "DEF": 6, "MID": 6, "FWD": 4}

# One elevated feature per style; after per-feature standardization the
# centroids sit near a regular simplex, so the inertia curve's knee falls
# at the planted cluster count.
STYLE_CENTROID_BASE = np.array(
    [
        [560.0, 10.0, 1.4, 1.3, 18.0],  # possession-heavy
        [400.0, 16.0, 1.4, 1.3, 18.0],  # shot-happy direct play
        [400.0, 10.0, 2.2, 1.3, 18.0],  # clinical attacking
        [400.0, 10.0, 1.4, 2.1, 18.0],  # open and leaky
    ]
)


@dataclass
class GeneratorConfig:
    n_teams: int = 20
    n_styles: int = 4
    separation: str = "well_separated"  # or "overlapping"
    seasons: int = 2
    home_advantage: float = 1.25
    strength_spread: float = 0.25  # stddev of planted log attack/defense
    interaction_spread: float = 0.25  # style-vs-style rate multiplier spread
    formation_attack_coef: float = 0.12  # extra forwards raise own rate
    formation_defense_coef: float = 0.10  # extra defenders cut opponent rate
    habit: str = "cluster_favorite"  # or "repeat_last" | "random"
    habit_noise: float = 0.1
    scoreline_boost: float = 1.2  # trailing-side rate multiplier (1.0 = off)
    late_inflation: float = 0.3  # rate grows by this fraction over 90 minutes
    base_rate: float = 1.35  # expected goals per side per 90 at par
    sub_policy: str = "best_bench"  # or "none" | "random"
    sub_minutes: tuple[float, ...] = (58.0, 69.0, 79.0)
    regulation: float = DEFAULT_REGULATION_MINUTES
    injury_time: float = DEFAULT_INJURY_TIME
    seed: int = 0

    def __post_init__(self):
        if self.n_teams < 2 or self.n_teams % 2:
            raise DataError("n_teams must be an even number >= 2")
        if self.n_styles < 1 or self.n_styles > len(STYLE_CENTROID_BASE):
            raise DataError(f"n_styles must be in [1, {len(STYLE_CENTROID_BASE)}]")
        if self.separation not in ("well_separated", "overlapping"):
            raise DataError(f"unknown separation {self.separation!r}")
        if self.habit not in ("cluster_favorite", "repeat_last", "random"):
            raise DataError(f"unknown habit rule {self.habit!r}")
        if self.injury_time < 0:
            raise DataError("injury_time must be >= 0")

    @property
    def duration(self) -> float:
        return self.regulation + self.injury_time


@dataclass
class GroundTruth:
    styles: dict[str, int]
    attack: dict[str, float]
    defense: dict[str, float]
    home_advantage: float
    interaction: np.ndarray  # (n_styles, n_styles) own-rate multipliers
    favorite_formation: dict[str, str]
    config: GeneratorConfig


@dataclass
class League:
    teams: list[str]
    features: dict[str, StyleFeatures]
    squads: dict[str, list[PlayerProfile]]
    truth: GroundTruth


def _style_intra_sigma(separation: str) -> float:
    # Feature offsets below are O(100) apart in the passes axis; these sigmas
    # put well_separated centroids >= 5 intra-sigmas apart after scaling.
    return 0.04 if separation == "well_separated" else 0.35


def generate_league(config: GeneratorConfig) -> League:
    """Deterministic league with planted styles, strengths and squads."""
    rng = np.random.default_rng(config.seed)
    teams = [f"T{i:02d}" for i in range(config.n_teams)]

    styles = {t: i % config.n_styles for i, t in enumerate(teams)}
    centroids = STYLE_CENTROID_BASE[: config.n_styles]
    scale = centroids.std(axis=0)
    scale = np.where(scale > 0, scale, 1.0)
    sigma = _style_intra_sigma(config.separation)

    features = {}
    for t in teams:
        c = centroids[styles[t]]
        noise = rng.normal(0.0, sigma, size=c.shape) * scale
        vec = np.maximum(c + noise, 0.0)
        features[t] = StyleFeatures(*[float(v) for v in vec])

    attack = {t: float(np.exp(rng.normal(0.0, config.strength_spread))) for t in teams}
    defense = {t: float(np.exp(rng.normal(0.0, config.strength_spread))) for t in teams}
    # Same gauge as the fitted model: mean log-attack zero.
    shift = float(np.mean([math.log(a) for a in attack.values()]))
    attack = {t: a * math.exp(-shift) for t, a in attack.items()}
    defense = {t: d * math.exp(shift) for t, d in defense.items()}

    interaction = np.exp(
        rng.normal(0.0, config.interaction_spread, size=(config.n_styles, config.n_styles))
    )

    squads = {}
    for t in teams:
        squad = []
        for pos, count in SQUAD_SHAPE.items():
            for j in range(count):
                squad.append(
                    PlayerProfile(
                        id=f"{t}_{pos}{j}",
                        position=pos,
                        contribution=float(rng.uniform(0.05, 0.95)),
                    )
                )
        squads[t] = squad

    favorites = {
        t: FORMATION_POOL[int(rng.integers(len(FORMATION_POOL)))] for t in teams
    }
    truth = GroundTruth(
        styles=styles,
        attack=attack,
        defense=defense,
        home_advantage=config.home_advantage,
        interaction=interaction,
        favorite_formation=favorites,
        config=config,
    )
    return League(teams=teams, features=features, squads=squads, truth=truth)


def round_robin_schedule(teams: list[str]) -> list[list[tuple[str, str]]]:
    """Circle-method single round robin: n-1 rounds of n/2 fixtures."""
    n = len(teams)
    rot = list(teams)
    rounds = []
    for r in range(n - 1):
        pairs = []
        for i in range(n // 2):
            a, b = rot[i], rot[n - 1 - i]
            pairs.append((a, b) if (r + i) % 2 == 0 else (b, a))
        rounds.append(pairs)
        rot = [rot[0]] + [rot[-1]] + rot[1:-1]
    return rounds


def season_schedule(teams: list[str]) -> list[list[tuple[str, str]]]:
    """Double round robin: every fixture home and away."""
    first = round_robin_schedule(teams)
    second = [[(a2, a1) for a1, a2 in rnd] for rnd in first]
    return first + second


def planted_rates(
    truth: GroundTruth,
    home: str,
    away: str,
    home_tactic: TacticChoice,
    away_tactic: TacticChoice,
) -> tuple[float, float]:
    """Per-90-minute planted scoring rates for the fixture at par time."""
    cfg = truth.config
    inter = truth.interaction

    def formation_factor(own: TacticChoice, opp: TacticChoice) -> float:
        atk = 1.0 + cfg.formation_attack_coef * (own.formation.forwards - 2) / 10.0
        dfc = 1.0 - cfg.formation_defense_coef * (opp.formation.defenders - 4) / 10.0
        return max(atk * dfc, 0.05)

    lam_home = (
        cfg.base_rate
        * truth.home_advantage
        * truth.attack[home]
        * truth.defense[away]
        * inter[home_tactic.style, away_tactic.style]
        * formation_factor(home_tactic, away_tactic)
    )
    lam_away = (
        cfg.base_rate
        * truth.attack[away]
        * truth.defense[home]
        * inter[away_tactic.style, home_tactic.style]
        * formation_factor(away_tactic, home_tactic)
    )
    return lam_home, lam_away


def _expected_goals(lam_per90: float, cfg: GeneratorConfig) -> float:
    """Integral of the time-inflated rate over the whole match."""
    T = cfg.duration
    return lam_per90 / cfg.regulation * (T + cfg.late_inflation * T * T / (2 * cfg.regulation))


def analytic_outcome_probs(
    truth: GroundTruth,
    home: str,
    away: str,
    home_tactic: TacticChoice,
    away_tactic: TacticChoice,
    max_goals: int = 12,
) -> OutcomeDistribution:
    """Exact double-Poisson outcome probabilities under the planted rates.

    Only valid when the scoreline modifier is off (rates independent of the
    score); raises DataError otherwise.
    """
    if truth.config.scoreline_boost != 1.0:
        raise DataError(
            "analytic outcome probabilities require scoreline_boost = 1.0"
        )
    lam_h, lam_a = planted_rates(truth, home, away, home_tactic, away_tactic)
    mu_h = _expected_goals(lam_h, truth.config)
    mu_a = _expected_goals(lam_a, truth.config)
    if mu_h == 0 and mu_a == 0:
        return OutcomeDistribution(0.0, 1.0, 0.0)
    return poisson_grid_probs(mu_h, mu_a, max_goals)


def pick_tactic(
    truth: GroundTruth,
    team: str,
    last_formation: str | None,
    rng: np.random.Generator,
) -> TacticChoice:
    """Formation by the configured habit rule; style is the planted style."""
    cfg = truth.config
    if cfg.habit == "random" or rng.uniform() < cfg.habit_noise:
        form = FORMATION_POOL[int(rng.integers(len(FORMATION_POOL)))]
    elif cfg.habit == "repeat_last" and last_formation is not None:
        form = last_formation
    else:
        form = truth.favorite_formation[team]
    return TacticChoice(Formation.parse(form), truth.styles[team])


def lineup_for(squad: list[PlayerProfile], formation: Formation) -> tuple[list[PlayerProfile], list[PlayerProfile]]:
    """Best-contribution lineup matching the formation; rest is the bench."""
    by_pos = {pos: sorted((p for p in squad if p.position == pos),
                          key=lambda p: -p.contribution) for pos in SQUAD_SHAPE}
    need = {"GK": 1, "DEF": formation.defenders, "MID": formation.midfielders,
            "FWD": formation.forwards}
    lineup: list[PlayerProfile] = []
    for pos, count in need.items():
        if len(by_pos[pos]) < count:
            raise DataError(f"squad cannot field {count} {pos}")
        lineup.extend(by_pos[pos][:count])
    chosen = {p.id for p in lineup}
    bench = [p for p in squad if p.id not in chosen]
    return lineup, bench


def _scripted_subs(
    side: str,
    lineup: list[PlayerProfile],
    bench: list[PlayerProfile],
    cfg: GeneratorConfig,
    rng: np.random.Generator,
) -> list[Substitution]:
    """Substitutions per the configured policy, applied at fixed minutes."""
    if cfg.sub_policy == "none":
        return []
    pitch = list(lineup)
    pool = [p for p in bench if p.position != "GK"]
    subs = []
    for minute in cfg.sub_minutes[:3]:
        if not pool:
            break
        if cfg.sub_policy == "random":
            incoming = pool[int(rng.integers(len(pool)))]
        else:  # best_bench: highest contribution first
            incoming = max(pool, key=lambda p: (p.contribution, p.id))
        same = [p for p in pitch if p.position == incoming.position]
        candidates = same or [p for p in pitch if p.position != "GK"]
        outgoing = min(candidates, key=lambda p: (p.contribution, p.id))
        subs.append(Substitution(minute, side, incoming.id, outgoing.id))
        pitch[pitch.index(outgoing)] = incoming
        pool.remove(incoming)
    return subs


def simulate_match(
    league: League,
    home: str,
    away: str,
    home_tactic: TacticChoice,
    away_tactic: TacticChoice,
    round_index: int,
    seed: int,
) -> MatchRecord:
    """Thinned inhomogeneous Poisson goal process, deterministic per seed."""
    truth = league.truth
    cfg = truth.config
    if home not in truth.attack or away not in truth.attack:
        raise DataError(f"unknown fixture {home} v {away}")
    rng = np.random.default_rng(seed)
    lam_h, lam_a = planted_rates(truth, home, away, home_tactic, away_tactic)

    # Envelope: maximal time inflation times the trailing boost.
    env_factor = (1.0 + cfg.late_inflation * cfg.duration / cfg.regulation) * max(
        cfg.scoreline_boost, 1.0
    )

    def candidates(lam_per90: float) -> list[float]:
        rate = lam_per90 / cfg.regulation * env_factor  # per minute
        out, t = [], 0.0
        if rate <= 0:
            return out
        while True:
            t += rng.exponential(1.0 / rate)
            if t >= cfg.duration:
                return out
            out.append(t)

    events = [(t, "home") for t in candidates(lam_h)] + [
        (t, "away") for t in candidates(lam_a)
    ]
    events.sort()

    goals: list[tuple[float, str]] = []
    h = a = 0
    for t, side in events:
        lam = lam_h if side == "home" else lam_a
        modifier = 1.0 + cfg.late_inflation * t / cfg.regulation
        trailing = (side == "home" and h < a) or (side == "away" and a < h)
        if trailing:
            modifier *= cfg.scoreline_boost
        accept_p = (lam / cfg.regulation * modifier) / (lam / cfg.regulation * env_factor)
        if rng.uniform() < accept_p:
            goals.append((round(t, 2), side))
            if side == "home":
                h += 1
            else:
                a += 1

    home_lineup, home_bench = lineup_for(league.squads[home], home_tactic.formation)
    away_lineup, away_bench = lineup_for(league.squads[away], away_tactic.formation)
    subs = _scripted_subs("home", home_lineup, home_bench, cfg, rng) + _scripted_subs(
        "away", away_lineup, away_bench, cfg, rng
    )
    return MatchRecord(
        round=round_index,
        home_team=home,
        away_team=away,
        home_tactic=home_tactic,
        away_tactic=away_tactic,
        goal_events=goals,
        final_score=(h, a),
        home_lineup=[p.id for p in home_lineup],
        away_lineup=[p.id for p in away_lineup],
        home_bench=[p.id for p in home_bench],
        away_bench=[p.id for p in away_bench],
        substitutions=subs,
    )


def simulate_league(config: GeneratorConfig) -> tuple[League, list[MatchRecord]]:
    """Full multi-season fixture list, per-match seeds derived from the
    league seed and fixture index."""
    league = generate_league(config)
    truth = league.truth
    habit_rng = np.random.default_rng(config.seed + 1)
    last_formation: dict[str, str | None] = {t: None for t in league.teams}

    matches = []
    fixture_index = 0
    round_index = 0
    for _season in range(config.seasons):
        for rnd in season_schedule(league.teams):
            for home, away in rnd:
                ht = pick_tactic(truth, home, last_formation[home], habit_rng)
                at = pick_tactic(truth, away, last_formation[away], habit_rng)
                m = simulate_match(
                    league, home, away, ht, at, round_index,
                    seed=config.seed * 1_000_003 + fixture_index,
                )
                matches.append(m)
                last_formation[home] = ht.formation.key
                last_formation[away] = at.formation.key
                fixture_index += 1
            round_index += 1
    return league, matches


# ---------------------------------------------------------------------------
# Ground-truth sidecar (oracle hygiene: training code never reads this)


def truth_to_json(league: League) -> str:
    truth = league.truth
    cfg = truth.config
    return json.dumps(
        {
            "styles": truth.styles,
            "attack": truth.attack,
            "defense": truth.defense,
            "home_advantage": truth.home_advantage,
            "interaction": truth.interaction.tolist(),
            "favorite_formation": truth.favorite_formation,
            "config": {
                k: (list(v) if isinstance(v, tuple) else v)
                for k, v in vars(cfg).items()
            },
        },
        indent=2,
    )


def truth_from_json(text: str) -> GroundTruth:
    doc = json.loads(text)
    cfg_doc = dict(doc["config"])
    cfg_doc["sub_minutes"] = tuple(cfg_doc["sub_minutes"])
    config = GeneratorConfig(**cfg_doc)
    return GroundTruth(
        styles={t: int(s) for t, s in doc["styles"].items()},
        attack=doc["attack"],
        defense=doc["defense"],
        home_advantage=doc["home_advantage"],
        interaction=np.array(doc["interaction"]),
        favorite_formation=doc["favorite_formation"],
        config=config,
    )


def squads_to_json(league: League) -> str:
    return json.dumps(
        {
            t: [
                {"id": p.id, "position": p.position, "contribution": p.contribution}
                for p in squad
            ]
            for t, squad in league.squads.items()
        },
        indent=2,
    )


def squads_from_json(text: str) -> dict[str, list[PlayerProfile]]:
    doc = json.loads(text)
    return {
        t: [PlayerProfile(p["id"], p["position"], p["contribution"]) for p in ps]
        for t, ps in doc.items()
    }
