"""Poisson attack/defense strength ratings and outcome probabilities."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .domain import DataError, MatchRecord, OutcomeDistribution

DEFAULT_MAX_GOALS = 10


@dataclass
class StrengthModel:
    """Per-team scoring strengths under an independent double-Poisson model.

    Home scoring rate is home_advantage * attack[home] * defense[away];
    away rate is attack[away] * defense[home].  Higher defense means more
    goals conceded.  After fitting, log-attack ratings are normalized to
    mean zero (the model is invariant to the attack/defense gauge).
    """

    attack: dict[str, float]
    defense: dict[str, float]
    home_advantage: float
    max_goals: int = DEFAULT_MAX_GOALS
    trained_through_round: int | None = None

    def rates(self, home: str, away: str) -> tuple[float, float]:
        if home not in self.attack or away not in self.attack:
            missing = home if home not in self.attack else away
            raise KeyError(f"unknown team {missing!r}")
        lam_home = self.home_advantage * self.attack[home] * self.defense[away]
        lam_away = self.attack[away] * self.defense[home]
        return lam_home, lam_away


@dataclass
class FitConfig:
    iterations: int = 400
    learning_rate: float = 0.05
    l2: float = 1e-3


def _log_likelihood(hg, ag, hi, ai, theta, l2):
    n_teams = (len(theta) - 1) // 2
    log_att = theta[:n_teams]
    log_dfc = theta[n_teams : 2 * n_teams]
    log_gamma = theta[-1]
    log_lh = log_gamma + log_att[hi] + log_dfc[ai]
    log_la = log_att[ai] + log_dfc[hi]
    ll = np.sum(hg * log_lh - np.exp(log_lh)) + np.sum(ag * log_la - np.exp(log_la))
    return ll - l2 * np.sum(theta**2)


def fit_strengths(matches: list[MatchRecord], config: FitConfig | None = None) -> StrengthModel:
    """Maximize the double-Poisson log-likelihood by gradient ascent in log-space.

    Deterministic given inputs and config.  Raises DataError on an empty
    match list or a non-finite likelihood (degenerate data).
    """
    if not matches:
        raise DataError("cannot fit strengths on an empty match list")
    config = config or FitConfig()

    teams = sorted({m.home_team for m in matches} | {m.away_team for m in matches})
    if len(teams) < 2:
        raise DataError("need at least 2 teams to fit strengths")
    idx = {t: i for i, t in enumerate(teams)}
    n = len(teams)

    hg = np.array([m.final_score[0] for m in matches], dtype=float)
    ag = np.array([m.final_score[1] for m in matches], dtype=float)
    hi = np.array([idx[m.home_team] for m in matches])
    ai = np.array([idx[m.away_team] for m in matches])

    theta = np.zeros(2 * n + 1)  # log attack, log defense, log home advantage
    for _ in range(config.iterations):
        log_att = theta[:n]
        log_dfc = theta[n : 2 * n]
        log_gamma = theta[-1]
        lam_h = np.exp(log_gamma + log_att[hi] + log_dfc[ai])
        lam_a = np.exp(log_att[ai] + log_dfc[hi])

        d_att = np.bincount(hi, weights=hg - lam_h, minlength=n) + np.bincount(
            ai, weights=ag - lam_a, minlength=n
        )
        d_dfc = np.bincount(ai, weights=hg - lam_h, minlength=n) + np.bincount(
            hi, weights=ag - lam_a, minlength=n
        )
        d_gamma = np.sum(hg - lam_h)
        grad = np.concatenate([d_att, d_dfc, [d_gamma]]) - 2 * config.l2 * theta
        theta = theta + config.learning_rate * grad / len(matches)
        if not np.all(np.isfinite(theta)):
            raise DataError("strength fit diverged to a non-finite likelihood")

    ll = _log_likelihood(hg, ag, hi, ai, theta, config.l2)
    if not math.isfinite(ll):
        raise DataError("strength fit produced a non-finite likelihood")

    # Gauge fixing: shift mean log-attack to zero, absorbing it into defense.
    shift = float(np.mean(theta[:n]))
    log_att = theta[:n] - shift
    log_dfc = theta[n : 2 * n] + shift
    return StrengthModel(
        attack={t: float(np.exp(log_att[idx[t]])) for t in teams},
        defense={t: float(np.exp(log_dfc[idx[t]])) for t in teams},
        home_advantage=float(np.exp(theta[-1])),
        trained_through_round=max(m.round for m in matches),
    )


def log_likelihood_of(model: StrengthModel, matches: list[MatchRecord]) -> float:
    """Unpenalized log-likelihood of the matches under the model."""
    ll = 0.0
    for m in matches:
        lam_h, lam_a = model.rates(m.home_team, m.away_team)
        h, a = m.final_score
        ll += h * math.log(lam_h) - lam_h + a * math.log(lam_a) - lam_a
        ll -= math.lgamma(h + 1) + math.lgamma(a + 1)
    return ll


def poisson_grid_probs(lam_home: float, lam_away: float, max_goals: int) -> OutcomeDistribution:
    """(p_home, p_draw, p_away) from the score grid [0, max_goals]^2.

    Residual tail mass outside the grid is redistributed proportionally.
    """
    goals = np.arange(max_goals + 1)
    log_ph = goals * math.log(lam_home) - lam_home if lam_home > 0 else np.where(goals == 0, 0.0, -np.inf)
    log_pa = goals * math.log(lam_away) - lam_away if lam_away > 0 else np.where(goals == 0, 0.0, -np.inf)
    lg = np.array([math.lgamma(k + 1) for k in goals])
    ph = np.exp(log_ph - lg) if lam_home > 0 else np.where(goals == 0, 1.0, 0.0)
    pa = np.exp(log_pa - lg) if lam_away > 0 else np.where(goals == 0, 1.0, 0.0)

    joint = np.outer(ph, pa)
    p_home = float(np.sum(np.tril(joint, -1)))
    p_away = float(np.sum(np.triu(joint, 1)))
    p_draw = float(np.sum(np.diag(joint)))
    total = p_home + p_draw + p_away
    return OutcomeDistribution(p_home / total, p_draw / total, p_away / total)


def outcome_probs(model: StrengthModel, home: str, away: str) -> OutcomeDistribution:
    lam_home, lam_away = model.rates(home, away)
    return poisson_grid_probs(lam_home, lam_away, model.max_goals)


def strength_to_json(model: StrengthModel) -> str:
    doc = {
        "teams": [
            {"id": t, "attack": model.attack[t], "defense": model.defense[t]}
            for t in sorted(model.attack)
        ],
        "home_advantage": model.home_advantage,
        "max_goals": model.max_goals,
        "trained_through_round": model.trained_through_round,
    }
    return json.dumps(doc, indent=2)


def strength_from_json(text: str) -> StrengthModel:
    doc = json.loads(text)
    return StrengthModel(
        attack={t["id"]: t["attack"] for t in doc["teams"]},
        defense={t["id"]: t["defense"] for t in doc["teams"]},
        home_advantage=doc["home_advantage"],
        max_goals=doc["max_goals"],
        trained_through_round=doc.get("trained_through_round"),
    )
