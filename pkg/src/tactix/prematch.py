"""Pre-match game: payoff table over tactic pairs and the three criteria."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .clustering import StyleClusterSet
from .domain import (
    DataError,
    Formation,
    MatchRecord,
    OutcomeDistribution,
    StyleFeatures,
    TacticChoice,
    all_formations,
)
from .opposition import FormationClassifier, OppositionBelief, belief_over, build_belief
from .payoffnet import PayoffNet, predict_batch
from .strength import StrengthModel, outcome_probs

APPROACHES = ("best_response", "spiteful", "minmax")


@dataclass
class FeatureEncoder:
    """Maps a fixture's tactic pair plus strength probs to the net's input.

    Layout: one-hot home style | away style | home formation | away formation
    | (p_home, p_draw, p_away) from the strength model.
    """

    n_styles: int
    formation_vocab: list[str]

    @classmethod
    def from_matches(cls, matches: list[MatchRecord], n_styles: int) -> "FeatureEncoder":
        forms = {m.home_tactic.formation.key for m in matches}
        forms |= {m.away_tactic.formation.key for m in matches}
        return cls(n_styles=n_styles, formation_vocab=sorted(forms))

    @property
    def n_inputs(self) -> int:
        return 2 * self.n_styles + 2 * len(self.formation_vocab) + 3

    def _onehot_formation(self, f: Formation) -> np.ndarray:
        v = np.zeros(len(self.formation_vocab))
        try:
            v[self.formation_vocab.index(f.key)] = 1.0
        except ValueError:
            pass  # formation unseen in training: zero block
        return v

    def _onehot_style(self, s: int) -> np.ndarray:
        v = np.zeros(self.n_styles)
        if 0 <= s < self.n_styles:
            v[s] = 1.0
        return v

    def encode(
        self,
        home_tactic: TacticChoice,
        away_tactic: TacticChoice,
        strength_probs: OutcomeDistribution,
    ) -> np.ndarray:
        return np.concatenate(
            [
                self._onehot_style(home_tactic.style),
                self._onehot_style(away_tactic.style),
                self._onehot_formation(home_tactic.formation),
                self._onehot_formation(away_tactic.formation),
                np.array(strength_probs.as_tuple()),
            ]
        )

    def to_dict(self) -> dict:
        return {"n_styles": self.n_styles, "formation_vocab": self.formation_vocab}

    @classmethod
    def from_dict(cls, doc: dict) -> "FeatureEncoder":
        return cls(n_styles=doc["n_styles"], formation_vocab=list(doc["formation_vocab"]))


def weighted_payoff(d: OutcomeDistribution, side: str) -> float:
    """2 * P(side wins) + 1 * P(draw)."""
    return 2.0 * d.win_prob(side) + d.p_draw


@dataclass
class PayoffTable:
    our_actions: list[TacticChoice]
    opp_actions: list[TacticChoice]
    cells: np.ndarray  # (ours, theirs, 3) outcome probs, home/draw/away order
    our_side: str  # 'home' or 'away'

    def cell(self, i: int, j: int) -> OutcomeDistribution:
        p = self.cells[i, j]
        return OutcomeDistribution(float(p[0]), float(p[1]), float(p[2]))

    def our_win_probs(self) -> np.ndarray:
        return self.cells[:, :, 0] if self.our_side == "home" else self.cells[:, :, 2]

    def our_payoffs(self) -> np.ndarray:
        """Weighted payoff from our perspective, per (ours, theirs)."""
        return 2.0 * self.our_win_probs() + self.cells[:, :, 1]

    def opp_payoffs(self) -> np.ndarray:
        win = self.cells[:, :, 2] if self.our_side == "home" else self.cells[:, :, 0]
        return 2.0 * win + self.cells[:, :, 1]


def default_action_set(n_styles: int, formations: list[Formation] | None = None) -> list[TacticChoice]:
    forms = formations if formations is not None else all_formations()
    return [TacticChoice(f, s) for f in forms for s in range(n_styles)]


def build_payoff_table(
    net: PayoffNet,
    encoder: FeatureEncoder,
    strengths: StrengthModel,
    our_team: str,
    opp_team: str,
    our_actions: list[TacticChoice],
    opp_actions: list[TacticChoice],
    venue: str = "home",
) -> PayoffTable:
    """One payoff-net evaluation per (ours, theirs) cell, batched."""
    if not our_actions or not opp_actions:
        raise DataError("action lists must be non-empty")
    if venue not in ("home", "away"):
        raise DataError(f"venue must be home or away, got {venue!r}")
    home_team = our_team if venue == "home" else opp_team
    away_team = opp_team if venue == "home" else our_team
    sp = outcome_probs(strengths, home_team, away_team)

    rows = []
    for ours in our_actions:
        for theirs in opp_actions:
            home_t = ours if venue == "home" else theirs
            away_t = theirs if venue == "home" else ours
            rows.append(encoder.encode(home_t, away_t, sp))
    probs = predict_batch(net, np.array(rows))
    cells = probs.reshape(len(our_actions), len(opp_actions), 3)
    return PayoffTable(
        our_actions=list(our_actions),
        opp_actions=list(opp_actions),
        cells=cells,
        our_side=venue,
    )


def _expected(values: np.ndarray, belief: np.ndarray) -> np.ndarray:
    return values @ belief


def _argbest(scores: np.ndarray, maximize: bool) -> int:
    # np.argmax/argmin take the first index on exact ties: action-list order.
    return int(np.argmax(scores) if maximize else np.argmin(scores))


def best_response(table: PayoffTable, belief: np.ndarray) -> TacticChoice:
    """Maximize our expected weighted payoff against the belief."""
    scores = _expected(table.our_payoffs(), belief)
    return table.our_actions[_argbest(scores, maximize=True)]


def spiteful(table: PayoffTable, belief: np.ndarray) -> TacticChoice:
    """Minimize the opponent's expected weighted payoff."""
    scores = _expected(table.opp_payoffs(), belief)
    return table.our_actions[_argbest(scores, maximize=False)]


def minmax(table: PayoffTable, belief: np.ndarray) -> TacticChoice:
    """Maximize the expected payoff difference ours - theirs."""
    scores = _expected(table.our_payoffs() - table.opp_payoffs(), belief)
    return table.our_actions[_argbest(scores, maximize=True)]


CRITERIA = {"best_response": best_response, "spiteful": spiteful, "minmax": minmax}


@dataclass
class Recommendation:
    choice: TacticChoice
    approach: str
    expected_payoffs: dict[str, float]  # our expected weighted payoff per action key
    expected_win_probs: dict[str, float]  # our expected P(win) per action key
    belief: dict[str, float]  # over opponent action keys
    venue: str

    def to_dict(self) -> dict:
        return {
            "choice": {"formation": self.choice.formation.key, "style": self.choice.style},
            "approach": self.approach,
            "expected_payoffs": self.expected_payoffs,
            "expected_win_probs": self.expected_win_probs,
            "belief": self.belief,
            "venue": self.venue,
        }


@dataclass
class ModelBundle:
    """Everything the pre-match game needs, fitted on one training cut."""

    strengths: StrengthModel
    cluster_set: StyleClusterSet
    formation_clf: FormationClassifier
    payoff_net: PayoffNet
    encoder: FeatureEncoder
    version: str = "unversioned"
    trained_through_round: int | None = None


def recommend_prematch(
    bundle: ModelBundle,
    our_team: str,
    opp_team: str,
    venue: str,
    history: list[MatchRecord],
    team_features: dict[str, StyleFeatures],
    approach: str = "best_response",
    our_actions: list[TacticChoice] | None = None,
    point_mass: bool = False,
) -> Recommendation:
    """Assemble the belief, build the table, and apply the chosen criterion.

    With point_mass=True the belief collapses to its most likely opponent
    tactic before the criterion is applied.
    """
    if approach not in CRITERIA:
        raise DataError(f"unknown approach {approach!r}")
    our_style = bundle.cluster_set.assignments.get(our_team)
    if our_style is None:
        raise DataError(f"team {our_team!r} has no style assignment")
    belief_full = build_belief(
        bundle.formation_clf,
        bundle.cluster_set,
        history,
        opp_team,
        our_style,
        team_features[opp_team],
    )
    opp_actions = [
        TacticChoice(Formation.parse(f), s) for (f, s) in sorted(belief_full.mass)
    ]
    if our_actions is None:
        our_actions = default_action_set(bundle.cluster_set.k)
    table = build_payoff_table(
        bundle.payoff_net,
        bundle.encoder,
        bundle.strengths,
        our_team,
        opp_team,
        our_actions,
        opp_actions,
        venue,
    )
    belief = belief_over(belief_full, opp_actions)
    if point_mass:
        top = int(np.argmax(np.round(belief, 12)))
        belief = np.zeros_like(belief)
        belief[top] = 1.0
    choice = CRITERIA[approach](table, belief)
    expected = _expected(table.our_payoffs(), belief)
    expected_win = _expected(table.our_win_probs(), belief)
    return Recommendation(
        choice=choice,
        approach=approach,
        expected_payoffs={a.key: float(v) for a, v in zip(table.our_actions, expected)},
        expected_win_probs={
            a.key: float(v) for a, v in zip(table.our_actions, expected_win)
        },
        belief={a.key: float(p) for a, p in zip(opp_actions, belief)},
        venue=venue,
    )


def recommendation_to_json(rec: Recommendation) -> str:
    return json.dumps(rec.to_dict(), indent=2)
