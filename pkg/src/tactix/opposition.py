"""Opponent tactic prediction: history windows, formation classifier, beliefs."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .clustering import StyleClusterSet, assign_style
from .domain import DataError, Formation, MatchRecord, StyleFeatures, TacticChoice
from .rbf import RbfClassifier, rbf_from_dict, rbf_to_dict, train_rbf_classifier

WINDOW_SIZE = 5
UNKNOWN = "unknown"


@dataclass
class TacticVocab:
    """One-hot vocabulary over observed tactic keys plus the unknown pad."""

    tokens: list[str]  # always starts with UNKNOWN

    @classmethod
    def from_matches(cls, matches: list[MatchRecord]) -> "TacticVocab":
        keys = {m.home_tactic.key for m in matches} | {m.away_tactic.key for m in matches}
        return cls(tokens=[UNKNOWN] + sorted(keys))

    @property
    def size(self) -> int:
        return len(self.tokens)

    def encode(self, token: str) -> np.ndarray:
        v = np.zeros(self.size)
        try:
            v[self.tokens.index(token)] = 1.0
        except ValueError:
            v[0] = 1.0  # unseen tactic reads as unknown
        return v


@dataclass
class HistoryWindow:
    """The opponent's last 5 tactic choices against teams of one style,
    one-hot in chronological order, padded at the front with `unknown`."""

    tokens: list[str]
    vector: np.ndarray

    @property
    def size(self) -> int:
        return len(self.tokens)


def build_history_features(
    history: list[MatchRecord],
    opponent: str,
    our_style: int,
    cluster_set: StyleClusterSet,
    vocab: TacticVocab,
) -> HistoryWindow:
    """Most-recent-first scan of the opponent's matches against teams whose
    style cluster equals ours; up to 5 tactic keys, oldest first in the window.
    """
    picked: list[str] = []
    ordered = sorted(history, key=lambda m: m.round, reverse=True)
    for m in ordered:
        if opponent not in (m.home_team, m.away_team):
            continue
        adversary = m.opponent_of(opponent)
        if cluster_set.assignments.get(adversary) != our_style:
            continue
        picked.append(m.tactic_of(opponent).key)
        if len(picked) == WINDOW_SIZE:
            break
    picked.reverse()  # chronological
    tokens = [UNKNOWN] * (WINDOW_SIZE - len(picked)) + picked
    vector = np.concatenate([vocab.encode(t) for t in tokens])
    return HistoryWindow(tokens=tokens, vector=vector)


@dataclass
class FormationClassifier:
    """RBF network over history windows predicting the next formation."""

    rbf: RbfClassifier
    vocab: TacticVocab

    @property
    def formations(self) -> list[str]:
        return self.rbf.vocab


def train_formation_classifier(
    rows: list[tuple[HistoryWindow, Formation]],
    n_centers: int = 16,
    sigma: float | None = None,
    ridge: float = 1e-3,
    seed: int = 0,
    vocab: TacticVocab | None = None,
) -> FormationClassifier:
    if not rows:
        raise DataError("empty formation training set")
    X = np.array([w.vector for w, _ in rows])
    labels = [f.key for _, f in rows]
    n_centers = min(n_centers, len(rows))
    rbf = train_rbf_classifier(
        X, labels, n_centers=n_centers, sigma=sigma, ridge=ridge, seed=seed
    )
    return FormationClassifier(rbf=rbf, vocab=vocab)


def predict_formation(clf: FormationClassifier, window: HistoryWindow) -> dict[str, float]:
    """Distribution over the formation vocabulary; argmax is the prediction."""
    p = clf.rbf.predict_proba(window.vector)
    return {form: float(pi) for form, pi in zip(clf.rbf.vocab, p)}


def predicted_formation(clf: FormationClassifier, window: HistoryWindow) -> str:
    dist = predict_formation(clf, window)
    best = max(dist, key=lambda f: (round(dist[f], 12), -clf.rbf.vocab.index(f)))
    return best


@dataclass
class OppositionBelief:
    """Probability mass over opponent (formation key, style) pairs."""

    mass: dict[tuple[str, int], float]

    def __post_init__(self):
        total = sum(self.mass.values())
        if any(p < -1e-12 for p in self.mass.values()):
            raise DataError("negative belief mass")
        if abs(total - 1.0) > 1e-9:
            raise DataError(f"belief mass sums to {total}, expected 1")

    def support(self) -> list[tuple[str, int]]:
        return [a for a, p in self.mass.items() if p > 0]


def build_belief(
    clf: FormationClassifier,
    cluster_set: StyleClusterSet,
    history: list[MatchRecord],
    opponent: str,
    our_style: int,
    opponent_features: StyleFeatures,
) -> OppositionBelief:
    """Point mass on the opponent's style cluster, times the formation
    distribution from the history-window classifier."""
    style = assign_style(cluster_set, opponent_features)
    window = build_history_features(history, opponent, our_style, cluster_set, clf.vocab)
    form_dist = predict_formation(clf, window)
    return OppositionBelief(
        mass={(form, style): p for form, p in form_dist.items()}
    )


def belief_over(belief: OppositionBelief, actions: list[TacticChoice]) -> np.ndarray:
    """Belief restricted to an action list and renormalized."""
    probs = np.array(
        [belief.mass.get((a.formation.key, a.style), 0.0) for a in actions]
    )
    total = probs.sum()
    if total <= 0:
        raise DataError("belief has zero mass on the opponent action list")
    return probs / total


def formation_clf_to_json(clf: FormationClassifier) -> str:
    return json.dumps(
        {"rbf": rbf_to_dict(clf.rbf), "tactic_vocab": clf.vocab.tokens}, indent=2
    )


def formation_clf_from_json(text: str) -> FormationClassifier:
    doc = json.loads(text)
    return FormationClassifier(
        rbf=rbf_from_dict(doc["rbf"]), vocab=TacticVocab(tokens=doc["tactic_vocab"])
    )
