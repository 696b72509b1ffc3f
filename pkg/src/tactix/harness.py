"""Evaluation harness: cross-validated metrics, walk-forward replays, reports."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .clustering import StyleClusterSet, kmeans
from .domain import (
    DataError,
    DEFAULT_INJURY_TIME,
    DEFAULT_REGULATION_MINUTES,
    Formation,
    GameState,
    MatchRecord,
    PlayerProfile,
    StyleFeatures,
    TacticChoice,
    formation_distance,
)
from .inmatch import (
    ActionDecision,
    InMatchStrategy,
    StateModelBank,
    SubstitutionAction,
    action_payoff,
    choose_action,
    slice_match_intervals,
    train_transition_bank,
)
from .opposition import (
    HistoryWindow,
    TacticVocab,
    build_history_features,
    train_formation_classifier,
)
from .payoffnet import TrainConfig, train_payoff_net
from .prematch import (
    FeatureEncoder,
    ModelBundle,
    default_action_set,
    recommend_prematch,
    weighted_payoff,
)
from .strength import FitConfig, fit_strengths, outcome_probs


def closeness(f_recommended: Formation, f_actual: Formation) -> bool:
    """Equal, or one player moved between lines (L1 distance 2)."""
    return formation_distance(f_recommended, f_actual) in (0, 2)


# ---------------------------------------------------------------------------
# Cross-validated classification metrics


@dataclass
class FoldMetrics:
    accuracy: float
    precision: float
    recall: float
    f1: float


def _macro_metrics(y_true: list[str], y_pred: list[str]) -> FoldMetrics:
    classes = sorted(set(y_true) | set(y_pred))
    precisions, recalls, f1s = [], [], []
    for c in classes:
        tp = sum(1 for t, p in zip(y_true, y_pred) if t == c and p == c)
        fp = sum(1 for t, p in zip(y_true, y_pred) if t != c and p == c)
        fn = sum(1 for t, p in zip(y_true, y_pred) if t == c and p != c)
        prec = tp / (tp + fp) if tp + fp else 0.0
        rec = tp / (tp + fn) if tp + fn else 0.0
        f1 = 2 * prec * rec / (prec + rec) if prec + rec else 0.0
        precisions.append(prec)
        recalls.append(rec)
        f1s.append(f1)
    acc = sum(1 for t, p in zip(y_true, y_pred) if t == p) / len(y_true)
    return FoldMetrics(
        accuracy=acc,
        precision=float(np.mean(precisions)),
        recall=float(np.mean(recalls)),
        f1=float(np.mean(f1s)),
    )


def crossval_metrics(
    rows: list[tuple[object, str]],
    model_trainer,
    folds: int = 10,
    train_fraction: float = 0.7,
    seed: int = 0,
) -> dict:
    """``folds`` seeded stratified 70/30 shuffle splits.

    ``model_trainer(train_rows)`` must return a predictor callable
    ``predict(x) -> label``.  A class missing from a training fold triggers
    a stratified resplit; if that is impossible the fold is flagged.
    """
    if len(rows) < folds:
        raise DataError(f"need at least {folds} rows, got {len(rows)}")
    rng = np.random.default_rng(seed)
    labels = [y for _, y in rows]
    by_class: dict[str, list[int]] = {}
    for i, y in enumerate(labels):
        by_class.setdefault(y, []).append(i)

    fold_metrics: list[FoldMetrics] = []
    flags = []
    for f in range(folds):
        train_idx, test_idx = [], []
        for c, idxs in sorted(by_class.items()):
            perm = rng.permutation(len(idxs))
            cut = max(1, int(round(train_fraction * len(idxs)))) if len(idxs) > 1 else 1
            cut = min(cut, len(idxs))
            for j, p in enumerate(perm):
                (train_idx if j < cut else test_idx).append(idxs[p])
        if not test_idx:
            flags.append(f"fold {f}: no test rows after stratification")
            continue
        model = model_trainer([rows[i] for i in sorted(train_idx)])
        y_true = [labels[i] for i in sorted(test_idx)]
        y_pred = [model(rows[i][0]) for i in sorted(test_idx)]
        fold_metrics.append(_macro_metrics(y_true, y_pred))

    return {
        "folds": [vars(m) for m in fold_metrics],
        "mean": {
            k: float(np.mean([getattr(m, k) for m in fold_metrics]))
            for k in ("accuracy", "precision", "recall", "f1")
        }
        if fold_metrics
        else None,
        "flags": flags,
    }


# ---------------------------------------------------------------------------
# Model fitting on a training cut


@dataclass
class FitOptions:
    n_styles: int | None = None  # None: elbow-select on the features
    k_max: int = 8
    n_centers: int = 16
    ridge: float = 1e-3
    payoff: TrainConfig = field(default_factory=TrainConfig)
    strength: FitConfig = field(default_factory=FitConfig)
    seed: int = 0


def fit_bundle(
    matches: list[MatchRecord],
    team_features: dict[str, StyleFeatures],
    options: FitOptions | None = None,
    version: str = "unversioned",
) -> ModelBundle:
    """Fit every pre-match model on the given matches."""
    from .clustering import elbow_select_k

    options = options or FitOptions()
    feats = sorted(team_features.items())
    k = options.n_styles or elbow_select_k(feats, options.k_max, seed=options.seed)
    cluster_set = kmeans(feats, k, seed=options.seed)
    strengths = fit_strengths(matches, options.strength)

    vocab = TacticVocab.from_matches(matches)
    rows = build_formation_rows(matches, cluster_set, vocab)
    formation_clf = train_formation_classifier(
        [(w, f) for w, f in rows],
        n_centers=options.n_centers,
        ridge=options.ridge,
        seed=options.seed,
        vocab=vocab,
    )

    encoder = FeatureEncoder.from_matches(matches, n_styles=k)
    net_rows = []
    for m in matches:
        sp = outcome_probs(strengths, m.home_team, m.away_team)
        net_rows.append((encoder.encode(m.home_tactic, m.away_tactic, sp), m.result))
    net = train_payoff_net(net_rows, options.payoff)

    return ModelBundle(
        strengths=strengths,
        cluster_set=cluster_set,
        formation_clf=formation_clf,
        payoff_net=net,
        encoder=encoder,
        version=version,
        trained_through_round=max(m.round for m in matches),
    )


def build_formation_rows(
    matches: list[MatchRecord],
    cluster_set: StyleClusterSet,
    vocab: TacticVocab,
) -> list[tuple[HistoryWindow, Formation]]:
    """One training row per (match, side): the side's history window against
    the adversary's style, labelled with the formation actually used."""
    ordered = sorted(matches, key=lambda m: m.round)
    rows = []
    for i, m in enumerate(ordered):
        prior = ordered[:i]
        for team in (m.home_team, m.away_team):
            adversary = m.opponent_of(team)
            adv_style = cluster_set.assignments.get(adversary)
            if adv_style is None:
                continue
            window = build_history_features(prior, team, adv_style, cluster_set, vocab)
            rows.append((window, m.tactic_of(team).formation))
    return rows


# ---------------------------------------------------------------------------
# Pre-match replay


def two_proportion_p(p1: float, p2: float, n1: int, n2: int) -> float:
    """Two-sided normal-approximation p-value for a difference in proportions."""
    if n1 == 0 or n2 == 0:
        return 1.0
    pooled = (p1 * n1 + p2 * n2) / (n1 + n2)
    se = math.sqrt(max(pooled * (1 - pooled) * (1 / n1 + 1 / n2), 1e-300))
    z = abs(p1 - p2) / se
    return 2.0 * (1.0 - 0.5 * (1.0 + math.erf(z / math.sqrt(2.0))))


@dataclass
class PrematchReplayReport:
    approach: str
    n_decisions: int = 0
    n_close: int = 0
    n_close_home: int = 0
    n_home: int = 0
    n_close_away: int = 0
    n_away: int = 0
    wdl_when_close: dict = field(default_factory=lambda: {"win": 0, "draw": 0, "loss": 0})
    payoff_deltas: list[float] = field(default_factory=list)
    win_prob_recommended: list[float] = field(default_factory=list)
    win_prob_actual: list[float] = field(default_factory=list)
    provenance: dict = field(default_factory=dict)

    def summary(self) -> dict:
        n = self.n_decisions
        closed = sum(self.wdl_when_close.values())
        p1 = float(np.mean(self.win_prob_recommended)) if n else None
        p2 = float(np.mean(self.win_prob_actual)) if n else None
        return {
            "approach": self.approach,
            "n_decisions": n,
            "closeness_rate_pct": 100.0 * self.n_close / n if n else None,
            "closeness_rate_home_pct": 100.0 * self.n_close_home / self.n_home
            if self.n_home
            else None,
            "closeness_rate_away_pct": 100.0 * self.n_close_away / self.n_away
            if self.n_away
            else None,
            "wdl_when_close_pct": {
                k: 100.0 * v / closed if closed else None
                for k, v in self.wdl_when_close.items()
            },
            "mean_payoff_delta": float(np.mean(self.payoff_deltas)) if n else None,
            "mean_win_prob_recommended": p1,
            "mean_win_prob_actual": p2,
            "win_boost_pct": 100.0 * (p1 - p2) if n else None,
            "two_proportion_p": two_proportion_p(p1, p2, n, n) if n else None,
            "provenance": self.provenance,
        }


def replay_prematch(
    matches: list[MatchRecord],
    bundle: ModelBundle,
    team_features: dict[str, StyleFeatures],
    approach: str = "best_response",
    replay_from_round: int | None = None,
    action_formations: list[str] | None = None,
) -> PrematchReplayReport:
    """Walk-forward replay: recommend for each side of each match using only
    history strictly before the match's round, then compare to the actual
    tactic under the fitted payoff model."""
    if bundle.trained_through_round is None:
        raise DataError("bundle carries no training provenance")
    start = (
        replay_from_round
        if replay_from_round is not None
        else bundle.trained_through_round + 1
    )
    if start <= bundle.trained_through_round:
        raise DataError(
            f"walk-forward violation: replay from round {start} but models "
            f"trained through round {bundle.trained_through_round}"
        )
    ordered = sorted(matches, key=lambda m: m.round)
    report = PrematchReplayReport(
        approach=approach,
        provenance={
            "trained_through_round": bundle.trained_through_round,
            "replay_from_round": start,
            "model_version": bundle.version,
        },
    )

    if action_formations is None:
        action_formations = bundle.encoder.formation_vocab
    our_actions = default_action_set(
        bundle.cluster_set.k, [Formation.parse(f) for f in action_formations]
    )

    for i, m in enumerate(ordered):
        if m.round < start:
            continue
        history = [x for x in ordered[:i] if x.round < m.round]
        for team in (m.home_team, m.away_team):
            side = m.side_of(team)
            actual = m.tactic_of(team)
            acts = our_actions
            if not any(
                a.formation.key == actual.formation.key and a.style == actual.style
                for a in acts
            ):
                acts = acts + [actual]
            rec = recommend_prematch(
                bundle,
                team,
                m.opponent_of(team),
                side,
                history,
                team_features,
                approach=approach,
                our_actions=acts,
            )
            report.n_decisions += 1
            close = closeness(rec.choice.formation, actual.formation)
            report.n_close += int(close)
            if side == "home":
                report.n_home += 1
                report.n_close_home += int(close)
            else:
                report.n_away += 1
                report.n_close_away += int(close)
            if close:
                result = m.result
                key = "draw" if result == "draw" else ("win" if result == side else "loss")
                report.wdl_when_close[key] += 1

            rec_payoff = rec.expected_payoffs[rec.choice.key]
            actual_payoff = rec.expected_payoffs[actual.key]
            report.payoff_deltas.append(rec_payoff - actual_payoff)
            report.win_prob_recommended.append(rec.expected_win_probs[rec.choice.key])
            report.win_prob_actual.append(rec.expected_win_probs[actual.key])
    return report


# ---------------------------------------------------------------------------
# In-match replay


@dataclass
class InmatchReplayReport:
    approach: str
    n_decisions: int = 0
    n_same: int = 0
    n_position_similar: int = 0
    optimized_payoffs: list[float] = field(default_factory=list)
    actual_payoffs: list[float] = field(default_factory=list)
    provenance: dict = field(default_factory=dict)

    def summary(self) -> dict:
        n = self.n_decisions
        return {
            "approach": self.approach,
            "n_decisions": n,
            "same_decision_pct": 100.0 * self.n_same / n if n else None,
            "position_similar_pct": 100.0 * self.n_position_similar / n if n else None,
            "mean_optimized_payoff": float(np.mean(self.optimized_payoffs)) if n else None,
            "mean_actual_payoff": float(np.mean(self.actual_payoffs)) if n else None,
            "provenance": self.provenance,
        }


def _strategy_at(
    m: MatchRecord,
    side: str,
    players: dict[str, PlayerProfile],
    minute: float,
) -> InMatchStrategy:
    """Reconstruct a side's strategy just before the given minute."""
    lineup = list(m.home_lineup if side == "home" else m.away_lineup)
    bench = list(m.home_bench if side == "home" else m.away_bench)
    used = 0
    for s in m.substitutions:
        if s.side == side and s.minute < minute:
            if s.player_out in lineup and s.player_in in bench:
                lineup[lineup.index(s.player_out)] = s.player_in
                bench.remove(s.player_in)
                used += 1
    return InMatchStrategy(
        tactic=m.home_tactic if side == "home" else m.away_tactic,
        lineup=[players[p] for p in lineup],
        bench=[players[p] for p in bench],
        subs_remaining=3 - used,
    )


def _state_at(m: MatchRecord, minute: float) -> GameState:
    h = sum(1 for t, s in m.goal_events if s == "home" and t < minute)
    a = sum(1 for t, s in m.goal_events if s == "away" and t < minute)
    return GameState(h, a, minute)


def replay_inmatch(
    matches: list[MatchRecord],
    bank: StateModelBank,
    strengths,
    players: dict[str, PlayerProfile],
    approach: str = "aggressive",
    replay_from_round: int | None = None,
) -> InmatchReplayReport:
    """At each real substitution decision point, compare the recommended
    action to the one actually taken, under the fitted transition bank."""
    if bank.trained_through_round is None:
        raise DataError("bank carries no training provenance")
    start = (
        replay_from_round
        if replay_from_round is not None
        else bank.trained_through_round + 1
    )
    if start <= bank.trained_through_round:
        raise DataError(
            f"walk-forward violation: replay from round {start} but bank "
            f"trained through round {bank.trained_through_round}"
        )
    report = InmatchReplayReport(
        approach=approach,
        provenance={
            "trained_through_round": bank.trained_through_round,
            "replay_from_round": start,
        },
    )
    total = bank.encoder.total_duration
    for m in sorted(matches, key=lambda x: x.round):
        if m.round < start:
            continue
        sp = outcome_probs(strengths, m.home_team, m.away_team).as_tuple()
        # group the side's substitutions by minute: one decision point each
        points: dict[tuple[str, float], list] = {}
        for s in m.substitutions:
            points.setdefault((s.side, s.minute), []).append(s)
        for (side, minute), subs in sorted(points.items(), key=lambda kv: kv[0][1]):
            home_s = _strategy_at(m, "home", players, minute)
            away_s = _strategy_at(m, "away", players, minute)
            state = _state_at(m, minute)
            remaining = max(total - minute, 0.0)
            decision = choose_action(
                bank, state, side, home_s, away_s, sp, remaining, approach
            )
            actual = SubstitutionAction(
                tuple((s.player_in, s.player_out) for s in subs)
            )
            objective = "advance" if approach == "aggressive" else "hold"
            actual_payoff = action_payoff(
                bank, state, actual, side, home_s, away_s, sp, remaining, objective
            )
            report.n_decisions += 1
            rec_in = set(decision.action.players_in)
            act_in = set(actual.players_in)
            report.n_same += int(rec_in == act_in)
            rec_pos = sorted(players[p].position for p in rec_in)
            act_pos = sorted(players[p].position for p in act_in)
            report.n_position_similar += int(rec_pos == act_pos)
            report.optimized_payoffs.append(decision.payoff)
            report.actual_payoffs.append(actual_payoff)
    return report


# ---------------------------------------------------------------------------
# Transition-model accuracy grid (per-state heatmap)


def state_accuracy_grid(
    bank: StateModelBank,
    matches: list[MatchRecord],
    strengths,
    players: dict[str, PlayerProfile],
    cap: int = 3,
) -> tuple[np.ndarray, np.ndarray]:
    """(accuracy, counts) per scoreline up to cap-cap on the given matches."""
    correct = np.zeros((cap + 1, cap + 1))
    counts = np.zeros((cap + 1, cap + 1))
    total = bank.encoder.total_duration
    from .inmatch import _lineup_contributions_at

    for m in matches:
        sp = outcome_probs(strengths, m.home_team, m.away_team).as_tuple()
        for scoreline, startm, _endm, label in slice_match_intervals(m, total):
            h, a = scoreline
            if h > cap or a > cap:
                continue
            clf = bank.model_for(scoreline)
            x = bank.encoder.encode(
                m.home_tactic,
                m.away_tactic,
                sp,
                total - startm,
                _lineup_contributions_at(m, players, "home", startm),
                _lineup_contributions_at(m, players, "away", startm),
            )
            pred = clf.predict_label(x)
            counts[h, a] += 1
            correct[h, a] += int(pred == label)
    with np.errstate(invalid="ignore"):
        acc = np.where(counts > 0, correct / np.maximum(counts, 1), np.nan)
    return acc, counts


def accuracy_grid_csv(acc: np.ndarray, counts: np.ndarray) -> str:
    lines = ["home_goals,away_goals,accuracy,n"]
    for h in range(acc.shape[0]):
        for a in range(acc.shape[1]):
            val = "" if math.isnan(acc[h, a]) else repr(float(acc[h, a]))
            lines.append(f"{h},{a},{val},{int(counts[h, a])}")
    return "\n".join(lines) + "\n"


def report_to_json(summary: dict) -> str:
    return json.dumps(summary, indent=2, sort_keys=True)


def report_to_csv(summary: dict) -> str:
    """Flat key,value rows for plotting tools."""
    lines = ["metric,value"]

    def walk(prefix: str, obj):
        if isinstance(obj, dict):
            for k in sorted(obj):
                walk(f"{prefix}{k}." if prefix else f"{k}.", obj[k]) if isinstance(
                    obj[k], dict
                ) else lines.append(f"{prefix}{k},{obj[k]}")
        else:
            lines.append(f"{prefix.rstrip('.')},{obj}")

    walk("", summary)
    return "\n".join(lines) + "\n"
