"""In-match stochastic game: transition models, substitution actions, payoffs."""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field, replace

import numpy as np

from .domain import (
    DataError,
    DEFAULT_INJURY_TIME,
    DEFAULT_REGULATION_MINUTES,
    GameState,
    MatchRecord,
    PlayerProfile,
    TacticChoice,
)
from .rbf import RbfClassifier, rbf_from_dict, rbf_to_dict, train_rbf_classifier
from .strength import StrengthModel

TRANSITION_CLASSES = ("home_goal", "away_goal", "no_goal")
SCORELINE_CAP = 3  # per-side goals; beyond this the overflow model answers
MAX_SUBS = 3


@dataclass(frozen=True)
class TransitionDistribution:
    p_home_goal: float
    p_away_goal: float
    p_no_goal: float

    def __post_init__(self):
        for p in (self.p_home_goal, self.p_away_goal, self.p_no_goal):
            if p < -1e-12:
                raise DataError(f"negative transition probability {p}")
        total = self.p_home_goal + self.p_away_goal + self.p_no_goal
        if abs(total - 1.0) > 1e-9:
            raise DataError(f"transition probabilities sum to {total}")

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.p_home_goal, self.p_away_goal, self.p_no_goal)


@dataclass
class InMatchStrategy:
    """One side's live situation: tactic, pitch, bench, subs left."""

    tactic: TacticChoice
    lineup: list[PlayerProfile]
    bench: list[PlayerProfile]
    subs_remaining: int = MAX_SUBS

    def __post_init__(self):
        if len(self.lineup) != 11:
            raise DataError(f"lineup must have 11 players, got {len(self.lineup)}")
        if not (0 <= self.subs_remaining <= MAX_SUBS):
            raise DataError(f"subs_remaining must be in [0, {MAX_SUBS}]")

    def mean_contribution(self) -> float:
        return sum(p.contribution for p in self.lineup) / len(self.lineup)


@dataclass(frozen=True)
class SubstitutionAction:
    """0-3 (player coming on, player coming off) pairs."""

    pairs: tuple[tuple[str, str], ...] = ()

    @property
    def n_subs(self) -> int:
        return len(self.pairs)

    @property
    def players_in(self) -> tuple[str, ...]:
        return tuple(pin for pin, _ in self.pairs)

    def key(self) -> str:
        return ";".join(f"{pin}>{pout}" for pin, pout in self.pairs) or "none"


def more_positive_targets(state: GameState, side: str) -> dict[str, GameState]:
    """advance: one more goal for the side; hold: the state unchanged."""
    if side == "home":
        advance = replace(state, home_goals=state.home_goals + 1)
    else:
        advance = replace(state, away_goals=state.away_goals + 1)
    return {"advance": advance, "hold": state}


def pair_outgoing(incoming: PlayerProfile, lineup: list[PlayerProfile]) -> PlayerProfile:
    """Who comes off for this substitute: the lowest-contribution on-pitch
    player of the same position, else the lowest-contribution outfielder."""
    same = [p for p in lineup if p.position == incoming.position]
    pool = same or [p for p in lineup if p.position != "GK"]
    return min(pool, key=lambda p: (p.contribution, p.id))


def enumerate_actions(bench: list[PlayerProfile], subs_remaining: int) -> list[SubstitutionAction]:
    """All bench subsets of size <= subs_remaining, outgoing players chosen
    by the pairing rule; includes the do-nothing action first."""
    if not (0 <= subs_remaining <= MAX_SUBS):
        raise DataError(f"subs_remaining must be in [0, {MAX_SUBS}]")
    actions = [SubstitutionAction()]
    for k in range(1, subs_remaining + 1):
        for combo in itertools.combinations(bench, k):
            actions.append(SubstitutionAction(tuple((p.id, "") for p in combo)))
    return actions


def apply_action(
    strategy: InMatchStrategy, action: SubstitutionAction
) -> InMatchStrategy:
    """Resolve an action against the strategy: pick outgoing players by the
    pairing rule and return the post-substitution strategy."""
    if action.n_subs > strategy.subs_remaining:
        raise DataError(
            f"action uses {action.n_subs} substitutions, only "
            f"{strategy.subs_remaining} remaining"
        )
    bench_by_id = {p.id: p for p in strategy.bench}
    lineup = list(strategy.lineup)
    bench = list(strategy.bench)
    resolved = []
    seen = set()
    for pin, pout in action.pairs:
        if pin not in bench_by_id:
            raise DataError(f"substitute {pin!r} is not on the bench")
        if pin in seen:
            raise DataError(f"player {pin!r} appears twice in one action")
        seen.add(pin)
        incoming = bench_by_id[pin]
        if pout:
            outgoing = next((p for p in lineup if p.id == pout), None)
            if outgoing is None:
                raise DataError(f"player {pout!r} is not on the pitch")
        else:
            outgoing = pair_outgoing(incoming, lineup)
        lineup[lineup.index(outgoing)] = incoming
        bench.remove(incoming)
        resolved.append((incoming.id, outgoing.id))
    return InMatchStrategy(
        tactic=strategy.tactic,
        lineup=lineup,
        bench=bench,
        subs_remaining=strategy.subs_remaining - action.n_subs,
    )


# ---------------------------------------------------------------------------
# Transition model bank


@dataclass
class TransitionFeatureEncoder:
    """Features for one between-goals interval, both sides' context."""

    n_styles: int
    total_duration: float = DEFAULT_REGULATION_MINUTES + DEFAULT_INJURY_TIME

    def encode(
        self,
        home_tactic: TacticChoice,
        away_tactic: TacticChoice,
        strength_probs: tuple[float, float, float],
        remaining_time: float,
        home_mean_contribution: float,
        away_mean_contribution: float,
    ) -> np.ndarray:
        def style_onehot(s):
            v = np.zeros(self.n_styles)
            if 0 <= s < self.n_styles:
                v[s] = 1.0
            return v

        def formation_vec(f):
            return np.array([f.defenders, f.midfielders, f.forwards]) / 10.0

        return np.concatenate(
            [
                style_onehot(home_tactic.style),
                style_onehot(away_tactic.style),
                formation_vec(home_tactic.formation),
                formation_vec(away_tactic.formation),
                np.array(strength_probs),
                [remaining_time / self.total_duration],
                [home_mean_contribution, away_mean_contribution],
            ]
        )

    def to_dict(self) -> dict:
        return {"n_styles": self.n_styles, "total_duration": self.total_duration}

    @classmethod
    def from_dict(cls, doc: dict) -> "TransitionFeatureEncoder":
        return cls(n_styles=doc["n_styles"], total_duration=doc["total_duration"])


def _bucket(scoreline: tuple[int, int]) -> str:
    h, a = scoreline
    if h <= SCORELINE_CAP and a <= SCORELINE_CAP:
        return f"{h}-{a}"
    return "overflow"


@dataclass
class StateModelBank:
    encoder: TransitionFeatureEncoder
    models: dict[str, RbfClassifier]  # "h-a" buckets plus "overflow"
    trained_through_round: int | None = None

    def model_for(self, scoreline: tuple[int, int]) -> RbfClassifier:
        return self.models.get(_bucket(scoreline), self.models["overflow"])


def slice_match_intervals(
    match: MatchRecord,
    total_duration: float,
) -> list[tuple[tuple[int, int], float, float, str]]:
    """Break a match into between-goal intervals.

    Each tuple is (scoreline at interval start, start minute, end minute,
    label) with label the next event: home_goal, away_goal or no_goal.
    """
    intervals = []
    h = a = 0
    t = 0.0
    for minute, side in match.goal_events:
        label = "home_goal" if side == "home" else "away_goal"
        intervals.append(((h, a), t, float(minute), label))
        if side == "home":
            h += 1
        else:
            a += 1
        t = float(minute)
    intervals.append(((h, a), t, total_duration, "no_goal"))
    return intervals


def _lineup_contributions_at(
    match: MatchRecord, players: dict[str, PlayerProfile], side: str, minute: float
) -> float:
    """Mean contribution of the side's on-pitch players at the given minute."""
    lineup = list(match.home_lineup if side == "home" else match.away_lineup)
    for sub in match.substitutions:
        if sub.side == side and sub.minute <= minute and sub.player_out in lineup:
            lineup[lineup.index(sub.player_out)] = sub.player_in
    vals = [players[p].contribution for p in lineup if p in players]
    return sum(vals) / len(vals) if vals else 0.5


def train_transition_bank(
    matches: list[MatchRecord],
    strengths: StrengthModel,
    players: dict[str, PlayerProfile],
    n_styles: int,
    total_duration: float = DEFAULT_REGULATION_MINUTES + DEFAULT_INJURY_TIME,
    n_centers: int = 24,
    ridge: float = 1e-3,
    seed: int = 0,
    log=None,
) -> StateModelBank:
    """One classifier per capped scoreline plus a shared overflow model.

    Scorelines with no training rows fall back to the overflow model; that
    is logged (via ``log``) rather than fatal.
    """
    encoder = TransitionFeatureEncoder(n_styles=n_styles, total_duration=total_duration)
    rows_by_bucket: dict[str, list] = {}
    all_rows = []
    from .strength import outcome_probs as _op

    for m in matches:
        sp = _op(strengths, m.home_team, m.away_team).as_tuple()
        for scoreline, start, _end, label in slice_match_intervals(m, total_duration):
            x = encoder.encode(
                m.home_tactic,
                m.away_tactic,
                sp,
                remaining_time=total_duration - start,
                home_mean_contribution=_lineup_contributions_at(m, players, "home", start),
                away_mean_contribution=_lineup_contributions_at(m, players, "away", start),
            )
            rows_by_bucket.setdefault(_bucket(scoreline), []).append((x, label))
            all_rows.append((x, label))

    if not all_rows:
        raise DataError("no training intervals could be extracted")

    def fit(rows):
        X = np.array([x for x, _ in rows])
        labels = [lab for _, lab in rows]
        return train_rbf_classifier(
            X,
            labels,
            n_centers=min(n_centers, len(rows)),
            ridge=ridge,
            seed=seed,
            vocab=list(TRANSITION_CLASSES),
        )

    models = {"overflow": fit(all_rows)}
    for h in range(SCORELINE_CAP + 1):
        for a in range(SCORELINE_CAP + 1):
            bucket = f"{h}-{a}"
            rows = rows_by_bucket.get(bucket, [])
            if len(rows) >= 8:
                models[bucket] = fit(rows)
            elif log is not None:
                log(f"scoreline {bucket}: {len(rows)} rows, using overflow model")
    return StateModelBank(
        encoder=encoder,
        models=models,
        trained_through_round=max(m.round for m in matches),
    )


def transition_probs(
    bank: StateModelBank,
    state: GameState,
    home_strategy: InMatchStrategy,
    away_strategy: InMatchStrategy,
    strength_probs: tuple[float, float, float],
    remaining_time: float,
) -> TransitionDistribution:
    if remaining_time < 0:
        raise DataError(f"remaining_time must be >= 0, got {remaining_time}")
    if remaining_time == 0:
        return TransitionDistribution(0.0, 0.0, 1.0)
    clf = bank.model_for(state.scoreline)
    x = bank.encoder.encode(
        home_strategy.tactic,
        away_strategy.tactic,
        strength_probs,
        remaining_time,
        home_strategy.mean_contribution(),
        away_strategy.mean_contribution(),
    )
    p = clf.predict_proba(x)
    by_class = dict(zip(clf.vocab, p))
    return TransitionDistribution(
        float(by_class.get("home_goal", 0.0)),
        float(by_class.get("away_goal", 0.0)),
        float(by_class.get("no_goal", 0.0)),
    )


def action_payoff(
    bank: StateModelBank,
    state: GameState,
    action: SubstitutionAction,
    our_side: str,
    home_strategy: InMatchStrategy,
    away_strategy: InMatchStrategy,
    strength_probs: tuple[float, float, float],
    remaining_time: float,
    objective: str = "advance",
) -> float:
    """Probability of the next event we want, after applying the action.

    advance: our side scores next; hold: no further goal.
    """
    if objective not in ("advance", "hold"):
        raise DataError(f"unknown objective {objective!r}")
    ours = home_strategy if our_side == "home" else away_strategy
    updated = apply_action(ours, action)
    home_s = updated if our_side == "home" else home_strategy
    away_s = updated if our_side == "away" else away_strategy
    dist = transition_probs(bank, state, home_s, away_s, strength_probs, remaining_time)
    if objective == "hold":
        return dist.p_no_goal
    return dist.p_home_goal if our_side == "home" else dist.p_away_goal


@dataclass
class ActionDecision:
    action: SubstitutionAction
    payoff: float
    objective: str
    all_payoffs: list[tuple[SubstitutionAction, float]] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "action": {"pairs": list(map(list, self.action.pairs)), "key": self.action.key()},
            "payoff": self.payoff,
            "objective": self.objective,
            "all_payoffs": [
                {"action": a.key(), "pairs": list(map(list, a.pairs)), "payoff": p}
                for a, p in self.all_payoffs
            ],
        }


def choose_action(
    bank: StateModelBank,
    state: GameState,
    our_side: str,
    home_strategy: InMatchStrategy,
    away_strategy: InMatchStrategy,
    strength_probs: tuple[float, float, float],
    remaining_time: float,
    approach: str = "aggressive",
) -> ActionDecision:
    """Pre-compute every enumerated action's payoff and take the argmax.

    aggressive maximizes the advance probability, reserved the hold
    probability; ties go to fewer substitutions, then enumeration order.
    """
    if approach not in ("aggressive", "reserved"):
        raise DataError(f"unknown approach {approach!r}")
    objective = "advance" if approach == "aggressive" else "hold"
    ours = home_strategy if our_side == "home" else away_strategy
    actions = enumerate_actions(ours.bench, ours.subs_remaining)
    payoffs = [
        action_payoff(
            bank,
            state,
            a,
            our_side,
            home_strategy,
            away_strategy,
            strength_probs,
            remaining_time,
            objective,
        )
        for a in actions
    ]
    best_i = 0
    for i in range(1, len(actions)):
        if payoffs[i] > payoffs[best_i] + 1e-12 or (
            abs(payoffs[i] - payoffs[best_i]) <= 1e-12
            and actions[i].n_subs < actions[best_i].n_subs
        ):
            best_i = i
    return ActionDecision(
        action=actions[best_i],
        payoff=payoffs[best_i],
        objective=objective,
        all_payoffs=list(zip(actions, payoffs)),
    )


def bank_to_json(bank: StateModelBank) -> str:
    return json.dumps(
        {
            "encoder": bank.encoder.to_dict(),
            "models": {k: rbf_to_dict(m) for k, m in bank.models.items()},
            "trained_through_round": bank.trained_through_round,
        },
        indent=2,
    )


def bank_from_json(text: str) -> StateModelBank:
    doc = json.loads(text)
    return StateModelBank(
        encoder=TransitionFeatureEncoder.from_dict(doc["encoder"]),
        models={k: rbf_from_dict(m) for k, m in doc["models"].items()},
        trained_through_round=doc.get("trained_through_round"),
    )
