import collections
import math

import pytest

from tactix.domain import Formation, MatchRecord, TacticChoice
from tactix.harness import FitOptions, fit_bundle
from tactix.inmatch import train_transition_bank
from tactix.synthetic import GeneratorConfig, simulate_league

SPLIT_ROUND = 57  # 20-team, 2-season leagues: train rounds 0..57, replay 58..75


def make_match(
    round=0,
    home="A",
    away="B",
    home_form="4-4-2",
    away_form="4-5-1",
    home_style=0,
    away_style=0,
    goals=(),
    subs=(),
):
    """Minimal valid MatchRecord for unit tests."""
    score = (
        sum(1 for _, s in goals if s == "home"),
        sum(1 for _, s in goals if s == "away"),
    )
    return MatchRecord(
        round=round,
        home_team=home,
        away_team=away,
        home_tactic=TacticChoice(Formation.parse(home_form), home_style),
        away_tactic=TacticChoice(Formation.parse(away_form), away_style),
        goal_events=list(goals),
        final_score=score,
        home_lineup=[f"{home}_p{i}" for i in range(11)],
        away_lineup=[f"{away}_p{i}" for i in range(11)],
        home_bench=[f"{home}_b{i}" for i in range(7)],
        away_bench=[f"{away}_b{i}" for i in range(7)],
        substitutions=list(subs),
    )


def adjusted_rand_index(labels_a: dict, labels_b: dict) -> float:
    keys = sorted(labels_a)
    la = [labels_a[k] for k in keys]
    lb = [labels_b[k] for k in keys]
    n = len(keys)
    cont = collections.Counter(zip(la, lb))
    sum_ij = sum(math.comb(v, 2) for v in cont.values())
    sa = sum(math.comb(v, 2) for v in collections.Counter(la).values())
    sb = sum(math.comb(v, 2) for v in collections.Counter(lb).values())
    expected = sa * sb / math.comb(n, 2)
    maximum = (sa + sb) / 2
    return (sum_ij - expected) / (maximum - expected)


@pytest.fixture(scope="session")
def league7():
    """Tactic-sensitive 20-team, 2-season league (760 matches)."""
    return simulate_league(GeneratorConfig(n_teams=20, seasons=2, seed=7))


@pytest.fixture(scope="session")
def bundle7(league7):
    league, matches = league7
    train = [m for m in matches if m.round <= SPLIT_ROUND]
    return fit_bundle(
        train, league.features, FitOptions(n_styles=4, seed=0), version="t57"
    )


@pytest.fixture(scope="session")
def players7(league7):
    league, _ = league7
    return {p.id: p for squad in league.squads.values() for p in squad}


@pytest.fixture(scope="session")
def bank7(league7, bundle7, players7):
    _, matches = league7
    train = [m for m in matches if m.round <= SPLIT_ROUND]
    return train_transition_bank(
        train, bundle7.strengths, players7, n_styles=4, seed=0
    )


@pytest.fixture(scope="session")
def small_league():
    """8-team league for cheap end-to-end checks."""
    return simulate_league(GeneratorConfig(n_teams=8, seasons=2, seed=3))
