"""End-to-end acceptance gate.

Each test checks one headline property of the engine and prints a single
PASS/FAIL line with the measured quantity, so a bare ``pytest -v`` run
doubles as a scorecard.
"""

import itertools
import math

import numpy as np
import pytest

from tactix.cli import main
from tactix.clustering import elbow_select_k
from tactix.domain import Formation, GameState, TacticChoice, formation_distance
from tactix.harness import (
    build_formation_rows,
    closeness,
    crossval_metrics,
    replay_inmatch,
    replay_prematch,
    two_proportion_p,
)
from tactix.inmatch import enumerate_actions, transition_probs
from tactix.opposition import TacticVocab, predicted_formation, train_formation_classifier
from tactix.payoffnet import (
    TrainConfig,
    gradient_check,
    init_net,
    predict_batch,
    train_payoff_net,
)
from tactix.prematch import PayoffTable, best_response, minmax, spiteful
from tactix.strength import outcome_probs, poisson_grid_probs
from tactix.synthetic import (
    GeneratorConfig,
    analytic_outcome_probs,
    lineup_for,
    simulate_league,
)

from conftest import SPLIT_ROUND, adjusted_rand_index


def _verdict(name: str, ok: bool, detail: str):
    print(f"{'PASS' if ok else 'FAIL'}: {name} ({detail})")
    assert ok, f"{name}: {detail}"


def _bench(n):
    from tactix.domain import PlayerProfile

    return [PlayerProfile(f"b{i}", "MID", 0.5) for i in range(n)]


def test_action_space_count():
    n64 = len(enumerate_actions(_bench(7), 3))
    ok = n64 == 64
    for b in range(8):
        for s in range(4):
            expect = sum(math.comb(b, k) for k in range(s + 1))
            ok = ok and len(enumerate_actions(_bench(b), s)) == expect
    _verdict("action space", ok, f"bench=7 subs=3 gives {n64} actions, binomial grid exact")


def test_optimizer_oracle_equivalence():
    rng = np.random.default_rng(0)
    forms = [Formation.parse(f) for f in ("4-4-2", "4-5-1", "3-5-2", "4-3-3", "5-4-1")]
    mismatches = 0
    n_tables = 1000
    for t in range(n_tables):
        n_ours = int(rng.integers(2, 6))
        n_theirs = int(rng.integers(2, 6))
        ours = [TacticChoice(forms[i % 5], i // 5) for i in range(n_ours)]
        theirs = [TacticChoice(forms[i % 5], i // 5) for i in range(n_theirs)]
        cells = rng.dirichlet(np.ones(3), size=(n_ours, n_theirs))
        side = "home" if rng.uniform() < 0.5 else "away"
        table = PayoffTable(ours, theirs, cells, side)
        belief = rng.dirichlet(np.ones(n_theirs))

        us, them = (0, 2) if side == "home" else (2, 0)
        our_u = 2.0 * cells[:, :, us] + cells[:, :, 1]
        opp_u = 2.0 * cells[:, :, them] + cells[:, :, 1]
        # first-index tie-break, same as the optimizers
        want = {
            "best_response": ours[int(np.argmax(our_u @ belief))],
            "spiteful": ours[int(np.argmin(opp_u @ belief))],
            "minmax": ours[int(np.argmax((our_u - opp_u) @ belief))],
        }
        got = {
            "best_response": best_response(table, belief),
            "spiteful": spiteful(table, belief),
            "minmax": minmax(table, belief),
        }
        for name in want:
            if got[name] is not want[name]:
                mismatches += 1
    _verdict(
        "optimizer oracle",
        mismatches == 0,
        f"{n_tables} random tables x 3 criteria, {mismatches} argmax mismatches",
    )


def _kink_safe_sample(net, rng, margin=1e-3):
    """A random input whose hidden pre-activations all sit clear of the
    relu hinge, where central differences are meaningless."""
    for _ in range(200):
        x = rng.normal(size=net.n_inputs)
        h = np.atleast_2d(x)
        ok = True
        for i, (W, b) in enumerate(zip(net.weights, net.biases)):
            z = h @ W + b
            if i < len(net.weights) - 1 and float(np.min(np.abs(z))) < margin:
                ok = False
                break
            h = np.maximum(z, 0.0)
        if ok:
            return x
    raise AssertionError("could not find a kink-safe sample")


def test_gradient_correctness():
    rng = np.random.default_rng(1)
    worst = 0.0
    draws = 20
    for d in range(draws):
        n_in = int(rng.integers(3, 12))
        hidden = (int(rng.integers(2, 10)), int(rng.integers(2, 10)))
        net = init_net(n_in, hidden, seed=int(rng.integers(10_000)))
        x = _kink_safe_sample(net, rng)
        y = ("home", "draw", "away")[int(rng.integers(3))]
        worst = max(worst, gradient_check(net, x, y))
    _verdict("gradient check", worst < 1e-4, f"max relative error {worst:.3e} over {draws} draws")


def test_distribution_sanity(league7, bundle7, bank7):
    league, _ = league7
    rng = np.random.default_rng(2)
    worst = 0.0

    for _ in range(1000):
        lam_h, lam_a = rng.uniform(0.0, 6.0, size=2)
        d = poisson_grid_probs(lam_h, lam_a, int(rng.integers(5, 15)))
        worst = max(worst, abs(sum(d.as_tuple()) - 1.0))

    teams = league.teams
    for _ in range(1000):
        h, a = rng.choice(teams, size=2, replace=False)
        d = outcome_probs(bundle7.strengths, str(h), str(a))
        worst = max(worst, abs(sum(d.as_tuple()) - 1.0))

    X = rng.normal(size=(1000, bundle7.payoff_net.n_inputs))
    worst = max(worst, float(np.max(np.abs(predict_batch(bundle7.payoff_net, X).sum(axis=1) - 1.0))))

    lineup, bench = lineup_for(league.squads["T00"], Formation.parse("4-4-2"))
    lineup2, bench2 = lineup_for(league.squads["T01"], Formation.parse("4-5-1"))
    from tactix.inmatch import InMatchStrategy

    for _ in range(1000):
        hs = InMatchStrategy(TacticChoice(Formation.parse("4-4-2"), int(rng.integers(4))), lineup, bench)
        as_ = InMatchStrategy(TacticChoice(Formation.parse("4-5-1"), int(rng.integers(4))), lineup2, bench2)
        state = GameState(int(rng.integers(4)), int(rng.integers(4)), float(rng.uniform(0, 90)))
        sp = tuple(rng.dirichlet(np.ones(3)))
        t = transition_probs(bank7, state, hs, as_, sp, float(rng.uniform(0.1, 94.0)))
        worst = max(worst, abs(sum(t.as_tuple()) - 1.0))

    _verdict("distribution sanity", worst <= 1e-9, f"worst |sum-1| = {worst:.2e} over 4x1000 draws")


def test_planted_cluster_recovery(league7, bundle7):
    league, _ = league7
    feats = sorted(league.features.items())
    k = elbow_select_k(feats, 8, seed=0)
    ari = adjusted_rand_index(bundle7.cluster_set.assignments, league.truth.styles)
    _verdict("cluster recovery", k == 4 and ari >= 0.9, f"elbow k={k}, ARI={ari:.3f}")


def test_strength_recovery(league7, bundle7):
    league, _ = league7
    model = bundle7.strengths
    teams = league.teams
    # The attack/defense gauge leaves the fitted log-defense block shifted
    # by a constant, so correlate each parameter block on its own.
    corr_a = float(
        np.corrcoef(
            [math.log(model.attack[t]) for t in teams],
            [math.log(league.truth.attack[t]) for t in teams],
        )[0, 1]
    )
    corr_d = float(
        np.corrcoef(
            [math.log(model.defense[t]) for t in teams],
            [math.log(league.truth.defense[t]) for t in teams],
        )[0, 1]
    )
    corr = min(corr_a, corr_d)

    # independent Poisson-grid oracle
    worst = 0.0
    for h, a in itertools.islice(itertools.permutations(teams, 2), 50):
        lam_h, lam_a = model.rates(h, a)
        goals = np.arange(model.max_goals + 1)
        ph = np.array([math.exp(-lam_h) * lam_h**k / math.factorial(k) for k in goals])
        pa = np.array([math.exp(-lam_a) * lam_a**k / math.factorial(k) for k in goals])
        grid = np.outer(ph, pa)
        total = grid.sum()
        ref = (
            np.tril(grid, -1).sum() / total,
            np.trace(grid) / total,
            np.triu(grid, 1).sum() / total,
        )
        got = outcome_probs(model, h, a).as_tuple()
        worst = max(worst, max(abs(x - y) for x, y in zip(got, ref)))
    _verdict(
        "strength recovery",
        corr >= 0.9 and worst <= 1e-12,
        f"log-param corr attack {corr_a:.3f} / defense {corr_d:.3f}, "
        f"grid oracle max err {worst:.1e}",
    )


def test_formation_predictor_lift(league7, bundle7):
    _, matches = league7
    train = [m for m in matches if m.round <= SPLIT_ROUND]
    vocab = TacticVocab.from_matches(train)
    rows = build_formation_rows(train, bundle7.cluster_set, vocab)
    labelled = [(w, f.key) for w, f in rows]

    def model_trainer(train_rows):
        clf = train_formation_classifier(
            [(w, Formation.parse(k)) for w, k in train_rows],
            n_centers=16,
            seed=0,
            vocab=vocab,
        )
        return lambda w: predicted_formation(clf, w)

    def majority_trainer(train_rows):
        labs = [k for _, k in train_rows]
        top = max(sorted(set(labs)), key=labs.count)
        return lambda w: top

    lift = crossval_metrics(labelled, model_trainer, folds=10, seed=0)["mean"]["accuracy"]
    base = crossval_metrics(labelled, majority_trainer, folds=10, seed=0)["mean"]["accuracy"]
    _verdict(
        "formation predictor lift",
        lift >= base + 0.10,
        f"model {lift:.3f} vs majority {base:.3f} over 10 seeded 70/30 splits",
    )


def test_payoff_net_oracle_error():
    cfg = GeneratorConfig(n_teams=20, seasons=6, seed=11, scoreline_boost=1.0)
    league, matches = simulate_league(cfg)
    split = 189
    train = [m for m in matches if m.round <= split]
    test = [m for m in matches if m.round > split]

    from tactix.prematch import FeatureEncoder
    from tactix.strength import fit_strengths

    strengths = fit_strengths(train)
    encoder = FeatureEncoder.from_matches(train, n_styles=cfg.n_styles)
    net_rows = [
        (
            encoder.encode(m.home_tactic, m.away_tactic, outcome_probs(strengths, m.home_team, m.away_team)),
            m.result,
        )
        for m in train
    ]
    net = train_payoff_net(net_rows, TrainConfig(epochs=500, learning_rate=0.05, weight_decay=0.01))

    X = np.array(
        [
            encoder.encode(m.home_tactic, m.away_tactic, outcome_probs(strengths, m.home_team, m.away_team))
            for m in test
        ]
    )
    pred = predict_batch(net, X)[:, 0]
    truth = np.array(
        [
            analytic_outcome_probs(league.truth, m.home_team, m.away_team, m.home_tactic, m.away_tactic).p_home
            for m in test
        ]
    )
    mae = float(np.mean(np.abs(pred - truth)))
    _verdict("payoff net oracle", mae <= 0.08, f"held-out p_home MAE {mae:.4f} on {len(test)} fixtures")


def test_replay_direction(league7, bundle7, bank7, players7):
    league, matches = league7
    test = [m for m in matches if m.round > SPLIT_ROUND]

    pre = replay_prematch(test, bundle7, league.features, approach="best_response")
    s = pre.summary()
    delta = s["mean_payoff_delta"]
    p = two_proportion_p(
        s["mean_win_prob_recommended"], s["mean_win_prob_actual"], pre.n_decisions, pre.n_decisions
    )

    inm = replay_inmatch(test, bank7, bundle7.strengths, players7, approach="aggressive")
    dominance = all(
        o >= a - 1e-12 for o, a in zip(inm.optimized_payoffs, inm.actual_payoffs)
    )
    si = inm.summary()
    ok = delta > 0 and p < 0.05 and dominance and si["mean_optimized_payoff"] >= si["mean_actual_payoff"]
    _verdict(
        "replay direction",
        ok,
        f"prematch delta {delta:.3f} (p={p:.1e}, n={pre.n_decisions}); inmatch "
        f"{si['mean_optimized_payoff']:.4f} >= {si['mean_actual_payoff']:.4f} "
        f"on {inm.n_decisions} decisions, pointwise dominance {dominance}",
    )


def test_closeness_metric():
    ok = closeness(Formation.parse("4-4-2"), Formation.parse("4-5-1"))
    forms = [
        Formation(d, m, f)
        for d, m, f in itertools.product(range(1, 10), repeat=3)
        if d + m + f == 10
    ]
    n_close = 0
    for a in forms:
        ok = ok and closeness(a, a)  # reflexive
        for b in forms:
            c = closeness(a, b)
            ok = ok and c == closeness(b, a)  # symmetric
            ok = ok and c == (formation_distance(a, b) in (0, 2))
            n_close += int(c)
    _verdict("closeness metric", ok, f"(4-4-2,4-5-1) close; 36x36 table, {n_close} close pairs")


def test_pipeline_determinism(tmp_path):
    outputs = []
    for run in ("a", "b"):
        d = tmp_path / run
        assert main(["gen", "--teams", "8", "--seasons", "1", "--seed", "3",
                     "--data-dir", str(d)]) == 0
        assert main(["fit", "--styles", "4", "--seed", "0", "--version", "v1",
                     "--data-dir", str(d)]) == 0
        assert main(["replay", "--stage", "prematch", "--split-round", "10",
                     "--seed", "0", "--data-dir", str(d)]) == 0
        blob = b"".join(
            (d / name).read_bytes()
            for name in (
                "fixtures.jsonl",
                "models/v1/strengths.json",
                "models/v1/clusters.json",
                "models/v1/formation_clf.json",
                "models/v1/payoff_net.json",
                "models/v1/bank.json",
                "reports/replay_prematch_best_response.json",
                "reports/replay_prematch_best_response.csv",
            )
        )
        outputs.append(blob)
    _verdict(
        "pipeline determinism",
        outputs[0] == outputs[1],
        "gen -> fit -> replay byte-identical across repeated seeded runs",
    )
