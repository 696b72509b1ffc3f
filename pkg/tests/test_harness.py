import itertools

import numpy as np
import pytest

from tactix.domain import DataError, Formation, formation_distance
from tactix.harness import (
    FitOptions,
    accuracy_grid_csv,
    closeness,
    crossval_metrics,
    fit_bundle,
    replay_inmatch,
    replay_prematch,
    report_to_csv,
    report_to_json,
    state_accuracy_grid,
    two_proportion_p,
)

from conftest import SPLIT_ROUND


class TestCloseness:
    def test_hand_examples(self):
        assert closeness(Formation.parse("4-4-2"), Formation.parse("4-4-2"))
        assert closeness(Formation.parse("4-4-2"), Formation.parse("4-5-1"))
        assert closeness(Formation.parse("4-4-2"), Formation.parse("3-5-2"))

    def test_far_pairs(self):
        assert not closeness(Formation.parse("5-4-1"), Formation.parse("3-4-3"))
        assert not closeness(Formation.parse("4-4-2"), Formation.parse("2-4-4"))

    def test_exhaustive_matches_distance_rule(self):
        forms = [
            Formation(d, m, f)
            for d, m, f in itertools.product(range(1, 10), repeat=3)
            if d + m + f == 10
        ]
        assert len(forms) == 36
        for a in forms:
            for b in forms:
                assert closeness(a, b) == (formation_distance(a, b) in (0, 2))


class TestTwoProportionP:
    def test_no_difference(self):
        assert two_proportion_p(0.5, 0.5, 100, 100) == pytest.approx(1.0)

    def test_large_difference_significant(self):
        assert two_proportion_p(0.9, 0.1, 200, 200) < 1e-10

    def test_empty_sample_uninformative(self):
        assert two_proportion_p(0.9, 0.1, 0, 50) == 1.0

    def test_symmetric_in_arguments(self):
        assert two_proportion_p(0.3, 0.6, 80, 120) == pytest.approx(
            two_proportion_p(0.6, 0.3, 120, 80)
        )


class TestCrossval:
    def _rows(self, n, labeller, seed=0):
        rng = np.random.default_rng(seed)
        xs = rng.normal(size=(n, 2))
        return [(tuple(x), labeller(x)) for x in xs]

    def test_perfect_predictor_scores_one(self):
        rows = self._rows(60, lambda x: "pos" if x[0] > 0 else "neg")

        def trainer(train_rows):
            return lambda x: "pos" if x[0] > 0 else "neg"

        out = crossval_metrics(rows, trainer, folds=10, seed=0)
        assert out["mean"]["accuracy"] == 1.0
        assert out["mean"]["f1"] == 1.0
        assert out["flags"] == []

    def test_constant_predictor_single_class(self):
        rows = [((float(i),), "only") for i in range(30)]

        def trainer(train_rows):
            return lambda x: "only"

        out = crossval_metrics(rows, trainer)
        assert out["mean"]["accuracy"] == 1.0

    def test_chance_level_predictor(self):
        rows = self._rows(400, lambda x: "a" if x[1] > 0 else "b", seed=3)
        rng = np.random.default_rng(9)

        def trainer(train_rows):
            return lambda x: ("a", "b")[int(rng.integers(2))]

        out = crossval_metrics(rows, trainer, folds=10, seed=1)
        assert abs(out["mean"]["accuracy"] - 0.5) < 0.1

    def test_informed_beats_majority(self):
        # 70/30 class skew: majority baseline is ~0.7, an informed model
        # should clear it comfortably.
        rng = np.random.default_rng(5)
        rows = []
        for _ in range(300):
            y = "big" if rng.uniform() < 0.7 else "small"
            x = rng.normal(3.0 if y == "big" else -3.0)
            rows.append(((float(x),), y))

        def majority(train_rows):
            labs = [y for _, y in train_rows]
            top = max(set(labs), key=labs.count)
            return lambda x: top

        def informed(train_rows):
            return lambda x: "big" if x[0] > 0 else "small"

        base = crossval_metrics(rows, majority, seed=2)["mean"]["accuracy"]
        lift = crossval_metrics(rows, informed, seed=2)["mean"]["accuracy"]
        assert base == pytest.approx(0.7, abs=0.05)
        assert lift - base >= 0.25

    def test_too_few_rows_rejected(self):
        with pytest.raises(DataError):
            crossval_metrics([((0.0,), "x")] * 5, lambda r: (lambda x: "x"), folds=10)

    def test_deterministic_under_seed(self):
        rows = self._rows(100, lambda x: "p" if x[0] > 0 else "n", seed=7)
        rng_state = {"n": 0}

        def trainer(train_rows):
            return lambda x: "p" if x[0] > 0 else "n"

        a = crossval_metrics(rows, trainer, seed=4)
        b = crossval_metrics(rows, trainer, seed=4)
        assert a == b


class TestReplayGuards:
    def test_prematch_walk_forward_violation(self, league7, bundle7):
        league, matches = league7
        with pytest.raises(DataError, match="walk-forward"):
            replay_prematch(
                matches,
                bundle7,
                league.features,
                replay_from_round=SPLIT_ROUND - 5,
            )

    def test_inmatch_walk_forward_violation(self, league7, bank7, bundle7, players7):
        _, matches = league7
        with pytest.raises(DataError, match="walk-forward"):
            replay_inmatch(
                matches,
                bank7,
                bundle7.strengths,
                players7,
                replay_from_round=SPLIT_ROUND,
            )

    def test_empty_replay_reports_nothing(self, league7, bundle7):
        league, _ = league7
        report = replay_prematch([], bundle7, league.features)
        s = report.summary()
        assert s["n_decisions"] == 0
        assert s["closeness_rate_pct"] is None
        assert s["mean_payoff_delta"] is None

    def test_provenance_recorded(self, league7, bundle7):
        league, matches = league7
        test = [m for m in matches if SPLIT_ROUND < m.round <= SPLIT_ROUND + 1]
        report = replay_prematch(test, bundle7, league.features)
        assert report.provenance["trained_through_round"] == SPLIT_ROUND
        assert report.provenance["replay_from_round"] == SPLIT_ROUND + 1
        assert report.provenance["model_version"] == bundle7.version


class TestAccuracyGrid:
    def test_shapes_and_counts(self, league7, bank7, bundle7, players7):
        _, matches = league7
        test = [m for m in matches if m.round == SPLIT_ROUND + 1]
        acc, counts = state_accuracy_grid(bank7, test, bundle7.strengths, players7)
        assert acc.shape == counts.shape == (4, 4)
        assert counts.sum() > 0
        mask = counts > 0
        assert np.all((acc[mask] >= 0) & (acc[mask] <= 1))
        assert np.all(np.isnan(acc[~mask]))

    def test_csv_rendering(self):
        acc = np.array([[0.5, np.nan], [1.0, 0.0]])
        counts = np.array([[2, 0], [1, 3]])
        text = accuracy_grid_csv(acc, counts)
        lines = text.strip().split("\n")
        assert lines[0] == "home_goals,away_goals,accuracy,n"
        assert lines[1] == "0,0,0.5,2"
        assert lines[2] == "0,1,,0"
        assert len(lines) == 5


class TestReports:
    def test_json_sorted_and_deterministic(self):
        s = {"b": 1, "a": {"z": 2, "y": 3}}
        out = report_to_json(s)
        assert out == report_to_json({"a": {"y": 3, "z": 2}, "b": 1})
        assert out.index('"a"') < out.index('"b"')

    def test_csv_flattening(self):
        out = report_to_csv({"x": 1, "nested": {"p": 0.5, "q": None}})
        lines = out.strip().split("\n")
        assert lines[0] == "metric,value"
        assert "nested.p,0.5" in lines
        assert "nested.q,None" in lines
        assert "x,1" in lines


class TestFitBundle:
    def test_elbow_path_used_when_k_omitted(self, league7):
        league, matches = league7
        train = [m for m in matches if m.round <= 3]
        bundle = fit_bundle(train, league.features, FitOptions(seed=0), version="v")
        assert bundle.cluster_set.k == 4
        assert bundle.trained_through_round == 3
        assert bundle.version == "v"
