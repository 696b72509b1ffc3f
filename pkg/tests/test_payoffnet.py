import numpy as np
import pytest

from tactix.domain import DataError
from tactix.payoffnet import (
    RESULT_CLASSES,
    PayoffNet,
    TrainConfig,
    gradient_check,
    init_net,
    loss_log_csv,
    net_from_json,
    net_to_json,
    predict_batch,
    predict_outcome,
    train_payoff_net,
)


def _separable_rows(n_per=40, seed=0):
    """Three well-separated Gaussian blobs, one per result class."""
    rng = np.random.default_rng(seed)
    centers = np.array([[4.0, 0.0], [0.0, 4.0], [-4.0, -4.0]])
    rows = []
    for cls, c in zip(RESULT_CLASSES, centers):
        for _ in range(n_per):
            rows.append((c + rng.normal(0, 0.3, size=2), cls))
    return rows


class TestTraining:
    def test_separable_accuracy(self):
        rows = _separable_rows()
        net = train_payoff_net(rows, TrainConfig(epochs=100, seed=0))
        correct = 0
        for x, y in rows:
            p = predict_outcome(net, x)
            pred = RESULT_CLASSES[int(np.argmax(p.as_tuple()))]
            correct += pred == y
        assert correct / len(rows) >= 0.95

    def test_single_row_memorized(self):
        rows = [(np.array([1.0, -1.0, 0.5]), "draw")]
        net = train_payoff_net(
            rows, TrainConfig(epochs=500, learning_rate=0.2, weight_decay=0.0, seed=0)
        )
        assert net.loss_log[-1] < 0.01

    def test_loss_decreases(self):
        net = train_payoff_net(_separable_rows(), TrainConfig(epochs=50, seed=1))
        assert net.loss_log[-1] < net.loss_log[0]

    def test_empty_training_set_rejected(self):
        with pytest.raises(DataError):
            train_payoff_net([])

    def test_inconsistent_dimensions_rejected(self):
        with pytest.raises(DataError):
            train_payoff_net([(np.zeros(3), "home"), (np.zeros(4), "draw")])

    def test_row_permutation_invariance(self):
        rows = _separable_rows(n_per=15)
        rng = np.random.default_rng(5)
        perm = rng.permutation(len(rows))
        n1 = train_payoff_net(rows, TrainConfig(epochs=20, seed=2))
        n2 = train_payoff_net([rows[i] for i in perm], TrainConfig(epochs=20, seed=2))
        for w1, w2 in zip(n1.weights, n2.weights):
            assert np.array_equal(w1, w2)

    def test_nonfinite_loss_rejected(self):
        rows = [(np.array([1e4, -1e4]), "home"), (np.array([-1e4, 1e4]), "away")]
        with pytest.raises(DataError):
            train_payoff_net(rows, TrainConfig(epochs=50, learning_rate=1e4, seed=0))


class TestPrediction:
    def test_softmax_normalized(self):
        net = init_net(4, (8, 4), seed=0)
        rng = np.random.default_rng(0)
        for _ in range(200):
            p = predict_outcome(net, rng.normal(size=4))
            assert sum(p.as_tuple()) == pytest.approx(1.0, abs=1e-9)
            assert all(0.0 < v < 1.0 for v in p.as_tuple())

    def test_zero_net_uniform(self):
        net = init_net(4, (8, 4), seed=0)
        net.weights = [np.zeros_like(w) for w in net.weights]
        net.biases = [np.zeros_like(b) for b in net.biases]
        p = predict_outcome(net, np.ones(4))
        assert p.as_tuple() == pytest.approx((1 / 3, 1 / 3, 1 / 3), abs=1e-12)

    def test_logit_translation_invariance(self):
        net = init_net(5, (8, 4), seed=3)
        x = np.linspace(-1, 1, 5)
        before = predict_outcome(net, x).as_tuple()
        net.biases[-1] = net.biases[-1] + 7.5
        after = predict_outcome(net, x).as_tuple()
        assert np.allclose(before, after, atol=1e-9)

    def test_dimension_mismatch_rejected(self):
        net = init_net(4, (8, 4), seed=0)
        with pytest.raises(DataError):
            predict_outcome(net, np.zeros(5))
        with pytest.raises(DataError):
            predict_batch(net, np.zeros((2, 7)))

    def test_batch_matches_single(self):
        net = init_net(6, (8, 4), seed=1)
        rng = np.random.default_rng(2)
        X = rng.normal(size=(10, 6))
        batch = predict_batch(net, X)
        for i in range(10):
            assert np.allclose(batch[i], predict_outcome(net, X[i]).as_tuple())


class TestGradientCheck:
    def test_random_draws_under_tolerance(self):
        rng = np.random.default_rng(0)
        for i in range(20):
            net = init_net(5, (6, 4), seed=i)
            x = rng.normal(size=5)
            y = RESULT_CLASSES[int(rng.integers(3))]
            assert gradient_check(net, x, y, epsilon=1e-5) < 1e-4

    def test_stationary_point_near_zero(self):
        # Zero net outputs uniform probabilities; the output-layer gradient
        # for any one-hot target has magnitude <= 2/3 per entry, and a
        # symmetric input makes hidden gradients vanish entirely.
        net = init_net(3, (4, 4), seed=0)
        net.weights = [np.zeros_like(w) for w in net.weights]
        net.biases = [np.zeros_like(b) for b in net.biases]
        from tactix.payoffnet import _loss_and_grads

        X = np.zeros((1, 3))
        _, gw, gb = _loss_and_grads(net, X, np.array([0]))
        for g in gw:
            assert np.allclose(g, 0.0, atol=1e-12)
        # Output bias gradient is softmax(0) - onehot = (1/3 - 1, 1/3, 1/3).
        assert np.allclose(gb[-1], [1 / 3 - 1, 1 / 3, 1 / 3], atol=1e-12)

    def test_epsilon_bounds(self):
        net = init_net(3, (4, 4), seed=0)
        with pytest.raises(DataError):
            gradient_check(net, np.zeros(3), "home", epsilon=1e-2)


class TestNetSerialization:
    def test_json_round_trip(self):
        net = train_payoff_net(_separable_rows(n_per=10), TrainConfig(epochs=5, seed=0))
        back = net_from_json(net_to_json(net))
        for w1, w2 in zip(net.weights, back.weights):
            assert np.array_equal(w1, w2)
        assert back.loss_log == pytest.approx(net.loss_log)

    def test_loss_log_csv(self):
        net = train_payoff_net(_separable_rows(n_per=5), TrainConfig(epochs=3, seed=0))
        lines = loss_log_csv(net).strip().splitlines()
        assert lines[0] == "epoch,loss"
        assert len(lines) == 4
