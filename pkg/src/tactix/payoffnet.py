"""Feedforward payoff network: tactics + strengths -> (win, draw, loss) probs.

Plain numpy implementation: two ReLU hidden layers, linear output, softmax
cross-entropy trained by mini-batch SGD, with a finite-difference gradient
checker for the backward pass.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .domain import DataError, OutcomeDistribution

RESULT_CLASSES = ("home", "draw", "away")


@dataclass
class TrainConfig:
    hidden_sizes: tuple[int, int] = (32, 16)
    epochs: int = 200
    batch_size: int = 32
    learning_rate: float = 0.05
    weight_decay: float = 1e-2
    seed: int = 0


@dataclass
class PayoffNet:
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    loss_log: list[float] = field(default_factory=list)

    @property
    def n_inputs(self) -> int:
        return self.weights[0].shape[0]

    def forward(self, x: np.ndarray) -> tuple[np.ndarray, list[np.ndarray]]:
        """Logits plus cached layer activations (inputs to each layer)."""
        acts = [np.atleast_2d(x)]
        h = acts[0]
        for i, (W, b) in enumerate(zip(self.weights, self.biases)):
            z = h @ W + b
            h = z if i == len(self.weights) - 1 else np.maximum(z, 0.0)
            acts.append(h)
        return acts[-1], acts

    def probs(self, x: np.ndarray) -> np.ndarray:
        logits, _ = self.forward(x)
        logits = logits - logits.max(axis=1, keepdims=True)
        e = np.exp(logits)
        return e / e.sum(axis=1, keepdims=True)


def init_net(n_inputs: int, hidden_sizes: tuple[int, int], seed: int) -> PayoffNet:
    """Uniform He-style initialization: U(+-sqrt(6 / fan_in)) per layer."""
    rng = np.random.default_rng(seed)
    sizes = [n_inputs, *hidden_sizes, len(RESULT_CLASSES)]
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        limit = np.sqrt(6.0 / fan_in)
        weights.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return PayoffNet(weights=weights, biases=biases)


def _loss_and_grads(net: PayoffNet, X: np.ndarray, y_idx: np.ndarray):
    """Mean cross-entropy and its gradients w.r.t. every parameter."""
    logits, acts = net.forward(X)
    shifted = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    p = e / e.sum(axis=1, keepdims=True)
    n = len(X)
    loss = -np.mean(np.log(p[np.arange(n), y_idx] + 1e-300))

    delta = p.copy()
    delta[np.arange(n), y_idx] -= 1.0
    delta /= n

    gw = [None] * len(net.weights)
    gb = [None] * len(net.biases)
    for i in reversed(range(len(net.weights))):
        gw[i] = acts[i].T @ delta
        gb[i] = delta.sum(axis=0)
        if i > 0:
            delta = (delta @ net.weights[i].T) * (acts[i] > 0)
    return loss, gw, gb


def train_payoff_net(
    rows: list[tuple[np.ndarray, str]],
    config: TrainConfig | None = None,
) -> PayoffNet:
    """Mini-batch SGD on categorical cross-entropy; seed controls both the
    parameter init and the per-epoch shuffles, so training is deterministic
    and independent of the input row order.
    """
    if not rows:
        raise DataError("empty payoff training set")
    config = config or TrainConfig()
    dims = {np.asarray(x).shape for x, _ in rows}
    if len(dims) != 1 or len(next(iter(dims))) != 1:
        raise DataError("inconsistent feature dimensions in training rows")
    X = np.array([np.asarray(x, dtype=float) for x, _ in rows])
    cls = {c: i for i, c in enumerate(RESULT_CLASSES)}
    y_idx = np.array([cls[label] for _, label in rows])

    # Canonical row order so shuffles depend only on the seed, not input order.
    order = np.lexsort(np.vstack([X.T, y_idx])[::-1])
    X, y_idx = X[order], y_idx[order]

    net = init_net(X.shape[1], tuple(config.hidden_sizes), config.seed)
    rng = np.random.default_rng(config.seed + 1)
    n = len(X)
    for _ in range(config.epochs):
        perm = rng.permutation(n)
        epoch_loss = 0.0
        for start in range(0, n, config.batch_size):
            batch = perm[start : start + config.batch_size]
            loss, gw, gb = _loss_and_grads(net, X[batch], y_idx[batch])
            epoch_loss += loss * len(batch)
            # Decoupled weight decay keeps the logged loss (and the gradient
            # checker) a pure cross-entropy quantity.
            for i in range(len(net.weights)):
                net.weights[i] -= config.learning_rate * (
                    gw[i] + config.weight_decay * net.weights[i]
                )
                net.biases[i] -= config.learning_rate * gb[i]
        epoch_loss /= n
        if not np.isfinite(epoch_loss):
            raise DataError("training loss became non-finite (learning rate too high?)")
        net.loss_log.append(epoch_loss)
    return net


def predict_outcome(net: PayoffNet, x: np.ndarray) -> OutcomeDistribution:
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != net.n_inputs:
        raise DataError(f"feature dimension {x.shape[-1]} != fitted {net.n_inputs}")
    p = net.probs(x)[0]
    return OutcomeDistribution(float(p[0]), float(p[1]), float(p[2]))


def predict_batch(net: PayoffNet, X: np.ndarray) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != net.n_inputs:
        raise DataError(f"feature dimension {X.shape[1]} != fitted {net.n_inputs}")
    return net.probs(X)


def gradient_check(net: PayoffNet, x: np.ndarray, y: str, epsilon: float = 1e-5) -> float:
    """Max relative error between analytic and central-difference gradients."""
    if not (0 < epsilon <= 1e-3):
        raise DataError("epsilon must be in (0, 1e-3]")
    X = np.atleast_2d(np.asarray(x, dtype=float))
    y_idx = np.array([RESULT_CLASSES.index(y)])
    _, gw, gb = _loss_and_grads(net, X, y_idx)

    def loss_only():
        loss, _, _ = _loss_and_grads(net, X, y_idx)
        return loss

    worst = 0.0
    params = list(zip(net.weights + net.biases, gw + gb))
    for arr, grad in params:
        it = np.nditer(arr, flags=["multi_index"])
        for _ in it:
            ix = it.multi_index
            orig = arr[ix]
            arr[ix] = orig + epsilon
            up = loss_only()
            arr[ix] = orig - epsilon
            down = loss_only()
            arr[ix] = orig
            numeric = (up - down) / (2 * epsilon)
            analytic = grad[ix]
            denom = max(abs(numeric), abs(analytic), 1e-8)
            worst = max(worst, abs(numeric - analytic) / denom)
    return worst


def net_to_json(net: PayoffNet) -> str:
    return json.dumps(
        {
            "layers": [
                {"weights": W.tolist(), "biases": b.tolist()}
                for W, b in zip(net.weights, net.biases)
            ],
            "loss_log": net.loss_log,
        },
        indent=2,
    )


def net_from_json(text: str) -> PayoffNet:
    doc = json.loads(text)
    return PayoffNet(
        weights=[np.array(l["weights"]) for l in doc["layers"]],
        biases=[np.array(l["biases"]) for l in doc["layers"]],
        loss_log=list(doc.get("loss_log", [])),
    )


def loss_log_csv(net: PayoffNet) -> str:
    lines = ["epoch,loss"] + [f"{i},{loss!r}" for i, loss in enumerate(net.loss_log)]
    return "\n".join(lines) + "\n"
