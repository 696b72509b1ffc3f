"""Radial-basis-function network classifier.

Gaussian bumps at k-means centers, a ridge-regressed linear readout to
one-hot targets, and a temperature-scaled softmax turning scores into a
distribution.  Used for both opponent formation prediction and scoreline
transition models.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .clustering import _kmeans_pp_init, lloyd
from .domain import DataError


@dataclass
class RbfClassifier:
    centers: np.ndarray  # (n_centers, n_features)
    sigma: float
    weights: np.ndarray | None  # (n_centers + 1, n_classes); last row is the bias
    vocab: list[str]
    temperature: float = 1.0

    @property
    def n_features(self) -> int:
        return self.centers.shape[1]

    def _design(self, X: np.ndarray) -> np.ndarray:
        d2 = np.sum((X[:, None, :] - self.centers[None, :, :]) ** 2, axis=2)
        phi = np.exp(-d2 / (2.0 * self.sigma**2))
        return np.hstack([phi, np.ones((len(X), 1))])

    def scores(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.n_features:
            raise DataError(
                f"feature dimension {X.shape[1]} != fitted {self.n_features}"
            )
        return self._design(X) @ self.weights

    def predict_proba(self, x: np.ndarray) -> np.ndarray:
        single = np.asarray(x).ndim == 1
        p = _softmax(self.scores(x) / self.temperature)
        return p[0] if single else p

    def predict_label(self, x: np.ndarray) -> str:
        p = np.atleast_2d(self.predict_proba(x))
        return self.vocab[int(np.argmax(np.round(p[0], 12)))]


def _softmax(scores: np.ndarray) -> np.ndarray:
    scores = scores - scores.max(axis=1, keepdims=True)
    e = np.exp(scores)
    return e / e.sum(axis=1, keepdims=True)


def median_center_distance(centers: np.ndarray) -> float:
    if len(centers) < 2:
        return 1.0
    d = np.sqrt(np.sum((centers[:, None, :] - centers[None, :, :]) ** 2, axis=2))
    vals = d[np.triu_indices(len(centers), 1)]
    vals = vals[vals > 0]
    return float(np.median(vals)) if len(vals) else 1.0


def _fit_temperature(scores: np.ndarray, y_idx: np.ndarray) -> float:
    """Pick the softmax temperature minimizing training NLL (grid search)."""
    best_tau, best_nll = 1.0, np.inf
    for tau in np.logspace(-2, 1, 60):
        p = _softmax(scores / tau)
        nll = -np.mean(np.log(p[np.arange(len(y_idx)), y_idx] + 1e-12))
        if nll < best_nll - 1e-12:
            best_tau, best_nll = float(tau), nll
    return best_tau


def train_rbf_classifier(
    X: np.ndarray,
    labels: list[str],
    n_centers: int = 16,
    sigma: float | None = None,
    ridge: float = 1e-3,
    seed: int = 0,
    vocab: list[str] | None = None,
) -> RbfClassifier:
    """Fit centers by k-means, the readout by ridge least squares, then a
    softmax temperature by grid search on training NLL.

    Deterministic given config and seed; training is order-independent
    because both steps treat the rows as a set.
    """
    X = np.asarray(X, dtype=float)
    if len(X) == 0:
        raise DataError("empty training set")
    if len(labels) != len(X):
        raise DataError("labels and rows disagree in length")
    if n_centers > len(X):
        raise DataError(f"n_centers={n_centers} exceeds {len(X)} training rows")

    # Sort rows so center fitting ignores input order.
    order = np.lexsort(X.T[::-1])
    Xs = X[order]

    rng = np.random.default_rng(seed)
    centers0 = _kmeans_pp_init(Xs, n_centers, rng)
    centers, _, _, _ = lloyd(Xs, centers0)

    if sigma is None:
        sigma = median_center_distance(centers)
    if sigma <= 0:
        raise DataError(f"sigma must be positive, got {sigma}")

    if vocab is None:
        vocab = sorted(set(labels))
    elif not set(labels) <= set(vocab):
        raise DataError("labels outside the provided vocabulary")
    cls_idx = {c: i for i, c in enumerate(vocab)}
    y_idx = np.array([cls_idx[lab] for lab in labels])
    Y = np.zeros((len(X), len(vocab)))
    Y[np.arange(len(X)), y_idx] = 1.0

    clf = RbfClassifier(centers=centers, sigma=float(sigma), weights=None, vocab=list(vocab))
    Phi = clf._design(X)
    A = Phi.T @ Phi + ridge * np.eye(Phi.shape[1])
    clf.weights = np.linalg.solve(A, Phi.T @ Y)
    clf.temperature = _fit_temperature(clf.scores(X), y_idx)
    return clf


def rbf_to_dict(clf: RbfClassifier) -> dict:
    return {
        "centers": clf.centers.tolist(),
        "sigma": clf.sigma,
        "weights": clf.weights.tolist(),
        "vocab": clf.vocab,
        "temperature": clf.temperature,
    }


def rbf_from_dict(doc: dict) -> RbfClassifier:
    return RbfClassifier(
        centers=np.array(doc["centers"]),
        sigma=doc["sigma"],
        weights=np.array(doc["weights"]),
        vocab=list(doc["vocab"]),
        temperature=doc.get("temperature", 1.0),
    )


def rbf_to_json(clf: RbfClassifier) -> str:
    return json.dumps(rbf_to_dict(clf), indent=2)


def rbf_from_json(text: str) -> RbfClassifier:
    return rbf_from_dict(json.loads(text))
