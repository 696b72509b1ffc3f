"""K-means playing-style clustering with elbow-based k selection."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .domain import DataError, StyleFeatures


@dataclass
class StyleClusterSet:
    k: int
    centroids: np.ndarray  # (k, n_features), in scaled space
    scaler_mean: np.ndarray
    scaler_std: np.ndarray
    assignments: dict[str, int]
    inertia: float

    def scale(self, x: np.ndarray) -> np.ndarray:
        return (x - self.scaler_mean) / self.scaler_std


def _standardize(X: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    std = np.where(std > 0, std, 1.0)  # constant features carry no signal
    return (X - mean) / std, mean, std


def _kmeans_pp_init(X: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = len(X)
    centers = [X[rng.integers(n)]]
    for _ in range(1, k):
        d2 = np.min(
            [np.sum((X - c) ** 2, axis=1) for c in centers], axis=0
        )
        total = d2.sum()
        if total == 0:
            centers.append(X[rng.integers(n)])
            continue
        centers.append(X[rng.choice(n, p=d2 / total)])
    return np.array(centers)


def _nearest(X: np.ndarray, centers: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    d2 = np.sum((X[:, None, :] - centers[None, :, :]) ** 2, axis=2)
    # argmin breaks exact ties toward the lowest index
    return d2.argmin(axis=1), d2


def lloyd(X: np.ndarray, centers: np.ndarray, max_iter: int = 300) -> tuple[np.ndarray, np.ndarray, float, list[float]]:
    """Lloyd iterations from the given centers until assignments stabilize.

    Returns (centers, labels, inertia, inertia trace per iteration).
    """
    labels = None
    trace = []
    for _ in range(max_iter):
        new_labels, d2 = _nearest(X, centers)
        # empty-cluster repair: hand the point farthest from its centroid over
        for j in range(len(centers)):
            if not np.any(new_labels == j):
                worst = int(np.argmax(d2[np.arange(len(X)), new_labels]))
                new_labels[worst] = j
        trace.append(float(np.sum((X - centers[new_labels]) ** 2)))
        if labels is not None and np.array_equal(new_labels, labels):
            break
        labels = new_labels
        centers = np.array(
            [X[labels == j].mean(axis=0) for j in range(len(centers))]
        )
    labels, _ = _nearest(X, centers)
    inertia = float(np.sum((X - centers[labels]) ** 2))
    return centers, labels, inertia, trace


def kmeans(
    features: list[tuple[str, StyleFeatures]],
    k: int,
    seed: int = 0,
    restarts: int = 10,
    max_iter: int = 300,
) -> StyleClusterSet:
    """Best-of-restarts k-means++ over standardized style features."""
    if k < 1:
        raise DataError(f"k must be >= 1, got {k}")
    if k > len(features):
        raise DataError(f"k={k} exceeds the number of teams ({len(features)})")
    ids = [t for t, _ in features]
    X_raw = np.array([f.as_vector() for _, f in features], dtype=float)
    if not np.all(np.isfinite(X_raw)):
        raise DataError("non-finite style features")
    X, mean, std = _standardize(X_raw)

    best = None
    rng = np.random.default_rng(seed)
    for _ in range(restarts):
        centers0 = _kmeans_pp_init(X, k, rng)
        centers, labels, inertia, _ = lloyd(X, centers0, max_iter)
        if best is None or inertia < best[2] - 1e-12:
            best = (centers, labels, inertia)
    centers, labels, inertia = best
    return StyleClusterSet(
        k=k,
        centroids=centers,
        scaler_mean=mean,
        scaler_std=std,
        assignments={t: int(l) for t, l in zip(ids, labels)},
        inertia=inertia,
    )


def elbow_select_k(
    features: list[tuple[str, StyleFeatures]],
    k_max: int,
    seed: int = 0,
) -> int:
    """Pick k by maximal perpendicular distance from the line through the
    inertia curve's endpoints (kneedle rule); exact ties go to the smaller k.

    Endpoints sit on the line by construction, so candidates are the
    interior ks; with k_max = 2 the only usable choice is 2.
    """
    if k_max < 2:
        raise DataError(f"k_max must be >= 2, got {k_max}")
    ks = np.arange(1, k_max + 1)
    inertias = np.array([kmeans(features, int(k), seed).inertia for k in ks])

    x1, y1 = 1.0, inertias[0]
    x2, y2 = float(k_max), inertias[-1]
    norm = np.hypot(x2 - x1, y2 - y1)
    if norm == 0:
        return 2
    dist = np.abs((y2 - y1) * ks - (x2 - x1) * inertias + x2 * y1 - y2 * x1) / norm
    interior = dist[1:-1]
    if len(interior) == 0:
        return 2
    return int(ks[1 + int(np.argmax(np.round(interior, 12)))])


def assign_style(cluster_set: StyleClusterSet, features: StyleFeatures) -> int:
    x = np.asarray(features.as_vector(), dtype=float)
    if not np.all(np.isfinite(x)):
        raise DataError("non-finite style features")
    d2 = np.sum((cluster_set.centroids - cluster_set.scale(x)) ** 2, axis=1)
    return int(np.argmin(np.round(d2, 12)))


def clusters_to_json(cs: StyleClusterSet) -> str:
    return json.dumps(
        {
            "k": cs.k,
            "centroids": cs.centroids.tolist(),
            "scaler": {"mean": cs.scaler_mean.tolist(), "std": cs.scaler_std.tolist()},
            "assignments": cs.assignments,
            "inertia": cs.inertia,
        },
        indent=2,
    )


def clusters_from_json(text: str) -> StyleClusterSet:
    doc = json.loads(text)
    return StyleClusterSet(
        k=doc["k"],
        centroids=np.array(doc["centroids"]),
        scaler_mean=np.array(doc["scaler"]["mean"]),
        scaler_std=np.array(doc["scaler"]["std"]),
        assignments={t: int(v) for t, v in doc["assignments"].items()},
        inertia=doc["inertia"],
    )
