"""Synthetic minority oversampling for vector-space classifiers."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator

from .rng import split_rng


def smote_oversample(
    vectors: np.ndarray,
    labels: np.ndarray,
    k_neighbors: int = 5,
    seed: int = 0,
    rng: np.random.Generator | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Oversample every minority class up to the majority count.

    Each synthetic row is ``x + lam * (x_nn - x)`` with ``lam`` uniform in
    [0, 1), ``x`` a seeded-random member of the class and ``x_nn`` one of
    its ``k_neighbors`` nearest same-class neighbors by Euclidean distance
    (k clamped to class size - 1). Originals come first in the output,
    synthetics after, grouped by ascending class label; deterministic for
    a fixed seed.
    """
    X = np.asarray(vectors, dtype=np.float64)
    y = np.asarray(labels)
    if X.ndim != 2:
        raise ValueError(f"expected a 2-D feature matrix, got shape {X.shape}")
    if y.shape != (X.shape[0],):
        raise ValueError(f"labels shape {y.shape} does not match {X.shape[0]} rows")
    if k_neighbors < 1:
        raise ValueError(f"k_neighbors must be >= 1, got {k_neighbors}")
    if rng is None:
        rng = split_rng(seed, "smote")

    classes = np.unique(y)
    counts = {c: int(np.sum(y == c)) for c in classes}
    target = max(counts.values())

    new_rows: list[np.ndarray] = []
    new_labels: list = []
    for c in classes:
        deficit = target - counts[c]
        if deficit == 0:
            continue
        if counts[c] < 2:
            raise ValueError(f"class {c}: need at least 2 samples to oversample")
        members = X[y == c]
        order = _neighbor_order(members)
        k = min(k_neighbors, counts[c] - 1)
        for _ in range(deficit):
            base = int(rng.integers(counts[c]))
            nn = int(order[base][int(rng.integers(k))])
            lam = float(rng.random())
            new_rows.append(members[base] + lam * (members[nn] - members[base]))
            new_labels.append(c)

    if not new_rows:
        return X.copy(), y.copy()
    X_aug = np.vstack([X, np.array(new_rows)])
    y_aug = np.concatenate([y, np.array(new_labels, dtype=y.dtype)])
    return X_aug, y_aug


def _neighbor_order(members: np.ndarray) -> list[np.ndarray]:
    """Row i -> same-class neighbor indices by increasing distance, self
    excluded, distance ties broken by index (stable)."""
    sq = np.sum(members**2, axis=1)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (members @ members.T)
    out = []
    for i in range(members.shape[0]):
        order = np.argsort(d2[i], kind="stable")
        out.append(order[order != i])
    return out


class SmoteOversampler(BaseEstimator):
    """Estimator-style wrapper with the ``fit_resample`` convention."""

    def __init__(self, k_neighbors: int = 5, seed: int = 0):
        self.k_neighbors = k_neighbors
        self.seed = seed

    def fit_resample(self, X, y) -> tuple[np.ndarray, np.ndarray]:
        return smote_oversample(X, y, k_neighbors=self.k_neighbors, seed=self.seed)
