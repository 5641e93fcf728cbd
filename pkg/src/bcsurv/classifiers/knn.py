"""k-nearest-neighbour scoring under Euclidean distance."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DimensionMismatch, ModelError
from ..tabular import FeatureMatrix
from ._util import as_rows

_CHUNK = 128


def knn_distance(x, y) -> float:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise DimensionMismatch(f"vectors must share one length, got {x.shape} and {y.shape}")
    return float(np.sqrt(np.sum((x - y) ** 2)))


@dataclass(frozen=True, eq=False)
class KnnModel:
    train_values: np.ndarray
    train_labels: np.ndarray
    k: int = 5

    family = "knn"

    def __post_init__(self):
        n = self.train_values.shape[0]
        if not 1 <= self.k <= n:
            raise ModelError(f"k must lie in [1, {n}], got {self.k}")

    @property
    def n_features(self) -> int:
        return self.train_values.shape[1]

    def neighbors(self, X) -> np.ndarray:
        """Indices of the k nearest training rows, nearest first; equal
        distances resolve to the lower training index."""
        X = as_rows(X, self.n_features)
        out = np.empty((X.shape[0], self.k), dtype=np.int64)
        for start in range(0, X.shape[0], _CHUNK):
            q = X[start:start + _CHUNK]
            d = np.sqrt(np.sum((q[:, None, :] - self.train_values[None, :, :]) ** 2, axis=-1))
            out[start:start + _CHUNK] = np.argsort(d, axis=1, kind="stable")[:, : self.k]
        return out

    def score(self, X) -> np.ndarray:
        return self.train_labels[self.neighbors(X)].mean(axis=1)

    def predict(self, X) -> np.ndarray:
        return (self.score(X) >= 0.5).astype(np.int64)


def knn_fit(train: FeatureMatrix, k: int = 5, seed: int = 0) -> KnnModel:
    return KnnModel(np.array(train.values), np.array(train.labels), k)


def knn_score(model: KnnModel, row) -> float:
    """Positive fraction among the k nearest training rows of one query."""
    return float(model.score(as_rows(row, model.n_features))[0])
