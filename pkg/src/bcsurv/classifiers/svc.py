"""Linear soft-margin support-vector classifier and the one-vs-one combiner.

Training minimises ``0.5 * ||w||^2 + C * sum(max(0, 1 - t_i (w.x_i + b)))``
with ``t_i`` in {-1, +1} by per-sample subgradient steps over a seeded
shuffle of the data each epoch.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Callable

import numpy as np

from ..errors import ModelError, SingleClassTraining
from ..tabular import FeatureMatrix
from ._util import as_rows


@dataclass(frozen=True)
class SvcConfig:
    C: float = 1.0
    max_epochs: int = 60
    learning_rate: float = 0.5

    def __post_init__(self):
        if self.C <= 0:
            raise ModelError("C must be positive")
        if self.max_epochs < 1:
            raise ModelError("max_epochs must be >= 1")
        if self.learning_rate <= 0:
            raise ModelError("learning_rate must be positive")


def svc_objective(w, b, X, t, C) -> float:
    margins = t * (X @ w + b)
    return float(0.5 * w @ w + C * np.maximum(0.0, 1.0 - margins).sum())


def calibrate(margins, lo: float, hi: float) -> np.ndarray:
    """Map raw margins onto [0, 1], monotone, with ``lo -> 0`` and ``hi -> 1``.

    When the training margins straddle zero the map is piecewise linear with
    the decision boundary pinned at 0.5, so ``score >= 0.5`` reproduces the
    sign rule. Otherwise it is a plain min-max rescale.
    """
    m = np.asarray(margins, dtype=np.float64)
    if hi <= lo:
        return (m >= 0).astype(np.float64)
    if lo < 0.0 < hi:
        out = np.where(m < 0, 0.5 * (m - lo) / -lo, 0.5 + 0.5 * m / hi)
    else:
        out = (m - lo) / (hi - lo)
    return np.clip(out, 0.0, 1.0)


@dataclass(frozen=True, eq=False)
class SvcModel:
    weights: np.ndarray
    bias: float
    config: SvcConfig = field(default_factory=SvcConfig)
    score_calibration: tuple[float, float] = (0.0, 0.0)
    objective_history: tuple[float, ...] = ()

    family = "svc"

    @property
    def n_features(self) -> int:
        return self.weights.shape[0]

    def margin(self, X) -> np.ndarray:
        return as_rows(X, self.n_features) @ self.weights + self.bias

    def score(self, X) -> np.ndarray:
        return calibrate(self.margin(X), *self.score_calibration)

    def predict(self, X) -> np.ndarray:
        return (self.score(X) >= 0.5).astype(np.int64)


def svc_fit(train: FeatureMatrix, config: SvcConfig | None = None, seed: int = 0) -> SvcModel:
    """Subgradient descent on the primal from w = 0, b = 0.

    The step size decays as ``learning_rate / (1 + epoch)``; each per-sample
    step uses the stochastic estimate ``w / (n C) - t_i x_i [margin_i < 1]``
    of the objective gradient scaled by ``1 / (n C)``. The bias is not
    regularised. ``objective_history[e]`` is the objective before epoch e,
    with the final value appended.
    """
    config = config or SvcConfig()
    if train.n == 0 or len(np.unique(train.labels)) < 2:
        raise SingleClassTraining("SVC needs both classes in the training set")
    X = train.values
    t = np.where(train.labels == 1, 1.0, -1.0)
    n, p = X.shape
    lam = 1.0 / (n * config.C)
    rng = np.random.default_rng(seed)
    w = np.zeros(p)
    b = 0.0
    history = []
    for epoch in range(config.max_epochs):
        history.append(svc_objective(w, b, X, t, config.C))
        eta = config.learning_rate / (1.0 + epoch)
        shrink = 1.0 - eta * lam
        for i in rng.permutation(n):
            xi, ti = X[i], t[i]
            violated = ti * (xi @ w + b) < 1.0
            w *= shrink
            if violated:
                w += eta * ti * xi
                b += eta * ti
    history.append(svc_objective(w, b, X, t, config.C))
    margins = X @ w + b
    calibration = (float(margins.min()), float(margins.max()))
    return SvcModel(w, float(b), config, calibration, tuple(history))


def svc_score(model: SvcModel, row) -> float:
    return float(model.score(as_rows(row, model.n_features))[0])


def ovo_ensemble_size(n_classes: int) -> int:
    if n_classes < 2:
        raise ModelError("one-vs-one needs at least two classes")
    return n_classes * (n_classes - 1) // 2


@dataclass(frozen=True, eq=False)
class OneVsOneModel:
    classes: tuple
    pairs: tuple[tuple, ...]
    models: tuple

    def predict(self, X) -> np.ndarray:
        """Majority vote over pairwise models; vote ties go to the earlier class."""
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = X[None, :]
        index = {c: k for k, c in enumerate(self.classes)}
        votes = np.zeros((X.shape[0], len(self.classes)), dtype=np.int64)
        rows = np.arange(X.shape[0])
        for (a, b), model in zip(self.pairs, self.models):
            winner = np.where(model.predict(X) == 1, index[b], index[a])
            np.add.at(votes, (rows, winner), 1)
        return np.asarray(self.classes)[votes.argmax(axis=1)]


def ovo_fit(values, targets, fit_binary: Callable[[FeatureMatrix, int], object], seed: int = 0) -> OneVsOneModel:
    """Train one binary model per unordered class pair.

    For pair (a, b) with a < b the model sees only rows of those classes,
    with b as the positive label.
    """
    values = np.asarray(values, dtype=np.float64)
    targets = np.asarray(targets)
    classes = tuple(np.unique(targets).tolist())
    ovo_ensemble_size(len(classes))
    pairs, models = [], []
    for a, b in combinations(classes, 2):
        mask = (targets == a) | (targets == b)
        fm = FeatureMatrix(values[mask], (targets[mask] == b).astype(np.int64), positive_class_name=str(b))
        pairs.append((a, b))
        models.append(fit_binary(fm, seed))
    return OneVsOneModel(classes, tuple(pairs), tuple(models))
