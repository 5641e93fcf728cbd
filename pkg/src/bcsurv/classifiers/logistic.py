"""Logistic regression trained by full-batch gradient descent on mean log loss."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import DimensionMismatch, SingleClassTraining
from ..tabular import FeatureMatrix
from ._util import as_rows

EPS = 1e-12


def sigmoid(z):
    """Logistic function, evaluated without overflow for large |z|."""
    z_arr = np.asarray(z, dtype=np.float64)
    out = np.empty_like(z_arr)
    pos = z_arr >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z_arr[pos]))
    ez = np.exp(z_arr[~pos])
    out[~pos] = ez / (1.0 + ez)
    return float(out) if out.ndim == 0 else out


def _design(values: np.ndarray) -> np.ndarray:
    return np.hstack([np.ones((values.shape[0], 1)), values])


def _check_theta(theta, p: int) -> np.ndarray:
    theta = np.asarray(theta, dtype=np.float64)
    if theta.shape != (p + 1,):
        raise DimensionMismatch(f"theta must have length {p + 1} (bias first), got {theta.shape}")
    return theta


def _loss(theta, Xb, y) -> float:
    p = np.clip(sigmoid(Xb @ theta), EPS, 1.0 - EPS)
    return float(-np.mean(y * np.log(p) + (1.0 - y) * np.log(1.0 - p)))


def _gradient(theta, Xb, y) -> np.ndarray:
    return Xb.T @ (sigmoid(Xb @ theta) - y) / Xb.shape[0]


def lr_loss(theta, m: FeatureMatrix) -> float:
    """Mean negative log-likelihood; probabilities clamped to [1e-12, 1 - 1e-12]."""
    theta = _check_theta(theta, m.p)
    return _loss(theta, _design(m.values), m.labels)


def lr_gradient(theta, m: FeatureMatrix) -> np.ndarray:
    theta = _check_theta(theta, m.p)
    return _gradient(theta, _design(m.values), m.labels)


@dataclass(frozen=True)
class LogisticConfig:
    learning_rate: float = 0.1
    max_iters: int = 5000
    tolerance: float = 1e-7


@dataclass(frozen=True, eq=False)
class LogisticModel:
    theta: np.ndarray
    training_loss_history: tuple[float, ...] = ()
    config: LogisticConfig = field(default_factory=LogisticConfig)

    family = "lr"

    @property
    def n_features(self) -> int:
        return self.theta.shape[0] - 1

    def score(self, X) -> np.ndarray:
        X = as_rows(X, self.n_features)
        return sigmoid(X @ self.theta[1:] + self.theta[0])

    def predict(self, X) -> np.ndarray:
        return (self.score(X) >= 0.5).astype(np.int64)


def lr_fit(train: FeatureMatrix, config: LogisticConfig | None = None, seed: int = 0) -> LogisticModel:
    """Gradient descent from theta = 0.

    Stops after ``max_iters`` steps or as soon as one step improves the loss
    by less than ``tolerance``. ``seed`` is accepted for the uniform fit
    signature; the procedure is deterministic.
    """
    config = config or LogisticConfig()
    if train.n == 0 or len(np.unique(train.labels)) < 2:
        raise SingleClassTraining("logistic regression needs both classes in the training set")
    Xb = _design(train.values)
    y = train.labels.astype(np.float64)
    theta = np.zeros(train.p + 1)
    history = [_loss(theta, Xb, y)]
    for _ in range(config.max_iters):
        theta = theta - config.learning_rate * _gradient(theta, Xb, y)
        history.append(_loss(theta, Xb, y))
        if history[-2] - history[-1] < config.tolerance:
            break
    return LogisticModel(theta, tuple(history), config)
