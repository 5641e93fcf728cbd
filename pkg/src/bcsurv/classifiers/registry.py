"""Uniform entry point over the five families, with typed hyperparameter overrides."""

from __future__ import annotations

from typing import Any

from ..cart import TreeConfig
from ..errors import ConfigError
from ..tabular import FeatureMatrix
from .forest import et_fit, rf_fit
from .knn import knn_fit
from .logistic import LogisticConfig, lr_fit
from .svc import SvcConfig, svc_fit

# fixed report row order
MODEL_ORDER = ("lr", "et", "rf", "knn", "svc")

_FOREST_DEFAULTS = {
    "n_trees": 100,
    "max_depth": 12,
    "min_samples_split": 2,
    "mtry": 0,  # 0: ceil(sqrt(p))
    "min_impurity_decrease": 1e-7,
    "min_samples_leaf": 1,
}

DEFAULTS: dict[str, dict[str, Any]] = {
    "lr": {"learning_rate": 0.1, "max_iters": 5000, "tolerance": 1e-7},
    "et": dict(_FOREST_DEFAULTS),
    "rf": dict(_FOREST_DEFAULTS),
    "knn": {"k": 5},
    "svc": {"C": 1.0, "max_epochs": 60, "learning_rate": 0.5},
}


def resolve_params(name: str, overrides: dict[str, Any] | None = None) -> dict[str, Any]:
    if name not in DEFAULTS:
        raise ConfigError(f"unknown model {name!r}; choose from {', '.join(MODEL_ORDER)}")
    params = dict(DEFAULTS[name])
    for key, value in (overrides or {}).items():
        if key not in params:
            raise ConfigError(f"{name}: unknown hyperparameter {key!r}; known: {', '.join(params)}")
        params[key] = coerce(params[key], value, f"{name}.{key}")
    return params


def coerce(default, value, label: str):
    kind = type(default)
    try:
        if kind is int and isinstance(value, str):
            return int(value)
        return kind(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{label}: expected {kind.__name__}, got {value!r}") from None


def parse_override(text: str) -> tuple[str, str, str]:
    """Split ``model.key=value``."""
    lhs, sep, value = text.partition("=")
    name, dot, key = lhs.partition(".")
    if not sep or not dot or not name or not key:
        raise ConfigError(f"override {text!r} must look like model.key=value")
    return name.strip(), key.strip(), value.strip()


def _tree_config(params) -> TreeConfig:
    return TreeConfig(
        max_depth=params["max_depth"],
        min_samples_split=params["min_samples_split"],
        feature_subset_size=params["mtry"] or None,
        min_impurity_decrease=params["min_impurity_decrease"],
        min_samples_leaf=params["min_samples_leaf"],
    )


def fit_model(name: str, train: FeatureMatrix, seed: int = 0, overrides=None, jobs: int = 1):
    params = resolve_params(name, overrides)
    if name == "lr":
        return lr_fit(train, LogisticConfig(**params), seed)
    if name == "rf":
        return rf_fit(train, params["n_trees"], _tree_config(params), seed, jobs)
    if name == "et":
        return et_fit(train, params["n_trees"], _tree_config(params), seed, jobs)
    if name == "knn":
        return knn_fit(train, params["k"], seed)
    return svc_fit(train, SvcConfig(**params), seed)
