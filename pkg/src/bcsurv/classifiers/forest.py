"""Random forest and extra-trees ensembles over the CART kernel."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from ..cart import Leaf, TreeConfig, TreeNode, build_tree, tree_feature_importances, tree_scores
from ..errors import ModelError
from ..tabular import FeatureMatrix
from ._util import as_rows

VARIANTS = ("bootstrap_rf", "extra_trees")


def child_rng(seed: int, index: int) -> np.random.Generator:
    """Independent stream for tree ``index``; depends only on (seed, index)."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


def default_mtry(p: int) -> int:
    return max(1, math.ceil(math.sqrt(p)))


@dataclass(frozen=True, eq=False)
class ForestModel:
    trees: tuple[TreeNode, ...]
    importances: np.ndarray
    variant: str
    seed: int
    n_features: int
    tree_config: TreeConfig

    @property
    def family(self) -> str:
        return "rf" if self.variant == "bootstrap_rf" else "et"

    @property
    def T(self) -> int:
        return len(self.trees)

    def votes(self, X) -> np.ndarray:
        """(T, n) matrix of per-tree hard labels."""
        X = as_rows(X, self.n_features)
        return np.stack([tree_scores(t, X) >= 0.5 for t in self.trees]).astype(np.int64)

    def score(self, X) -> np.ndarray:
        return self.votes(X).mean(axis=0)

    def predict(self, X) -> np.ndarray:
        return (self.score(X) >= 0.5).astype(np.int64)


def rf_importance(trees, n_features: int) -> np.ndarray:
    """Average the per-tree normalized importances over the forest.

    Leaf-only trees contribute zero vectors; the mean is rescaled to unit
    sum so the result stays a distribution whenever any tree split.
    """
    trees = list(trees)
    if not trees:
        raise ModelError("importance needs at least one tree")
    rf = np.mean([tree_feature_importances(t, n_features) for t in trees], axis=0)
    total = rf.sum()
    return rf / total if total > 0 else rf


def _resolve_config(config: TreeConfig | None, p: int, mode: str) -> TreeConfig:
    config = config or TreeConfig()
    if config.feature_subset_size is None:
        config = replace(config, feature_subset_size=default_mtry(p))
    config = replace(config, split_mode=mode)
    config.mtry(p)
    return config


def _grow_forest(train, T, config, seed, bootstrap, jobs):
    if T < 1:
        raise ModelError("a forest needs T >= 1 trees")
    n = train.n

    def one(j: int) -> TreeNode:
        rng = child_rng(seed, j)
        samples = rng.integers(0, n, size=n) if bootstrap else np.arange(n)
        return build_tree(samples, train, config, rng)

    if jobs and jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return tuple(pool.map(one, range(T)))
    return tuple(one(j) for j in range(T))


def rf_fit(
    train: FeatureMatrix,
    T: int = 100,
    tree_config: TreeConfig | None = None,
    seed: int = 0,
    jobs: int = 1,
) -> ForestModel:
    """Breiman forest: bootstrap of size n per tree, best split over
    ceil(sqrt(p)) sampled features unless the config says otherwise."""
    config = _resolve_config(tree_config, train.p, "best")
    trees = _grow_forest(train, T, config, seed, bootstrap=True, jobs=jobs)
    return ForestModel(trees, rf_importance(trees, train.p), "bootstrap_rf", seed, train.p, config)


def et_fit(
    train: FeatureMatrix,
    T: int = 100,
    tree_config: TreeConfig | None = None,
    seed: int = 0,
    jobs: int = 1,
) -> ForestModel:
    """Extremely randomized trees: full sample, one random threshold per sampled feature."""
    config = _resolve_config(tree_config, train.p, "random_threshold")
    trees = _grow_forest(train, T, config, seed, bootstrap=False, jobs=jobs)
    return ForestModel(trees, rf_importance(trees, train.p), "extra_trees", seed, train.p, config)


def forest_score(model: ForestModel, row) -> float:
    """Fraction of trees voting positive for a single row."""
    return float(model.score(as_rows(row, model.n_features))[0])


def forest_has_split(model: ForestModel) -> bool:
    return any(not isinstance(t, Leaf) for t in model.trees)
