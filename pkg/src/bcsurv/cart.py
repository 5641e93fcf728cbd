"""Binary CART induction with Gini impurity.

Shared by the random-forest and extra-trees ensembles. Routing is fixed:
``x[feature] <= threshold`` goes left, everything else goes right.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, NamedTuple, Union

import numpy as np

from .errors import DimensionMismatch, EmptyNode, EmptySampleSet, ModelError
from .tabular import FeatureMatrix

SPLIT_MODES = ("best", "random_threshold")

# gains closer than this are treated as ties (lowest feature, then lowest threshold)
_TIE_EPS = 1e-12


@dataclass(frozen=True)
class Leaf:
    class_counts: tuple[int, int]

    @property
    def n_samples(self) -> int:
        return self.class_counts[0] + self.class_counts[1]

    @property
    def score(self) -> float:
        return self.class_counts[1] / self.n_samples


@dataclass(frozen=True)
class Split:
    feature_index: int
    threshold: float
    left: "TreeNode"
    right: "TreeNode"
    impurity_decrease: float
    n_samples: int


TreeNode = Union[Split, Leaf]


@dataclass(frozen=True)
class TreeConfig:
    max_depth: int = 12
    min_samples_split: int = 2
    feature_subset_size: int | None = None  # None: every feature
    split_mode: str = "best"
    min_impurity_decrease: float = 1e-7
    min_samples_leaf: int = 1

    def __post_init__(self):
        if self.max_depth < 1:
            raise ModelError("max_depth must be >= 1")
        if self.min_samples_split < 2:
            raise ModelError("min_samples_split must be >= 2")
        if self.min_samples_leaf < 1:
            raise ModelError("min_samples_leaf must be >= 1")
        if self.split_mode not in SPLIT_MODES:
            raise ModelError(f"split_mode must be one of {SPLIT_MODES}")
        if self.feature_subset_size is not None and self.feature_subset_size < 1:
            raise ModelError("feature_subset_size must be >= 1")
        if self.min_impurity_decrease < 0:
            raise ModelError("min_impurity_decrease must be >= 0")

    def mtry(self, p: int) -> int:
        k = p if self.feature_subset_size is None else self.feature_subset_size
        if k > p:
            raise ModelError(f"feature_subset_size {k} exceeds feature count {p}")
        return k


class SplitProposal(NamedTuple):
    feature_index: int
    threshold: float
    impurity_decrease: float


def gini_impurity(class_counts) -> float:
    counts = [int(c) for c in class_counts]
    if any(c < 0 for c in counts):
        raise EmptyNode("class counts must be non-negative")
    n = sum(counts)
    if n == 0:
        raise EmptyNode("gini impurity of an empty node is undefined")
    return 1.0 - sum((c / n) ** 2 for c in counts)


def _sample_features(p: int, k: int, rng: np.random.Generator) -> np.ndarray:
    if k == p:
        return np.arange(p)
    return np.sort(rng.choice(p, size=k, replace=False))


def _pick(gain: np.ndarray, thresholds: np.ndarray, feats: np.ndarray, min_decrease: float):
    """Choose from a (candidates x features) gain grid whose rows are in
    ascending threshold order. Invalid cells hold -inf."""
    best = gain.max() if gain.size else -np.inf
    if best == -np.inf or best < min_decrease - _TIE_EPS:
        return None
    # column-major scan: lowest feature first, then lowest threshold
    flat = np.flatnonzero((gain >= best - _TIE_EPS).T)
    col, row = divmod(int(flat[0]), gain.shape[0])
    return SplitProposal(int(feats[col]), float(thresholds[row, col]), float(gain[row, col]))


def _best_split(x: np.ndarray, y: np.ndarray, feats: np.ndarray, config: TreeConfig):
    n = y.shape[0]
    order = np.argsort(x, axis=0, kind="stable")
    xs = np.take_along_axis(x, order, axis=0)
    ys = y[order]
    pos_total = int(y.sum())
    parent = 1.0 - ((pos_total / n) ** 2 + ((n - pos_total) / n) ** 2)

    pl = np.cumsum(ys, axis=0)[:-1].astype(np.float64)
    nl = np.arange(1, n, dtype=np.float64)[:, None]
    nr = n - nl
    ql = nl - pl
    pr = pos_total - pl
    qr = nr - pr
    weighted = 1.0 - ((pl * pl + ql * ql) / nl + (pr * pr + qr * qr) / nr) / n
    gain = parent - weighted

    lo, hi = xs[:-1], xs[1:]
    valid = (hi > lo) & (nl >= config.min_samples_leaf) & (nr >= config.min_samples_leaf)
    gain = np.where(valid, gain, -np.inf)
    mid = (lo + hi) / 2.0
    # adjacent doubles can round the midpoint up onto hi, which would route hi left
    mid = np.where(mid >= hi, lo, mid)
    return _pick(gain, mid, feats, config.min_impurity_decrease)


def _random_split(x: np.ndarray, y: np.ndarray, feats: np.ndarray, config: TreeConfig, rng):
    n = y.shape[0]
    k = len(feats)
    pos_total = int(y.sum())
    parent = 1.0 - ((pos_total / n) ** 2 + ((n - pos_total) / n) ** 2)
    gain = np.full((1, k), -np.inf)
    thresholds = np.zeros((1, k))
    lo_all = x.min(axis=0)
    hi_all = x.max(axis=0)
    for j in range(k):
        lo, hi = lo_all[j], hi_all[j]
        if not hi > lo:
            continue
        t = rng.uniform(lo, hi)
        if t >= hi:
            t = lo
        left = x[:, j] <= t
        nl = int(left.sum())
        nr = n - nl
        if nl < config.min_samples_leaf or nr < config.min_samples_leaf:
            continue
        pl = int(y[left].sum())
        ql, pr = nl - pl, pos_total - pl
        qr = nr - pr
        weighted = 1.0 - ((pl * pl + ql * ql) / nl + (pr * pr + qr * qr) / nr) / n
        gain[0, j] = parent - weighted
        thresholds[0, j] = t
    return _pick(gain, thresholds, feats, config.min_impurity_decrease)


def _propose(X, y, samples, config, rng):
    p = X.shape[1]
    feats = _sample_features(p, config.mtry(p), rng)
    x = X[np.ix_(samples, feats)]
    ys = y[samples]
    if config.split_mode == "best":
        return _best_split(x, ys, feats, config)
    return _random_split(x, ys, feats, config, rng)


def propose_split(samples, m: FeatureMatrix, config: TreeConfig, rng: np.random.Generator):
    """Best Gini split over a random feature subset, or None.

    In ``best`` mode every midpoint between consecutive distinct values is a
    candidate; in ``random_threshold`` mode each sampled feature gets one
    uniform threshold in (min, max). A split is returned only when its
    impurity decrease reaches ``config.min_impurity_decrease``; with 0 this
    admits zero-gain splits, which XOR-like data needs at the root.
    """
    samples = np.asarray(samples, dtype=np.int64)
    if samples.size < max(config.min_samples_split, 1):
        return None
    return _propose(m.values, m.labels, samples, config, rng)


def build_tree(samples, m: FeatureMatrix, config: TreeConfig, rng: np.random.Generator) -> TreeNode:
    """Grow a tree top-down on the rows ``samples`` (repeats allowed)."""
    samples = np.asarray(samples, dtype=np.int64)
    if samples.size == 0:
        raise EmptySampleSet("cannot build a tree on an empty sample set")
    X, y = m.values, m.labels
    config.mtry(X.shape[1])

    def grow(idx: np.ndarray, depth: int) -> TreeNode:
        n = idx.shape[0]
        pos = int(y[idx].sum())
        counts = (n - pos, pos)
        if depth >= config.max_depth or n < config.min_samples_split or pos in (0, n):
            return Leaf(counts)
        prop = _propose(X, y, idx, config, rng)
        if prop is None:
            return Leaf(counts)
        go_left = X[idx, prop.feature_index] <= prop.threshold
        left = grow(idx[go_left], depth + 1)
        right = grow(idx[~go_left], depth + 1)
        return Split(prop.feature_index, prop.threshold, left, right, prop.impurity_decrease, n)

    return grow(samples, 0)


def predict_tree(root: TreeNode, row, n_features: int | None = None) -> tuple[int, float]:
    """Route one row to its leaf; returns (label, positive fraction at the leaf).

    Label ties at 0.5 go to the positive class.
    """
    row = np.asarray(row, dtype=np.float64)
    if row.ndim != 1 or (n_features is not None and row.shape[0] != n_features):
        raise DimensionMismatch(f"expected a row of length {n_features}, got shape {row.shape}")
    node = root
    while isinstance(node, Split):
        if node.feature_index >= row.shape[0]:
            raise DimensionMismatch(f"row has {row.shape[0]} features; tree splits on {node.feature_index}")
        node = node.left if row[node.feature_index] <= node.threshold else node.right
    score = node.score
    return int(score >= 0.5), score


def tree_scores(root: TreeNode, X: np.ndarray) -> np.ndarray:
    """Leaf positive fraction for every row of ``X``."""
    X = np.asarray(X, dtype=np.float64)
    out = np.empty(X.shape[0])
    stack = [(root, np.arange(X.shape[0]))]
    while stack:
        node, idx = stack.pop()
        if isinstance(node, Leaf):
            out[idx] = node.score
            continue
        go_left = X[idx, node.feature_index] <= node.threshold
        stack.append((node.left, idx[go_left]))
        stack.append((node.right, idx[~go_left]))
    return out


def iter_nodes(root: TreeNode) -> Iterator[TreeNode]:
    stack = [root]
    while stack:
        node = stack.pop()
        yield node
        if isinstance(node, Split):
            stack.append(node.right)
            stack.append(node.left)


def tree_height(root: TreeNode) -> int:
    if isinstance(root, Leaf):
        return 0
    return 1 + max(tree_height(root.left), tree_height(root.right))


def tree_feature_importances(root: TreeNode, n_features: int) -> np.ndarray:
    """Per-feature share of the total weighted impurity decrease.

    Each split contributes ``(n_node / n_root) * impurity_decrease`` to its
    feature; the vector is then divided by its sum. A leaf-only tree gives
    all zeros.
    """
    fi = np.zeros(n_features)
    if isinstance(root, Leaf):
        return fi
    n_root = root.n_samples
    for node in iter_nodes(root):
        if isinstance(node, Split):
            fi[node.feature_index] += node.n_samples / n_root * node.impurity_decrease
    total = fi.sum()
    return fi / total if total > 0 else fi


def dump_tree(root: TreeNode, names=None) -> str:
    """Indented plain-text rendering, for debugging only."""
    lines = []

    def walk(node, depth):
        pad = "  " * depth
        if isinstance(node, Leaf):
            lines.append(f"{pad}leaf counts={node.class_counts[0]}/{node.class_counts[1]}")
            return
        label = names[node.feature_index] if names else f"x{node.feature_index}"
        lines.append(f"{pad}{label} <= {node.threshold!r} (n={node.n_samples}, dGini={node.impurity_decrease:.6g})")
        walk(node.left, depth + 1)
        walk(node.right, depth + 1)

    walk(root, 0)
    return "\n".join(lines) + "\n"
