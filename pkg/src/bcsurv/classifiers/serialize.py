"""Versioned plain-text model files.

Layout (one record per line, space separated, floats as shortest
round-trip decimals)::

    bcsurv-model 1
    family <lr|rf|et|knn|svc>
    param <name> <value>            hyperparameters and scalars
    vector <name> <len> v1 v2 ...   one-dimensional arrays
    matrix <name> <rows> <cols>     followed by <rows> lines of <cols> values
    tree <index>                    followed by the tree in preorder:
    S <feature> <threshold> <impurity_decrease> <n_samples>
    L <negatives> <positives>
    end

Unknown record types are a format error.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from ..cart import Leaf, Split, TreeConfig
from ..errors import ModelFormatError
from .forest import ForestModel
from .knn import KnnModel
from .logistic import LogisticConfig, LogisticModel
from .svc import SvcConfig, SvcModel

MAGIC = "bcsurv-model"
VERSION = 1


def _num(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def _vector(name, values) -> str:
    values = np.asarray(values).ravel()
    return " ".join(["vector", name, str(values.size), *(_num(v) for v in values)])


def _tree_lines(node, out):
    if isinstance(node, Leaf):
        out.append(f"L {node.class_counts[0]} {node.class_counts[1]}")
        return
    out.append(f"S {node.feature_index} {_num(node.threshold)} {_num(node.impurity_decrease)} {node.n_samples}")
    _tree_lines(node.left, out)
    _tree_lines(node.right, out)


def dumps(model) -> str:
    out = [f"{MAGIC} {VERSION}", f"family {model.family}"]
    if isinstance(model, LogisticModel):
        c = model.config
        out += [f"param learning_rate {_num(c.learning_rate)}", f"param max_iters {c.max_iters}",
                f"param tolerance {_num(c.tolerance)}"]
        out.append(_vector("theta", model.theta))
        out.append(_vector("loss_history", model.training_loss_history))
    elif isinstance(model, SvcModel):
        c = model.config
        out += [f"param C {_num(c.C)}", f"param max_epochs {c.max_epochs}",
                f"param learning_rate {_num(c.learning_rate)}", f"param bias {_num(model.bias)}",
                f"param calibration_min {_num(model.score_calibration[0])}",
                f"param calibration_max {_num(model.score_calibration[1])}"]
        out.append(_vector("weights", model.weights))
        out.append(_vector("objective_history", model.objective_history))
    elif isinstance(model, KnnModel):
        rows, cols = model.train_values.shape
        out.append(f"param k {model.k}")
        out.append(f"matrix train_values {rows} {cols}")
        out.extend(" ".join(_num(v) for v in r) for r in model.train_values)
        out.append(_vector("train_labels", model.train_labels.astype(np.int64)))
    elif isinstance(model, ForestModel):
        c = model.tree_config
        out += [f"param variant {model.variant}", f"param seed {model.seed}",
                f"param n_features {model.n_features}", f"param max_depth {c.max_depth}",
                f"param min_samples_split {c.min_samples_split}",
                f"param feature_subset_size {c.feature_subset_size}",
                f"param split_mode {c.split_mode}",
                f"param min_impurity_decrease {_num(c.min_impurity_decrease)}",
                f"param min_samples_leaf {c.min_samples_leaf}"]
        out.append(_vector("importances", model.importances))
        for j, tree in enumerate(model.trees):
            out.append(f"tree {j}")
            _tree_lines(tree, out)
    else:
        raise ModelFormatError(f"cannot serialize {type(model).__name__}")
    out.append("end")
    return "\n".join(out) + "\n"


def _parse_tree(lines, pos):
    parts = lines[pos].split()
    if parts[0] == "L":
        return Leaf((int(parts[1]), int(parts[2]))), pos + 1
    if parts[0] != "S":
        raise ModelFormatError(f"line {pos + 1}: expected a tree node, got {parts[0]!r}")
    left, pos2 = _parse_tree(lines, pos + 1)
    right, pos3 = _parse_tree(lines, pos2)
    return Split(int(parts[1]), float(parts[2]), left, right, float(parts[3]), int(parts[4])), pos3


def loads(text: str):
    lines = text.splitlines()
    if not lines or lines[0].split() != [MAGIC, str(VERSION)]:
        raise ModelFormatError(f"not a {MAGIC} v{VERSION} file")
    params: dict[str, str] = {}
    vectors: dict[str, np.ndarray] = {}
    matrices: dict[str, np.ndarray] = {}
    trees = []
    family = None
    pos = 1
    try:
        while pos < len(lines):
            parts = lines[pos].split()
            tag = parts[0] if parts else ""
            if tag == "end":
                break
            if tag == "family":
                family = parts[1]
                pos += 1
            elif tag == "param":
                params[parts[1]] = parts[2]
                pos += 1
            elif tag == "vector":
                vals = np.array([float(v) for v in parts[3:]])
                if vals.size != int(parts[2]):
                    raise ModelFormatError(f"line {pos + 1}: vector length mismatch")
                vectors[parts[1]] = vals
                pos += 1
            elif tag == "matrix":
                rows, cols = int(parts[2]), int(parts[3])
                body = lines[pos + 1:pos + 1 + rows]
                mat = np.array([[float(v) for v in r.split()] for r in body]).reshape(rows, cols)
                matrices[parts[1]] = mat
                pos += 1 + rows
            elif tag == "tree":
                tree, pos = _parse_tree(lines, pos + 1)
                trees.append(tree)
            else:
                raise ModelFormatError(f"line {pos + 1}: unknown record {tag!r}")
        else:
            raise ModelFormatError("missing 'end' record")

        if family == "lr":
            config = LogisticConfig(float(params["learning_rate"]), int(params["max_iters"]),
                                    float(params["tolerance"]))
            return LogisticModel(vectors["theta"], tuple(vectors["loss_history"].tolist()), config)
        if family == "svc":
            config = SvcConfig(float(params["C"]), int(params["max_epochs"]), float(params["learning_rate"]))
            calibration = (float(params["calibration_min"]), float(params["calibration_max"]))
            return SvcModel(vectors["weights"], float(params["bias"]), config, calibration,
                            tuple(vectors["objective_history"].tolist()))
        if family == "knn":
            return KnnModel(matrices["train_values"], vectors["train_labels"].astype(np.int64), int(params["k"]))
        if family in ("rf", "et"):
            mtry = params["feature_subset_size"]
            config = TreeConfig(int(params["max_depth"]), int(params["min_samples_split"]),
                                None if mtry == "None" else int(mtry), params["split_mode"],
                                float(params["min_impurity_decrease"]), int(params["min_samples_leaf"]))
            return ForestModel(tuple(trees), vectors["importances"], params["variant"],
                               int(params["seed"]), int(params["n_features"]), config)
    except (KeyError, IndexError, ValueError) as exc:
        raise ModelFormatError(f"malformed model file: {exc}") from exc
    raise ModelFormatError(f"unknown model family {family!r}")


def save_model(model, path) -> None:
    Path(path).write_text(dumps(model), encoding="utf-8")


def load_model(path):
    return loads(Path(path).read_text(encoding="utf-8"))
