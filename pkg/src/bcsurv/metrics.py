"""Confusion-matrix metrics and threshold-sweep ROC/AUC for binary scores."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import EmptyInput, LengthMismatch, MetricsError, SingleClassLabels


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fp: int
    fn: int
    tn: int
    positive_class_name: str = "1"

    def __post_init__(self):
        if min(self.tp, self.fp, self.fn, self.tn) < 0:
            raise MetricsError("confusion counts must be non-negative")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    def flipped(self) -> ConfusionMatrix:
        """The same predictions read with the negative class as positive."""
        return ConfusionMatrix(self.tn, self.fn, self.fp, self.tp, f"not {self.positive_class_name}")


def _binary(a, name: str) -> np.ndarray:
    a = np.asarray(a)
    if a.ndim != 1:
        raise MetricsError(f"{name} must be one-dimensional")
    if a.size and not np.isin(a, (0, 1)).all():
        raise MetricsError(f"{name} must contain only 0/1")
    return a.astype(np.int64)


def confusion(labels, predictions, positive_class_name: str = "1") -> ConfusionMatrix:
    y = _binary(labels, "labels")
    yhat = _binary(predictions, "predictions")
    if y.shape != yhat.shape:
        raise LengthMismatch(f"labels ({y.size}) and predictions ({yhat.size}) differ in length")
    if y.size == 0:
        raise EmptyInput("confusion matrix of zero rows")
    tp = int(np.sum((y == 1) & (yhat == 1)))
    fp = int(np.sum((y == 0) & (yhat == 1)))
    fn = int(np.sum((y == 1) & (yhat == 0)))
    return ConfusionMatrix(tp, fp, fn, y.size - tp - fp - fn, positive_class_name)


def accuracy(cm: ConfusionMatrix) -> float:
    if cm.total == 0:
        raise EmptyInput("accuracy of an empty confusion matrix")
    return (cm.tp + cm.tn) / cm.total


def precision(cm: ConfusionMatrix) -> float:
    """TP / (TP + FP); 0 when nothing was predicted positive (see degenerate_metrics)."""
    d = cm.tp + cm.fp
    return cm.tp / d if d else 0.0


def recall(cm: ConfusionMatrix) -> float:
    d = cm.tp + cm.fn
    return cm.tp / d if d else 0.0


def f1(cm: ConfusionMatrix) -> float:
    p, r = precision(cm), recall(cm)
    return 2 * p * r / (p + r) if p + r > 0 else 0.0


def mcc(cm: ConfusionMatrix) -> float:
    """Matthews correlation; 0 when any marginal is empty.

    Numerator and the product under the root are exact Python integers.
    """
    num = cm.tp * cm.tn - cm.fp * cm.fn
    prod = (cm.tp + cm.fp) * (cm.tp + cm.fn) * (cm.tn + cm.fp) * (cm.tn + cm.fn)
    if prod == 0:
        return 0.0
    value = num / math.sqrt(prod)
    return max(-1.0, min(1.0, value))


def degenerate_metrics(cm: ConfusionMatrix) -> frozenset[str]:
    """Names of metrics that fell back to 0 because a denominator vanished."""
    out = set()
    if cm.tp + cm.fp == 0:
        out.add("precision")
    if cm.tp + cm.fn == 0:
        out.add("recall")
    if precision(cm) + recall(cm) == 0:
        out.add("f1")
    if (cm.tp + cm.fp) * (cm.tp + cm.fn) * (cm.tn + cm.fp) * (cm.tn + cm.fn) == 0:
        out.add("mcc")
    return frozenset(out)


@dataclass(frozen=True, eq=False)
class RocCurve:
    """Points of the ROC sweep, plus the integer counts they came from so
    the area can be recomputed exactly."""

    fpr: np.ndarray
    tpr: np.ndarray
    thresholds: np.ndarray
    fp_counts: np.ndarray
    tp_counts: np.ndarray

    @property
    def points(self) -> list[tuple[float, float]]:
        return list(zip(self.fpr.tolist(), self.tpr.tolist()))

    @property
    def auc(self) -> float:
        return auc(self)


def roc_points(labels, scores) -> RocCurve:
    """Sweep a threshold down through every distinct score.

    Tied scores move together as one (possibly diagonal) step. The curve
    starts at (0, 0) with threshold +inf and ends at (1, 1).
    """
    y = _binary(labels, "labels")
    s = np.asarray(scores, dtype=np.float64)
    if s.shape != y.shape:
        raise LengthMismatch(f"labels ({y.size}) and scores ({s.size}) differ in length")
    pos = int(y.sum())
    neg = y.size - pos
    if pos == 0 or neg == 0:
        raise SingleClassLabels("ROC is undefined unless both classes are present")
    order = np.argsort(-s, kind="stable")
    s_sorted, y_sorted = s[order], y[order]
    # last index of each block of equal scores
    ends = np.flatnonzero(np.r_[s_sorted[1:] != s_sorted[:-1], True])
    tps = np.r_[0, np.cumsum(y_sorted)[ends]]
    fps = np.r_[0, (ends + 1) - tps[1:]]
    thresholds = np.r_[np.inf, s_sorted[ends]]
    return RocCurve(fps / neg, tps / pos, thresholds, fps, tps)


def auc_fraction(curve: RocCurve) -> Fraction:
    """Trapezoidal area computed exactly from the integer counts."""
    fp = [int(v) for v in curve.fp_counts]
    tp = [int(v) for v in curve.tp_counts]
    twice_area = sum((fp[i + 1] - fp[i]) * (tp[i + 1] + tp[i]) for i in range(len(fp) - 1))
    return Fraction(twice_area, 2 * fp[-1] * tp[-1])


def auc(curve: RocCurve) -> float:
    """Trapezoidal integral of TPR over FPR."""
    fp = curve.fp_counts.astype(np.int64)
    tp = curve.tp_counts.astype(np.int64)
    twice_area = int(np.sum(np.diff(fp) * (tp[1:] + tp[:-1])))
    return twice_area / (2 * int(fp[-1]) * int(tp[-1]))


def _per_class(cm: ConfusionMatrix) -> dict[str, float]:
    return {"precision": precision(cm), "recall": recall(cm), "f1": f1(cm)}


@dataclass(frozen=True, eq=False)
class MetricsReport:
    classifier_name: str
    accuracy: float
    precision: float
    recall: float
    f1: float
    mcc: float
    roc_auc: float
    confusion: ConfusionMatrix
    roc: RocCurve | None = None
    negative_class: dict = field(default_factory=dict)
    macro: dict = field(default_factory=dict)
    degenerate: frozenset = frozenset()

    def row(self) -> tuple[float, ...]:
        return (self.accuracy, self.precision, self.recall, self.f1, self.mcc, self.roc_auc)


def evaluate(
    labels,
    scores,
    threshold: float = 0.5,
    classifier_name: str = "",
    positive_class_name: str = "1",
) -> MetricsReport:
    """One comparison row: hard labels at ``threshold`` feed the confusion
    metrics, raw scores feed ROC/AUC. Precision, recall and F1 are reported
    for the positive class, the negative class and their macro average."""
    s = np.asarray(scores, dtype=np.float64)
    preds = (s >= threshold).astype(np.int64)
    cm = confusion(labels, preds, positive_class_name)
    curve = roc_points(labels, s)
    neg = _per_class(cm.flipped())
    pos = _per_class(cm)
    macro = {k: (pos[k] + neg[k]) / 2 for k in pos}
    return MetricsReport(
        classifier_name,
        accuracy(cm),
        pos["precision"],
        pos["recall"],
        pos["f1"],
        mcc(cm),
        auc(curve),
        cm,
        curve,
        neg,
        macro,
        degenerate_metrics(cm),
    )


def format_roc_csv(curve: RocCurve) -> str:
    lines = ["fpr,tpr"]
    lines.extend(f"{f:.6f},{t:.6f}" for f, t in zip(curve.fpr, curve.tpr))
    return "\n".join(lines) + "\n"

