"""Independent reference implementations used as test oracles.

Each one is the slow, obvious version of a library routine: exact
rational arithmetic or plain loops, no shared code with the package.
"""

import math
from decimal import Decimal, localcontext
from fractions import Fraction


def brute_force_split(x, y):
    """Exhaustive (feature, midpoint) search in exact arithmetic.

    Returns (feature, threshold, gain) maximizing the Gini decrease, ties to
    the lowest feature then lowest threshold; None if no positive gain.
    """
    n = len(y)

    def gini(labels):
        p = Fraction(sum(labels), len(labels))
        return 1 - p * p - (1 - p) * (1 - p)

    parent = gini([int(v) for v in y])
    best = None
    for f in range(x.shape[1]):
        vals = sorted(set(x[:, f].tolist()))
        for lo, hi in zip(vals, vals[1:]):
            t = (lo + hi) / 2
            left = [int(y[i]) for i in range(n) if x[i, f] <= t]
            right = [int(y[i]) for i in range(n) if x[i, f] > t]
            gain = parent - (len(left) * gini(left) + len(right) * gini(right)) / n
            if gain > 0 and (best is None or gain > best[2]):
                best = (f, t, gain)
    return best


def mann_whitney(labels, scores) -> Fraction:
    """P(score_pos > score_neg) + 0.5 P(tie), by counting every pair."""
    pos = [s for s, y in zip(scores, labels) if y == 1]
    neg = [s for s, y in zip(scores, labels) if y == 0]
    wins = sum(2 if p > q else 1 if p == q else 0 for p in pos for q in neg)
    return Fraction(wins, 2 * len(pos) * len(neg))


def naive_knn_score(train_x, train_y, q, k):
    order = sorted(range(len(train_y)), key=lambda i: (math.dist(train_x[i], q), i))
    return sum(int(train_y[i]) for i in order[:k]) / k


def central_difference(f, theta, h=1e-6):
    out = []
    for j in range(len(theta)):
        up, down = list(theta), list(theta)
        up[j] += h
        down[j] -= h
        out.append((f(up) - f(down)) / (2 * h))
    return out


def direct_metrics(tp, fp, fn, tn):
    """Textbook formulas in exact arithmetic; 0 wherever a denominator vanishes."""
    with localcontext() as ctx:
        ctx.prec = 60
        total = tp + fp + fn + tn
        acc = Fraction(tp + tn, total)
        prec = Fraction(tp, tp + fp) if tp + fp else Fraction(0)
        rec = Fraction(tp, tp + fn) if tp + fn else Fraction(0)
        f1 = Fraction(2 * tp, 2 * tp + fp + fn) if tp else Fraction(0)
        den = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn)
        mcc = Decimal(tp * tn - fp * fn) / Decimal(den).sqrt() if den else Decimal(0)
        return {"accuracy": float(acc), "precision": float(prec), "recall": float(rec),
                "f1": float(f1), "mcc": float(mcc)}
