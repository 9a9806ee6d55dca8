"""Detection metrics over confusion matrices, plus a geometric
representation-quality score (between-class spread over within-class spread)."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ConfusionMatrix:
    """Square count matrix; rows are true classes, columns predictions."""

    counts: np.ndarray

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        if counts.ndim != 2 or counts.shape[0] != counts.shape[1]:
            raise ValueError("confusion matrix must be square")
        if (counts < 0).any():
            raise ValueError("confusion counts must be non-negative")
        object.__setattr__(self, "counts", counts)

    @property
    def n_classes(self) -> int:
        return self.counts.shape[0]

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @staticmethod
    def from_predictions(y_true, y_pred, n_classes: int | None = None) -> "ConfusionMatrix":
        y_true = np.asarray(y_true, dtype=np.int64)
        y_pred = np.asarray(y_pred, dtype=np.int64)
        if y_true.shape != y_pred.shape:
            raise ValueError("label arrays must have the same length")
        if n_classes is None:
            n_classes = int(max(y_true.max(initial=-1), y_pred.max(initial=-1))) + 1
        counts = np.zeros((n_classes, n_classes), dtype=np.int64)
        np.add.at(counts, (y_true, y_pred), 1)
        return ConfusionMatrix(counts)


def accuracy(cm: ConfusionMatrix) -> float:
    """Fraction of correctly classified samples (trace over total)."""
    if cm.total == 0:
        raise ValueError("empty confusion matrix")
    return float(np.trace(cm.counts)) / cm.total


def _precision_recall(cm: ConfusionMatrix, c: int):
    tp = cm.counts[c, c]
    fp = cm.counts[:, c].sum() - tp
    fn = cm.counts[c, :].sum() - tp
    precision = tp / (tp + fp) if tp + fp > 0 else 0.0
    recall = tp / (tp + fn) if tp + fn > 0 else 0.0
    return float(precision), float(recall)


def f_score(cm: ConfusionMatrix, average="macro") -> float:
    """Harmonic mean of precision and recall.

    ``average="macro"`` takes the unweighted mean of per-class F1 values;
    passing a class id instead computes the one-vs-rest F1 with that class
    as the positive class. Zero denominators contribute F1 = 0.
    """
    if cm.total == 0:
        raise ValueError("empty confusion matrix")

    def f1(c: int) -> float:
        p, r = _precision_recall(cm, c)
        return 2.0 * p * r / (p + r) if p + r > 0 else 0.0

    if average == "macro":
        return float(np.mean([f1(c) for c in range(cm.n_classes)]))
    c = int(average)
    if not 0 <= c < cm.n_classes:
        raise ValueError(f"positive class {c} out of range")
    return f1(c)


def mdr(cm: ConfusionMatrix, attack_classes, macro: bool = False) -> float:
    """Miss detection rate: fraction of attack samples not flagged as attack.

    Detection is binarized: a true attack counts as detected when predicted
    as any attack class. ``macro=True`` instead averages the one-vs-rest miss
    rate over the attack classes.
    """
    attacks = sorted(set(int(c) for c in attack_classes))
    if not attacks:
        raise ValueError("attack class set is empty")
    for c in attacks:
        if not 0 <= c < cm.n_classes:
            raise ValueError(f"attack class {c} out of range")
    counts = cm.counts
    if macro:
        rates = []
        for c in attacks:
            row = counts[c, :].sum()
            if row == 0:
                raise ValueError(f"no samples of attack class {c}")
            rates.append(1.0 - counts[c, c] / row)
        return float(np.mean(rates))
    mask = np.zeros(cm.n_classes, dtype=bool)
    mask[attacks] = True
    tp = counts[np.ix_(mask, mask)].sum()
    fn = counts[np.ix_(mask, ~mask)].sum()
    if tp + fn == 0:
        raise ValueError("no positive (attack) samples")
    return float(fn / (fn + tp))


def far(cm: ConfusionMatrix, normal_class: int, macro: bool = False) -> float:
    """False alarm rate: fraction of normal samples flagged as attack.

    ``macro=True`` averages, over the attack classes, the one-vs-rest false
    positive rate of each attack class.
    """
    c = int(normal_class)
    if not 0 <= c < cm.n_classes:
        raise ValueError(f"normal class {c} out of range")
    counts = cm.counts
    if macro:
        rates = []
        total = counts.sum()
        for k in range(cm.n_classes):
            if k == c:
                continue
            fp = counts[:, k].sum() - counts[k, k]
            negs = total - counts[k, :].sum()
            rates.append(fp / negs if negs > 0 else 0.0)
        if not rates:
            raise ValueError("no attack classes to average over")
        return float(np.mean(rates))
    row = counts[c, :].sum()
    if row == 0:
        raise ValueError("no negative (normal) samples")
    fp = row - counts[c, c]
    return float(fp / row)


@dataclass(frozen=True)
class QualityReport:
    """Separability summary: mean distance between class means over mean
    distance of samples to their own class mean."""

    d_between: float
    d_within: float
    quality: float
    degenerate: bool = False


def representation_quality(X, labels) -> QualityReport:
    """Between/within-class distance ratio; higher means more separable.

    ``d_between`` is the mean Euclidean distance over all unordered pairs of
    class means; ``d_within`` the mean distance of each sample to its class
    mean. A zero ``d_within`` yields an infinite quality with the degenerate
    flag set.
    """
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    labels = np.asarray(labels)
    if X.shape[0] != labels.shape[0]:
        raise ValueError("sample and label counts differ")
    class_ids = np.unique(labels)
    if class_ids.size < 2:
        raise ValueError("representation quality needs at least two classes")
    means = np.stack([X[labels == c].mean(axis=0) for c in class_ids])
    pair_dists = [
        float(np.linalg.norm(means[i] - means[j]))
        for i in range(len(class_ids))
        for j in range(i + 1, len(class_ids))
    ]
    d_between = float(np.mean(pair_dists))
    within = np.linalg.norm(X - means[np.searchsorted(class_ids, labels)], axis=1)
    d_within = float(within.mean())
    if d_within == 0.0:
        return QualityReport(d_between, 0.0, math.inf, degenerate=True)
    return QualityReport(d_between, d_within, d_between / d_within)
