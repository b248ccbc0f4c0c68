"""Point-wise segmentation metrics: confusion matrix, IoU, mIoU, OA.

Predictions may contain IGNORE. By default ignored predictions are skipped
and reported as coverage loss; with count_ignored=True they instead count
against the true class (a miss that credits no prediction).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import IGNORE, EntryOutOfRange, LabelVector, LengthMismatch, LogoError


class NoDefinedClass(LogoError):
    pass


class EmptyEvaluation(LogoError):
    pass


@dataclass(frozen=True)
class ConfusionMatrix:
    """K x K counts (rows = truth, columns = prediction) over scored points.

    Ignored predictions never enter counts; ignored_true tallies them by
    their true class, and include_ignored says whether they participate in
    the metrics or were skipped.
    """

    counts: np.ndarray
    n_ignored: int
    ignored_true: np.ndarray
    include_ignored: bool

    @property
    def k(self) -> int:
        return self.counts.shape[0]

    @property
    def n_total(self) -> int:
        total = int(self.counts.sum())
        if self.include_ignored:
            total += self.n_ignored
        return total


def confusion(
    y_true: LabelVector, y_pred: LabelVector, count_ignored: bool = False
) -> ConfusionMatrix:
    """Tally predictions against ground truth."""
    if y_true.n != y_pred.n:
        raise LengthMismatch(f"truth has {y_true.n} labels, prediction {y_pred.n}")
    t = y_true.labels
    p = y_pred.labels
    if np.any(t == IGNORE):
        raise EntryOutOfRange("ground truth must not contain IGNORE")
    k = max(y_true.k, y_pred.k)
    scored = p != IGNORE
    flat = k * t[scored] + p[scored]
    counts = np.bincount(flat, minlength=k * k).reshape(k, k)
    ignored_true = np.bincount(t[~scored], minlength=k)
    return ConfusionMatrix(
        counts=counts.astype(np.int64),
        n_ignored=int((~scored).sum()),
        ignored_true=ignored_true.astype(np.int64),
        include_ignored=count_ignored,
    )


def iou_per_class(cm: ConfusionMatrix):
    """Per-class intersection over union.

    Returns (ious, defined): classes whose union is empty get NaN and a
    False flag, and are meant to be excluded from the mean.
    """
    tp = np.diag(cm.counts).astype(np.float64)
    fp = cm.counts.sum(axis=0) - tp
    fn = cm.counts.sum(axis=1) - tp
    if cm.include_ignored:
        fn = fn + cm.ignored_true
    union = tp + fp + fn
    defined = union > 0
    ious = np.full(cm.k, np.nan)
    ious[defined] = tp[defined] / union[defined]
    return ious, defined


def miou(ious: np.ndarray, defined: np.ndarray) -> float:
    """Mean IoU over defined classes only."""
    if not np.any(defined):
        raise NoDefinedClass("every class has an empty union")
    return float(np.mean(ious[defined]))


def overall_accuracy(cm: ConfusionMatrix) -> float:
    """Fraction of scored points predicted correctly."""
    if cm.n_total == 0:
        raise EmptyEvaluation("no points to evaluate")
    return float(np.trace(cm.counts) / cm.n_total)


def evaluate(
    y_true: LabelVector, y_pred: LabelVector, count_ignored: bool = False
) -> dict:
    """One-call report: per-class IoU, mIoU, OA, and prediction coverage."""
    cm = confusion(y_true, y_pred, count_ignored=count_ignored)
    ious, defined = iou_per_class(cm)
    return {
        "per_class_iou": [None if not d else float(v) for v, d in zip(ious, defined)],
        "miou": miou(ious, defined),
        "oa": overall_accuracy(cm),
        "coverage": 1.0 - cm.n_ignored / y_true.n,
        "n_ignored": cm.n_ignored,
        "n_points": y_true.n,
    }
