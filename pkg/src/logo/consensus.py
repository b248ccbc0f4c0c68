"""Dual-consensus filtering of pseudo-labels.

A sample's label is kept only when the local ensemble prediction and the
global transport assignment agree; every disagreement becomes IGNORE. The
filter also reports retention statistics so an operator can see how much of
the dataset survived.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import IGNORE, EntryOutOfRange, LabelVector, LengthMismatch, ShapeMismatch


@dataclass(frozen=True)
class ConsensusResult:
    """Filtered labels plus retention statistics."""

    labels: LabelVector
    kept_count: int
    per_class_kept: np.ndarray
    consensus_rate: float


def dual_consensus_filter(y_raw: LabelVector, y_sink: LabelVector) -> ConsensusResult:
    """Keep labels where both views agree, IGNORE where they differ."""
    if y_raw.n != y_sink.n:
        raise LengthMismatch(f"raw has {y_raw.n} labels, sink has {y_sink.n}")
    if y_raw.k != y_sink.k:
        raise ShapeMismatch(f"raw k={y_raw.k} vs sink k={y_sink.k}")
    a = y_raw.labels
    b = y_sink.labels
    if np.any(a == IGNORE) or np.any(b == IGNORE):
        raise EntryOutOfRange("consensus inputs must not contain IGNORE")
    keep = a == b
    final = np.where(keep, a, IGNORE)
    kept = int(keep.sum())
    per_class = np.bincount(a[keep], minlength=y_raw.k).astype(np.int64)
    return ConsensusResult(
        labels=LabelVector(final, y_raw.k),
        kept_count=kept,
        per_class_kept=per_class,
        consensus_rate=kept / y_raw.n,
    )
