"""Class-balanced prototype estimation.

Candidate sets are built per predicted class, the most confident fraction of
each class is kept as anchors, and prototypes are the unit-norm mean of the
anchor features. Selection is ranked inside each class, never against a
global confidence threshold, so sample-scarce tail classes keep a prototype
as long as they receive a single prediction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import EntryOutOfRange, FeatureMatrix, LabelVector, LogoError, ShapeMismatch


class ZeroMeanVector(LogoError):
    def __init__(self, class_index):
        self.class_index = int(class_index)
        super().__init__(f"anchor mean of class {self.class_index} has ~zero norm")


@dataclass(frozen=True)
class AnchorConfig:
    """Fraction of each class kept as anchors, with a floor for tiny classes."""

    rho: float = 0.8
    min_anchors: int = 1

    def __post_init__(self):
        if not (0.0 < self.rho <= 1.0):
            raise ShapeMismatch("rho must lie in (0, 1]")
        if self.min_anchors < 1:
            raise ShapeMismatch("min_anchors must be >= 1")


@dataclass(frozen=True)
class AnchorSets:
    """Per-class anchor indices plus the size of each candidate pool."""

    per_class: tuple
    candidate_counts: np.ndarray

    @property
    def k(self) -> int:
        return len(self.per_class)


@dataclass(frozen=True)
class PrototypeSet:
    """K x D unit-norm class centroids; inactive rows are all zero."""

    vectors: np.ndarray
    active: np.ndarray

    @property
    def k(self) -> int:
        return self.vectors.shape[0]

    @property
    def d(self) -> int:
        return self.vectors.shape[1]


def build_candidate_sets(labels: LabelVector, k: int) -> list:
    """Partition sample indices by predicted class.

    Index i lands in list labels[i]; the lists are disjoint and cover all N
    indices. Labels must contain no IGNORE entries.
    """
    arr = labels.labels
    if np.any(arr < 0):
        raise EntryOutOfRange("candidate sets require labels without IGNORE")
    if labels.k > k:
        raise ShapeMismatch(f"labels carry k={labels.k} > requested k={k}")
    order = np.argsort(arr, kind="stable")
    sorted_labels = arr[order]
    bounds = np.searchsorted(sorted_labels, np.arange(k + 1))
    return [order[bounds[c] : bounds[c + 1]] for c in range(k)]


def mine_anchors(candidates, confidence: np.ndarray, cfg: AnchorConfig) -> AnchorSets:
    """Keep the top-confidence slice of every candidate set.

    Class k with a nonempty pool keeps max(min_anchors, floor(rho * |pool|))
    members, capped at the pool size; empty pools yield empty anchor sets.
    Confidence ties break toward the lower sample index.
    """
    confidence = np.asarray(confidence, dtype=np.float64)
    per_class = []
    counts = np.zeros(len(candidates), dtype=np.int64)
    for k, cand in enumerate(candidates):
        cand = np.asarray(cand, dtype=np.int64)
        counts[k] = cand.size
        if cand.size == 0:
            per_class.append(cand)
            continue
        take = max(cfg.min_anchors, int(np.floor(cfg.rho * cand.size)))
        take = min(take, cand.size)
        # stable sort on descending confidence keeps ascending-index tie order
        cand = np.sort(cand)
        order = np.argsort(-confidence[cand], kind="stable")
        per_class.append(cand[order[:take]])
    return AnchorSets(per_class=tuple(per_class), candidate_counts=counts)


def aggregate_prototypes(anchors: AnchorSets, features: FeatureMatrix) -> PrototypeSet:
    """Unit-norm mean of anchor features per class.

    Classes without anchors are inactive and get a zero row. Raises
    ZeroMeanVector if an anchor mean nearly cancels out (norm < 1e-12).
    """
    k = anchors.k
    vectors = np.zeros((k, features.d), dtype=np.float64)
    active = np.zeros(k, dtype=bool)
    for c, idx in enumerate(anchors.per_class):
        if idx.size == 0:
            continue
        if idx.max() >= features.n:
            raise ShapeMismatch(f"anchor index {idx.max()} out of range for N={features.n}")
        mean = features.data[idx].mean(axis=0)
        norm = np.linalg.norm(mean)
        if norm < 1e-12:
            raise ZeroMeanVector(c)
        vectors[c] = mean / norm
        active[c] = True
    return PrototypeSet(vectors=vectors, active=active)
