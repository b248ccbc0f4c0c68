"""Multi-view ensemble inference.

Averaging predictions over several randomly perturbed copies of the input
smooths out per-view noise before any pseudo-label is extracted. The built-in
augmenter perturbs feature rows with seeded isotropic Gaussian noise; callers
with their own augmentation pipeline can feed per-view matrices straight into
``aggregate_views``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import (
    DimensionMismatch,
    FeatureMatrix,
    LabelVector,
    LogoError,
    ProbMatrix,
    ShapeMismatch,
    make_rng,
    row_normalize,
    split_seed,
)


class EmptyViewList(LogoError):
    pass


@dataclass(frozen=True)
class EnsembleConfig:
    """Number of views, augmentation noise scale, and the master seed."""

    views: int = 4
    noise_sigma: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if self.views < 1:
            raise ShapeMismatch("views must be >= 1")
        if self.noise_sigma < 0:
            raise ShapeMismatch("noise_sigma must be >= 0")


@dataclass(frozen=True)
class EnsembleOutput:
    """Aggregated ensemble state for one inference pass.

    probs       mean class probabilities over views (N x K)
    labels      per-row argmax of probs, ties toward the lowest class index
    confidence  per-row max of probs
    features    row-normalized mean of per-view features (N x D)
    """

    probs: ProbMatrix
    labels: LabelVector
    confidence: np.ndarray
    features: FeatureMatrix


def _mean_over_views(stack: np.ndarray) -> np.ndarray:
    # Sort along the view axis before summing so the result is bit-identical
    # under any permutation of the views; elements constant across views pass
    # through untouched, keeping the mean exactly idempotent on constants.
    ordered = np.sort(stack, axis=0)
    mean = ordered.sum(axis=0) / stack.shape[0]
    constant = ordered[0] == ordered[-1]
    return np.where(constant, ordered[0], mean)


def aggregate_views(
    views: Sequence[ProbMatrix], view_features: Sequence[FeatureMatrix]
) -> EnsembleOutput:
    """Average per-view probabilities and features into one ensemble output.

    All probability views must share N x K and all feature views N x D.
    The probability mean is row-stochastic by construction and is not
    renormalized.
    """
    if len(views) == 0 or len(view_features) == 0:
        raise EmptyViewList("need at least one probability and one feature view")
    n, k = views[0].n, views[0].k
    if any(v.n != n or v.k != k for v in views):
        raise ShapeMismatch("probability views disagree on N x K")
    d = view_features[0].d
    if any(f.n != n or f.d != d for f in view_features):
        raise ShapeMismatch("feature views disagree on N x D")

    p_mean = _mean_over_views(np.stack([v.data for v in views]))
    f_mean = _mean_over_views(np.stack([f.data for f in view_features]))

    labels = np.argmax(p_mean, axis=1)  # first occurrence wins ties
    confidence = p_mean[np.arange(n), labels]
    return EnsembleOutput(
        probs=ProbMatrix(p_mean),
        labels=LabelVector(labels, k),
        confidence=confidence,
        features=row_normalize(FeatureMatrix(f_mean)),
    )


def run_ensemble(model, features: FeatureMatrix, cfg: EnsembleConfig) -> EnsembleOutput:
    """Run ``model`` on ``cfg.views`` perturbed copies of ``features``.

    View v perturbs the features with Gaussian noise of scale
    ``cfg.noise_sigma`` drawn from sub-seed ``split_seed(cfg.seed, v)``;
    sigma 0 collapses every view to the clean forward pass. ``model`` needs
    ``input_dim`` and ``predict_proba(ndarray) -> ndarray``.
    """
    if model.input_dim != features.d:
        raise DimensionMismatch(
            f"model expects d={model.input_dim}, features have d={features.d}"
        )
    prob_views = []
    feat_views = []
    for v in range(cfg.views):
        if cfg.noise_sigma > 0:
            rng = make_rng(split_seed(cfg.seed, v))
            perturbed = features.data + cfg.noise_sigma * rng.standard_normal(
                features.data.shape
            )
        else:
            perturbed = features.data
        prob_views.append(ProbMatrix(model.predict_proba(perturbed)))
        feat_views.append(FeatureMatrix(perturbed))
    return aggregate_views(prob_views, feat_views)
