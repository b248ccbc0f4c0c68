"""Shared dense containers, validation, and seeded randomness.

Everything downstream (ensembles, prototypes, transport, training) works on
the types defined here. Arrays are float64 internally and frozen after
construction so instances can be shared across threads without copying.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# Sentinel for "excluded from loss / no label". In-memory labels are int64
# with -1 marking ignored entries; the 32-bit file encoding lives in logo.io.
IGNORE = -1

PROB_ROW_TOL = 1e-5
PRIOR_SUM_TOL = 1e-8


class LogoError(Exception):
    """Base class for all library errors."""


class ShapeMismatch(LogoError):
    pass


class DimensionMismatch(LogoError):
    pass


class LengthMismatch(LogoError):
    pass


class RowNotNormalized(LogoError):
    def __init__(self, row, total):
        self.row = int(row)
        self.total = float(total)
        super().__init__(f"row {self.row} sums to {self.total!r}, expected 1")


class EntryOutOfRange(LogoError):
    pass


class ZeroRow(LogoError):
    def __init__(self, row):
        self.row = int(row)
        super().__init__(f"row {self.row} has zero norm")


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr


def _as_float64(data, name: str, ndim: int) -> np.ndarray:
    arr = np.asarray(data, dtype=np.float64)
    if arr.ndim != ndim:
        raise ShapeMismatch(f"{name} must be {ndim}-D, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise EntryOutOfRange(f"{name} contains non-finite entries")
    return arr


@dataclass(frozen=True)
class FeatureMatrix:
    """N x D matrix of point feature embeddings, all entries finite."""

    data: np.ndarray

    def __post_init__(self):
        arr = _as_float64(self.data, "features", 2)
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ShapeMismatch(f"features need n >= 1 and d >= 1, got {arr.shape}")
        object.__setattr__(self, "data", _freeze(arr))

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def d(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True)
class ProbMatrix:
    """N x K row-stochastic class probabilities."""

    data: np.ndarray

    def __post_init__(self):
        arr = _as_float64(self.data, "probabilities", 2)
        validate_prob_rows(arr)
        object.__setattr__(self, "data", _freeze(arr))

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def k(self) -> int:
        return self.data.shape[1]


def validate_prob_rows(arr: np.ndarray) -> None:
    """Raise unless every entry is in [0, 1] and every row sums to 1.

    Row sums are checked within PROB_ROW_TOL; the range check is exact.
    """
    if np.any(arr < 0.0) or np.any(arr > 1.0):
        raise EntryOutOfRange("probabilities must lie in [0, 1]")
    sums = arr.sum(axis=1)
    bad = np.nonzero(np.abs(sums - 1.0) > PROB_ROW_TOL)[0]
    if bad.size:
        raise RowNotNormalized(bad[0], sums[bad[0]])


def validate_prob_matrix(p: ProbMatrix) -> None:
    """Re-check an existing ProbMatrix (construction already validates)."""
    validate_prob_rows(np.asarray(p.data))


@dataclass(frozen=True)
class LabelVector:
    """N class assignments in {0..k-1}, with IGNORE marking excluded points."""

    labels: np.ndarray
    k: int

    def __post_init__(self):
        arr = np.asarray(self.labels, dtype=np.int64)
        if arr.ndim != 1:
            raise ShapeMismatch(f"labels must be 1-D, got shape {arr.shape}")
        if self.k < 1:
            raise ShapeMismatch("k must be >= 1")
        valid = arr != IGNORE
        if np.any(arr[valid] < 0) or np.any(arr[valid] >= self.k):
            raise EntryOutOfRange(f"labels must be IGNORE or in [0, {self.k})")
        object.__setattr__(self, "labels", _freeze(arr))

    @property
    def n(self) -> int:
        return self.labels.shape[0]

    def valid_mask(self) -> np.ndarray:
        return self.labels != IGNORE


@dataclass(frozen=True)
class ClassPrior:
    """Target-side class marginal: K nonnegative weights summing to 1.

    weights[k] is zero exactly where active[k] is False; inactive classes are
    excluded from the transport solve and can never be assigned.
    """

    weights: np.ndarray
    active: np.ndarray = field(default=None)

    def __post_init__(self):
        w = _as_float64(self.weights, "prior", 1)
        act = self.active
        if act is None:
            act = w > 0.0
        act = np.asarray(act, dtype=bool)
        if act.shape != w.shape:
            raise ShapeMismatch("prior and active mask must have equal length")
        if np.any(w < 0.0):
            raise EntryOutOfRange("prior weights must be nonnegative")
        if np.any(w[~act] != 0.0):
            raise EntryOutOfRange("inactive classes must carry zero weight")
        total = w.sum()
        if abs(total - 1.0) > PRIOR_SUM_TOL:
            raise RowNotNormalized(0, total)
        object.__setattr__(self, "weights", _freeze(w))
        object.__setattr__(self, "active", _freeze(act))

    @property
    def k(self) -> int:
        return self.weights.shape[0]


def row_normalize(features: FeatureMatrix) -> FeatureMatrix:
    """Scale every row to unit L2 norm, preserving direction.

    Raises ZeroRow for any exactly-zero row; normalization is idempotent
    within 1e-7.
    """
    arr = features.data
    norms = np.linalg.norm(arr, axis=1)
    zero = np.nonzero(norms == 0.0)[0]
    if zero.size:
        raise ZeroRow(zero[0])
    return FeatureMatrix(arr / norms[:, None])


def split_seed(seed: int, index: int) -> int:
    """Derive an independent 64-bit sub-seed from (seed, index).

    Built on numpy's SeedSequence spawn keys, so distinct indices yield
    statistically independent streams and the mapping is stable across
    platforms.
    """
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(index),))
    return int(ss.generate_state(1, np.uint64)[0])


def make_rng(seed: int) -> np.random.Generator:
    """Deterministic generator for a 64-bit seed."""
    return np.random.default_rng(np.random.SeedSequence(entropy=int(seed)))
