"""Global assignment via entropy-regularized optimal transport.

Samples (uniform weight 1/N) are coupled to class prototypes under a global
class prior. The coupling minimizes total cosine-distance cost minus an
entropy term and is solved with alternating row/column scalings in the log
domain, which stays finite even when exp(-cost/lambda) underflows.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    ClassPrior,
    DimensionMismatch,
    FeatureMatrix,
    LabelVector,
    LogoError,
    ShapeMismatch,
    row_normalize,
)
from .prototype import PrototypeSet

# Placeholder stored in cost columns of inactive classes; those columns are
# dropped before the solve and can never be assigned.
INACTIVE_COST = np.inf


class NoActiveClass(LogoError):
    pass


class AllCountsZero(LogoError):
    pass


class NumericalDivergence(LogoError):
    pass


@dataclass(frozen=True)
class CostMatrix:
    """N x K cosine distances in [0, 2]; inactive columns hold INACTIVE_COST."""

    values: np.ndarray
    column_active: np.ndarray

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def k(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class SinkhornConfig:
    """Entropy weight, iteration cap, and marginal L1 stopping tolerance."""

    lam: float = 0.05
    max_iters: int = 1000
    tol: float = 1e-6

    def __post_init__(self):
        if self.lam <= 0:
            raise ShapeMismatch("lam must be > 0")
        if self.tol <= 0:
            raise ShapeMismatch("tol must be > 0")
        if self.max_iters < 1:
            raise ShapeMismatch("max_iters must be >= 1")


@dataclass(frozen=True)
class TransportPlan:
    """Nonnegative coupling over samples x active classes.

    plan            N x K_active coupling, rows ~ 1/N, columns ~ class prior
    active_classes  original class index of each plan column
    num_classes     total class count K (including inactive classes)
    row_marginal    prescribed row sums (uniform 1/N)
    class_marginal  prescribed column sums (prior restricted to active classes)
    converged       whether marginal_error reached tol within max_iters
    iterations      scaling iterations executed
    marginal_error  final L1 row error + L1 column error
    """

    plan: np.ndarray
    active_classes: np.ndarray
    num_classes: int
    row_marginal: np.ndarray
    class_marginal: np.ndarray
    converged: bool
    iterations: int
    marginal_error: float


def build_cost_matrix(features: FeatureMatrix, prototypes: PrototypeSet) -> CostMatrix:
    """Cosine distance of every feature row to every active prototype.

    Entries are clamped to [0, 2] against rounding; inactive prototype
    columns are filled with INACTIVE_COST.
    """
    if features.d != prototypes.d:
        raise DimensionMismatch(
            f"features d={features.d} vs prototypes d={prototypes.d}"
        )
    if not np.any(prototypes.active):
        raise NoActiveClass("no active prototype to build costs against")
    unit = row_normalize(features).data
    cost = np.full((features.n, prototypes.k), INACTIVE_COST, dtype=np.float64)
    act = prototypes.active
    # prototypes are unit-norm already, so the inner product is the cosine
    cost[:, act] = np.clip(1.0 - unit @ prototypes.vectors[act].T, 0.0, 2.0)
    return CostMatrix(values=cost, column_active=act.copy())


def estimate_class_prior(candidate_counts) -> ClassPrior:
    """Class prior proportional to per-class prediction counts."""
    counts = np.asarray(candidate_counts, dtype=np.float64)
    total = counts.sum()
    if total <= 0:
        raise AllCountsZero("every candidate count is zero")
    return ClassPrior(weights=counts / total, active=counts > 0)


def _logsumexp(a: np.ndarray, axis: int) -> np.ndarray:
    m = np.max(a, axis=axis, keepdims=True)
    out = np.log(np.sum(np.exp(a - m), axis=axis, keepdims=True)) + m
    return np.squeeze(out, axis=axis)


def sinkhorn_solve(
    cost: CostMatrix, prior: ClassPrior, cfg: SinkhornConfig = SinkhornConfig()
) -> TransportPlan:
    """Alternate log-domain row/column scalings until the marginals fit.

    Stops once L1 row error + L1 column error <= cfg.tol or after
    cfg.max_iters iterations; the plan, iteration count, and final error are
    reported either way with an honest converged flag.
    """
    if prior.k != cost.k:
        raise ShapeMismatch(f"prior k={prior.k} vs cost k={cost.k}")
    active = prior.active & cost.column_active
    if not np.any(active):
        raise NoActiveClass("prior and cost share no active class")
    idx = np.nonzero(active)[0]
    m = cost.values[:, idx]
    n = cost.n
    r = np.full(n, 1.0 / n)
    c = prior.weights[idx]
    c = c / c.sum()  # re-normalize in case caller dropped classes upstream

    scaled = -m / cfg.lam
    log_r = np.log(r)
    log_c = np.log(c)
    f = np.zeros(n)
    g = np.zeros(idx.size)
    err = np.inf
    iterations = 0
    for iterations in range(1, cfg.max_iters + 1):
        f = log_r - _logsumexp(scaled + g[None, :], axis=1)
        g = log_c - _logsumexp(scaled + f[:, None], axis=0)
        plan = np.exp(scaled + f[:, None] + g[None, :])
        err = float(
            np.abs(plan.sum(axis=1) - r).sum() + np.abs(plan.sum(axis=0) - c).sum()
        )
        if err <= cfg.tol:
            break
    if not (np.all(np.isfinite(f)) and np.all(np.isfinite(g))):
        raise NumericalDivergence("non-finite scaling potentials")
    return TransportPlan(
        plan=plan,
        active_classes=idx,
        num_classes=cost.k,
        row_marginal=r,
        class_marginal=c,
        converged=err <= cfg.tol,
        iterations=iterations,
        marginal_error=err,
    )


def assign_labels(plan: TransportPlan) -> LabelVector:
    """Row-argmax of the coupling, mapped back to original class indices.

    Ties break toward the lowest class index (active_classes is ascending,
    argmax keeps the first occurrence).
    """
    winners = plan.active_classes[np.argmax(plan.plan, axis=1)]
    return LabelVector(winners, plan.num_classes)


def transport_cost(plan: TransportPlan, cost: CostMatrix) -> float:
    """Total cost <plan, cost> over the active columns."""
    return float((plan.plan * cost.values[:, plan.active_classes]).sum())


def expand_plan(plan: TransportPlan) -> np.ndarray:
    """N x K dense coupling with zero columns for inactive classes."""
    full = np.zeros((plan.plan.shape[0], plan.num_classes), dtype=np.float64)
    full[:, plan.active_classes] = plan.plan
    return full
