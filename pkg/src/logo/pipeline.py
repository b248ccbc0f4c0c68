"""End-to-end pseudo-label refinement.

Chains the stages on one ensemble pass: candidate sets, anchor mining,
prototype aggregation, prior estimation, cost construction, the transport
solve, and consensus filtering. Three assignment modes exist so ablations
can bypass parts of the chain:

  full    transport assignment intersected with the ensemble prediction
  ot      transport assignment for every sample, no filtering
  greedy  nearest-prototype assignment for every sample, no transport
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .consensus import ConsensusResult, dual_consensus_filter
from .core import LabelVector, LogoError
from .ensemble import EnsembleOutput
from .prototype import (
    AnchorConfig,
    PrototypeSet,
    aggregate_prototypes,
    build_candidate_sets,
    mine_anchors,
)
from .transport import (
    CostMatrix,
    SinkhornConfig,
    TransportPlan,
    assign_labels,
    build_cost_matrix,
    estimate_class_prior,
    sinkhorn_solve,
)

ASSIGNMENT_MODES = ("full", "ot", "greedy")


class UnknownMode(LogoError):
    pass


@dataclass(frozen=True)
class RefineResult:
    """Every intermediate stage of one refinement pass."""

    y_raw: LabelVector
    y_assigned: LabelVector
    consensus: ConsensusResult
    prototypes: PrototypeSet
    cost: CostMatrix
    plan: TransportPlan | None

    @property
    def labels(self) -> LabelVector:
        return self.consensus.labels


def _keep_all(labels: LabelVector) -> ConsensusResult:
    per_class = np.bincount(labels.labels, minlength=labels.k).astype(np.int64)
    return ConsensusResult(
        labels=labels,
        kept_count=labels.n,
        per_class_kept=per_class,
        consensus_rate=1.0,
    )


def refine(
    ensemble_out: EnsembleOutput,
    anchor_cfg: AnchorConfig = AnchorConfig(),
    sinkhorn_cfg: SinkhornConfig = SinkhornConfig(),
    mode: str = "full",
) -> RefineResult:
    """Refine one ensemble pass into filtered pseudo-labels."""
    if mode not in ASSIGNMENT_MODES:
        raise UnknownMode(f"mode must be one of {ASSIGNMENT_MODES}, got {mode!r}")
    k = ensemble_out.probs.k
    candidates = build_candidate_sets(ensemble_out.labels, k)
    anchors = mine_anchors(candidates, ensemble_out.confidence, anchor_cfg)
    prototypes = aggregate_prototypes(anchors, ensemble_out.features)
    cost = build_cost_matrix(ensemble_out.features, prototypes)

    if mode == "greedy":
        nearest = np.argmin(cost.values, axis=1)  # inactive columns are +inf
        y_assigned = LabelVector(nearest, k)
        return RefineResult(
            y_raw=ensemble_out.labels,
            y_assigned=y_assigned,
            consensus=_keep_all(y_assigned),
            prototypes=prototypes,
            cost=cost,
            plan=None,
        )

    prior = estimate_class_prior(anchors.candidate_counts)
    plan = sinkhorn_solve(cost, prior, sinkhorn_cfg)
    y_assigned = assign_labels(plan)
    if mode == "ot":
        consensus = _keep_all(y_assigned)
    else:
        consensus = dual_consensus_filter(ensemble_out.labels, y_assigned)
    return RefineResult(
        y_raw=ensemble_out.labels,
        y_assigned=y_assigned,
        consensus=consensus,
        prototypes=prototypes,
        cost=cost,
        plan=plan,
    )


def refine_stats(result: RefineResult) -> dict:
    """JSON-friendly statistics of one refinement pass."""
    stats = {
        "n": result.y_raw.n,
        "num_classes": result.y_raw.k,
        "mode": "greedy" if result.plan is None else "transport",
        "kept_count": result.consensus.kept_count,
        "consensus_rate": result.consensus.consensus_rate,
        "per_class_kept": [int(c) for c in result.consensus.per_class_kept],
        "active_classes": [int(a) for a in np.nonzero(result.prototypes.active)[0]],
    }
    if result.plan is not None:
        stats["sinkhorn"] = {
            "converged": bool(result.plan.converged),
            "iterations": int(result.plan.iterations),
            "marginal_error": float(result.plan.marginal_error),
        }
    return stats
