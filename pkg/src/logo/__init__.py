"""Local-global dual-consensus pseudo-label refinement.

A numpy library for source-free adaptation of point-wise classifiers:
multi-view ensemble smoothing, class-balanced prototype estimation,
entropy-regularized optimal-transport assignment under a global class
prior, dual-consensus filtering, and a desk-scale self-training loop with
an EMA teacher, plus segmentation metrics and a synthetic benchmark
generator with file-based CLI pipelines.
"""

from .consensus import ConsensusResult, dual_consensus_filter
from .core import (
    IGNORE,
    ClassPrior,
    FeatureMatrix,
    LabelVector,
    LogoError,
    ProbMatrix,
    make_rng,
    row_normalize,
    split_seed,
    validate_prob_matrix,
)
from .ensemble import EnsembleConfig, EnsembleOutput, aggregate_views, run_ensemble
from .metrics import confusion, evaluate, iou_per_class, miou, overall_accuracy
from .pipeline import RefineResult, refine, refine_stats
from .prototype import (
    AnchorConfig,
    AnchorSets,
    PrototypeSet,
    aggregate_prototypes,
    build_candidate_sets,
    mine_anchors,
)
from .synth import Scenario, ScenarioConfig, default_scenarios, generate
from .trainer import (
    AdaptationReport,
    AdapterModel,
    TrainConfig,
    adapt,
    cross_entropy_valid,
    ema_update,
    source_pretrain,
)
from .transport import (
    CostMatrix,
    SinkhornConfig,
    TransportPlan,
    assign_labels,
    build_cost_matrix,
    estimate_class_prior,
    expand_plan,
    sinkhorn_solve,
    transport_cost,
)

__version__ = "0.1.0"

__all__ = [
    "IGNORE",
    "AdaptationReport",
    "AdapterModel",
    "AnchorConfig",
    "AnchorSets",
    "ClassPrior",
    "ConsensusResult",
    "CostMatrix",
    "EnsembleConfig",
    "EnsembleOutput",
    "FeatureMatrix",
    "LabelVector",
    "LogoError",
    "ProbMatrix",
    "PrototypeSet",
    "RefineResult",
    "Scenario",
    "ScenarioConfig",
    "SinkhornConfig",
    "TrainConfig",
    "TransportPlan",
    "adapt",
    "aggregate_prototypes",
    "aggregate_views",
    "assign_labels",
    "build_candidate_sets",
    "build_cost_matrix",
    "confusion",
    "cross_entropy_valid",
    "default_scenarios",
    "dual_consensus_filter",
    "ema_update",
    "estimate_class_prior",
    "evaluate",
    "expand_plan",
    "generate",
    "iou_per_class",
    "make_rng",
    "mine_anchors",
    "miou",
    "overall_accuracy",
    "refine",
    "refine_stats",
    "row_normalize",
    "run_ensemble",
    "sinkhorn_solve",
    "source_pretrain",
    "split_seed",
    "transport_cost",
    "validate_prob_matrix",
]
