"""Offline self-training with a frozen classifier and an EMA teacher.

The model is a frozen linear classifier preceded by a trainable per-feature
affine adapter: logits(x) = W (scale * x + shift) + b. Adaptation trains
only (scale, shift) by plain gradient descent on cross-entropy over
consensus-valid pseudo-labels, while a teacher copy tracks the student via
exponential moving average and regenerates the pseudo-labels at every epoch
start.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import metrics
from .core import (
    IGNORE,
    DimensionMismatch,
    EntryOutOfRange,
    FeatureMatrix,
    LabelVector,
    LogoError,
    ShapeMismatch,
    make_rng,
    split_seed,
)
from .ensemble import EnsembleConfig, run_ensemble
from .pipeline import ASSIGNMENT_MODES, RefineResult, UnknownMode, refine
from .prototype import AnchorConfig
from .transport import SinkhornConfig


class FrozenMismatch(LogoError):
    pass


class AllSamplesIgnored(LogoError):
    def __init__(self, epoch, report=None):
        self.epoch = int(epoch)
        self.report = report
        super().__init__(f"pseudo-label pass of epoch {self.epoch} kept zero samples")


@dataclass(frozen=True)
class AdapterModel:
    """Frozen linear classifier with a trainable per-feature affine adapter."""

    weight: np.ndarray  # (K, D), frozen
    bias: np.ndarray  # (K,), frozen
    scale: np.ndarray  # (D,), trainable
    shift: np.ndarray  # (D,), trainable

    def __post_init__(self):
        w = np.asarray(self.weight, dtype=np.float64)
        b = np.asarray(self.bias, dtype=np.float64)
        s = np.asarray(self.scale, dtype=np.float64)
        t = np.asarray(self.shift, dtype=np.float64)
        if w.ndim != 2 or b.shape != (w.shape[0],):
            raise ShapeMismatch("weight must be (K, D) with bias (K,)")
        if s.shape != (w.shape[1],) or t.shape != (w.shape[1],):
            raise ShapeMismatch("scale and shift must be (D,)")
        for name, a in (("weight", w), ("bias", b), ("scale", s), ("shift", t)):
            if not np.all(np.isfinite(a)):
                raise EntryOutOfRange(f"{name} contains non-finite entries")
            a.flags.writeable = False
        object.__setattr__(self, "weight", w)
        object.__setattr__(self, "bias", b)
        object.__setattr__(self, "scale", s)
        object.__setattr__(self, "shift", t)

    @property
    def input_dim(self) -> int:
        return self.weight.shape[1]

    @property
    def num_classes(self) -> int:
        return self.weight.shape[0]

    def logits(self, x: np.ndarray) -> np.ndarray:
        return (x * self.scale + self.shift) @ self.weight.T + self.bias

    def predict_proba(self, x: np.ndarray) -> np.ndarray:
        z = self.logits(x)
        z = z - z.max(axis=1, keepdims=True)
        e = np.exp(z)
        return e / e.sum(axis=1, keepdims=True)

    def predict(self, x: np.ndarray) -> np.ndarray:
        return np.argmax(self.logits(x), axis=1)

    def with_adapter(self, scale: np.ndarray, shift: np.ndarray) -> "AdapterModel":
        return AdapterModel(self.weight, self.bias, scale, shift)

    @classmethod
    def identity_adapter(cls, weight, bias) -> "AdapterModel":
        d = np.asarray(weight).shape[1]
        return cls(weight, bias, np.ones(d), np.zeros(d))


@dataclass(frozen=True)
class TrainConfig:
    """Hyperparameters for source pre-training and target adaptation."""

    epochs: int = 3
    steps_per_epoch: int = 50
    batch_size: int = 64
    learning_rate: float = 1e-3
    ema_momentum: float = 0.999
    ensemble: EnsembleConfig = field(default_factory=EnsembleConfig)
    anchor: AnchorConfig = field(default_factory=AnchorConfig)
    sinkhorn: SinkhornConfig = field(default_factory=SinkhornConfig)
    seed: int = 0
    assignment: str = "full"  # full | ot | greedy, see logo.pipeline

    def __post_init__(self):
        if self.epochs < 0:
            raise ShapeMismatch("epochs must be >= 0")
        if self.steps_per_epoch < 1 or self.batch_size < 1:
            raise ShapeMismatch("steps_per_epoch and batch_size must be >= 1")
        if self.learning_rate <= 0:
            raise ShapeMismatch("learning_rate must be > 0")
        if not (0.0 <= self.ema_momentum < 1.0):
            raise ShapeMismatch("ema_momentum must lie in [0, 1)")
        if self.assignment not in ASSIGNMENT_MODES:
            raise UnknownMode(f"assignment must be one of {ASSIGNMENT_MODES}")


@dataclass(frozen=True)
class EpochStats:
    """Diagnostics logged after each adaptation epoch."""

    epoch: int
    consensus_rate: float
    per_class_kept: tuple
    mean_ce_loss: float
    sinkhorn_converged: bool | None
    sinkhorn_iterations: int | None
    teacher_miou: float | None = None
    teacher_oa: float | None = None


@dataclass(frozen=True)
class AdaptationReport:
    """Per-epoch diagnostics plus the final teacher model."""

    epochs: tuple
    teacher: AdapterModel
    student: AdapterModel

    def to_dict(self) -> dict:
        return {
            "epochs": [
                {
                    "epoch": e.epoch,
                    "consensus_rate": e.consensus_rate,
                    "per_class_kept": list(e.per_class_kept),
                    "mean_ce_loss": e.mean_ce_loss,
                    "sinkhorn_converged": e.sinkhorn_converged,
                    "sinkhorn_iterations": e.sinkhorn_iterations,
                    "teacher_miou": e.teacher_miou,
                    "teacher_oa": e.teacher_oa,
                }
                for e in self.epochs
            ]
        }


def cross_entropy_valid(
    model: AdapterModel, batch_features: FeatureMatrix, batch_labels: LabelVector
):
    """Mean cross-entropy over non-IGNORE samples and its adapter gradient.

    Returns (loss, grad_scale, grad_shift). A batch with zero valid samples
    is a defined no-op: loss 0 and zero gradients.
    """
    if batch_features.n != batch_labels.n:
        raise ShapeMismatch("batch features and labels disagree on N")
    mask = batch_labels.valid_mask()
    d = model.input_dim
    if not np.any(mask):
        return 0.0, np.zeros(d), np.zeros(d)
    x = batch_features.data[mask]
    y = batch_labels.labels[mask]
    n_valid = x.shape[0]

    z = model.logits(x)
    z = z - z.max(axis=1, keepdims=True)
    log_norm = np.log(np.exp(z).sum(axis=1))
    loss = float(np.mean(log_norm - z[np.arange(n_valid), y]))

    delta = np.exp(z - log_norm[:, None])  # softmax
    delta[np.arange(n_valid), y] -= 1.0
    delta /= n_valid
    back = delta @ model.weight  # (n_valid, D)
    grad_scale = (back * x).sum(axis=0)
    grad_shift = back.sum(axis=0)
    return loss, grad_scale, grad_shift


def ema_update(teacher: AdapterModel, student: AdapterModel, alpha: float) -> AdapterModel:
    """Convex blend of the trainable adapter, frozen parts untouched."""
    if not (
        np.array_equal(teacher.weight, student.weight)
        and np.array_equal(teacher.bias, student.bias)
    ):
        raise FrozenMismatch("teacher and student disagree on frozen parameters")
    return teacher.with_adapter(
        alpha * teacher.scale + (1.0 - alpha) * student.scale,
        alpha * teacher.shift + (1.0 - alpha) * student.shift,
    )


def _teacher_metrics(model: AdapterModel, features: FeatureMatrix, truth: LabelVector):
    pred = LabelVector(model.predict(features.data), model.num_classes)
    cm = metrics.confusion(truth, pred)
    ious, defined = metrics.iou_per_class(cm)
    return metrics.miou(ious, defined), metrics.overall_accuracy(cm)


def generate_pseudo_labels(
    model: AdapterModel, features: FeatureMatrix, cfg: TrainConfig, epoch: int = 0
) -> RefineResult:
    """One global inference pass with the per-epoch ensemble sub-seed."""
    ens_cfg = replace(cfg.ensemble, seed=split_seed(cfg.ensemble.seed, epoch))
    out = run_ensemble(model, features, ens_cfg)
    return refine(out, cfg.anchor, cfg.sinkhorn, mode=cfg.assignment)


def adapt(
    source_model: AdapterModel,
    target_features: FeatureMatrix,
    cfg: TrainConfig,
    ground_truth: LabelVector | None = None,
) -> AdaptationReport:
    """Self-train the adapter on refined pseudo-labels.

    Per epoch: regenerate pseudo-labels from the teacher over the full
    dataset, then take steps_per_epoch mini-batch gradient steps on the
    student with an EMA teacher update after every step. Raises
    AllSamplesIgnored (with the partial report attached) if a regeneration
    pass keeps nothing.
    """
    if source_model.input_dim != target_features.d:
        raise DimensionMismatch("model and target features disagree on D")
    teacher = source_model
    student = source_model
    batch_rng = make_rng(split_seed(cfg.seed, 1))
    n = target_features.n
    stats = []
    for epoch in range(cfg.epochs):
        result = generate_pseudo_labels(teacher, target_features, cfg, epoch)
        if result.consensus.kept_count == 0:
            partial = AdaptationReport(tuple(stats), teacher, student)
            raise AllSamplesIgnored(epoch, report=partial)
        y_final = result.labels.labels

        losses = []
        for _ in range(cfg.steps_per_epoch):
            idx = batch_rng.integers(0, n, size=cfg.batch_size)
            batch_x = FeatureMatrix(target_features.data[idx])
            batch_y = LabelVector(y_final[idx], result.labels.k)
            loss, g_scale, g_shift = cross_entropy_valid(student, batch_x, batch_y)
            student = student.with_adapter(
                student.scale - cfg.learning_rate * g_scale,
                student.shift - cfg.learning_rate * g_shift,
            )
            teacher = ema_update(teacher, student, cfg.ema_momentum)
            losses.append(loss)

        t_miou = t_oa = None
        if ground_truth is not None:
            t_miou, t_oa = _teacher_metrics(teacher, target_features, ground_truth)
        stats.append(
            EpochStats(
                epoch=epoch,
                consensus_rate=result.consensus.consensus_rate,
                per_class_kept=tuple(int(c) for c in result.consensus.per_class_kept),
                mean_ce_loss=float(np.mean(losses)),
                sinkhorn_converged=None if result.plan is None else bool(result.plan.converged),
                sinkhorn_iterations=None if result.plan is None else int(result.plan.iterations),
                teacher_miou=t_miou,
                teacher_oa=t_oa,
            )
        )
    return AdaptationReport(tuple(stats), teacher, student)


def source_pretrain(
    features: FeatureMatrix, labels: LabelVector, cfg: TrainConfig
) -> AdapterModel:
    """Supervised training of the full linear classifier on labeled data.

    Trains weight and bias by mini-batch gradient descent on cross-entropy;
    the adapter starts and stays at identity (scale 1, shift 0). Deterministic
    under a fixed cfg.seed.
    """
    if np.any(labels.labels == IGNORE):
        raise EntryOutOfRange("source labels must not contain IGNORE")
    if features.n != labels.n:
        raise ShapeMismatch("features and labels disagree on N")
    k, d, n = labels.k, features.d, features.n
    rng = make_rng(split_seed(cfg.seed, 2))
    weight = 0.01 * rng.standard_normal((k, d))
    bias = np.zeros(k)
    x_all = features.data
    y_all = labels.labels
    for _ in range(cfg.epochs * cfg.steps_per_epoch):
        idx = rng.integers(0, n, size=cfg.batch_size)
        x = x_all[idx]
        y = y_all[idx]
        z = x @ weight.T + bias
        z = z - z.max(axis=1, keepdims=True)
        p = np.exp(z)
        p /= p.sum(axis=1, keepdims=True)
        p[np.arange(len(y)), y] -= 1.0
        p /= len(y)
        weight = weight - cfg.learning_rate * (p.T @ x)
        bias = bias - cfg.learning_rate * p.sum(axis=0)
    return AdapterModel.identity_adapter(weight, bias)
