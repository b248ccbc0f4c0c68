import hashlib

import numpy as np
import pytest

import logo.trainer as trainer_mod
from logo.core import IGNORE, FeatureMatrix, LabelVector, make_rng
from logo.ensemble import EnsembleConfig
from logo.synth import ScenarioConfig, generate
from logo.trainer import (
    AdapterModel,
    AllSamplesIgnored,
    FrozenMismatch,
    TrainConfig,
    adapt,
    cross_entropy_valid,
    ema_update,
    source_pretrain,
)

from oracles import finite_diff_adapter_grads


def _model(seed=0, d=4, k=3):
    rng = np.random.default_rng(seed)
    return AdapterModel.identity_adapter(rng.standard_normal((k, d)), rng.standard_normal(k))


def _loss_only(model, feats, labels):
    return cross_entropy_valid(model, feats, labels)[0]


class TestCrossEntropy:
    def test_confident_correct_prediction_zero_loss(self):
        model = AdapterModel.identity_adapter(np.array([[60.0, 0.0], [0.0, 60.0]]), np.zeros(2))
        feats = FeatureMatrix(np.array([[1.0, 0.0], [0.0, 1.0]]))
        loss, gs, gb = cross_entropy_valid(model, feats, LabelVector(np.array([0, 1]), 2))
        assert loss == pytest.approx(0.0, abs=1e-12)

    def test_all_ignored_is_noop(self):
        model = _model()
        feats = FeatureMatrix(np.ones((3, 4)))
        loss, gs, gb = cross_entropy_valid(model, feats, LabelVector(np.full(3, IGNORE), 3))
        assert loss == 0.0
        np.testing.assert_array_equal(gs, np.zeros(4))
        np.testing.assert_array_equal(gb, np.zeros(4))

    def test_gradient_matches_finite_differences(self):
        rng = make_rng(3)
        model = _model(seed=1, d=5, k=3).with_adapter(
            1 + 0.2 * rng.standard_normal(5), 0.1 * rng.standard_normal(5)
        )
        feats = FeatureMatrix(rng.standard_normal((8, 5)))
        labels = LabelVector(rng.integers(0, 3, 8), 3)
        _, gs, gb = cross_entropy_valid(model, feats, labels)
        fs, fb = finite_diff_adapter_grads(model, feats, labels, _loss_only)
        np.testing.assert_allclose(gs, fs, rtol=1e-5, atol=1e-8)
        np.testing.assert_allclose(gb, fb, rtol=1e-5, atol=1e-8)

    def test_extra_ignored_samples_change_nothing(self):
        rng = make_rng(4)
        model = _model(seed=2)
        feats = rng.standard_normal((6, 4))
        labels = rng.integers(0, 3, 6)
        base = cross_entropy_valid(
            model, FeatureMatrix(feats), LabelVector(labels, 3)
        )
        padded_feats = np.vstack([feats, rng.standard_normal((4, 4))])
        padded_labels = np.concatenate([labels, np.full(4, IGNORE)])
        padded = cross_entropy_valid(
            model, FeatureMatrix(padded_feats), LabelVector(padded_labels, 3)
        )
        assert base[0] == pytest.approx(padded[0], abs=1e-12)
        np.testing.assert_allclose(base[1], padded[1], atol=1e-12)
        np.testing.assert_allclose(base[2], padded[2], atol=1e-12)


class TestEma:
    def test_alpha_zero_copies_student(self):
        t, s = _model(0), _model(0).with_adapter(np.full(4, 2.0), np.full(4, -1.0))
        out = ema_update(t, s, 0.0)
        np.testing.assert_array_equal(out.scale, s.scale)
        np.testing.assert_array_equal(out.shift, s.shift)

    def test_alpha_one_keeps_teacher(self):
        t, s = _model(0), _model(0).with_adapter(np.full(4, 2.0), np.full(4, -1.0))
        out = ema_update(t, s, 1.0)
        np.testing.assert_array_equal(out.scale, t.scale)

    def test_geometric_contraction(self):
        teacher = _model(0)
        student = _model(0).with_adapter(np.full(4, 3.0), np.full(4, 1.0))
        gap0 = np.linalg.norm(np.concatenate([teacher.scale - student.scale, teacher.shift - student.shift]))
        t = teacher
        for _ in range(25):
            t = ema_update(t, student, 0.999)
        gap = np.linalg.norm(np.concatenate([t.scale - student.scale, t.shift - student.shift]))
        assert gap == pytest.approx(0.999**25 * gap0, abs=1e-9)

    def test_frozen_mismatch(self):
        with pytest.raises(FrozenMismatch):
            ema_update(_model(0), _model(1), 0.5)


def _tiny_scenario():
    return generate(
        ScenarioConfig(
            k=3, d=4, n_source=600, n_target=600, tail_decay=0.7,
            cluster_sigma=0.3, shift_rotation_angle=0.1, shift_translation=0.4, seed=5,
        )
    )


def _frozen_digest(model):
    return hashlib.sha256(model.weight.tobytes() + model.bias.tobytes()).hexdigest()


class TestAdapt:
    def test_zero_epochs_is_identity(self):
        sc = _tiny_scenario()
        model = _model(d=4, k=3)
        report = adapt(model, sc.target_features, TrainConfig(epochs=0, seed=1))
        assert report.epochs == ()
        np.testing.assert_array_equal(report.teacher.scale, model.scale)

    def test_frozen_parameters_untouched(self):
        sc = _tiny_scenario()
        cfg = TrainConfig(epochs=2, steps_per_epoch=20, batch_size=32, learning_rate=0.1,
                          ensemble=EnsembleConfig(views=2, noise_sigma=0.1, seed=3), seed=2)
        model = source_pretrain(sc.source_features, sc.source_labels,
                                TrainConfig(epochs=2, steps_per_epoch=100, batch_size=64, learning_rate=0.5, seed=0))
        digest = _frozen_digest(model)
        report = adapt(model, sc.target_features, cfg)
        assert _frozen_digest(report.teacher) == digest
        assert _frozen_digest(report.student) == digest

    def test_teacher_stays_in_student_envelope(self):
        sc = _tiny_scenario()
        model = source_pretrain(sc.source_features, sc.source_labels,
                                TrainConfig(epochs=2, steps_per_epoch=100, batch_size=64, learning_rate=0.5, seed=0))
        cfg = TrainConfig(epochs=1, steps_per_epoch=30, batch_size=32, learning_rate=0.2,
                          ema_momentum=0.9, ensemble=EnsembleConfig(views=2, noise_sigma=0.1, seed=3), seed=2)

        steps = []
        orig = trainer_mod.ema_update

        def tracking_ema(teacher, student, alpha):
            steps.append(student)
            return orig(teacher, student, alpha)

        trainer_mod.ema_update = tracking_ema
        try:
            report = adapt(model, sc.target_features, cfg)
        finally:
            trainer_mod.ema_update = orig
        stack_scale = np.stack([model.scale] + [s.scale for s in steps])
        stack_shift = np.stack([model.shift] + [s.shift for s in steps])
        eps = 1e-12
        assert np.all(report.teacher.scale >= stack_scale.min(axis=0) - eps)
        assert np.all(report.teacher.scale <= stack_scale.max(axis=0) + eps)
        assert np.all(report.teacher.shift >= stack_shift.min(axis=0) - eps)
        assert np.all(report.teacher.shift <= stack_shift.max(axis=0) + eps)

    def test_all_samples_ignored_aborts_with_report(self, monkeypatch):
        sc = _tiny_scenario()
        model = _model(d=4, k=3)

        class FakeConsensus:
            kept_count = 0
            consensus_rate = 0.0
            per_class_kept = np.zeros(3, dtype=int)

        class FakeResult:
            consensus = FakeConsensus()
            labels = LabelVector(np.full(600, IGNORE), 3)
            y_raw = LabelVector(np.zeros(600, dtype=int), 3)
            plan = None

        monkeypatch.setattr(trainer_mod, "generate_pseudo_labels", lambda *a, **k: FakeResult())
        with pytest.raises(AllSamplesIgnored) as exc:
            adapt(model, sc.target_features, TrainConfig(epochs=1, seed=0))
        assert exc.value.epoch == 0
        assert exc.value.report is not None


class TestSourcePretrain:
    def test_separable_blobs_high_accuracy(self):
        rng = make_rng(0)
        n = 400
        labels = np.array([0] * n + [1] * n)
        feats = np.vstack([
            rng.standard_normal((n, 3)) * 0.2 + np.array([2.0, 0.0, 0.0]),
            rng.standard_normal((n, 3)) * 0.2 + np.array([-2.0, 0.0, 0.0]),
        ])
        cfg = TrainConfig(epochs=3, steps_per_epoch=150, batch_size=64, learning_rate=0.5, seed=1)
        model = source_pretrain(FeatureMatrix(feats), LabelVector(labels, 2), cfg)
        acc = (model.predict(feats) == labels).mean()
        assert acc >= 0.99

    def test_deterministic(self):
        sc = _tiny_scenario()
        cfg = TrainConfig(epochs=2, steps_per_epoch=80, batch_size=32, learning_rate=0.3, seed=9)
        a = source_pretrain(sc.source_features, sc.source_labels, cfg)
        b = source_pretrain(sc.source_features, sc.source_labels, cfg)
        np.testing.assert_array_equal(a.weight, b.weight)
        np.testing.assert_array_equal(a.bias, b.bias)

    def test_adapter_starts_identity(self):
        sc = _tiny_scenario()
        cfg = TrainConfig(epochs=1, steps_per_epoch=10, batch_size=16, learning_rate=0.1, seed=0)
        model = source_pretrain(sc.source_features, sc.source_labels, cfg)
        np.testing.assert_array_equal(model.scale, np.ones(4))
        np.testing.assert_array_equal(model.shift, np.zeros(4))
