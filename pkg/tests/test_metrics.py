import numpy as np
import pytest

from logo.core import IGNORE, LabelVector, LengthMismatch, make_rng
from logo.metrics import (
    ConfusionMatrix,
    EmptyEvaluation,
    NoDefinedClass,
    confusion,
    evaluate,
    iou_per_class,
    miou,
    overall_accuracy,
)

from oracles import iou_by_hand, tally_confusion


def _lv(values, k):
    return LabelVector(np.array(values), k)


def _cm(counts, **kw):
    counts = np.array(counts)
    defaults = dict(
        n_ignored=0, ignored_true=np.zeros(len(counts), dtype=int), include_ignored=False
    )
    defaults.update(kw)
    return ConfusionMatrix(counts=counts, **defaults)


class TestConfusion:
    def test_perfect(self):
        cm = confusion(_lv([0, 1], 2), _lv([0, 1], 2))
        np.testing.assert_array_equal(cm.counts, [[1, 0], [0, 1]])

    def test_ignored_predictions_skipped(self):
        cm = confusion(_lv([0, 0], 2), _lv([IGNORE, 0], 2))
        assert cm.counts[0, 0] == 1
        assert cm.n_ignored == 1
        assert cm.n_total == 1

    def test_matches_tally_oracle(self):
        rng = make_rng(1)
        truth = rng.integers(0, 5, 1000)
        pred = rng.integers(0, 5, 1000)
        pred[rng.random(1000) < 0.1] = IGNORE
        cm = confusion(_lv(truth, 5), _lv(pred, 5))
        want, ignored = tally_confusion(truth, pred, 5)
        np.testing.assert_array_equal(cm.counts, want)
        assert cm.n_ignored == ignored

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            confusion(_lv([0], 2), _lv([0, 1], 2))

    def test_count_ignored_mode_tracks_true_class(self):
        cm = confusion(_lv([0, 1, 1], 2), _lv([0, IGNORE, 1], 2), count_ignored=True)
        assert cm.ignored_true.tolist() == [0, 1]
        assert cm.n_total == 3
        ious, defined = iou_per_class(cm)
        # class 1: TP=1, FN includes the ignored point
        assert ious[1] == pytest.approx(0.5)
        assert overall_accuracy(cm) == pytest.approx(2 / 3)


class TestIoU:
    def test_perfect_diag(self):
        ious, defined = iou_per_class(_cm([[5, 0], [0, 5]]))
        np.testing.assert_allclose(ious, [1.0, 1.0])
        assert defined.all()

    def test_hand_computed(self):
        ious, defined = iou_per_class(_cm([[3, 1], [1, 3]]))
        np.testing.assert_allclose(ious, [0.6, 0.6])

    def test_absent_class_flagged(self):
        ious, defined = iou_per_class(_cm([[2, 0, 0], [0, 3, 0], [0, 0, 0]]))
        assert defined.tolist() == [True, True, False]
        assert np.isnan(ious[2])

    def test_matches_oracle_on_random_matrix(self):
        rng = make_rng(3)
        counts = rng.integers(0, 30, (6, 6))
        ious, defined = iou_per_class(_cm(counts))
        want = iou_by_hand(counts.tolist())
        for got, flag, expected in zip(ious, defined, want):
            if expected is None:
                assert not flag
            else:
                assert got == pytest.approx(expected)


class TestMiou:
    def test_plain_mean(self):
        assert miou(np.array([0.6, 0.6]), np.array([True, True])) == pytest.approx(0.6)

    def test_excludes_undefined(self):
        ious = np.array([1.0, np.nan, 0.5])
        defined = np.array([True, False, True])
        assert miou(ious, defined) == pytest.approx(0.75)

    def test_no_defined_class(self):
        with pytest.raises(NoDefinedClass):
            miou(np.array([np.nan]), np.array([False]))


class TestOverallAccuracy:
    def test_diag_only(self):
        assert overall_accuracy(_cm([[4, 0], [0, 6]])) == 1.0

    def test_hand_computed(self):
        assert overall_accuracy(_cm([[3, 1], [1, 3]])) == pytest.approx(0.75)

    def test_empty(self):
        with pytest.raises(EmptyEvaluation):
            overall_accuracy(_cm([[0, 0], [0, 0]]))


class TestProperties:
    def test_class_permutation_consistency(self):
        rng = make_rng(4)
        truth = rng.integers(0, 4, 500)
        pred = rng.integers(0, 4, 500)
        perm = np.array([2, 0, 3, 1])
        base = evaluate(_lv(truth, 4), _lv(pred, 4))
        remapped = evaluate(_lv(perm[truth], 4), _lv(perm[pred], 4))
        assert base["miou"] == pytest.approx(remapped["miou"])
        assert base["oa"] == pytest.approx(remapped["oa"])
        inverse = np.argsort(perm)
        for c in range(4):
            assert base["per_class_iou"][c] == pytest.approx(
                remapped["per_class_iou"][perm[c]]
            )
        assert inverse is not None

    def test_bounds(self):
        rng = make_rng(5)
        truth = rng.integers(0, 3, 200)
        pred = rng.integers(0, 3, 200)
        rep = evaluate(_lv(truth, 3), _lv(pred, 3))
        assert 0.0 <= rep["miou"] <= 1.0
        assert 0.0 <= rep["oa"] <= 1.0
        for v in rep["per_class_iou"]:
            assert v is None or 0.0 <= v <= 1.0

    def test_head_dominance_makes_oa_exceed_miou(self):
        # 190 head points nearly perfect, 10 tail points all wrong
        truth = np.array([0] * 190 + [1] * 10)
        pred = np.array([0] * 190 + [0] * 10)
        rep = evaluate(_lv(truth, 2), _lv(pred, 2))
        assert rep["oa"] > rep["miou"]
