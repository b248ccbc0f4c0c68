import numpy as np
import pytest

from logo.consensus import dual_consensus_filter
from logo.core import IGNORE, EntryOutOfRange, LabelVector, LengthMismatch, make_rng


def _lv(values, k=3):
    return LabelVector(np.array(values), k)


class TestDualConsensusFilter:
    def test_direct_rule(self):
        res = dual_consensus_filter(_lv([0, 1, 2]), _lv([0, 2, 2]))
        assert res.labels.labels.tolist() == [0, IGNORE, 2]
        assert res.kept_count == 2
        assert res.consensus_rate == pytest.approx(2 / 3)
        assert res.per_class_kept.tolist() == [1, 0, 1]

    def test_full_agreement(self):
        labels = _lv([2, 0, 1, 1])
        res = dual_consensus_filter(labels, _lv([2, 0, 1, 1]))
        np.testing.assert_array_equal(res.labels.labels, labels.labels)
        assert res.consensus_rate == 1.0

    def test_full_disagreement(self):
        res = dual_consensus_filter(_lv([0, 0, 0]), _lv([1, 2, 1]))
        assert res.labels.labels.tolist() == [IGNORE] * 3
        assert res.consensus_rate == 0.0
        assert res.kept_count == 0

    def test_symmetric_kept_mask(self):
        rng = make_rng(1)
        a = _lv(rng.integers(0, 3, 100))
        b = _lv(rng.integers(0, 3, 100))
        ab = dual_consensus_filter(a, b)
        ba = dual_consensus_filter(b, a)
        np.testing.assert_array_equal(
            ab.labels.labels == IGNORE, ba.labels.labels == IGNORE
        )
        assert ab.kept_count == ba.kept_count

    def test_idempotent_on_kept_part(self):
        rng = make_rng(2)
        a = _lv(rng.integers(0, 3, 50))
        b = _lv(rng.integers(0, 3, 50))
        first = dual_consensus_filter(a, b)
        kept = first.labels.labels != IGNORE
        kept_labels = _lv(first.labels.labels[kept])
        second = dual_consensus_filter(kept_labels, kept_labels)
        assert second.consensus_rate == 1.0

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            dual_consensus_filter(_lv([0, 1]), _lv([0]))

    def test_ignore_in_input_rejected(self):
        with pytest.raises(EntryOutOfRange):
            dual_consensus_filter(_lv([0, IGNORE]), _lv([0, 1]))
