import numpy as np
import pytest

from flowseries.background import MixtureBackground, apply_mask, majority_filter
from flowseries.errors import DimensionMismatchError, ParameterError
from flowseries.frames import Frame


def _constant(value, shape=(24, 24)):
    return np.full(shape, value, dtype=np.uint8)


class TestUpdateAndClassify:
    def test_first_frame_is_background(self):
        model = MixtureBackground(16, 16)
        rng = np.random.default_rng(0)
        frame = rng.integers(0, 256, (16, 16), dtype=np.uint8)
        assert model.update_and_classify(frame).sum() == 0

    def test_constant_sequence_converges(self):
        model = MixtureBackground(24, 24)
        frame = _constant(50)
        for _ in range(50):
            mask = model.update_and_classify(frame)
        assert mask.sum() == 0
        # frame 51, same image: still all background
        assert model.update_and_classify(frame).sum() == 0

    def test_step_change_is_foreground(self):
        model = MixtureBackground(24, 24)
        frame = _constant(50)
        for _ in range(50):
            model.update_and_classify(frame)
        jump = frame.copy()
        jump[5, 7] = 200
        mask = model.update_and_classify(jump)
        assert mask[5, 7] == 1
        assert mask.sum() == 1

    def test_weights_normalized(self):
        model = MixtureBackground(12, 12)
        rng = np.random.default_rng(1)
        for _ in range(30):
            model.update_and_classify(rng.integers(0, 256, (12, 12), dtype=np.uint8))
        totals = model.weights.sum(axis=2)
        assert np.all(np.abs(totals - 1.0) <= 1e-6)

    def test_variance_floor(self):
        model = MixtureBackground(8, 8)
        frame = _constant(100, (8, 8))
        for _ in range(500):
            model.update_and_classify(frame)
        assert model.variances[model.weights > 0].min() >= 4.0

    def test_components_sorted_by_weight_over_sigma(self):
        model = MixtureBackground(8, 8)
        rng = np.random.default_rng(2)
        for _ in range(40):
            # alternate two populations so several components exist
            value = 40 if rng.random() < 0.7 else 200
            model.update_and_classify(_constant(value, (8, 8)))
        key = model.weights / np.sqrt(model.variances)
        diffs = np.diff(key, axis=2)
        both_active = np.arange(1, model.k_max) < model.counts[..., None]
        assert np.all(diffs[both_active] <= 1e-12)
        assert model.counts.max() >= 2  # the scene did create extra components

    def test_alpha_validation(self):
        with pytest.raises(ParameterError):
            MixtureBackground(8, 8, alpha=0.0)
        model = MixtureBackground(8, 8)
        with pytest.raises(ParameterError):
            model.update_and_classify(_constant(1, (8, 8)), alpha=1.5)

    def test_dimension_mismatch(self):
        model = MixtureBackground(8, 8)
        with pytest.raises(DimensionMismatchError):
            model.update_and_classify(_constant(1, (9, 8)))

    def test_foreground_rate_decays_with_switch(self):
        # background learned on one texture, then the scene switches:
        # everything is foreground at first, then the rate falls
        model = MixtureBackground(16, 16, alpha=0.05)
        rng = np.random.default_rng(3)
        a = rng.integers(0, 100, (16, 16), dtype=np.uint8)
        b = a + 120
        for _ in range(10):
            model.update_and_classify(a)
        first = model.update_and_classify(b).mean()
        for _ in range(80):  # roughly 2/alpha frames
            last = model.update_and_classify(b).mean()
        assert first == 1.0
        assert last == 0.0


class TestApplyMask:
    def test_all_ones_identity(self):
        rng = np.random.default_rng(5)
        frame = Frame(data=rng.integers(0, 256, (10, 10), dtype=np.uint8), index=3)
        out = apply_mask(frame, np.ones((10, 10), dtype=np.uint8))
        assert (out.data == frame.data).all()
        assert out.index == 3

    def test_all_zeros_blanks(self):
        frame = _constant(77, (6, 6))
        assert apply_mask(frame, np.zeros((6, 6), dtype=np.uint8)).sum() == 0

    def test_checkerboard(self):
        frame = _constant(100, (4, 4))
        mask = np.indices((4, 4)).sum(axis=0) % 2
        out = apply_mask(frame, mask.astype(np.uint8))
        assert set(np.unique(out)) == {0, 100}
        assert (out[mask == 1] == 100).all()

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            apply_mask(_constant(1, (4, 4)), np.ones((5, 4), dtype=np.uint8))


class TestMajorityFilter:
    def test_removes_isolated_pixel(self):
        mask = np.zeros((9, 9), dtype=np.uint8)
        mask[4, 4] = 1
        assert majority_filter(mask).sum() == 0

    def test_fills_isolated_hole(self):
        mask = np.ones((9, 9), dtype=np.uint8)
        mask[4, 4] = 0
        assert majority_filter(mask)[4, 4] == 1
