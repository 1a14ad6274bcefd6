"""Loss-function unit vectors, including the hand-computed reverse-Huber case.

Hand arithmetic for the berHu case with masked residuals {1.0, 0.1, 0.5}:
c = max|delta|/5 = 0.2, contributions 1.0 -> (1 + 0.04)/0.4 = 2.6,
0.1 -> 0.1, 0.5 -> (0.25 + 0.04)/0.4 = 0.725; mean = 3.425/3 = 1.141666...
"""

import numpy as np
import pytest

from geowarp.losses import LossConfig, berhu_loss, gdl_loss, l2_loss, sequence_loss
from geowarp.nn.tensor import Tape, Tensor


def full(shape, value=True):
    return np.full(shape, value, dtype=bool)


def as_pred(arr):
    return Tensor(np.asarray(arr, dtype=np.float64), requires_grad=True)


class TestL2:
    def test_equal_is_zero(self):
        y = np.random.default_rng(0).uniform(size=(1, 3, 4, 1))
        assert l2_loss(as_pred(y), y, full(y.shape)).item() == 0.0

    def test_uniform_offset(self):
        y = np.zeros((1, 5, 5, 1))
        d = as_pred(y + 0.1)
        assert abs(l2_loss(d, y, full(y.shape)).item() - 0.01) < 1e-12

    def test_empty_mask_zero_loss_zero_grad(self):
        y = np.ones((1, 2, 2, 1))
        d = as_pred(y + 5.0)
        with Tape() as tape:
            out = l2_loss(d, y, np.zeros_like(y, dtype=bool))
            tape.backward(out)
        assert out.item() == 0.0
        np.testing.assert_array_equal(d.grad, 0.0)

    def test_only_masked_pixels_count(self):
        y = np.zeros((1, 1, 2, 1))
        d = as_pred(np.array([[[[1.0], [77.0]]]]))
        mask = np.array([[[[True], [False]]]])
        assert abs(l2_loss(d, y, mask).item() - 1.0) < 1e-12


class TestBerhu:
    def test_equal_is_zero(self):
        y = np.random.default_rng(1).uniform(size=(1, 2, 3, 1))
        assert berhu_loss(as_pred(y), y, full(y.shape)).item() == 0.0

    def test_hand_computed_case(self):
        y = np.zeros((1, 1, 3, 1))
        d = as_pred(np.array([1.0, 0.1, 0.5]).reshape(1, 1, 3, 1))
        val = berhu_loss(d, y, full(y.shape)).item()
        assert abs(val - 1.1416666666666666) < 1e-9

    def test_branch_continuity_at_c(self):
        # both branches evaluate to c at |delta| = c
        c = 0.2
        assert abs(c - (c * c + c * c) / (2 * c)) < 1e-15

    def test_all_equal_residuals_take_quadratic_branch(self):
        # c = |delta|/5 < |delta|, so the quadratic branch applies everywhere:
        # (d^2 + c^2)/(2c) with d=0.5, c=0.1 -> (0.25+0.01)/0.2 = 1.3
        y = np.zeros((1, 2, 2, 1))
        d = as_pred(y + 0.5)
        assert abs(berhu_loss(d, y, full(y.shape)).item() - 1.3) < 1e-12

    def test_gradient_magnitude_continuous_across_boundary(self):
        # numerical d/d(delta) just inside and outside |delta| = c agree
        y = np.zeros((1, 1, 2, 1))
        base = np.array([1.0, 0.2]).reshape(1, 1, 2, 1)  # c = 0.2; second pixel at c
        eps = 1e-7

        def loss_at(offset):
            d = as_pred(base + np.array([0.0, offset]).reshape(1, 1, 2, 1))
            return berhu_loss(d, y, full(y.shape)).item()

        left = (loss_at(0.0) - loss_at(-eps)) / eps
        right = (loss_at(eps) - loss_at(0.0)) / eps
        assert abs(left - right) < 1e-6

    def test_gradient_matches_finite_differences(self):
        rng = np.random.default_rng(2)
        y = rng.uniform(size=(1, 3, 3, 1))
        d0 = y + rng.normal(0, 0.3, size=y.shape)
        mask = rng.uniform(size=y.shape) < 0.8
        d = as_pred(d0)
        with Tape() as tape:
            out = berhu_loss(d, y, mask)
            tape.backward(out)
        eps = 1e-6
        flat = d.data.reshape(-1)
        gflat = d.grad.reshape(-1)
        # probe a few non-argmax pixels (c is a constant subgradient choice)
        absd = np.abs(np.where(mask, d0 - y, 0.0)).reshape(-1)
        for j in np.argsort(absd)[:4]:
            orig = flat[j]
            flat[j] = orig + eps
            fp = berhu_loss(d, y, mask).item()
            flat[j] = orig - eps
            fm = berhu_loss(d, y, mask).item()
            flat[j] = orig
            num = (fp - fm) / (2 * eps)
            assert abs(num - gflat[j]) < 1e-6


class TestGdl:
    def test_equal_is_zero(self):
        y = np.random.default_rng(3).uniform(size=(1, 3, 4, 1))
        assert gdl_loss(as_pred(y), y, full(y.shape)).item() == 0.0

    def test_constant_offset_is_zero(self):
        y = np.random.default_rng(4).uniform(size=(1, 4, 4, 1))
        d = as_pred(y + 0.37)
        assert abs(gdl_loss(d, y, full(y.shape)).item()) < 1e-12

    def test_two_pixel_map(self):
        # D = (0, 1), Y = (0, 0): one horizontal pair, term |1 - 0|^2 = 1
        y = np.zeros((1, 1, 2, 1))
        d = as_pred(np.array([[[[0.0], [1.0]]]]))
        assert abs(gdl_loss(d, y, full(y.shape)).item() - 1.0) < 1e-12

    def test_pairs_require_both_masked(self):
        y = np.zeros((1, 1, 3, 1))
        d = as_pred(np.array([[[[0.0], [1.0], [0.0]]]]))
        mask = np.array([[[[True], [False], [True]]]])
        with Tape() as tape:
            out = gdl_loss(d, y, mask)
            tape.backward(out)
        assert out.item() == 0.0  # both pairs touch the unmasked pixel

    def test_gradient_matches_finite_differences(self):
        rng = np.random.default_rng(5)
        y = rng.uniform(size=(1, 4, 5, 1))
        d = as_pred(y + rng.normal(0, 0.2, size=y.shape))
        mask = rng.uniform(size=y.shape) < 0.85
        with Tape() as tape:
            out = gdl_loss(d, y, mask)
            tape.backward(out)
        eps = 1e-6
        flat = d.data.reshape(-1)
        gflat = d.grad.reshape(-1)
        for j in range(0, flat.size, 3):
            orig = flat[j]
            flat[j] = orig + eps
            fp = gdl_loss(d, y, mask).item()
            flat[j] = orig - eps
            fm = gdl_loss(d, y, mask).item()
            flat[j] = orig
            num = (fp - fm) / (2 * eps)
            assert abs(num - gflat[j]) < 1e-6


class TestSequenceLoss:
    def rng_frames(self, k, seed=6):
        rng = np.random.default_rng(seed)
        preds, ys, masks = [], [], []
        for _ in range(k):
            y = rng.uniform(size=(1, 3, 4, 1))
            preds.append(as_pred(y + rng.normal(0, 0.1, size=y.shape)))
            ys.append(y)
            masks.append(full(y.shape))
        return preds, ys, masks

    def test_identical_frame_losses_average_to_single(self):
        preds, ys, masks = self.rng_frames(1)
        single = l2_loss(preds[0], ys[0], masks[0]).item()
        total = sequence_loss(preds * 4, ys * 4, masks * 4, LossConfig()).item()
        assert abs(total - single) < 1e-12

    def test_last_frame_only_weighting(self):
        k = 4
        preds, ys, masks = self.rng_frames(k)
        cfg = LossConfig(alphas=(0.0, 0.0, 0.0, 1.0))
        got = sequence_loss(preds, ys, masks, cfg).item()
        want = l2_loss(preds[-1], ys[-1], masks[-1]).item() / k
        assert abs(got - want) < 1e-15

    def test_lambda_zero_reduces_to_base(self):
        preds, ys, masks = self.rng_frames(3)
        a = sequence_loss(preds, ys, masks, LossConfig(lambda_gdl=0.0)).item()
        manual = sum(l2_loss(p, y, m).item() for p, y, m in zip(preds, ys, masks)) / 3
        assert abs(a - manual) < 1e-12

    def test_berhu_kind_used(self):
        preds, ys, masks = self.rng_frames(2)
        a = sequence_loss(preds, ys, masks, LossConfig(kind="berhu"))
        manual = sum(berhu_loss(p, y, m).item() for p, y, m in zip(preds, ys, masks)) / 2
        assert abs(a.item() - manual) < 1e-12

    def test_invalid_config_rejected(self):
        with pytest.raises(ValueError):
            LossConfig(kind="l1")
        with pytest.raises(ValueError):
            LossConfig(alphas=(0.0, 0.0))
