"""Architecture, initialization and recurrence tests.

The activation-shape ledger below is the published layer table for the
full-size network; the reduced 22x72 variant shares structure with
channels divided by 4.
"""

import numpy as np
import pytest

from geowarp import model, synthetic
from geowarp.losses import LossConfig, sequence_loss
from geowarp.nn.tensor import Tape, Tensor

from gradcheck import max_rel_err, numeric_grad

# layer -> activation shape (H, W, C) for the default 88x288 config
TABLE_SHAPES = {
    "conv1": (44, 144, 32),
    "lstm1": (44, 144, 32),
    "conv2": (22, 72, 64),
    "lstm2": (22, 72, 64),
    "conv3": (11, 36, 128),
    "lstm3": (11, 36, 128),
    "ds1": (22, 72, 32),
    "conv4": (22, 72, 64),
    "lstm4": (22, 72, 64),
    "ds2": (44, 144, 16),
    "conv5": (44, 144, 32),
    "lstm5": (44, 144, 32),
    "ds3": (88, 288, 8),
    "conv6": (88, 288, 1),
}

FULL = model.ArchitectureConfig()
REDUCED = model.ArchitectureConfig(input_height=22, input_width=72, channel_divisor=4)
TINY = model.ArchitectureConfig(input_height=8, input_width=16, channel_divisor=4)


def run_step(cfg, seed=0, batch=1, trace=None, frame=None):
    params = model.init_params(cfg, seed=seed)
    if frame is None:
        rng = np.random.default_rng(seed)
        frame = rng.uniform(size=(batch, cfg.input_height, cfg.input_width, 3)).astype(np.float32)
    out, states = model.forward_step(
        params, Tensor(frame), model.zero_states(cfg, batch), cfg, trace=trace
    )
    return out, states


class TestShapes:
    def test_full_config_shape_ledger(self):
        trace = {}
        out, _ = run_step(FULL, trace=trace)
        for name, (h, w, c) in TABLE_SHAPES.items():
            assert trace[name][1:] == (h, w, c), f"{name}: {trace[name]}"
        assert out.shape == (1, 88, 288, 1)

    def test_reduced_config_output_matches_input(self):
        out, _ = run_step(REDUCED)
        assert out.shape == (1, 22, 72, 1)

    def test_reduced_encoder_sizes_use_ceil(self):
        assert REDUCED.encoder_sizes() == [(22, 72), (11, 36), (6, 18), (3, 9)]

    def test_frame_shape_mismatch_rejected(self):
        params = model.init_params(TINY, seed=0)
        with pytest.raises(ValueError):
            model.forward_step(
                params, Tensor(np.zeros((1, 9, 16, 3), dtype=np.float32)),
                model.zero_states(TINY, 1), TINY,
            )


class TestInit:
    def test_deterministic(self):
        p1 = model.init_params(REDUCED, seed=5)
        p2 = model.init_params(REDUCED, seed=5)
        for name in p1:
            np.testing.assert_array_equal(p1[name].data, p2[name].data)

    def test_forget_gate_bias_is_one(self):
        params = model.init_params(FULL, seed=1)
        for i in range(1, 6):
            b = params[f"lstm{i}/b"].data
            c = b.shape[0] // 4
            np.testing.assert_array_equal(b[c:2 * c], 1.0)
            np.testing.assert_array_equal(b[:c], 0.0)
            np.testing.assert_array_equal(b[2 * c:], 0.0)

    def test_conv1_weight_std(self):
        params = model.init_params(FULL, seed=2)
        w = params["conv1/w"].data
        assert w.size == 2400
        assert 0.009 <= w.std() <= 0.011

    def test_conv_biases_zero(self):
        params = model.init_params(FULL, seed=3)
        for i in range(1, 7):
            np.testing.assert_array_equal(params[f"conv{i}/b"].data, 0.0)


class TestRecurrence:
    def test_output_in_open_unit_interval(self):
        out, _ = run_step(REDUCED, seed=4)
        assert np.all(out.data > 0.0) and np.all(out.data < 1.0)

    def test_sequence_of_one_equals_single_step(self):
        cfg = TINY
        params = model.init_params(cfg, seed=6)
        rng = np.random.default_rng(6)
        frame = rng.uniform(size=(1, 8, 16, 3)).astype(np.float32)
        seq = model.forward_sequence(params, [frame], cfg)
        single, _ = model.forward_step(params, Tensor(frame), model.zero_states(cfg, 1), cfg)
        np.testing.assert_array_equal(seq[0].data, single.data)

    def test_unrolled_equals_iterated(self):
        cfg = TINY
        params = model.init_params(cfg, seed=7)
        rng = np.random.default_rng(7)
        frames = [rng.uniform(size=(1, 8, 16, 3)).astype(np.float32) for _ in range(4)]
        seq = model.forward_sequence(params, frames, cfg)
        states = model.zero_states(cfg, 1)
        for i, f in enumerate(frames):
            out, states = model.forward_step(params, Tensor(f), states, cfg)
            np.testing.assert_array_equal(seq[i].data, out.data)

    def test_causality(self):
        cfg = TINY
        params = model.init_params(cfg, seed=8)
        rng = np.random.default_rng(8)
        frames = [rng.uniform(size=(1, 8, 16, 3)).astype(np.float32) for _ in range(5)]
        full = model.forward_sequence(params, frames, cfg)
        for j in (1, 3):
            prefix = model.forward_sequence(params, frames[:j], cfg)
            for i in range(j):
                np.testing.assert_array_equal(prefix[i].data, full[i].data)

    def test_state_influences_output(self):
        cfg = REDUCED
        params = model.init_params(cfg, seed=9)
        rng = np.random.default_rng(9)
        spec = synthetic.random_scene_spec(rng, synthetic.standard_intrinsics(22, 72), 2)
        seq = synthetic.render_synthetic_sequence(spec)
        f0, f1 = (model.frames_to_input(seq.frames[i])[None] for i in (0, 1))
        _, carried = model.forward_step(params, Tensor(f0), model.zero_states(cfg, 1), cfg)
        with_state, _ = model.forward_step(params, Tensor(f1), carried, cfg)
        fresh, _ = model.forward_step(params, Tensor(f1), model.zero_states(cfg, 1), cfg)
        assert np.max(np.abs(with_state.data - fresh.data)) > 1e-6


class TestEndToEndGradient:
    def test_sequence_loss_gradient_50_random_params(self):
        cfg = TINY
        params = model.init_params(cfg, seed=10, dtype=np.float64)
        rng = np.random.default_rng(10)
        frames = [rng.uniform(size=(1, 8, 16, 3)) for _ in range(2)]
        labels = [rng.uniform(0.3, 0.7, size=(1, 8, 16, 1)) for _ in range(2)]
        masks = [rng.uniform(size=(1, 8, 16, 1)) < 0.8 for _ in range(2)]
        loss_cfg = LossConfig(kind="l2", lambda_gdl=1.0)

        def loss_value():
            preds = model.forward_sequence(params, [Tensor(f) for f in frames], cfg)
            return sequence_loss(preds, labels, masks, loss_cfg)

        for p in params.values():
            p.grad = None
        with Tape() as tape:
            loss = loss_value()
            tape.backward(loss)
        analytic = {n: (p.grad.copy() if p.grad is not None else np.zeros_like(p.data))
                    for n, p in params.items()}

        names = list(params)
        worst = 0.0
        eps = 1e-5
        checked = 0
        while checked < 50:
            name = names[int(rng.integers(len(names)))]
            p = params[name]
            flat = p.data.reshape(-1)
            j = int(rng.integers(flat.size))
            orig = flat[j]
            flat[j] = orig + eps
            fp = float(loss_value().data)
            flat[j] = orig - eps
            fm = float(loss_value().data)
            flat[j] = orig
            numeric = (fp - fm) / (2 * eps)
            a = analytic[name].reshape(-1)[j]
            scale = max(abs(numeric), abs(a), 1e-6)
            worst = max(worst, abs(a - numeric) / scale)
            checked += 1
        assert worst < 1e-3
