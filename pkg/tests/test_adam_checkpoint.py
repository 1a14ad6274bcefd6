import numpy as np
import pytest

from geowarp.nn.adam import adam_step, adam_update, clip_global_norm, zero_moments
from geowarp.nn.checkpoint import load_checkpoint, save_checkpoint


class TestAdam:
    def test_zero_gradient_keeps_params(self):
        p = np.array([1.0, -2.0, 3.0])
        p2, m, v = adam_update(p, np.zeros(3), np.zeros(3), np.zeros(3), t=1, lr=0.1)
        np.testing.assert_array_equal(p2, p)
        np.testing.assert_array_equal(m, 0.0)

    def test_first_step_magnitude_is_lr(self):
        # bias-corrected first step moves each element by ~lr regardless of |g|
        for g in (0.01, 1.0, 250.0):
            p = np.zeros(4)
            p2, _, _ = adam_update(p, np.full(4, g), np.zeros(4), np.zeros(4), t=1, lr=1e-3)
            np.testing.assert_allclose(np.abs(p2), 1e-3, rtol=1e-4)

    def test_scalar_convergence(self):
        # minimize (w - 3)^2 from 0 at lr 0.01
        w = np.zeros(1)
        m = np.zeros(1)
        v = np.zeros(1)
        for t in range(1, 5001):
            g = 2.0 * (w - 3.0)
            w, m, v = adam_update(w, g, m, v, t, lr=0.01)
            if abs(w[0] - 3.0) < 1e-3:
                break
        assert abs(w[0] - 3.0) < 1e-3

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            adam_update(np.zeros(3), np.zeros(2), np.zeros(3), np.zeros(3), t=1)

    def test_dict_step(self):
        params = {"a": np.ones(2), "b": np.zeros((2, 2))}
        grads = {"a": np.full(2, 0.5), "b": np.ones((2, 2))}
        new_p, moments = adam_step(params, grads, zero_moments(params), t=1, lr=0.1)
        assert set(new_p) == {"a", "b"}
        np.testing.assert_allclose(new_p["a"], 1.0 - 0.1, rtol=1e-5)

    def test_clip_global_norm(self):
        grads = {"a": np.array([3.0]), "b": np.array([4.0])}
        clipped, norm = clip_global_norm(grads, 1.0)
        assert abs(norm - 5.0) < 1e-12
        total = np.sqrt(sum(float(np.sum(g ** 2)) for g in clipped.values()))
        assert abs(total - 1.0) < 1e-6
        same, _ = clip_global_norm(grads, 10.0)
        np.testing.assert_array_equal(same["a"], grads["a"])


class TestCheckpoint:
    def test_bit_exact_round_trip(self, tmp_path):
        rng = np.random.default_rng(0)
        params = {
            "conv1/w": rng.normal(size=(5, 5, 3, 8)).astype(np.float32),
            "conv1/b": rng.normal(size=8).astype(np.float32),
            "lstm1/w": rng.normal(size=(5, 5, 16, 32)).astype(np.float32),
        }
        path = tmp_path / "model.gwck"
        save_checkpoint(path, params)
        loaded = load_checkpoint(path)
        assert list(loaded) == list(params)
        for name in params:
            assert loaded[name].dtype == np.float32
            np.testing.assert_array_equal(loaded[name], params[name])

    def test_bad_magic_rejected(self, tmp_path):
        path = tmp_path / "junk.gwck"
        path.write_bytes(b"NOPE" + b"\x00" * 16)
        with pytest.raises(ValueError):
            load_checkpoint(path)

    def test_trailing_bytes_rejected(self, tmp_path):
        path = tmp_path / "model.gwck"
        save_checkpoint(path, {"a": np.zeros(2, dtype=np.float32)})
        path.write_bytes(path.read_bytes() + b"x")
        with pytest.raises(ValueError):
            load_checkpoint(path)
