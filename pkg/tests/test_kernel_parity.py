"""Cross-checks the numba and numpy kernel implementations against each other."""

import os
import subprocess
import sys

import numpy as np
import pytest

from geowarp.kernels import numpy_impl

numba_impl = pytest.importorskip("geowarp.kernels.numba_impl")


def test_im2col_bitwise_equal():
    rng = np.random.default_rng(0)
    for dtype in (np.float32, np.float64):
        for stride in (1, 2):
            xp = rng.normal(size=(2, 9, 11, 3)).astype(dtype)
            ho = (9 - 5) // stride + 1
            wo = (11 - 5) // stride + 1
            a = numpy_impl.im2col(xp, 5, 5, stride, stride, ho, wo)
            b = numba_impl.im2col(xp, 5, 5, stride, stride, ho, wo)
            np.testing.assert_array_equal(a, b)


def test_col2im_bitwise_equal():
    rng = np.random.default_rng(1)
    for dtype in (np.float32, np.float64):
        cols = rng.normal(size=(2 * 3 * 4, 3 * 3 * 2)).astype(dtype)
        args = (2, 8, 10, 2, 3, 3, 2, 2, 3, 4)
        a = numpy_impl.col2im_add(cols, *args)
        b = numba_impl.col2im_add(cols, *args)
        np.testing.assert_array_equal(a, b)


def test_lstm_pointwise_close():
    rng = np.random.default_rng(2)
    for dtype, tol in ((np.float32, 1e-6), (np.float64, 1e-14)):
        pre = rng.normal(size=(2, 4, 5, 12)).astype(dtype)
        c_prev = rng.normal(size=(2, 4, 5, 3)).astype(dtype)
        outs_a = numpy_impl.lstm_pointwise_forward(pre, c_prev)
        outs_b = numba_impl.lstm_pointwise_forward(pre, c_prev)
        for a, b in zip(outs_a, outs_b):
            np.testing.assert_allclose(a, b, rtol=tol, atol=tol)
        dh = rng.normal(size=c_prev.shape).astype(dtype)
        dc = rng.normal(size=c_prev.shape).astype(dtype)
        ga = numpy_impl.lstm_pointwise_backward(dh, dc, *outs_a[2:], c_prev)
        gb = numba_impl.lstm_pointwise_backward(dh, dc, *outs_b[2:], c_prev)
        for a, b in zip(ga, gb):
            np.testing.assert_allclose(a, b, rtol=tol, atol=tol)


def test_splat_bitwise_equal():
    rng = np.random.default_rng(3)
    n = 500
    us = rng.uniform(-2, 18, n)
    vs = rng.uniform(-2, 14, n)
    # inject exact-integer coordinates and depth ties
    us[:50] = rng.integers(0, 16, 50)
    vs[:50] = rng.integers(0, 12, 50)
    zs = rng.uniform(1, 20, n)
    zs[10:20] = 5.0
    rgb = rng.integers(0, 256, size=(n, 3), dtype=np.uint8)
    src = rng.permutation(n).astype(np.int64)
    for quad in (True, False):
        a = numpy_impl.splat_points(us, vs, zs, rgb, src, 12, 16, quad)
        b = numba_impl.splat_points(us, vs, zs, rgb, src, 12, 16, quad)
        for x, y in zip(a, b):
            np.testing.assert_array_equal(x, y)


def test_raycast_equal():
    rng = np.random.default_rng(4)
    boxes = []
    for _ in range(6):
        lo = rng.uniform(-10, 10, 3)
        boxes.append(np.concatenate([lo, lo + rng.uniform(0.5, 6, 3)]))
    boxes = np.stack(boxes)
    origin = np.array([0.0, -15.0, 2.0])
    dirs = rng.normal(size=(400, 3))
    dirs[:, 1] = np.abs(dirs[:, 1]) + 0.1
    a = numpy_impl.raycast_scene(origin, dirs, boxes, -1.0, 1e-6)
    b = numba_impl.raycast_scene(origin, dirs, boxes, -1.0, 1e-6)
    np.testing.assert_allclose(a[0], b[0], rtol=1e-12, atol=0)
    np.testing.assert_array_equal(a[1], b[1])
    np.testing.assert_array_equal(a[2], b[2])


def test_value_noise_equal():
    rng = np.random.default_rng(5)
    pts = rng.uniform(-50, 50, size=(1000, 3))
    a = numpy_impl.value_noise3(pts, 42)
    b = numba_impl.value_noise3(pts, 42)
    np.testing.assert_allclose(a, b, rtol=0, atol=1e-15)
    assert a.min() >= 0.0 and a.max() < 1.0


def test_env_flag_forces_numpy_path():
    code = "import geowarp.kernels as k; print(k.USE_NUMBA)"
    env = dict(os.environ, GEOWARP_NO_NUMBA="1")
    out = subprocess.run([sys.executable, "-c", code], env=env,
                         capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "False"
