"""Benchmark the numba kernels against the pure-numpy fallbacks.

Run:  python benchmarks/bench_kernels.py
Numba compilation happens during warmup, so timings exclude JIT cost.
"""

import time

import numpy as np

from geowarp.kernels import numpy_impl

try:
    from geowarp.kernels import numba_impl
except ImportError:
    numba_impl = None


def bench(fn, args, repeats=20, warmup=2):
    for _ in range(warmup):
        fn(*args)
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def make_cases(rng):
    cases = {}

    # conv-lstm gate conv gather at the reduced training size (batch 8)
    xp = rng.normal(size=(8, 15, 40, 16)).astype(np.float32)
    cases["im2col 5x5 (8x11x36x16)"] = ("im2col", (xp, 5, 5, 1, 1, 11, 36))

    cols = rng.normal(size=(8 * 11 * 36, 5 * 5 * 16)).astype(np.float32)
    cases["col2im 5x5 (same)"] = ("col2im_add", (cols, 8, 15, 40, 16, 5, 5, 1, 1, 11, 36))

    pre = rng.normal(size=(8, 11, 36, 128)).astype(np.float32)
    c_prev = rng.normal(size=(8, 11, 36, 32)).astype(np.float32)
    cases["lstm pointwise fwd"] = ("lstm_pointwise_forward", (pre, c_prev))

    n = 88 * 288
    us = rng.uniform(0, 287, n)
    vs = rng.uniform(0, 87, n)
    zs = rng.uniform(1, 50, n)
    rgb = rng.integers(0, 256, size=(n, 3), dtype=np.uint8)
    src = np.arange(n, dtype=np.int64)
    cases["splat 25k points"] = ("splat_points", (us, vs, zs, rgb, src, 88, 288, True))

    origin = np.array([0.0, 0.0, 1.5])
    dirs = rng.normal(size=(n, 3))
    dirs[:, 1] = np.abs(dirs[:, 1]) + 0.2
    boxes = np.stack([
        np.concatenate([lo, lo + rng.uniform(1, 5, 3)])
        for lo in rng.uniform(-20, 20, size=(10, 3))
    ])
    cases["raycast 25k x 10 boxes"] = ("raycast_scene", (origin, np.ascontiguousarray(dirs), boxes, 0.0, 1e-6))

    pts = rng.uniform(-40, 40, size=(n, 3))
    cases["value noise 25k"] = ("value_noise3", (pts, 7))

    return cases


def main():
    rng = np.random.default_rng(0)
    cases = make_cases(rng)
    width = max(len(k) for k in cases)
    header = f"{'kernel':<{width}}  {'numpy':>10}  {'numba':>10}  {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for label, (fn_name, args) in cases.items():
        t_np = bench(getattr(numpy_impl, fn_name), args)
        if numba_impl is None:
            print(f"{label:<{width}}  {t_np * 1e3:9.3f}ms  {'n/a':>10}  {'n/a':>8}")
            continue
        t_nb = bench(getattr(numba_impl, fn_name), args)
        print(f"{label:<{width}}  {t_np * 1e3:9.3f}ms  {t_nb * 1e3:9.3f}ms  "
              f"{t_np / t_nb:7.2f}x")


if __name__ == "__main__":
    main()
