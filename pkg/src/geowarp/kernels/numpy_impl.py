"""Pure-numpy implementations of the hot kernels.

Semantics here are the reference; numba_impl mirrors them loop-for-loop.
Accumulation orders are kept identical between the two paths so results
match bit-for-bit (see tests/test_kernel_parity.py).
"""

import numpy as np

_M1 = np.uint64(0x9E3779B97F4A7C15)
_M2 = np.uint64(0xC2B2AE3D27D4EB4F)
_M3 = np.uint64(0x165667B19E3779F9)
_F1 = np.uint64(0xBF58476D1CE4E5B9)
_F2 = np.uint64(0x94D049BB133111EB)


def im2col(xp, kh, kw, sh, sw, ho, wo):
    """Gather conv patches from a padded NHWC tensor into a (N*ho*wo, kh*kw*C) matrix."""
    n, hp, wp, c = xp.shape
    sn, sy, sx, sc = xp.strides
    shape = (n, ho, wo, kh, kw, c)
    strides = (sn, sy * sh, sx * sw, sy, sx, sc)
    view = np.lib.stride_tricks.as_strided(xp, shape=shape, strides=strides)
    return np.ascontiguousarray(view).reshape(n * ho * wo, kh * kw * c)


def col2im_add(cols, n, hp, wp, c, kh, kw, sh, sw, ho, wo):
    """Scatter-add patch gradients back onto the padded input layout."""
    dxp = np.zeros((n, hp, wp, c), dtype=cols.dtype)
    cols6 = cols.reshape(n, ho, wo, kh, kw, c)
    for i in range(kh):
        for j in range(kw):
            dxp[:, i:i + sh * ho:sh, j:j + sw * wo:sw, :] += cols6[:, :, :, i, j, :]
    return dxp


def lstm_pointwise_forward(pre, c_prev):
    """Gate nonlinearities and state update for a conv-LSTM cell.

    pre has 4*C channels laid out [input, forget, output, candidate];
    returns (h, c, i, f, o, g, tc) with the activations cached for backward.
    """
    cch = c_prev.shape[-1]
    i = _sigmoid(pre[..., 0 * cch:1 * cch])
    f = _sigmoid(pre[..., 1 * cch:2 * cch])
    o = _sigmoid(pre[..., 2 * cch:3 * cch])
    g = np.tanh(pre[..., 3 * cch:4 * cch])
    c = f * c_prev + i * g
    tc = np.tanh(c)
    h = o * tc
    return h, c, i, f, o, g, tc


def lstm_pointwise_backward(dh, dc_in, i, f, o, g, tc, c_prev):
    """Backward of lstm_pointwise_forward; returns (dpre, dc_prev)."""
    do = dh * tc
    dc = dh * o * (1.0 - tc * tc) + dc_in
    df = dc * c_prev
    di = dc * g
    dg = dc * i
    dc_prev = dc * f
    dpre = np.concatenate(
        [
            di * i * (1.0 - i),
            df * f * (1.0 - f),
            do * o * (1.0 - o),
            dg * (1.0 - g * g),
        ],
        axis=-1,
    )
    return dpre, dc_prev


def _sigmoid(x):
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def splat_points(us, vs, zs, rgb, src, height, width, quad):
    """Z-buffered splat of projected points onto a pixel grid.

    Each point writes to the {floor(u),ceil(u)} x {floor(v),ceil(v)} cells
    (quad=True) or to its nearest pixel (quad=False).  Per-cell conflicts keep
    the smaller depth, ties the smaller source index.  Returns
    (rgb_out, depth_out, covered, n_candidates, n_dropped) where n_dropped
    counts points with no in-bounds footprint cell.
    """
    npts = us.shape[0]
    if quad:
        x0 = np.floor(us).astype(np.int64)
        x1 = np.ceil(us).astype(np.int64)
        y0 = np.floor(vs).astype(np.int64)
        y1 = np.ceil(vs).astype(np.int64)
        cand_x, cand_y, keep = [], [], []
        cand_idx = []
        combos = [
            (x0, y0, np.ones(npts, dtype=bool)),
            (x1, y0, x1 != x0),
            (x0, y1, y1 != y0),
            (x1, y1, (x1 != x0) & (y1 != y0)),
        ]
        for cx, cy, valid in combos:
            inb = valid & (cx >= 0) & (cx < width) & (cy >= 0) & (cy < height)
            cand_x.append(cx[inb])
            cand_y.append(cy[inb])
            cand_idx.append(np.nonzero(inb)[0])
            keep.append(inb)
        covered_any = keep[0] | keep[1] | keep[2] | keep[3]
        cx = np.concatenate(cand_x)
        cy = np.concatenate(cand_y)
        pidx = np.concatenate(cand_idx)
    else:
        cx = np.floor(us + 0.5).astype(np.int64)
        cy = np.floor(vs + 0.5).astype(np.int64)
        inb = (cx >= 0) & (cx < width) & (cy >= 0) & (cy < height)
        covered_any = inb
        cx, cy = cx[inb], cy[inb]
        pidx = np.nonzero(inb)[0]

    n_candidates = int(cx.shape[0])
    n_dropped = int(npts - np.count_nonzero(covered_any))

    rgb_out = np.zeros((height, width, 3), dtype=np.uint8)
    depth_out = np.zeros((height, width), dtype=np.float64)
    covered = np.zeros((height, width), dtype=bool)
    if n_candidates == 0:
        return rgb_out, depth_out, covered, n_candidates, n_dropped

    cells = cy * width + cx
    order = np.lexsort((src[pidx], zs[pidx], cells))
    cells_sorted = cells[order]
    first = np.ones(cells_sorted.shape[0], dtype=bool)
    first[1:] = cells_sorted[1:] != cells_sorted[:-1]
    win = order[first]
    wcells = cells[win]
    wp = pidx[win]
    rgb_flat = rgb_out.reshape(-1, 3)
    rgb_flat[wcells] = rgb[wp]
    depth_out.reshape(-1)[wcells] = zs[wp]
    covered.reshape(-1)[wcells] = True
    return rgb_out, depth_out, covered, n_candidates, n_dropped


def raycast_scene(origin, dirs, boxes, ground_z, eps):
    """Intersect rays with axis-aligned boxes plus the ground plane.

    dirs is (M, 3) and need not be normalized; the returned t is in units of
    the direction vector.  Boxes hit from outside return the entry face, from
    inside the exit face (so an enclosing box acts as walls).  Returns
    (t, obj, face) with obj in [0, K) for boxes, K for ground, -1 for a miss;
    face encodes the bound plane 0..5 = xmin,xmax,ymin,ymax,zmin,zmax (ground
    reports face 5).
    """
    m = dirs.shape[0]
    k = boxes.shape[0]
    best_t = np.full(m, np.inf)
    best_obj = np.full(m, -1, dtype=np.int64)
    best_face = np.zeros(m, dtype=np.int64)

    d = dirs.copy()
    tiny = np.abs(d) < 1e-12
    d[tiny] = 1e-12

    for b in range(k):
        lo = boxes[b, 0:3]
        hi = boxes[b, 3:6]
        t_lo = (lo[None, :] - origin[None, :]) / d
        t_hi = (hi[None, :] - origin[None, :]) / d
        t_near_ax = np.minimum(t_lo, t_hi)
        t_far_ax = np.maximum(t_lo, t_hi)
        near_ax = np.argmax(t_near_ax, axis=1)
        far_ax = np.argmin(t_far_ax, axis=1)
        t_near = t_near_ax[np.arange(m), near_ax]
        t_far = t_far_ax[np.arange(m), far_ax]
        valid = t_near <= t_far
        # entry hit from outside, exit hit from inside
        use_near = valid & (t_near > eps)
        use_far = valid & (t_near <= eps) & (t_far > eps)
        t_hit = np.where(use_near, t_near, np.where(use_far, t_far, np.inf))
        ax = np.where(use_near, near_ax, far_ax)
        taken = np.where(use_near, t_near_ax[np.arange(m), ax], t_far_ax[np.arange(m), ax])
        from_lo = taken == t_lo[np.arange(m), ax]
        face = ax * 2 + np.where(from_lo, 0, 1)
        better = t_hit < best_t
        best_t = np.where(better, t_hit, best_t)
        best_obj = np.where(better, b, best_obj)
        best_face = np.where(better, face, best_face)

    tg = (ground_z - origin[2]) / d[:, 2]
    gvalid = tg > eps
    better = gvalid & (tg < best_t)
    best_t = np.where(better, tg, best_t)
    best_obj = np.where(better, k, best_obj)
    best_face = np.where(better, 5, best_face)
    return best_t, best_obj, best_face


def _hash_lattice(ix, iy, iz, seed):
    seed_term = np.uint64((int(seed) * 0x27D4EB2F165667C5) & 0xFFFFFFFFFFFFFFFF)
    h = (
        ix.astype(np.uint64) * _M1
        ^ iy.astype(np.uint64) * _M2
        ^ iz.astype(np.uint64) * _M3
        ^ seed_term
    )
    h ^= h >> np.uint64(30)
    h *= _F1
    h ^= h >> np.uint64(27)
    h *= _F2
    h ^= h >> np.uint64(31)
    return (h >> np.uint64(11)).astype(np.float64) * (1.0 / 9007199254740992.0)


def value_noise3(pts, seed):
    """Smooth lattice value noise in [0, 1) evaluated at (M, 3) points."""
    i0 = np.floor(pts)
    f = pts - i0
    i0 = i0.astype(np.int64)
    u = f * f * f * (f * (f * 6.0 - 15.0) + 10.0)
    acc = np.zeros(pts.shape[0], dtype=np.float64)
    for dz in (0, 1):
        for dy in (0, 1):
            for dx in (0, 1):
                corner = _hash_lattice(
                    i0[:, 0] + dx, i0[:, 1] + dy, i0[:, 2] + dz, seed
                )
                w = (
                    (u[:, 0] if dx else 1.0 - u[:, 0])
                    * (u[:, 1] if dy else 1.0 - u[:, 1])
                    * (u[:, 2] if dz else 1.0 - u[:, 2])
                )
                acc += corner * w
    return acc
