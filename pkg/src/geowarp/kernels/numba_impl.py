"""Numba-jitted implementations of the hot kernels.

Loop structure and accumulation order mirror numpy_impl so both paths agree
(bit-for-bit for the integer/copy kernels, to float tolerance for the
transcendental ones).
"""

import numpy as np
from numba import njit


@njit(cache=True)
def im2col(xp, kh, kw, sh, sw, ho, wo):
    n, hp, wp, c = xp.shape
    out = np.empty((n * ho * wo, kh * kw * c), dtype=xp.dtype)
    for b in range(n):
        for y in range(ho):
            for x in range(wo):
                row = (b * ho + y) * wo + x
                col = 0
                for i in range(kh):
                    yy = y * sh + i
                    for j in range(kw):
                        xx = x * sw + j
                        for ch in range(c):
                            out[row, col] = xp[b, yy, xx, ch]
                            col += 1
    return out


@njit(cache=True)
def col2im_add(cols, n, hp, wp, c, kh, kw, sh, sw, ho, wo):
    dxp = np.zeros((n, hp, wp, c), dtype=cols.dtype)
    cols6 = cols.reshape(n, ho, wo, kh, kw, c)
    for i in range(kh):
        for j in range(kw):
            for b in range(n):
                for y in range(ho):
                    for x in range(wo):
                        for ch in range(c):
                            dxp[b, i + sh * y, j + sw * x, ch] += cols6[b, y, x, i, j, ch]
    return dxp


@njit(cache=True)
def _sig(x):
    if x >= 0.0:
        return 1.0 / (1.0 + np.exp(-x))
    ex = np.exp(x)
    return ex / (1.0 + ex)


@njit(cache=True)
def lstm_pointwise_forward(pre, c_prev):
    cch = c_prev.shape[-1]
    pre4 = pre.reshape(-1, 4 * cch)
    cp = c_prev.reshape(-1, cch)
    m = pre4.shape[0]
    i = np.empty((m, cch), dtype=pre.dtype)
    f = np.empty((m, cch), dtype=pre.dtype)
    o = np.empty((m, cch), dtype=pre.dtype)
    g = np.empty((m, cch), dtype=pre.dtype)
    c = np.empty((m, cch), dtype=pre.dtype)
    tc = np.empty((m, cch), dtype=pre.dtype)
    h = np.empty((m, cch), dtype=pre.dtype)
    for r in range(m):
        for k in range(cch):
            iv = _sig(pre4[r, k])
            fv = _sig(pre4[r, cch + k])
            ov = _sig(pre4[r, 2 * cch + k])
            gv = np.tanh(pre4[r, 3 * cch + k])
            cv = fv * cp[r, k] + iv * gv
            tv = np.tanh(cv)
            i[r, k] = iv
            f[r, k] = fv
            o[r, k] = ov
            g[r, k] = gv
            c[r, k] = cv
            tc[r, k] = tv
            h[r, k] = ov * tv
    shp = c_prev.shape
    return (
        h.reshape(shp), c.reshape(shp), i.reshape(shp), f.reshape(shp),
        o.reshape(shp), g.reshape(shp), tc.reshape(shp),
    )


@njit(cache=True)
def lstm_pointwise_backward(dh, dc_in, i, f, o, g, tc, c_prev):
    cch = c_prev.shape[-1]
    dhf = dh.reshape(-1, cch)
    dcf = dc_in.reshape(-1, cch)
    i2 = i.reshape(-1, cch)
    f2 = f.reshape(-1, cch)
    o2 = o.reshape(-1, cch)
    g2 = g.reshape(-1, cch)
    tc2 = tc.reshape(-1, cch)
    cp2 = c_prev.reshape(-1, cch)
    m = dhf.shape[0]
    dpre = np.empty((m, 4 * cch), dtype=dh.dtype)
    dc_prev = np.empty((m, cch), dtype=dh.dtype)
    for r in range(m):
        for k in range(cch):
            do = dhf[r, k] * tc2[r, k]
            dc = dhf[r, k] * o2[r, k] * (1.0 - tc2[r, k] * tc2[r, k]) + dcf[r, k]
            df = dc * cp2[r, k]
            di = dc * g2[r, k]
            dg = dc * i2[r, k]
            dc_prev[r, k] = dc * f2[r, k]
            dpre[r, k] = di * i2[r, k] * (1.0 - i2[r, k])
            dpre[r, cch + k] = df * f2[r, k] * (1.0 - f2[r, k])
            dpre[r, 2 * cch + k] = do * o2[r, k] * (1.0 - o2[r, k])
            dpre[r, 3 * cch + k] = dg * (1.0 - g2[r, k] * g2[r, k])
    shp = c_prev.shape
    return dpre.reshape(shp[0], shp[1], shp[2], 4 * cch), dc_prev.reshape(shp)


@njit(cache=True)
def splat_points(us, vs, zs, rgb, src, height, width, quad):
    rgb_out = np.zeros((height, width, 3), dtype=np.uint8)
    depth_out = np.zeros((height, width), dtype=np.float64)
    covered = np.zeros((height, width), dtype=np.bool_)
    win_src = np.zeros((height, width), dtype=np.int64)
    n_candidates = 0
    n_dropped = 0
    for p in range(us.shape[0]):
        if quad:
            x0 = int(np.floor(us[p]))
            x1 = int(np.ceil(us[p]))
            y0 = int(np.floor(vs[p]))
            y1 = int(np.ceil(vs[p]))
        else:
            x0 = int(np.floor(us[p] + 0.5))
            x1 = x0
            y0 = int(np.floor(vs[p] + 0.5))
            y1 = y0
        wrote = False
        for cy in range(y0, y1 + 1):
            if cy < 0 or cy >= height:
                continue
            for cx in range(x0, x1 + 1):
                if cx < 0 or cx >= width:
                    continue
                wrote = True
                n_candidates += 1
                z = zs[p]
                if (
                    not covered[cy, cx]
                    or z < depth_out[cy, cx]
                    or (z == depth_out[cy, cx] and src[p] < win_src[cy, cx])
                ):
                    depth_out[cy, cx] = z
                    covered[cy, cx] = True
                    win_src[cy, cx] = src[p]
                    rgb_out[cy, cx, 0] = rgb[p, 0]
                    rgb_out[cy, cx, 1] = rgb[p, 1]
                    rgb_out[cy, cx, 2] = rgb[p, 2]
        if not wrote:
            n_dropped += 1
    return rgb_out, depth_out, covered, n_candidates, n_dropped


@njit(cache=True)
def raycast_scene(origin, dirs, boxes, ground_z, eps):
    m = dirs.shape[0]
    k = boxes.shape[0]
    best_t = np.full(m, np.inf)
    best_obj = np.full(m, -1, dtype=np.int64)
    best_face = np.zeros(m, dtype=np.int64)
    for r in range(m):
        d = np.empty(3)
        for ax in range(3):
            dv = dirs[r, ax]
            if np.abs(dv) < 1e-12:
                dv = 1e-12
            d[ax] = dv
        bt = np.inf
        bo = np.int64(-1)
        bf = np.int64(0)
        for b in range(k):
            t_near = -np.inf
            t_far = np.inf
            near_lo = True
            far_lo = True
            near_ax = 0
            far_ax = 0
            for ax in range(3):
                t_lo = (boxes[b, ax] - origin[ax]) / d[ax]
                t_hi = (boxes[b, ax + 3] - origin[ax]) / d[ax]
                tn = min(t_lo, t_hi)
                tf = max(t_lo, t_hi)
                if tn > t_near:
                    t_near = tn
                    near_ax = ax
                    near_lo = t_lo <= t_hi
                if tf < t_far:
                    t_far = tf
                    far_ax = ax
                    far_lo = t_lo >= t_hi
            if t_near > t_far:
                continue
            if t_near > eps:
                t_hit = t_near
                face = near_ax * 2 + (0 if near_lo else 1)
            elif t_far > eps:
                t_hit = t_far
                face = far_ax * 2 + (0 if far_lo else 1)
            else:
                continue
            if t_hit < bt:
                bt = t_hit
                bo = b
                bf = face
        tg = (ground_z - origin[2]) / d[2]
        if tg > eps and tg < bt:
            bt = tg
            bo = k
            bf = 5
        best_t[r] = bt
        best_obj[r] = bo
        best_face[r] = bf
    return best_t, best_obj, best_face


@njit(cache=True)
def _hash_lattice(ix, iy, iz, seed):
    h = (
        np.uint64(ix) * np.uint64(0x9E3779B97F4A7C15)
        ^ np.uint64(iy) * np.uint64(0xC2B2AE3D27D4EB4F)
        ^ np.uint64(iz) * np.uint64(0x165667B19E3779F9)
        ^ np.uint64(seed) * np.uint64(0x27D4EB2F165667C5)
    )
    h ^= h >> np.uint64(30)
    h *= np.uint64(0xBF58476D1CE4E5B9)
    h ^= h >> np.uint64(27)
    h *= np.uint64(0x94D049BB133111EB)
    h ^= h >> np.uint64(31)
    return np.float64(h >> np.uint64(11)) * (1.0 / 9007199254740992.0)


@njit(cache=True)
def value_noise3(pts, seed):
    m = pts.shape[0]
    out = np.zeros(m, dtype=np.float64)
    for p in range(m):
        i0 = np.empty(3, dtype=np.int64)
        u = np.empty(3)
        for ax in range(3):
            fl = np.floor(pts[p, ax])
            i0[ax] = np.int64(fl)
            fv = pts[p, ax] - fl
            u[ax] = fv * fv * fv * (fv * (fv * 6.0 - 15.0) + 10.0)
        acc = 0.0
        for dz in range(2):
            for dy in range(2):
                for dx in range(2):
                    corner = _hash_lattice(
                        i0[0] + dx, i0[1] + dy, i0[2] + dz, seed
                    )
                    wx = u[0] if dx else 1.0 - u[0]
                    wy = u[1] if dy else 1.0 - u[1]
                    wz = u[2] if dz else 1.0 - u[2]
                    acc += corner * (wx * wy * wz)
        out[p] = acc
    return out
