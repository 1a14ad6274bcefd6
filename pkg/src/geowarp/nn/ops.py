"""Differentiable layer primitives over NHWC tensors.

Convolutions are im2col + BLAS matmul with TF-style SAME zero padding
(output spatial size = ceil(input / stride)).  The conv-LSTM gate math is
a fused pointwise kernel; both it and im2col/col2im dispatch through
geowarp.kernels.
"""

import numpy as np

from geowarp import kernels
from geowarp.nn.tensor import Tensor, record_op


def _same_pad(size, k, stride):
    out = -(-size // stride)
    total = max((out - 1) * stride + k - size, 0)
    return out, total // 2, total - total // 2


def conv2d(x, w, b, stride=1):
    """Cross-correlate x (N,H,W,Cin) with w (kh,kw,Cin,Cout) plus bias."""
    if stride not in (1, 2):
        raise ValueError("stride must be 1 or 2")
    n, h, wd, cin = x.data.shape
    kh, kw, cin_w, cout = w.data.shape
    if cin_w != cin:
        raise ValueError(f"kernel expects {cin_w} input channels, got {cin}")
    if b.data.shape != (cout,):
        raise ValueError("bias shape must be (Cout,)")
    ho, ph0, ph1 = _same_pad(h, kh, stride)
    wo, pw0, pw1 = _same_pad(wd, kw, stride)
    hp, wp = h + ph0 + ph1, wd + pw0 + pw1
    xp = np.zeros((n, hp, wp, cin), dtype=x.data.dtype)
    xp[:, ph0:ph0 + h, pw0:pw0 + wd, :] = x.data
    cols = kernels.im2col(xp, kh, kw, stride, stride, ho, wo)
    wmat = w.data.reshape(kh * kw * cin, cout)
    out_mat = cols @ wmat
    out_mat += b.data
    out = Tensor(out_mat.reshape(n, ho, wo, cout),
                 requires_grad=x.requires_grad or w.requires_grad or b.requires_grad)

    def backward(g):
        gmat = g.reshape(n * ho * wo, cout)
        gx = gw = gb = None
        if b.requires_grad:
            gb = gmat.sum(axis=0)
        if w.requires_grad:
            gw = (cols.T @ gmat).reshape(kh, kw, cin, cout)
        if x.requires_grad:
            dcols = gmat @ wmat.T
            dxp = kernels.col2im_add(dcols, n, hp, wp, cin, kh, kw, stride, stride, ho, wo)
            gx = dxp[:, ph0:ph0 + h, pw0:pw0 + wd, :]
        return gx, gw, gb

    record_op((out,), (x, w, b), backward)
    return out


def layer_norm(x, gamma, beta, eps=1e-6):
    """Normalize over all of H, W, C per sample, then per-channel affine."""
    axes = tuple(range(1, x.data.ndim))
    mu = x.data.mean(axis=axes, keepdims=True)
    xc = x.data - mu
    var = np.mean(xc * xc, axis=axes, keepdims=True)
    inv = 1.0 / np.sqrt(var + eps)
    xhat = xc * inv
    out = Tensor(xhat * gamma.data + beta.data,
                 requires_grad=x.requires_grad or gamma.requires_grad or beta.requires_grad)

    def backward(g):
        gx = gg = gb = None
        sum_axes = tuple(range(x.data.ndim - 1))
        if beta.requires_grad:
            gb = g.sum(axis=sum_axes)
        if gamma.requires_grad:
            gg = (g * xhat).sum(axis=sum_axes)
        if x.requires_grad:
            dxhat = g * gamma.data
            m1 = dxhat.mean(axis=axes, keepdims=True)
            m2 = (dxhat * xhat).mean(axis=axes, keepdims=True)
            gx = inv * (dxhat - m1 - xhat * m2)
        return gx, gg, gb

    record_op((out,), (x, gamma, beta), backward)
    return out


def sigmoid(x):
    d = x.data
    s = np.empty_like(d)
    pos = d >= 0
    s[pos] = 1.0 / (1.0 + np.exp(-d[pos]))
    ex = np.exp(d[~pos])
    s[~pos] = ex / (1.0 + ex)
    out = Tensor(s, requires_grad=x.requires_grad)

    def backward(g):
        return (g * s * (1.0 - s),)

    record_op((out,), (x,), backward)
    return out


def tanh(x):
    t = np.tanh(x.data)
    out = Tensor(t, requires_grad=x.requires_grad)

    def backward(g):
        return (g * (1.0 - t * t),)

    record_op((out,), (x,), backward)
    return out


def add(a, b):
    if a.data.shape != b.data.shape:
        raise ValueError("add requires matching shapes")
    out = Tensor(a.data + b.data, requires_grad=a.requires_grad or b.requires_grad)

    def backward(g):
        return g, g

    record_op((out,), (a, b), backward)
    return out


def mul(a, b):
    if a.data.shape != b.data.shape:
        raise ValueError("mul requires matching shapes")
    out = Tensor(a.data * b.data, requires_grad=a.requires_grad or b.requires_grad)

    def backward(g):
        return g * b.data, g * a.data

    record_op((out,), (a, b), backward)
    return out


def scale(x, k):
    k = float(k)
    out = Tensor(x.data * k, requires_grad=x.requires_grad)

    def backward(g):
        return (g * k,)

    record_op((out,), (x,), backward)
    return out


def concat_channels(a, b):
    if a.data.shape[:-1] != b.data.shape[:-1]:
        raise ValueError("concat requires matching leading dimensions")
    ca = a.data.shape[-1]
    out = Tensor(np.concatenate([a.data, b.data], axis=-1),
                 requires_grad=a.requires_grad or b.requires_grad)

    def backward(g):
        return g[..., :ca], g[..., ca:]

    record_op((out,), (a, b), backward)
    return out


def depth_to_space(x):
    """Rearrange channels into 2x2 spatial blocks.

    out[y, x, c] = in[y//2, x//2, c*4 + (y%2)*2 + (x%2)]
    """
    n, h, w, c = x.data.shape
    if c % 4 != 0:
        raise ValueError("channel count must be divisible by 4")
    co = c // 4
    out_data = (
        x.data.reshape(n, h, w, co, 2, 2)
        .transpose(0, 1, 4, 2, 5, 3)
        .reshape(n, h * 2, w * 2, co)
    )
    out = Tensor(np.ascontiguousarray(out_data), requires_grad=x.requires_grad)

    def backward(g):
        return (_s2d_array(g),)

    record_op((out,), (x,), backward)
    return out


def _s2d_array(d):
    n, h2, w2, c = d.shape
    h, w = h2 // 2, w2 // 2
    return np.ascontiguousarray(
        d.reshape(n, h, 2, w, 2, c).transpose(0, 1, 3, 5, 2, 4).reshape(n, h, w, c * 4)
    )


def space_to_depth(x):
    """Inverse of depth_to_space (block size 2)."""
    n, h, w, c = x.data.shape
    if h % 2 or w % 2:
        raise ValueError("spatial dimensions must be even")
    out = Tensor(_s2d_array(x.data), requires_grad=x.requires_grad)

    def backward(g):
        n2, hh, ww, cc = g.shape
        co = cc // 4
        d2s = (
            g.reshape(n2, hh, ww, co, 2, 2)
            .transpose(0, 1, 4, 2, 5, 3)
            .reshape(n2, hh * 2, ww * 2, co)
        )
        return (np.ascontiguousarray(d2s),)

    record_op((out,), (x,), backward)
    return out


def crop_spatial(x, h, w):
    """Top-left spatial crop; gradient zero-pads back."""
    n, hi, wi, c = x.data.shape
    if h > hi or w > wi:
        raise ValueError("crop size exceeds input size")
    if h == hi and w == wi:
        return x
    out = Tensor(np.ascontiguousarray(x.data[:, :h, :w, :]), requires_grad=x.requires_grad)

    def backward(g):
        gx = np.zeros((n, hi, wi, c), dtype=g.dtype)
        gx[:, :h, :w, :] = g
        return (gx,)

    record_op((out,), (x,), backward)
    return out


def lstm_gates(pre, c_prev):
    """Fused conv-LSTM gate update.

    pre holds the gate pre-activations with channel layout
    [input, forget, output, candidate]; returns (h, c_new).
    """
    cch = c_prev.data.shape[-1]
    if pre.data.shape[-1] != 4 * cch:
        raise ValueError("gate pre-activations must have 4x the state channels")
    if pre.data.shape[:-1] != c_prev.data.shape[:-1]:
        raise ValueError("gate and state spatial shapes must match")
    pre_c = np.ascontiguousarray(pre.data)
    cprev_c = np.ascontiguousarray(c_prev.data)
    h_d, c_d, i, f, o, g_act, tc = kernels.lstm_pointwise_forward(pre_c, cprev_c)
    rg = pre.requires_grad or c_prev.requires_grad
    h = Tensor(h_d, requires_grad=rg)
    c = Tensor(c_d, requires_grad=rg)

    def backward(gh, gc):
        dpre, dc_prev = kernels.lstm_pointwise_backward(
            np.ascontiguousarray(gh), np.ascontiguousarray(gc),
            i, f, o, g_act, tc, cprev_c,
        )
        return dpre, dc_prev

    record_op((h, c), (pre, c_prev), backward)
    return h, c
