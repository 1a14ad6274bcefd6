"""Masked depth losses: L2, reverse Huber and gradient-difference.

All of them average over the masked pixels (or masked pairs for the
gradient term) so magnitudes stay comparable across sparsity levels;
frames with an empty mask contribute zero with zero gradient.
"""

from dataclasses import dataclass, field

import numpy as np

from geowarp.nn.tensor import Tensor, record_op


@dataclass(frozen=True)
class LossConfig:
    kind: str = "l2"              # "l2" | "berhu"
    lambda_gdl: float = 0.0       # 0 or 1 in practice
    alphas: tuple = ()            # per-frame weights, empty = all ones

    def __post_init__(self):
        if self.kind not in ("l2", "berhu"):
            raise ValueError("loss kind must be 'l2' or 'berhu'")
        if self.alphas and (min(self.alphas) < 0 or max(self.alphas) <= 0):
            raise ValueError("frame weights must be >= 0 with at least one > 0")

    def frame_weights(self, k):
        if not self.alphas:
            return np.ones(k)
        if len(self.alphas) != k:
            raise ValueError(f"expected {k} frame weights, got {len(self.alphas)}")
        return np.asarray(self.alphas, dtype=np.float64)


def _zero_scalar(pred):
    out = Tensor(np.zeros((), dtype=pred.data.dtype), requires_grad=pred.requires_grad)

    def backward(g):
        return (np.zeros_like(pred.data),)

    record_op((out,), (pred,), backward)
    return out


def _prep(pred, target, mask):
    target = np.asarray(target, dtype=pred.data.dtype)
    if target.shape != pred.data.shape:
        raise ValueError("prediction and target shapes must match")
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != pred.data.shape:
        raise ValueError("mask shape must match prediction shape")
    return target, mask


def l2_loss(pred, target, mask):
    """Mean squared difference over masked pixels."""
    target, mask = _prep(pred, target, mask)
    cnt = int(np.count_nonzero(mask))
    if cnt == 0:
        return _zero_scalar(pred)
    diff = np.where(mask, pred.data - target, 0.0).astype(pred.data.dtype)
    val = np.sum(diff * diff, dtype=np.float64) / cnt
    out = Tensor(np.asarray(val, dtype=pred.data.dtype), requires_grad=pred.requires_grad)

    def backward(g):
        return (g * (2.0 / cnt) * diff,)

    record_op((out,), (pred,), backward)
    return out


def berhu_loss(pred, target, mask):
    """Reverse Huber: L1 inside |delta| <= c, scaled quadratic outside.

    c is a fifth of the largest masked |delta| of this frame and is treated
    as a constant in the backward pass.
    """
    target, mask = _prep(pred, target, mask)
    cnt = int(np.count_nonzero(mask))
    if cnt == 0:
        return _zero_scalar(pred)
    diff = np.where(mask, pred.data - target, 0.0).astype(pred.data.dtype)
    absd = np.abs(diff)
    c = float(absd.max()) / 5.0
    if c == 0.0:
        return _zero_scalar(pred)
    small = absd <= c
    per_pixel = np.where(small, absd, (diff * diff + c * c) / (2.0 * c))
    val = np.sum(np.where(mask, per_pixel, 0.0), dtype=np.float64) / cnt
    out = Tensor(np.asarray(val, dtype=pred.data.dtype), requires_grad=pred.requires_grad)

    def backward(g):
        grad = np.where(small, np.sign(diff), diff / c)
        grad = np.where(mask, grad, 0.0).astype(pred.data.dtype)
        return (g * grad / cnt,)

    record_op((out,), (pred,), backward)
    return out


def gdl_loss(pred, target, mask):
    """Gradient difference loss over horizontally and vertically adjacent
    pixel pairs; a pair counts only when both pixels are masked."""
    target, mask = _prep(pred, target, mask)
    d = pred.data
    m = mask.astype(d.dtype)

    # pairs along width (x with x-1) and along height (y with y-1)
    pw = m[:, :, 1:, :] * m[:, :, :-1, :]
    ph = m[:, 1:, :, :] * m[:, :-1, :, :]
    n_pairs = int(np.sum(pw) + np.sum(ph))
    if n_pairs == 0:
        return _zero_scalar(pred)
    dw = (d[:, :, 1:, :] - d[:, :, :-1, :]) - (target[:, :, 1:, :] - target[:, :, :-1, :])
    dh = (d[:, 1:, :, :] - d[:, :-1, :, :]) - (target[:, 1:, :, :] - target[:, :-1, :, :])
    dw = dw * pw
    dh = dh * ph
    val = (np.sum(dw * dw, dtype=np.float64) + np.sum(dh * dh, dtype=np.float64)) / n_pairs
    out = Tensor(np.asarray(val, dtype=d.dtype), requires_grad=pred.requires_grad)

    def backward(g):
        gx = np.zeros_like(d)
        gw = (2.0 / n_pairs) * dw
        gh = (2.0 / n_pairs) * dh
        gx[:, :, 1:, :] += gw
        gx[:, :, :-1, :] -= gw
        gx[:, 1:, :, :] += gh
        gx[:, :-1, :, :] -= gh
        return (g * gx,)

    record_op((out,), (pred,), backward)
    return out


_BASE_LOSSES = {"l2": l2_loss, "berhu": berhu_loss}


def frame_loss(pred, target, mask, cfg):
    base = _BASE_LOSSES[cfg.kind](pred, target, mask)
    if cfg.lambda_gdl == 0.0:
        return base
    gdl = gdl_loss(pred, target, mask)
    from geowarp.nn import ops
    return ops.add(base, ops.scale(gdl, cfg.lambda_gdl))


def sequence_loss(predictions, targets, masks, cfg=LossConfig()):
    """Average weighted per-frame loss: (1/k) sum_i alpha_i L(D_i, Y_i)."""
    from geowarp.nn import ops
    k = len(predictions)
    if not (len(targets) == len(masks) == k):
        raise ValueError("prediction, target and mask counts must match")
    weights = cfg.frame_weights(k)
    total = None
    for pred, target, mask, alpha in zip(predictions, targets, masks, weights):
        fl = frame_loss(pred, target, mask, cfg)
        term = ops.scale(fl, alpha / k)
        total = term if total is None else ops.add(total, term)
    return total
