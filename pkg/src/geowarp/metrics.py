"""Masked image quality metrics and the evaluation harness.

PSNR uses the MSE over masked pixels across all three channels.  SSIM runs
on BT.601 luma with an 11x11 Gaussian window (sigma 1.5); window weights
are renormalized over the masked pixels and windows with less than 50%
(weighted) masked coverage are skipped.
"""

import csv
import json
from dataclasses import dataclass, field

import numpy as np

from geowarp import geometry, model, synthesis
from geowarp.labels import DepthLabelConfig, denormalize_label

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
_C1 = (0.01 * 255.0) ** 2
_C2 = (0.03 * 255.0) ** 2
_LUMA = np.array([0.299, 0.587, 0.114])


def psnr(pred, gt, mask):
    """Peak signal-to-noise ratio in dB over masked pixels (+inf when equal)."""
    pred = np.asarray(pred, dtype=np.float64)
    gt = np.asarray(gt, dtype=np.float64)
    if pred.shape != gt.shape:
        raise ValueError("image shapes must match")
    mask = np.asarray(mask, dtype=bool)
    if not np.any(mask):
        raise ValueError("mask selects no pixels")
    diff = pred[mask] - gt[mask]
    mse = float(np.mean(diff * diff))
    if mse == 0.0:
        return float("inf")
    return 10.0 * np.log10(255.0 ** 2 / mse)


def luma(rgb):
    return np.asarray(rgb, dtype=np.float64) @ _LUMA


def gaussian_window(size=SSIM_WINDOW, sigma=SSIM_SIGMA):
    i = np.arange(size, dtype=np.float64) - (size - 1) / 2.0
    g = np.exp(-(i * i) / (2.0 * sigma * sigma))
    return g / g.sum()


def _filter_separable(img, g):
    """Zero-padded separable correlation with a normalized 1D window."""
    half = g.shape[0] // 2
    h, w = img.shape
    padded = np.zeros((h, w + 2 * half))
    padded[:, half:half + w] = img
    tmp = np.zeros((h, w))
    for t in range(g.shape[0]):
        tmp += g[t] * padded[:, t:t + w]
    padded2 = np.zeros((h + 2 * half, w))
    padded2[half:half + h, :] = tmp
    out = np.zeros((h, w))
    for t in range(g.shape[0]):
        out += g[t] * padded2[t:t + h, :]
    return out


def ssim(pred, gt, mask, return_map=False):
    """Mean masked SSIM on luma; see module docstring for the windowing."""
    pred = np.asarray(pred)
    gt = np.asarray(gt)
    if pred.shape != gt.shape:
        raise ValueError("image shapes must match")
    mask = np.asarray(mask, dtype=bool)
    x = luma(pred) if pred.ndim == 3 else np.asarray(pred, dtype=np.float64)
    y = luma(gt) if gt.ndim == 3 else np.asarray(gt, dtype=np.float64)
    m = mask.astype(np.float64)
    g = gaussian_window()

    weight = _filter_separable(m, g)
    evaluated = mask & (weight >= 0.5)
    if not np.any(evaluated):
        raise ValueError("no pixels with enough masked window coverage")
    with np.errstate(invalid="ignore", divide="ignore"):
        mu_x = _filter_separable(x * m, g) / weight
        mu_y = _filter_separable(y * m, g) / weight
        var_x = _filter_separable(x * x * m, g) / weight - mu_x * mu_x
        var_y = _filter_separable(y * y * m, g) / weight - mu_y * mu_y
        cov = _filter_separable(x * y * m, g) / weight - mu_x * mu_y
    num = (2.0 * mu_x * mu_y + _C1) * (2.0 * cov + _C2)
    den = (mu_x * mu_x + mu_y * mu_y + _C1) * (var_x + var_y + _C2)
    ssim_map = np.where(evaluated, num / np.where(evaluated, den, 1.0), 0.0)
    mean = float(ssim_map[evaluated].mean())
    if return_map:
        return mean, ssim_map, evaluated
    return mean


@dataclass
class FrameIndexStats:
    frame_index: int
    psnr_mean: float
    ssim_mean: float
    n: int


@dataclass
class MetricReport:
    mode: str
    psnr_mean: float
    ssim_mean: float
    pixel_count: int
    per_frame: list = field(default_factory=list)

    def to_dict(self):
        return {
            "version": 1,
            "mode": self.mode,
            "psnr_mean": _jsonable(self.psnr_mean),
            "ssim_mean": _jsonable(self.ssim_mean),
            "pixel_count": self.pixel_count,
            "per_frame": [
                {
                    "frame_index": s.frame_index,
                    "psnr_mean": _jsonable(s.psnr_mean),
                    "ssim_mean": _jsonable(s.ssim_mean),
                    "n": s.n,
                }
                for s in self.per_frame
            ],
        }

    def save_json(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=1)

    def save_csv(self, path):
        with open(path, "w", newline="") as fh:
            fh.write("# version: 1\n")
            writer = csv.writer(fh)
            writer.writerow(["frame_index", "psnr_mean", "ssim_mean", "n"])
            for s in self.per_frame:
                writer.writerow([s.frame_index, _csvable(s.psnr_mean), _csvable(s.ssim_mean), s.n])


def _jsonable(x):
    if np.isinf(x):
        return "inf" if x > 0 else "-inf"
    return float(x)


def _csvable(x):
    if np.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(float(x))


def _predicted_depths(params, record, arch, label_cfg):
    inputs = model.frames_to_input(record.frames)[:, None]
    preds = model.forward_sequence(params, list(inputs), arch)
    return [
        geometry.DepthMap(values=denormalize_label(p.data[0, :, :, 0], label_cfg))
        for p in preds
    ]


def evaluate(records, intrinsics, params=None, arch=None,
             label_cfg=DepthLabelConfig(), splat=synthesis.SplatConfig()):
    """Score next-frame predictions for every sequence and frame index.

    For each sequence and each i in 1..k-1, frame i+1 is synthesized from
    the first i frames and scored on its coverage mask against the real
    frame.  With `params` the model's depth drives the warp; without, the
    stored ground-truth depth does (oracle mode).
    """
    if not records:
        raise ValueError("empty evaluation set")
    oracle = params is None
    by_index = {}
    total_psnr, total_ssim, total_px, total_n = [], [], 0, 0
    for record in records:
        k = len(record)
        if k < 2:
            raise ValueError("sequences must have at least 2 frames")
        if oracle:
            depths = record.true_depths
        else:
            depths = _predicted_depths(params, record, arch, label_cfg)
        for i in range(1, k):
            motion = geometry.ego_motion(record.poses[i - 1], record.poses[i])
            pred = synthesis.warp_forward(
                record.frames[i - 1], depths[i - 1], motion, intrinsics, splat
            )
            gt = record.frames[i]
            p = psnr(pred.rgb, gt, pred.coverage)
            s = ssim(pred.rgb, gt, pred.coverage)
            by_index.setdefault(i, []).append((p, s))
            total_psnr.append(p)
            total_ssim.append(s)
            total_px += int(np.count_nonzero(pred.coverage))
            total_n += 1
    per_frame = [
        FrameIndexStats(
            frame_index=i,
            psnr_mean=float(np.mean([v[0] for v in vals])),
            ssim_mean=float(np.mean([v[1] for v in vals])),
            n=len(vals),
        )
        for i, vals in sorted(by_index.items())
    ]
    return MetricReport(
        mode="oracle-depth" if oracle else "predicted-depth",
        psnr_mean=float(np.mean(total_psnr)),
        ssim_mean=float(np.mean(total_ssim)),
        pixel_count=total_px,
        per_frame=per_frame,
    )
