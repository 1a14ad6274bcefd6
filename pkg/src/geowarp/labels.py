"""Depth label generation and normalization.

Metric depth d in [d_min, d_max] is mapped to inverse depth d_min/d and
then affinely onto [label_lo, label_hi], so the nearest depth gets the
largest label.  A log-depth variant exists behind the `transform` knob.
"""

from dataclasses import dataclass

import numpy as np

from geowarp import geometry
from geowarp.kernels import splat_points


@dataclass(frozen=True)
class DepthLabelConfig:
    d_min: float = 3.0
    d_max: float = 80.0
    label_lo: float = 0.25
    label_hi: float = 0.75
    transform: str = "inverse"

    def __post_init__(self):
        if not (0 < self.d_min < self.d_max):
            raise ValueError("need 0 < d_min < d_max")
        if not (0 <= self.label_lo < self.label_hi <= 1):
            raise ValueError("need 0 <= label_lo < label_hi <= 1")
        if self.transform not in ("inverse", "log"):
            raise ValueError("transform must be 'inverse' or 'log'")

    def to_dict(self):
        return {
            "d_min": self.d_min, "d_max": self.d_max,
            "label_lo": self.label_lo, "label_hi": self.label_hi,
            "transform": self.transform,
        }

    @staticmethod
    def from_dict(d):
        return DepthLabelConfig(
            d_min=float(d.get("d_min", 3.0)),
            d_max=float(d.get("d_max", 80.0)),
            label_lo=float(d.get("label_lo", 0.25)),
            label_hi=float(d.get("label_hi", 0.75)),
            transform=str(d.get("transform", "inverse")),
        )


def _raw_range(cfg):
    if cfg.transform == "inverse":
        return cfg.d_min / cfg.d_max, 1.0
    return np.log(cfg.d_min), np.log(cfg.d_max)


def _raw_value(d, cfg):
    if cfg.transform == "inverse":
        return cfg.d_min / d
    return np.log(d)


def normalize_depth(d, cfg=DepthLabelConfig()):
    """Map metric depth (scalar or array) to a label in [label_lo, label_hi]."""
    d = np.asarray(d, dtype=np.float64)
    if np.any(d < cfg.d_min) or np.any(d > cfg.d_max):
        raise ValueError(f"depth outside [{cfg.d_min}, {cfg.d_max}]; mask such pixels instead")
    lo, hi = _raw_range(cfg)
    raw = _raw_value(d, cfg)
    label = cfg.label_lo + (raw - lo) * (cfg.label_hi - cfg.label_lo) / (hi - lo)
    return label if label.ndim else float(label)

def denormalize_label(label, cfg=DepthLabelConfig()):
    """Exact inverse of normalize_depth; labels are clamped to the valid range first."""
    label = np.clip(np.asarray(label, dtype=np.float64), cfg.label_lo, cfg.label_hi)
    lo, hi = _raw_range(cfg)
    raw = lo + (label - cfg.label_lo) * (hi - lo) / (cfg.label_hi - cfg.label_lo)
    if cfg.transform == "inverse":
        d = cfg.d_min / raw
    else:
        d = np.exp(raw)
    return d if d.ndim else float(d)


def normalize_depth_map(depth, cfg=DepthLabelConfig()):
    """DepthMap -> (labels, label_mask); out-of-range depths get masked out."""
    in_range = depth.mask & (depth.values >= cfg.d_min) & (depth.values <= cfg.d_max)
    labels = np.full(depth.values.shape, 0.5 * (cfg.label_lo + cfg.label_hi))
    if np.any(in_range):
        labels[in_range] = normalize_depth(depth.values[in_range], cfg)
    return labels, in_range


@dataclass
class LidarScan:
    """Sensor-frame points plus the sensor-to-camera calibration."""

    points: np.ndarray
    sensor_to_camera: geometry.RigidTransform

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=np.float64).reshape(-1, 3)
        if not np.all(np.isfinite(self.points)):
            raise ValueError("scan points must be finite")


def scan_to_depth_map(scan, intrinsics, cfg=DepthLabelConfig()):
    """Rasterize a scan into a sparse depth map.

    Points land on their nearest pixel; collisions keep the smaller depth;
    depths outside [d_min, d_max] are dropped.  Returns (DepthMap, culled).
    """
    cam_pts = scan.sensor_to_camera.apply(scan.points)
    in_range = (cam_pts[:, 2] >= cfg.d_min) & (cam_pts[:, 2] <= cfg.d_max)
    kept = cam_pts[in_range]
    cloud = geometry.PointCloud(
        xyz=kept,
        rgb=np.zeros((kept.shape[0], 3), dtype=np.uint8),
        source_index=np.arange(kept.shape[0], dtype=np.int64),
    )
    proj, proj_culled = geometry.project(cloud, intrinsics)
    _, depth, covered, _, dropped = splat_points(
        proj.u, proj.v, proj.depth, proj.rgb, proj.source_index,
        intrinsics.height, intrinsics.width, False,
    )
    culled = int(np.count_nonzero(~in_range)) + proj_culled + dropped
    values = np.where(covered, depth, 1.0)
    return geometry.DepthMap(values=values, mask=covered), culled
