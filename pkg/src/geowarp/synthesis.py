"""Geometric next-frame synthesis by forward warping.

Pixels of the source frame are lifted to 3D with their depth, moved by the
relative camera motion, reprojected, and splatted with a z-buffer.  Gaps
(disocclusions) stay black with coverage false; metrics never read them.
The warp is plain post-processing; no gradients flow through it.
"""

from dataclasses import dataclass

import numpy as np

from geowarp import geometry, model
from geowarp.geometry import DepthMap, EgoMotion
from geowarp.kernels import splat_points
from geowarp.labels import DepthLabelConfig, denormalize_label

GAP_RGB = (0, 0, 0)


@dataclass(frozen=True)
class SplatConfig:
    footprint: str = "quad"     # "quad" (floor/ceil cells) or "single" (nearest pixel)
    z_min: float = geometry.DEFAULT_Z_MIN

    def __post_init__(self):
        if self.footprint not in ("quad", "single"):
            raise ValueError("footprint must be 'quad' or 'single'")
        if self.z_min <= 0:
            raise ValueError("z_min must be positive")


@dataclass
class WarpStats:
    culled: int
    overwritten: int
    gaps: int


@dataclass
class FramePrediction:
    """Warped RGB, propagated depth and the coverage mask."""

    rgb: np.ndarray
    depth: DepthMap
    coverage: np.ndarray
    stats: WarpStats


def warp_forward(rgb, depth, motion, intrinsics, cfg=SplatConfig()):
    """Forward-warp an RGB frame through depth and ego-motion.

    Per-pixel conflicts keep the smaller depth (ties: smaller source pixel
    index); uncovered pixels get the gap color and coverage false.
    """
    rgb = np.asarray(rgb)
    if rgb.shape[:2] != depth.shape:
        raise ValueError("rgb and depth dimensions must agree")
    cloud = geometry.unproject(depth, intrinsics, rgb=rgb)
    moved = geometry.apply_transform(cloud, motion.to_transform())
    proj, culled = geometry.project(moved, intrinsics, z_min=cfg.z_min)
    out_rgb, out_depth, covered, n_cand, dropped = splat_points(
        proj.u, proj.v, proj.depth, proj.rgb, proj.source_index,
        intrinsics.height, intrinsics.width, cfg.footprint == "quad",
    )
    n_covered = int(np.count_nonzero(covered))
    stats = WarpStats(
        culled=culled + dropped,
        overwritten=n_cand - n_covered,
        gaps=int(covered.size - n_covered),
    )
    values = np.where(covered, out_depth, 1.0)
    return FramePrediction(
        rgb=out_rgb,
        depth=DepthMap(values=values, mask=covered),
        coverage=covered,
        stats=stats,
    )


def predict_next(params, frames, poses, intrinsics, arch, label_cfg=DepthLabelConfig(),
                 cfg=SplatConfig(), depth_label_fn=None):
    """Predict frame k from frames 1..k-1 and the camera trajectory.

    Runs the recurrent model over the frames, denormalizes the last depth
    prediction to meters, computes the ego-motion from the last pose pair
    and warps the last frame forward.  `depth_label_fn` (frames -> list of
    (H, W) label maps) substitutes for the model when given, e.g. an oracle
    that returns the true normalized depth.
    """
    frames = np.asarray(frames)
    k = len(poses)
    if k < 2 or len(frames) != k - 1:
        raise ValueError("need k >= 2 poses and k-1 frames")
    if depth_label_fn is not None:
        label_map = depth_label_fn(frames)[-1]
    else:
        inputs = model.frames_to_input(frames)[:, None]
        preds = model.forward_sequence(params, list(inputs), arch)
        label_map = preds[-1].data[0, :, :, 0]
    metric = denormalize_label(label_map, label_cfg)
    depth = DepthMap(values=metric)
    motion = geometry.ego_motion(poses[-2], poses[-1])
    return warp_forward(frames[-1], depth, motion, intrinsics, cfg)


def simulate_hypothetical(rgb, depth, motions, intrinsics, cfg=SplatConfig()):
    """One warp per candidate motion from a fixed frame and depth.

    Each motion is an EgoMotion in the point-mapping convention (a camera
    moving forward by s has t_z = -s); see geowarp.geometry.
    """
    return [warp_forward(rgb, depth, m, intrinsics, cfg) for m in motions]


def camera_move(t_x=0.0, t_y=0.0, t_z=0.0, r_x=0.0, r_y=0.0, r_z=0.0):
    """EgoMotion for a camera that moves/rotates by the given amounts.

    Steering-style convention: positive t_z moves the camera forward
    (scene depths shrink), positive r_y turns it toward +x.  This is the
    inverse of the point-mapping transform stored in EgoMotion.
    """
    cam = EgoMotion(t_x=t_x, t_y=t_y, t_z=t_z, r_x=r_x, r_y=r_y, r_z=r_z)
    return EgoMotion.from_transform(cam.to_transform().inverse())
