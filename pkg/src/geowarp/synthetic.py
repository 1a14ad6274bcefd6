"""Procedural box-world scenes with exact ray-cast depth.

Scenes are a ground plane plus axis-aligned textured boxes (walls and
ceiling are just large slab boxes, so every camera ray hits geometry and
the rendered depth maps are dense).  Textures are smooth seeded value
noise in box-normalized coordinates, which makes box appearance
independent of absolute scale and distance.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from geowarp.geometry import (
    CameraIntrinsics, DepthMap, Pose, pose_to_transform,
)
from geowarp.kernels import raycast_scene, value_noise3

_FACE_TINTS = np.array([0.85, 0.95, 0.78, 1.0, 0.92, 0.82])
_GROUND_LATTICE_M = 1.8
_BOX_TEXTURE_CELLS = 4.0


@dataclass(frozen=True)
class TexturedBox:
    """Axis-aligned box: min corner, edge lengths, texture seed."""

    position: np.ndarray
    size: np.ndarray
    texture_seed: int

    def __post_init__(self):
        p = np.asarray(self.position, dtype=np.float64).reshape(3)
        s = np.asarray(self.size, dtype=np.float64).reshape(3)
        object.__setattr__(self, "position", p)
        object.__setattr__(self, "size", s)
        if not np.all(s > 0):
            raise ValueError("box size must be positive")

    @property
    def max_corner(self):
        return self.position + self.size

    def contains(self, point):
        return bool(np.all(point > self.position) and np.all(point < self.max_corner))


@dataclass
class SyntheticSceneSpec:
    ground_height: float
    boxes: list
    trajectory: list
    intrinsics: CameraIntrinsics
    frame_count: int
    ground_seed: int = 0
    ground_texture_scale: float = _GROUND_LATTICE_M

    def validate(self):
        if self.frame_count < 1:
            raise ValueError("frame_count must be >= 1")
        if len(self.trajectory) != self.frame_count:
            raise ValueError("trajectory length must equal frame_count")
        for pose in self.trajectory:
            for box in self.boxes:
                if box.contains(pose.position):
                    raise ValueError("camera pose lies inside a box")
        return self

    def to_dict(self):
        return {
            "version": 1,
            "ground_height": self.ground_height,
            "ground_seed": self.ground_seed,
            "ground_texture_scale": self.ground_texture_scale,
            "boxes": [
                {
                    "position": box.position.tolist(),
                    "size": box.size.tolist(),
                    "texture_seed": box.texture_seed,
                }
                for box in self.boxes
            ],
            "trajectory": [
                {
                    "position": p.position.tolist(),
                    "yaw": p.yaw, "pitch": p.pitch, "roll": p.roll,
                }
                for p in self.trajectory
            ],
            "intrinsics": self.intrinsics.to_dict(),
            "frame_count": self.frame_count,
        }

    @staticmethod
    def from_dict(d):
        spec = SyntheticSceneSpec(
            ground_height=float(d["ground_height"]),
            ground_seed=int(d.get("ground_seed", 0)),
            ground_texture_scale=float(d.get("ground_texture_scale", _GROUND_LATTICE_M)),
            boxes=[
                TexturedBox(b["position"], b["size"], int(b["texture_seed"]))
                for b in d["boxes"]
            ],
            trajectory=[
                Pose(p["position"], float(p["yaw"]), float(p["pitch"]), float(p["roll"]))
                for p in d["trajectory"]
            ],
            intrinsics=CameraIntrinsics.from_dict(d["intrinsics"]),
            frame_count=int(d["frame_count"]),
        )
        return spec.validate()

    def save(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=1)

    @staticmethod
    def load(path):
        with open(path) as fh:
            return SyntheticSceneSpec.from_dict(json.load(fh))


@dataclass
class RenderedSequence:
    """Frames, dense true depth and poses for one rendered camera path."""

    frames: np.ndarray
    depths: list
    poses: list
    intrinsics: CameraIntrinsics

    def __len__(self):
        return self.frames.shape[0]


def _camera_rays(intrinsics):
    us, vs = np.meshgrid(
        np.arange(intrinsics.width, dtype=np.float64),
        np.arange(intrinsics.height, dtype=np.float64),
    )
    x = (us - intrinsics.cx) / intrinsics.fx
    y = (vs - intrinsics.cy) / intrinsics.fy
    return np.stack([x.ravel(), y.ravel(), np.ones(x.size)], axis=1)


def _palette(seed):
    rng = np.random.default_rng(seed)
    return rng.uniform(0.35, 0.9, size=3)


def render_frame(spec, pose, rays_cam=None):
    """Ray-cast one frame; returns (rgb uint8 HxWx3, dense depth HxW)."""
    intr = spec.intrinsics
    if rays_cam is None:
        rays_cam = _camera_rays(intr)
    cam = pose_to_transform(pose)
    dirs = np.ascontiguousarray(rays_cam @ cam.rotation.T)
    origin = np.ascontiguousarray(cam.translation)
    if spec.boxes:
        boxes_arr = np.stack(
            [np.concatenate([b.position, b.max_corner]) for b in spec.boxes]
        )
    else:
        boxes_arr = np.zeros((0, 6), dtype=np.float64)
    t, obj, _face = raycast_scene(origin, dirs, boxes_arr, spec.ground_height, 1e-6)
    if not np.all(np.isfinite(t)):
        raise ValueError("scene does not cover the camera's field of view")
    pts = origin[None, :] + t[:, None] * dirs
    face = _face
    n_boxes = len(spec.boxes)
    rgb = np.zeros((t.shape[0], 3), dtype=np.float64)

    gmask = obj == n_boxes
    if np.any(gmask):
        noise = value_noise3(
            np.ascontiguousarray(pts[gmask] / spec.ground_texture_scale),
            spec.ground_seed)
        shade = 0.7 + 0.6 * (noise - 0.5)
        rgb[gmask] = _palette(spec.ground_seed)[None, :] * shade[:, None]

    for b, box in enumerate(spec.boxes):
        bmask = obj == b
        if not np.any(bmask):
            continue
        local = (pts[bmask] - box.position[None, :]) / box.size[None, :]
        noise = value_noise3(np.ascontiguousarray(local * _BOX_TEXTURE_CELLS),
                             box.texture_seed)
        shade = (0.7 + 0.6 * (noise - 0.5)) * _FACE_TINTS[face[bmask]]
        rgb[bmask] = _palette(box.texture_seed)[None, :] * shade[:, None]

    rgb8 = np.clip(rgb * 255.0, 0, 255).astype(np.uint8)
    return (
        rgb8.reshape(intr.height, intr.width, 3),
        t.reshape(intr.height, intr.width),
    )


def render_synthetic_sequence(spec):
    """Render every trajectory pose; depth maps are dense (full mask)."""
    spec.validate()
    intr = spec.intrinsics
    rays = _camera_rays(intr)
    frames = np.empty((spec.frame_count, intr.height, intr.width, 3), dtype=np.uint8)
    depths = []
    for i, pose in enumerate(spec.trajectory):
        rgb, depth = render_frame(spec, pose, rays_cam=rays)
        frames[i] = rgb
        depths.append(DepthMap(values=depth))
    return RenderedSequence(
        frames=frames, depths=depths,
        poses=list(spec.trajectory), intrinsics=intr,
    )


def standard_intrinsics(height, width):
    """Square pixels, 90 degree horizontal field of view, centered."""
    return CameraIntrinsics(
        fx=width / 2.0, fy=width / 2.0,
        cx=width / 2.0, cy=height / 2.0,
        width=width, height=height,
    )


def plane_scene_spec(distance, intrinsics, frame_count=1, texture_seed=11):
    """A single huge fronto-parallel face at the given distance (demo scene)."""
    poses = [Pose(np.zeros(3), 0.0, 0.0, 0.0) for _ in range(frame_count)]
    box = TexturedBox(
        position=np.array([-400.0, distance, -400.0]),
        size=np.array([800.0, 50.0, 800.0]),
        texture_seed=texture_seed,
    )
    return SyntheticSceneSpec(
        ground_height=-1000.0, boxes=[box], trajectory=poses,
        intrinsics=intrinsics, frame_count=frame_count, ground_seed=3,
    ).validate()


def random_scene_spec(rng, intrinsics, frame_count=10, n_boxes=None):
    """Driving-style random corridor: side walls, ceiling, ground and
    floating boxes scattered along the whole length.

    Designed so one frame underdetermines depth while parallax pins it
    down: corridor width, box sizes and the ground texture scale vary
    independently of distances, box textures live in box-normalized
    coordinates, and most boxes float (no ground-contact cue).  The
    camera height is fixed, anchoring absolute scale through the ground
    plane, and boxes populate every distance band so scene statistics
    stay stationary as the camera advances.
    """
    half_w = rng.uniform(6.0, 13.0)
    far_y = 46.0
    back_y = -4.0
    height = rng.uniform(4.5, 9.0)
    thick = 1.0
    span_x = 2 * half_w + 2 * thick
    span_y = far_y - back_y + 2 * thick

    def seed():
        return int(rng.integers(0, 2**31 - 1))

    walls = [
        TexturedBox([-half_w - thick, back_y - thick, 0.0],
                    [thick, span_y, height], seed()),
        TexturedBox([half_w, back_y - thick, 0.0],
                    [thick, span_y, height], seed()),
        TexturedBox([-half_w - thick, far_y, 0.0],
                    [span_x, thick, height], seed()),
        TexturedBox([-half_w - thick, back_y - thick, 0.0],
                    [span_x, thick, height], seed()),
        TexturedBox([-half_w - thick, back_y - thick, height],
                    [span_x, span_y, thick], seed()),
    ]

    if n_boxes is None:
        n_boxes = int(rng.integers(6, 10))
    boxes = []
    for i in range(n_boxes):
        size = rng.uniform(1.0, 4.5, size=3)
        # one box per distance band keeps clutter density stationary
        band = 4.0 + (30.0 - 4.0) * i / n_boxes
        y = rng.uniform(band, band + (30.0 - 4.0) / n_boxes)
        if y < 9.0:
            # keep the camera path (|x| < ~2.2, y up to ~6) clear
            side = 1.0 if rng.uniform() < 0.5 else -1.0
            lo = 2.4 if side > 0 else -half_w + 0.3
            hi = half_w - 0.3 - size[0] if side > 0 else -2.4 - size[0]
            if hi <= lo:
                continue
            x = rng.uniform(lo, hi)
        else:
            x = rng.uniform(-half_w + 0.3, half_w - 0.3 - size[0])
        z = 0.0 if rng.uniform() < 0.25 else rng.uniform(0.3, 3.5)
        boxes.append(TexturedBox([x, y, z], size, seed()))

    pos = np.array([rng.uniform(-1.0, 1.0), rng.uniform(0.0, 0.5), 1.5])
    yaw = rng.uniform(-0.1, 0.1)
    pitch = rng.uniform(-0.05, 0.02)
    speed = rng.uniform(0.25, 0.5)
    yaw_rate = rng.uniform(-0.02, 0.02)
    poses = []
    for _ in range(frame_count):
        poses.append(Pose(pos.copy(), yaw, pitch, 0.0))
        heading = np.array([-np.sin(yaw), np.cos(yaw), 0.0])
        pos = pos + speed * heading
        yaw += yaw_rate

    return SyntheticSceneSpec(
        ground_height=0.0, ground_seed=seed(), boxes=walls + boxes,
        trajectory=poses, intrinsics=intrinsics, frame_count=frame_count,
        ground_texture_scale=float(rng.uniform(1.0, 3.0)),
    ).validate()
