"""On-disk dataset layout and sequence packaging.

One directory per video:

    video_000/
      frames/000000.png      8-bit RGB
      depth/000000.npyish    DMAP binary (see save_dmap)
      poses.csv              frame,x,y,z,yaw,pitch,roll  (radians)
      intrinsics.json        fx, fy, cx, cy, width, height

The DMAP binary is flat little-endian: magic "DMAP", u32 width, u32
height, f32 depth row-major, u8 mask row-major.
"""

import csv
import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from geowarp.geometry import CameraIntrinsics, DepthMap, Pose
from geowarp.labels import DepthLabelConfig, normalize_depth_map
from geowarp.synthetic import RenderedSequence

DMAP_MAGIC = b"DMAP"


def save_png(path, arr):
    Image.fromarray(arr).save(path, format="PNG")


def load_png(path):
    with Image.open(path) as img:
        return np.asarray(img).copy()


def save_dmap(path, depth):
    """Write a DepthMap as the DMAP binary (depth stored as float32)."""
    h, w = depth.values.shape
    with open(path, "wb") as fh:
        fh.write(DMAP_MAGIC)
        fh.write(struct.pack("<II", w, h))
        fh.write(np.ascontiguousarray(depth.values, dtype="<f4").tobytes())
        fh.write(np.ascontiguousarray(depth.mask, dtype=np.uint8).tobytes())


def load_dmap(path):
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:4] != DMAP_MAGIC:
        raise ValueError(f"{path}: not a DMAP file")
    w, h = struct.unpack_from("<II", blob, 4)
    off = 12
    n = w * h
    values = np.frombuffer(blob, dtype="<f4", count=n, offset=off).reshape(h, w)
    off += 4 * n
    mask = np.frombuffer(blob, dtype=np.uint8, count=n, offset=off).reshape(h, w)
    values = values.astype(np.float64)
    mask = mask.astype(bool)
    values[~mask] = 1.0  # placeholder; masked-out values are never read
    return DepthMap(values=values, mask=mask)


def save_poses_csv(path, poses):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["frame", "x", "y", "z", "yaw", "pitch", "roll"])
        for i, p in enumerate(poses):
            vals = [p.position[0], p.position[1], p.position[2], p.yaw, p.pitch, p.roll]
            writer.writerow([i] + [repr(float(v)) for v in vals])


def load_poses_csv(path):
    poses = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            poses.append(Pose(
                position=np.array([float(row["x"]), float(row["y"]), float(row["z"])]),
                yaw=float(row["yaw"]), pitch=float(row["pitch"]), roll=float(row["roll"]),
            ))
    return poses


def save_intrinsics(path, intrinsics):
    with open(path, "w") as fh:
        json.dump({"version": 1, **intrinsics.to_dict()}, fh, indent=1)


def load_intrinsics(path):
    with open(path) as fh:
        return CameraIntrinsics.from_dict(json.load(fh))


def write_video_dir(directory, video):
    """Serialize a RenderedSequence (or equivalent) into the dataset layout."""
    directory = Path(directory)
    (directory / "frames").mkdir(parents=True, exist_ok=True)
    (directory / "depth").mkdir(parents=True, exist_ok=True)
    for i in range(len(video.frames)):
        save_png(directory / "frames" / f"{i:06d}.png", video.frames[i])
        save_dmap(directory / "depth" / f"{i:06d}.npyish", video.depths[i])
    save_poses_csv(directory / "poses.csv", video.poses)
    save_intrinsics(directory / "intrinsics.json", video.intrinsics)


def load_video_dir(directory):
    directory = Path(directory)
    frame_files = sorted((directory / "frames").glob("*.png"))
    if not frame_files:
        raise ValueError(f"{directory}: no frames found")
    frames = np.stack([load_png(f) for f in frame_files])
    depths = [
        load_dmap(directory / "depth" / (f.stem + ".npyish")) for f in frame_files
    ]
    poses = load_poses_csv(directory / "poses.csv")
    if len(poses) != len(frame_files):
        raise ValueError(f"{directory}: pose count does not match frame count")
    intrinsics = load_intrinsics(directory / "intrinsics.json")
    return RenderedSequence(frames=frames, depths=depths, poses=poses,
                            intrinsics=intrinsics)


def list_video_dirs(root):
    root = Path(root)
    dirs = sorted(d for d in root.iterdir() if (d / "frames").is_dir())
    if not dirs:
        raise ValueError(f"{root}: no video directories found")
    return dirs


@dataclass
class SequenceRecord:
    """Fixed-length training window: frames, normalized labels, poses."""

    frames: np.ndarray       # (k, H, W, 3) uint8
    labels: np.ndarray       # (k, H, W) float32
    label_masks: np.ndarray  # (k, H, W) bool
    poses: list
    true_depths: list        # DepthMap per frame (dense for synthetic data)

    def __len__(self):
        return self.frames.shape[0]


def split_sequences(video, k, label_cfg=DepthLabelConfig(), stride=None):
    """Cut a video into consecutive k-frame windows (default non-overlapping).

    The trailing remainder shorter than k is dropped.
    """
    if k < 2:
        raise ValueError("sequence length must be >= 2")
    stride = k if stride is None else stride
    if stride < 1:
        raise ValueError("stride must be >= 1")
    n = len(video.frames)
    records = []
    for start in range(0, n - k + 1, stride):
        sl = slice(start, start + k)
        depths = video.depths[sl]
        labels = np.empty((k,) + depths[0].shape, dtype=np.float32)
        masks = np.empty((k,) + depths[0].shape, dtype=bool)
        for i, d in enumerate(depths):
            lab, m = normalize_depth_map(d, label_cfg)
            labels[i] = lab
            masks[i] = m
        records.append(SequenceRecord(
            frames=video.frames[sl].copy(),
            labels=labels,
            label_masks=masks,
            poses=list(video.poses[sl]),
            true_depths=list(depths),
        ))
    return records


def load_dataset(root, k, label_cfg=DepthLabelConfig(), stride=None):
    """Load every video under root and split it into k-frame records."""
    records = []
    for d in list_video_dirs(root):
        records.extend(split_sequences(load_video_dir(d), k, label_cfg, stride))
    if not records:
        raise ValueError(f"{root}: no sequences of length {k}")
    return records


def dataset_intrinsics(root):
    return load_intrinsics(list_video_dirs(root)[0] / "intrinsics.json")
