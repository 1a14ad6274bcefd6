"""Camera model, rigid transforms and ego-motion.

Coordinate conventions (used everywhere in this package):

  World frame (right-handed):
    x: east, y: north, z: up.

  Camera frame (right-handed, computer-vision style):
    x: right in the image, y: down in the image, z: forward along the
    optical axis.

  At zero yaw/pitch/roll the camera looks along world +y with the image
  x-axis aligned to world +x (so image "down" is world -z).

  Pose angles are intrinsic: yaw about world up (+z, counterclockwise from
  above), then pitch about the camera's right axis (positive tilts the view
  up), then roll about the optical axis.  The camera-to-world rotation is

      R_wc = Rz(yaw) @ Rx(pitch) @ Ry(roll) @ R_CAM0

  with R_CAM0 mapping camera axes to the zero-attitude world axes.

  EgoMotion holds the six components of the relative transform that maps
  points from the earlier camera frame into the later camera frame
  (T_rel = inv(T_curr) @ T_prev); a camera moving forward by s therefore
  has t_z = -s.  Its rotation composes as Rz(r_z) @ Ry(r_y) @ Rx(r_x) in
  camera axes.

Image pixels: u along width (column), v along height (row); pixel (u, v)
with depth d unprojects to ((u - cx) d / fx, (v - cy) d / fy, d).
"""

from dataclasses import dataclass, field

import numpy as np

# camera axes expressed in the zero-attitude world frame:
# cam x -> world +x, cam y -> world -z, cam z -> world +y
R_CAM0 = np.array([
    [1.0, 0.0, 0.0],
    [0.0, 0.0, 1.0],
    [0.0, -1.0, 0.0],
])

DEFAULT_Z_MIN = 1e-3
_SNAP_EPS = 1e-6
_ORTHO_TOL = 1e-9
_GIMBAL_MARGIN = 1e-6


def rot_x(a):
    c, s = np.cos(a), np.sin(a)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def rot_y(a):
    c, s = np.cos(a), np.sin(a)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def rot_z(a):
    c, s = np.cos(a), np.sin(a)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


@dataclass(frozen=True)
class CameraIntrinsics:
    """Pinhole camera: focal lengths and principal point in pixels."""

    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int

    def __post_init__(self):
        if not (self.fx > 0 and self.fy > 0):
            raise ValueError("focal lengths must be positive")
        if not (0 <= self.cx < self.width and 0 <= self.cy < self.height):
            raise ValueError("principal point must lie inside the image")

    def scaled(self, factor):
        """Intrinsics for an image resized by `factor` in both dimensions."""
        return CameraIntrinsics(
            fx=self.fx * factor, fy=self.fy * factor,
            cx=self.cx * factor, cy=self.cy * factor,
            width=int(round(self.width * factor)),
            height=int(round(self.height * factor)),
        )

    def to_dict(self):
        return {
            "fx": self.fx, "fy": self.fy, "cx": self.cx, "cy": self.cy,
            "width": self.width, "height": self.height,
        }

    @staticmethod
    def from_dict(d):
        return CameraIntrinsics(
            fx=float(d["fx"]), fy=float(d["fy"]),
            cx=float(d["cx"]), cy=float(d["cy"]),
            width=int(d["width"]), height=int(d["height"]),
        )


@dataclass(frozen=True)
class Pose:
    """6-DoF camera pose: position in meters, attitude in radians."""

    position: np.ndarray
    yaw: float
    pitch: float
    roll: float

    def __post_init__(self):
        p = np.asarray(self.position, dtype=np.float64).reshape(3)
        object.__setattr__(self, "position", p)
        vals = [self.yaw, self.pitch, self.roll, *p]
        if not np.all(np.isfinite(vals)):
            raise ValueError("pose components must be finite")


@dataclass(frozen=True)
class RigidTransform:
    """Rotation + translation; p' = R @ p + t."""

    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.rotation, dtype=np.float64).reshape(3, 3)
        t = np.asarray(self.translation, dtype=np.float64).reshape(3)
        object.__setattr__(self, "rotation", r)
        object.__setattr__(self, "translation", t)
        err = np.max(np.abs(r.T @ r - np.eye(3)))
        if err > _ORTHO_TOL:
            raise ValueError(f"rotation is not orthonormal (max |R'R - I| = {err:.2e})")
        if abs(np.linalg.det(r) - 1.0) > _ORTHO_TOL:
            raise ValueError("rotation must have determinant +1")

    @staticmethod
    def identity():
        return RigidTransform(np.eye(3), np.zeros(3))

    def apply(self, points):
        pts = np.asarray(points, dtype=np.float64)
        return pts @ self.rotation.T + self.translation

    def compose(self, other):
        """self after other: (self o other)(p) = self(other(p))."""
        return RigidTransform(
            self.rotation @ other.rotation,
            self.rotation @ other.translation + self.translation,
        )

    def inverse(self):
        rt = self.rotation.T
        return RigidTransform(rt, -rt @ self.translation)

    def as_matrix(self):
        m = np.eye(4)
        m[:3, :3] = self.rotation
        m[:3, 3] = self.translation
        return m

    @staticmethod
    def from_matrix(m):
        m = np.asarray(m, dtype=np.float64)
        return RigidTransform(m[:3, :3], m[:3, 3])


@dataclass(frozen=True)
class EgoMotion:
    """Relative camera motion between two frames, see module docstring."""

    t_x: float = 0.0
    t_y: float = 0.0
    t_z: float = 0.0
    r_x: float = 0.0
    r_y: float = 0.0
    r_z: float = 0.0

    def to_transform(self):
        r = rot_z(self.r_z) @ rot_y(self.r_y) @ rot_x(self.r_x)
        return RigidTransform(r, np.array([self.t_x, self.t_y, self.t_z]))

    @staticmethod
    def from_transform(t):
        r = t.rotation
        sy = -r[2, 0]
        sy_c = min(1.0, max(-1.0, sy))
        ry = np.arcsin(sy_c)
        if abs(ry) > np.pi / 2 - _GIMBAL_MARGIN:
            raise ValueError("rotation too close to gimbal lock for Euler extraction")
        rx = np.arctan2(r[2, 1], r[2, 2])
        rz = np.arctan2(r[1, 0], r[0, 0])
        tr = t.translation
        return EgoMotion(
            t_x=float(tr[0]), t_y=float(tr[1]), t_z=float(tr[2]),
            r_x=float(rx), r_y=float(ry), r_z=float(rz),
        )

    def inverse(self):
        return EgoMotion.from_transform(self.to_transform().inverse())

    def to_dict(self):
        return {
            "t_x": self.t_x, "t_y": self.t_y, "t_z": self.t_z,
            "r_x": self.r_x, "r_y": self.r_y, "r_z": self.r_z,
        }

    @staticmethod
    def from_dict(d):
        return EgoMotion(
            t_x=float(d.get("t_x", 0.0)), t_y=float(d.get("t_y", 0.0)),
            t_z=float(d.get("t_z", 0.0)), r_x=float(d.get("r_x", 0.0)),
            r_y=float(d.get("r_y", 0.0)), r_z=float(d.get("r_z", 0.0)),
        )


@dataclass
class PointCloud:
    """Colored 3D points with their source pixel indices (row*width + col)."""

    xyz: np.ndarray
    rgb: np.ndarray
    source_index: np.ndarray

    def __len__(self):
        return self.xyz.shape[0]


@dataclass
class ProjectedPoints:
    """Continuous pixel coordinates with depth, color and provenance."""

    u: np.ndarray
    v: np.ndarray
    depth: np.ndarray
    rgb: np.ndarray
    source_index: np.ndarray

    def __len__(self):
        return self.u.shape[0]


@dataclass
class DepthMap:
    """Per-pixel metric depth with a validity mask."""

    values: np.ndarray
    mask: np.ndarray = field(default=None)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 2:
            raise ValueError("depth values must be a 2D array")
        if self.mask is None:
            self.mask = np.ones(self.values.shape, dtype=bool)
        self.mask = np.asarray(self.mask, dtype=bool)
        if self.mask.shape != self.values.shape:
            raise ValueError("mask shape must match depth shape")
        vals = self.values[self.mask]
        if vals.size and not (np.all(np.isfinite(vals)) and np.all(vals > 0)):
            raise ValueError("masked depth values must be finite and positive")

    @property
    def shape(self):
        return self.values.shape


def pose_to_transform(pose):
    """World-from-camera transform for a pose (see module docstring)."""
    r = rot_z(pose.yaw) @ rot_x(pose.pitch) @ rot_y(pose.roll) @ R_CAM0
    return RigidTransform(r, pose.position)


def ego_motion(prev, curr):
    """Relative motion taking points from the prev camera frame to the curr one."""
    t_prev = pose_to_transform(prev)
    t_curr = pose_to_transform(curr)
    rel = t_curr.inverse().compose(t_prev)
    return EgoMotion.from_transform(rel)


def unproject(depth, intrinsics, rgb=None):
    """Lift every masked depth pixel into a camera-frame point cloud.

    RGB values come from the co-registered `rgb` image when given,
    otherwise points are black.
    """
    h, w = depth.shape
    if (w, h) != (intrinsics.width, intrinsics.height):
        raise ValueError("depth dimensions do not match the intrinsics")
    vs, us = np.nonzero(depth.mask)
    z = depth.values[vs, us]
    x = (us - intrinsics.cx) * z / intrinsics.fx
    y = (vs - intrinsics.cy) * z / intrinsics.fy
    xyz = np.stack([x, y, z], axis=1)
    src = vs.astype(np.int64) * w + us.astype(np.int64)
    if rgb is not None:
        colors = np.asarray(rgb)[vs, us].astype(np.uint8)
    else:
        colors = np.zeros((len(src), 3), dtype=np.uint8)
    return PointCloud(xyz=xyz, rgb=colors, source_index=src)


def apply_transform(cloud, transform):
    """Rigidly move a point cloud; colors and provenance are preserved."""
    return PointCloud(
        xyz=transform.apply(cloud.xyz),
        rgb=cloud.rgb,
        source_index=cloud.source_index,
    )


def project(cloud, intrinsics, z_min=DEFAULT_Z_MIN):
    """Pinhole-project a cloud to continuous pixels.

    Points with z <= z_min are culled, as are points whose whole splat
    footprint ({floor(u),ceil(u)} x {floor(v),ceil(v)}) falls outside the
    image.  Coordinates within 1e-6 px of an integer are snapped so that
    unproject -> project round trips land exactly on the source pixels.
    Returns (projected, culled_count).
    """
    z = cloud.xyz[:, 2]
    infront = z > z_min
    x = cloud.xyz[infront, 0]
    y = cloud.xyz[infront, 1]
    zf = z[infront]
    u = intrinsics.fx * x / zf + intrinsics.cx
    v = intrinsics.fy * y / zf + intrinsics.cy
    u = _snap(u)
    v = _snap(v)
    x0 = np.floor(u)
    x1 = np.ceil(u)
    y0 = np.floor(v)
    y1 = np.ceil(v)
    inb = (
        (x1 >= 0) & (x0 <= intrinsics.width - 1)
        & (y1 >= 0) & (y0 <= intrinsics.height - 1)
    )
    proj = ProjectedPoints(
        u=u[inb],
        v=v[inb],
        depth=zf[inb],
        rgb=cloud.rgb[infront][inb],
        source_index=cloud.source_index[infront][inb],
    )
    culled = len(cloud) - len(proj)
    return proj, culled


def _snap(coords):
    r = np.rint(coords)
    return np.where(np.abs(coords - r) <= _SNAP_EPS, r, coords)
