"""Local HTTP service exposing frame synthesis for the explorer UI.

All endpoints speak JSON (every payload carries "version": 1); images
travel as base64 PNG.  Motion payloads use the steering convention:
positive t_z moves the camera forward, positive r_y turns it toward +x
(the service inverts them into point-mapping transforms internally).
Accumulated motion in responses uses the same steering convention.

Depth is visualized as a red ramp on inverse depth over the fixed range
[3 m, 80 m]:

    red = round(255 * clip((1/d - 1/80) / (1/3 - 1/80), 0, 1))

so a depth readout decodes as d = 1 / (red/255 * (1/3 - 1/80) + 1/80).
Pixels without coverage are black.
"""

import base64
import io
import itertools
import json
import threading
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from PIL import Image

from geowarp import dataset as ds
from geowarp import synthesis
from geowarp.geometry import EgoMotion, RigidTransform

DEPTH_VIS_NEAR = 3.0
DEPTH_VIS_FAR = 80.0


class ServiceError(Exception):
    def __init__(self, status, code, message):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message


def depth_colormap(depth):
    """Red-ramp visualization of a DepthMap (see module docstring)."""
    inv_near = 1.0 / DEPTH_VIS_NEAR
    inv_far = 1.0 / DEPTH_VIS_FAR
    with np.errstate(divide="ignore"):
        inv = np.where(depth.mask, 1.0 / np.maximum(depth.values, 1e-9), inv_far)
    ratio = np.clip((inv - inv_far) / (inv_near - inv_far), 0.0, 1.0)
    red = np.round(255.0 * ratio).astype(np.uint8)
    out = np.zeros(depth.values.shape + (3,), dtype=np.uint8)
    out[..., 0] = np.where(depth.mask, red, 0)
    return out


def decode_depth_red(red):
    """Inverse of the colormap's red channel, in meters."""
    inv = red / 255.0 * (1.0 / DEPTH_VIS_NEAR - 1.0 / DEPTH_VIS_FAR) + 1.0 / DEPTH_VIS_FAR
    return 1.0 / inv


def _png_b64(arr):
    buf = io.BytesIO()
    Image.fromarray(arr).save(buf, format="PNG")
    return base64.b64encode(buf.getvalue()).decode("ascii")


@dataclass
class Session:
    session_id: str
    frame_id: str
    rgb: np.ndarray
    depth: object
    intrinsics: object
    accumulated: RigidTransform = field(default_factory=RigidTransform.identity)
    history: list = field(default_factory=list)
    lock: threading.Lock = field(default_factory=threading.Lock)

    def steering_accumulated(self):
        # accumulated point-mapping transform -> steering components
        return EgoMotion.from_transform(self.accumulated.inverse())

    def render(self):
        motion = EgoMotion.from_transform(self.accumulated)
        return synthesis.warp_forward(self.rgb, self.depth, motion, self.intrinsics)


def _list_frames(data_dir):
    data_dir = Path(data_dir)
    if (data_dir / "frames").is_dir():
        videos = [data_dir]
        root = data_dir.parent
    else:
        videos = ds.list_video_dirs(data_dir)
        root = data_dir
    frames = []
    for video in videos:
        for png in sorted((video / "frames").glob("*.png")):
            frames.append({"id": f"{video.name}/{png.stem}", "video": video.name,
                           "frame": int(png.stem)})
    if not frames:
        raise ValueError(f"{data_dir}: no frames found")
    return root, frames


def _parse_motion(body):
    if not isinstance(body, dict):
        raise ServiceError(400, "bad-motion", "motion body must be a JSON object")
    clean = {}
    for key in ("t_x", "t_y", "t_z", "r_x", "r_y", "r_z"):
        value = body.get(key, 0.0)
        if not isinstance(value, (int, float)) or not np.isfinite(value):
            raise ServiceError(400, "bad-motion", f"{key} must be a finite number")
        clean[key] = float(value)
    return EgoMotion.from_dict(clean)


def build_app(data_dir):
    root, frames = _list_frames(data_dir)
    frame_ids = {f["id"] for f in frames}
    app = FastAPI(title="geowarp explorer service")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"],
    )
    sessions = {}
    sessions_lock = threading.Lock()
    counter = itertools.count(1)

    @app.exception_handler(ServiceError)
    async def _service_error(request: Request, exc: ServiceError):
        return JSONResponse(status_code=exc.status,
                            content={"code": exc.code, "message": exc.message})

    @app.exception_handler(Exception)
    async def _unhandled(request: Request, exc: Exception):
        return JSONResponse(status_code=500,
                            content={"code": "internal", "message": str(exc)})

    def get_session(session_id):
        with sessions_lock:
            session = sessions.get(session_id)
        if session is None:
            raise ServiceError(404, "unknown-session", f"no session {session_id}")
        return session

    def frame_payload(session, prediction):
        return {
            "version": 1,
            "session_id": session.session_id,
            "rgb_png": _png_b64(prediction.rgb),
            "depth_png": _png_b64(depth_colormap(prediction.depth)),
            "coverage": float(prediction.coverage.mean()),
            "accumulated": session.steering_accumulated().to_dict(),
            "history_length": len(session.history),
        }

    @app.get("/frames")
    def list_frames():
        return {"version": 1, "frames": frames}

    @app.post("/session")
    async def create_session(request: Request):
        body = await request.json()
        frame_id = body.get("frame_id") if isinstance(body, dict) else None
        if frame_id not in frame_ids:
            raise ServiceError(400, "unknown-frame", f"unknown frame id {frame_id!r}")
        video, stem = frame_id.split("/")
        video_dir = root / video
        rgb = ds.load_png(video_dir / "frames" / f"{stem}.png")
        depth = ds.load_dmap(video_dir / "depth" / f"{stem}.npyish")
        intr = ds.load_intrinsics(video_dir / "intrinsics.json")
        session = Session(
            session_id=f"s{next(counter)}", frame_id=frame_id,
            rgb=rgb, depth=depth, intrinsics=intr,
        )
        with sessions_lock:
            sessions[session.session_id] = session
        return frame_payload(session, session.render())

    @app.post("/session/{session_id}/motion")
    async def apply_motion(session_id: str, request: Request):
        body = await request.json()
        steering = _parse_motion(body)
        session = get_session(session_id)
        with session.lock:
            increment = steering.to_transform().inverse()
            session.accumulated = increment.compose(session.accumulated)
            session.history.append(steering.to_dict())
            prediction = session.render()
            return frame_payload(session, prediction)

    @app.post("/session/{session_id}/reset")
    def reset(session_id: str):
        session = get_session(session_id)
        with session.lock:
            session.accumulated = RigidTransform.identity()
            session.history.clear()
            return frame_payload(session, session.render())

    @app.get("/session/{session_id}/state")
    def state(session_id: str):
        session = get_session(session_id)
        with session.lock:
            return {
                "version": 1,
                "session_id": session.session_id,
                "frame_id": session.frame_id,
                "accumulated": session.steering_accumulated().to_dict(),
                "history": list(session.history),
            }

    return app
