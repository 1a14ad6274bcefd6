"""HTTP service tests over the documented JSON API (in-process client)."""

import base64
import io

import numpy as np
import pytest
from fastapi.testclient import TestClient
from PIL import Image

from geowarp import dataset as ds
from geowarp import synthetic as syn
from geowarp.geometry import EgoMotion
from geowarp.service import build_app, decode_depth_red, depth_colormap


@pytest.fixture(scope="module")
def plane_client(tmp_path_factory):
    root = tmp_path_factory.mktemp("served")
    intr = syn.standard_intrinsics(22, 72)
    spec = syn.plane_scene_spec(10.0, intr, frame_count=2)
    ds.write_video_dir(root / "plane", syn.render_synthetic_sequence(spec))
    return TestClient(build_app(root), raise_server_exceptions=False)


def decode_png(b64):
    with Image.open(io.BytesIO(base64.b64decode(b64))) as img:
        return np.asarray(img).copy()


def motion(client, sid, **kwargs):
    resp = client.post(f"/session/{sid}/motion", json=kwargs)
    assert resp.status_code == 200, resp.text
    return resp.json()


class TestEndpoints:
    def test_frames_listing(self, plane_client):
        data = plane_client.get("/frames").json()
        assert data["version"] == 1
        ids = [f["id"] for f in data["frames"]]
        assert "plane/000000" in ids and "plane/000001" in ids

    def test_unknown_frame_rejected(self, plane_client):
        resp = plane_client.post("/session", json={"frame_id": "nope/000000"})
        assert resp.status_code == 400
        body = resp.json()
        assert body["code"] == "unknown-frame" and "message" in body

    def test_unknown_session_404(self, plane_client):
        resp = plane_client.post("/session/ghost/motion", json={"t_z": 1.0})
        assert resp.status_code == 404
        assert resp.json()["code"] == "unknown-session"

    def test_malformed_motion_400(self, plane_client):
        sid = plane_client.post("/session", json={"frame_id": "plane/000000"}).json()["session_id"]
        resp = plane_client.post(f"/session/{sid}/motion", json={"t_z": "fast"})
        assert resp.status_code == 400
        assert resp.json()["code"] == "bad-motion"


class TestMotionSemantics:
    def test_zero_motion_returns_current_frame(self, plane_client):
        created = plane_client.post("/session", json={"frame_id": "plane/000000"}).json()
        out = motion(plane_client, created["session_id"])
        assert out["rgb_png"] == created["rgb_png"]
        assert out["coverage"] == created["coverage"] == 1.0

    def test_forward_step_toward_plane_reads_nine_meters(self, plane_client):
        sid = plane_client.post("/session", json={"frame_id": "plane/000000"}).json()["session_id"]
        out = motion(plane_client, sid, t_z=1.0)
        depth_img = decode_png(out["depth_png"])
        center = depth_img[11, 36]
        assert center[1] == 0 and center[2] == 0
        decoded = decode_depth_red(int(center[0]))
        assert abs(decoded - 9.0) < 0.06

    def test_motion_then_inverse_is_identity(self, plane_client):
        sid = plane_client.post("/session", json={"frame_id": "plane/000000"}).json()["session_id"]
        m = dict(t_x=0.3, t_y=-0.2, t_z=0.5, r_x=0.02, r_y=-0.04, r_z=0.01)
        motion(plane_client, sid, **m)
        inv = EgoMotion.from_dict(m).inverse().to_dict()
        out = motion(plane_client, sid, **inv)
        for v in out["accumulated"].values():
            assert abs(v) < 1e-9

    def test_accumulated_composes_as_transforms(self, plane_client):
        # two rotations do not commute with translations: check against the
        # transform-composition oracle rather than component sums
        sid = plane_client.post("/session", json={"frame_id": "plane/000000"}).json()["session_id"]
        m1 = dict(t_z=1.0, r_y=0.3)
        m2 = dict(t_x=0.5)
        motion(plane_client, sid, **m1)
        out = motion(plane_client, sid, **m2)
        t1 = EgoMotion.from_dict(m1).to_transform()
        t2 = EgoMotion.from_dict(m2).to_transform()
        want = EgoMotion.from_transform(t1.compose(t2))  # camera-pose composition
        got = out["accumulated"]
        for key, val in want.to_dict().items():
            assert abs(got[key] - val) < 1e-9

    def test_reset_restores_original(self, plane_client):
        created = plane_client.post("/session", json={"frame_id": "plane/000000"}).json()
        sid = created["session_id"]
        motion(plane_client, sid, t_z=2.0, r_y=0.2)
        reset = plane_client.post(f"/session/{sid}/reset").json()
        assert reset["rgb_png"] == created["rgb_png"]
        assert all(abs(v) < 1e-12 for v in reset["accumulated"].values())
        assert reset["history_length"] == 0


class TestState:
    def test_history_replay_reproduces_accumulated(self, plane_client):
        sid = plane_client.post("/session", json={"frame_id": "plane/000000"}).json()["session_id"]
        moves = [dict(t_z=0.5), dict(r_y=0.1), dict(t_x=-0.3, r_z=0.05)]
        for m in moves:
            motion(plane_client, sid, **m)
        state = plane_client.get(f"/session/{sid}/state").json()
        assert len(state["history"]) == 3
        replay = None
        for m in state["history"]:
            t = EgoMotion.from_dict(m).to_transform()
            replay = t if replay is None else replay.compose(t)
        want = EgoMotion.from_transform(replay)
        for key, val in want.to_dict().items():
            assert abs(state["accumulated"][key] - val) < 1e-9

    def test_sessions_isolated(self, plane_client):
        sid_a = plane_client.post("/session", json={"frame_id": "plane/000000"}).json()["session_id"]
        sid_b = plane_client.post("/session", json={"frame_id": "plane/000000"}).json()["session_id"]
        motion(plane_client, sid_a, t_z=2.0)
        state_b = plane_client.get(f"/session/{sid_b}/state").json()
        assert all(abs(v) < 1e-12 for v in state_b["accumulated"].values())


class TestColormap:
    def test_round_trip_quantization(self):
        from geowarp.geometry import DepthMap
        depths = np.array([[3.0, 5.0, 9.5], [10.0, 40.0, 80.0]])
        dm = DepthMap(values=depths)
        img = depth_colormap(dm)
        decoded = decode_depth_red(img[..., 0].astype(np.float64))
        step = (1.0 / 3.0 - 1.0 / 80.0) / 255.0
        tol = depths ** 2 * step  # one quantization step in depth units
        assert np.all(np.abs(decoded - depths) <= tol)

    def test_masked_pixels_black(self):
        from geowarp.geometry import DepthMap
        dm = DepthMap(values=np.full((2, 2), 10.0),
                      mask=np.array([[True, False], [False, True]]))
        img = depth_colormap(dm)
        assert img[0, 1].sum() == 0 and img[1, 0].sum() == 0
        assert img[0, 0, 0] > 0
