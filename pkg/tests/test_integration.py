import json
from unittest.mock import patch

import pytest
from fastapi.testclient import TestClient

from app.config import get_settings
from app.formats import write_json
from app.harness.scene import write_scene
from app.main import app
from app.workflow import world as world_module

settings = get_settings()


class TestServiceIntegration:
    """HTTP 服务端到端测试"""

    @pytest.fixture(scope="class")
    def client(self):
        with TestClient(app) as client:
            yield client

    @pytest.fixture(scope="class")
    def scene_dir(self, tmp_path_factory, crossroads):
        out = tmp_path_factory.mktemp("service_scene")
        write_scene(crossroads, out)
        return out

    @pytest.fixture
    def plan_payload(self):
        """30米内、位于路口的车"""
        return {
            "objects": ["o"],
            "cameras": ["cam"],
            "geogs": {"i": {"type": "intersection"}},
            "filters": [
                {"type_eq": {"obj": "o", "label": "car"}},
                {"distance": {"a": "o", "b": "cam", "op": "<", "meters": 30}},
                {"contains": {"geog": "i", "obj": "o"}},
            ],
        }

    def test_health(self, client):
        response = client.get("/health")
        assert response.status_code == 200
        data = response.json()
        assert data["status"] == "healthy"
        assert set(data["optimizations"]) == {"rvp", "otp", "geo3d", "efs"}

    def test_root_lists_endpoints(self, client):
        data = client.get("/").json()
        assert data["endpoints"]["plan"] == "/plan"

    def test_plan(self, client, plan_payload):
        response = client.post("/plan", json=plan_payload)
        assert response.status_code == 200
        data = response.json()
        steps = [s["step"] for s in data["steps"]]
        assert steps == [
            "RoadVisibilityPrune", "Decode", "Detect", "ObjectTypePrune", "Estimate3D", "ExitFrameSample", "Track",
        ]
        assert data["plan"].splitlines()[0] == "1. RoadVisibilityPrune(frustum_depth=30.0, construct_types=[intersection])"

    def test_plan_with_optimizations_off(self, client, plan_payload):
        payload = {**plan_payload, "optimizations": {"rvp": False, "otp": False, "geo3d": False, "efs": False}}
        data = client.post("/plan", json=payload).json()
        assert [s["step"] for s in data["steps"]] == ["Decode", "Detect", "Estimate3D", "Track"]

    def test_plan_unknown_reference(self, client, plan_payload):
        payload = {**plan_payload, "filters": [{"type_eq": {"obj": "stranger", "label": "car"}}]}
        response = client.post("/plan", json=payload)
        assert response.status_code == 400
        assert response.json()["error_code"] == "UNKNOWN_REFERENCE"

    def test_run(self, client, scene_dir, crossroads, tmp_path):
        out = tmp_path / "api_out"
        response = client.post("/run", json={"workflow": str(scene_dir / "workflow.json"), "out": str(out)})
        assert response.status_code == 200
        data = response.json()
        frames = [e["frame"] for e in data["manifest"]["videos"][crossroads.video_id]["frames"]]
        assert frames
        assert frames == sorted(frames)
        assert json.loads((out / "manifest.json").read_text()) == data["manifest"]
        assert {o["type"] for o in data["objects"]} <= {"car", "truck"}

    def test_run_with_request_overrides(self, client, scene_dir, tmp_path):
        response = client.post("/run", json={
            "workflow": str(scene_dir / "workflow.json"),
            "out": str(tmp_path / "plain"),
            "optimizations": {"efs": False},
        })
        assert response.status_code == 200
        assert "ExitFrameSample" not in [s["step"] for s in response.json()["plan"]["steps"]]

    def test_run_missing_workflow(self, client, tmp_path):
        response = client.post("/run", json={"workflow": str(tmp_path / "missing.json")})
        assert response.status_code == 400
        data = response.json()
        assert data["error_code"] == "PARSE_ERROR"
        assert "missing.json" in data["detail"]


class TestPipelineIntegration:
    """文件 -> 工作流 -> 输出的完整流程"""

    @pytest.mark.asyncio
    async def test_sequential_and_parallel_agree(self, crossroads, tmp_path):
        from app.formats import load_workflow

        out = tmp_path / "scene"
        write_scene(crossroads, out)
        doc = json.loads((out / "workflow.json").read_text())
        doc["videos"].append({**doc["videos"][0], "id": "second"})
        path = write_json(out / "two_videos.json", doc)

        parallel = await load_workflow(path).world.observe_async()
        with patch.object(world_module.settings, "parallel_videos", False):
            sequential = await load_workflow(path).world.observe_async()

        assert parallel.frame_manifest.keys() == {crossroads.video_id, "second"}
        assert parallel.frame_manifest == sequential.frame_manifest
        assert parallel.frames("second") == parallel.frames(crossroads.video_id)
        assert parallel.stats.total("frames_total") == 2 * len(crossroads.camera)


if __name__ == "__main__":
    pytest.main([__file__, "-v", "--tb=short"])
