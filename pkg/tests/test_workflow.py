import json

import pytest
from PIL import Image

from app.config import get_settings
from app.errors import DuplicateRoadNetwork, FrameMismatch, InvariantViolation, UnknownReference, WorkflowError
from app.formats import load_manifest, load_tracks
from app.harness.ablation import oracle_frames
from app.harness.metrics import frame_output_accuracy
from app.harness.scene import intersection_scene
from app.model import CameraConfig, Detection, RoadNetwork
from app.planner.plan import setup_options
from app.query.library import listing_query
from app.query.predicate import And, ObjectRef, contains, distance
from app.workflow import GetObjects, SaveFrames, World, snippet_ranges

settings = get_settings()


@pytest.fixture(scope="module")
def quiet_scene():
    """只有固定物体的路口场景"""
    return intersection_scene(7, extra_actors=0)


class TestWorldBuilding:
    """工作流构建测试"""

    def test_filters_are_lazy(self, crossroads):
        world = crossroads.world()
        world.filter(listing_query(world))
        world.plan()
        assert world.executions == 0
        assert world.last_stats is None
        world.get_objects()
        assert world.executions == 1
        assert world.last_stats is not None

    def test_duplicate_road_network(self, crossroads):
        world = crossroads.world()
        with pytest.raises(DuplicateRoadNetwork):
            world.add_geog_constructs(crossroads.road_network)

    def test_detection_outside_camera(self, crossroads):
        world = World()
        with pytest.raises(FrameMismatch):
            world.add_video(crossroads.camera, [Detection(300, (0, 0, 10, 10), "car")])

    def test_boxes_clamped_to_frame(self, crossroads):
        world = World().add_video(crossroads.camera, [Detection(0, (1500.0, -20.0, 1700.0, 500.0), "car")])
        assert world.videos[0].detections[0][0].bbox == (1500.0, 0.0, 1600.0, 500.0)

    def test_box_outside_frame_rejected(self, crossroads):
        world = World()
        with pytest.raises(InvariantViolation) as info:
            world.add_video(crossroads.camera, [Detection(0, (1700.0, 400.0, 1800.0, 500.0), "car")])
        assert "x1 < x2" in info.value.violations[0]
        assert world.videos == []

    def test_duplicate_video_id(self, crossroads):
        world = World().add_video(crossroads.camera)
        with pytest.raises(WorkflowError):
            world.add_video(crossroads.camera)

    def test_undeclared_reference(self, crossroads):
        world = crossroads.world()
        with pytest.raises(UnknownReference):
            world.filter(ObjectRef("stranger").type == "car")

    def test_chained_filters_conjoin(self):
        world = World()
        o, c = world.object(), world.camera()
        p1, p2 = o.type == "car", distance(o, c) < 50
        world.filter(p1).filter(p2)
        assert world.predicate == And((p1, p2))

    def test_anonymous_objects_are_distinct(self):
        world = World()
        named = world.object("o1")
        a, b = world.object(), world.object()
        assert len({named, a, b}) == 3
        assert world.object("o1") is named

    def test_geog_redeclared_with_other_type(self):
        world = World()
        world.geog_construct("lane", name="g")
        with pytest.raises(WorkflowError):
            world.geog_construct("intersection", name="g")

    def test_observe_without_video(self):
        world = World()
        with pytest.raises(WorkflowError):
            world.get_objects()

    def test_describe(self, crossroads):
        world = crossroads.world()
        world.filter(listing_query(world))
        info = world.describe()
        assert info["videos"] == [crossroads.video_id]
        assert info["constructs"] == len(crossroads.road_network)
        assert info["executions"] == 0


class TestObserve:
    """观察与输出测试"""

    def test_listing_close_to_oracle(self, quiet_scene):
        """全部优化打开时输出帧与真值结果基本一致"""
        world = quiet_scene.world()
        world.filter(listing_query(world))
        result = world.get_objects()
        oracle = oracle_frames(quiet_scene, "listing")
        assert oracle
        assert result.frames(quiet_scene.video_id)
        accuracy = frame_output_accuracy(oracle, result.frames(quiet_scene.video_id), len(quiet_scene.camera))
        assert accuracy >= 0.9
        assert all(o.object_type in ("car", "truck") for o in result.objects)

    def test_no_filter_returns_all_tracks(self, quiet_scene):
        world = quiet_scene.world(setup_options("SB"))
        result = world.get_objects()
        tracked = result.tracks[quiet_scene.video_id]
        expected = sorted({s.frame_index for o in tracked for s in o.samples})
        assert result.frames(quiet_scene.video_id) == expected
        assert {o.oid for o in result.objects} == {o.oid for o in tracked}

    def test_unsatisfiable_predicate(self, quiet_scene):
        world = quiet_scene.world()
        o = world.object()
        world.filter((o.type == "car") & (o.type == "truck"))
        result = world.get_objects()
        assert result.objects == []
        assert result.frames(quiet_scene.video_id) == []

    def test_empty_road_network(self, quiet_scene):
        """没有地理构造时 contains 总是为假"""
        world = World(setup_options("SB"))
        world.add_geog_constructs(RoadNetwork())
        world.add_video(quiet_scene.camera, quiet_scene.detections)
        o, i = world.object(), world.geog_construct("intersection")
        world.filter(contains(i, o))
        assert world.get_objects().objects == []

    def test_empty_detection_stream(self, quiet_scene):
        world = World()
        world.add_geog_constructs(quiet_scene.road_network)
        world.add_video(quiet_scene.camera, None)
        result = world.get_objects()
        assert result.objects == []
        assert result.stats.to_dict()["totals"]["detections_detected"] == 0

    def test_returned_objects_have_full_tracks(self, quiet_scene):
        """返回的物体带有完整轨迹，而不只是匹配帧"""
        world = quiet_scene.world()
        world.filter(listing_query(world))
        result = world.get_objects()
        tracked = {o.oid: o for o in result.tracks[quiet_scene.video_id]}
        matched_frames = set(result.frames(quiet_scene.video_id))
        assert result.objects
        for obj in result.objects:
            assert obj.samples == tracked[obj.oid].samples
        assert any(set(obj.frames) - matched_frames for obj in result.objects)

    def test_save_frames_writes_outputs(self, quiet_scene, tmp_path):
        world = quiet_scene.world()
        world.filter(listing_query(world))
        result = world.save_videos(tmp_path, padding=2)
        manifest = json.loads((tmp_path / "manifest.json").read_text())
        frames = [e["frame"] for e in manifest["videos"][quiet_scene.video_id]["frames"]]
        assert frames == result.frames(quiet_scene.video_id)
        assert manifest["padding"] == 2
        assert manifest["videos"][quiet_scene.video_id]["snippets"] == [
            list(r) for r in snippet_ranges(frames, 2, quiet_scene.camera.last_frame)
        ]
        assert load_manifest(tmp_path / "manifest.json").frames == result.frame_manifest
        assert [o.oid for o in load_tracks(tmp_path / "tracks.json")] == [o.oid for o in result.objects]
        assert (tmp_path / "stats.json").exists()

    def test_annotated_frames(self, quiet_scene, tmp_path):
        frames_dir = tmp_path / "images"
        frames_dir.mkdir()
        for f in range(len(quiet_scene.camera)):
            Image.new("RGB", (160, 90)).save(frames_dir / f"{f:06d}.png")
        world = World()
        world.add_geog_constructs(quiet_scene.road_network)
        world.add_video(quiet_scene.camera, quiet_scene.detections, frames_dir=frames_dir)
        world.filter(listing_query(world))
        out = tmp_path / "out"
        result = world.observe(SaveFrames(out, annotate=True))
        written = sorted(p.name for p in (out / "frames" / quiet_scene.video_id).iterdir())
        assert written == [f"{f:06d}.png" for f in result.frames(quiet_scene.video_id)]

    @pytest.mark.asyncio
    async def test_observe_async_matches_observe(self, quiet_scene):
        """两个视频在线程中处理，结果与串行一致"""
        def build():
            world = World()
            world.add_geog_constructs(quiet_scene.road_network)
            world.add_video(quiet_scene.camera, quiet_scene.detections, video_id="a")
            world.add_video(CameraConfig("cam1", quiet_scene.camera.frames), quiet_scene.detections, video_id="b")
            world.filter(listing_query(world))
            return world

        serial = build().observe(GetObjects())
        parallel = await build().observe_async(GetObjects())
        assert parallel.frame_manifest == serial.frame_manifest
        assert [o.oid for o in parallel.objects] == [o.oid for o in serial.objects]
        assert serial.frames("a") == serial.frames("b")

    def test_setups_share_plan_predicate(self, quiet_scene):
        world = quiet_scene.world()
        world.filter(listing_query(world))
        sb = world.get_objects(setup_options("SB"))
        s6 = world.get_objects(setup_options("S6"))
        assert world.executions == 2
        assert sb.plan.predicate == s6.plan.predicate
        assert len(sb.plan) < len(s6.plan)


class TestSnippets:
    """片段区间测试"""

    def test_merge_adjacent(self):
        assert snippet_ranges([5, 6, 10], 1, 100) == [(4, 11)]

    def test_clamped_to_video(self):
        assert snippet_ranges([0, 99], 3, 99) == [(0, 3), (96, 99)]

    def test_no_padding(self):
        assert snippet_ranges([1, 3], 0, 10) == [(1, 1), (3, 3)]


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
