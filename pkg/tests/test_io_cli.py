import json
from argparse import Namespace
from datetime import datetime, timezone

import pytest

from app.cli import EXIT_OK, EXIT_WORKFLOW_ERROR, format_stats, plan_options, run_cli
from app.config import get_settings
from app.errors import InvariantViolation, ParseError, UnknownReference
from app.formats import (
    LoadedManifest,
    Scope,
    decode_predicate,
    encode_predicate,
    load_camera_config,
    load_depths,
    load_detections,
    load_manifest,
    load_road_network,
    load_tracks,
    load_workflow,
    merge_depths,
    write_camera_config,
    write_detections,
    write_json,
    write_manifest,
    write_road_network,
    write_tracks,
)
from app.formats.records import parse_timestamp
from app.harness.scene import write_scene
from app.model.world import (
    CameraConfig,
    CameraFrame,
    Detection,
    Intrinsic,
    ManifestEntry,
    MovableObject,
    ObjectSample,
    Quaternion,
    Vec3,
)
from app.planner.plan import make_plan
from app.query.library import listing_query
from app.query.predicate import user_predicate
from app.workflow.world import World

settings = get_settings()


@pytest.fixture(scope="module")
def scene_dir(tmp_path_factory, crossroads):
    out = tmp_path_factory.mktemp("scene")
    write_scene(crossroads, out)
    return out


class TestLoaders:
    """文件加载测试"""

    def test_camera_reload(self, scene_dir, crossroads):
        camera = load_camera_config(scene_dir / "camera.json")
        assert camera.camera_id == crossroads.camera.camera_id
        assert len(camera) == len(crossroads.camera)
        for loaded, original in zip(camera.frames, crossroads.camera.frames):
            assert loaded.translation == original.translation
            assert loaded.timestamp == original.timestamp
            assert loaded.intrinsic == original.intrinsic
            assert loaded.rotation.w == pytest.approx(original.rotation.w, abs=1e-12)

    def test_detections_reload(self, scene_dir, crossroads):
        assert load_detections(scene_dir / "detections.ndjson") == crossroads.detections

    def test_road_network_reload(self, scene_dir, crossroads):
        network = load_road_network(scene_dir / "road_network")
        assert len(network) == len(crossroads.road_network)
        assert network.get("intersection_0").polygon == crossroads.road_network.get("intersection_0").polygon

    def test_bad_json_has_location(self, tmp_path):
        path = tmp_path / "camera.json"
        path.write_text('{"camera_id": "c",\n  "width": }')
        with pytest.raises(ParseError) as info:
            load_camera_config(path)
        assert info.value.path == str(path)
        assert info.value.line == 2

    def test_missing_field(self, tmp_path):
        path = write_json(tmp_path / "camera.json", {"camera_id": "c", "width": 2, "height": 2})
        with pytest.raises(ParseError) as info:
            load_camera_config(path)
        assert "frames" in info.value.reason

    def test_detection_line_number(self, tmp_path):
        path = tmp_path / "d.ndjson"
        path.write_text(
            '{"frame": 0, "bbox": [0, 0, 1, 1], "class": "car"}\n'
            '\n'
            '{"frame": 1, "bbox": [0, 0, 1], "class": "car"}\n'
        )
        with pytest.raises(ParseError) as info:
            load_detections(path)
        assert info.value.line == 3

    def test_inverted_bbox_is_violation(self, tmp_path):
        path = tmp_path / "d.ndjson"
        path.write_text('{"frame": 0, "bbox": [5, 0, 1, 1], "class": "car"}\n')
        with pytest.raises(InvariantViolation):
            load_detections(path)

    def test_repeated_timestamps(self, tmp_path):
        frame = {"translation": [0, 0, 0], "rotation": [1, 0, 0, 0],
                 "intrinsic": [[1, 0, 0], [0, 1, 0], [0, 0, 1]], "timestamp": 5.0}
        path = write_json(tmp_path / "camera.json",
                          {"camera_id": "c", "width": 2, "height": 2, "frames": [frame, frame]})
        with pytest.raises(InvariantViolation) as info:
            load_camera_config(path)
        assert any("timestamps not strictly increasing" in v for v in info.value.violations)

    def test_out_of_frame_box_clamped_on_add(self, tmp_path, crossroads):
        path = tmp_path / "d.ndjson"
        path.write_text('{"frame": 3, "bbox": [1550, 420, 1650, 480], "class": "truck"}\n')
        detections = load_detections(path)
        assert detections[3][0].bbox == (1550.0, 420.0, 1650.0, 480.0)
        world = World().add_video(crossroads.camera, detections)
        assert world.videos[0].detections[3][0].bbox == (1550.0, 420.0, 1600.0, 480.0)

    def test_depth_file_merged(self, tmp_path):
        detections = tmp_path / "d.ndjson"
        detections.write_text(
            '{"frame": 0, "bbox": [0, 0, 1, 1], "class": "car"}\n'
            '{"frame": 0, "bbox": [2, 0, 3, 1], "class": "human", "depth": 4.0}\n'
        )
        depths = tmp_path / "depth.ndjson"
        depths.write_text('{"frame": 0, "index": 0, "depth": 12.5}\n')
        merged = merge_depths(load_detections(detections), load_depths(depths))
        assert [d.depth_hint for d in merged[0]] == [12.5, 4.0]

    def test_missing_road_network_directory(self, tmp_path):
        with pytest.raises(ParseError):
            load_road_network(tmp_path / "nowhere")

    def test_iso_timestamp(self):
        expected = datetime(2021, 9, 1, 15, 51, 49, 500000, tzinfo=timezone.utc).timestamp()
        assert parse_timestamp("2021-09-01T15:51:49.5") == expected
        assert parse_timestamp("2021-09-01T15:51:49.5+00:00") == expected
        assert parse_timestamp(12) == 12.0


class TestRoundTrip:
    """写出后再读回，结果与写出前相同"""

    def test_camera(self, tmp_path):
        frames = tuple(
            CameraFrame(
                frame_index=i,
                translation=Vec3(-60.0 + 0.6667 * i, -1.75, 1.5),
                rotation=Quaternion(0.5, -0.5, 0.5, -0.5),
                intrinsic=Intrinsic(1266.0, 1266.5, 0.0, 800.25, 450.0),
                timestamp=1700000000.0 + i / 12.0,
                width=1600,
                height=900,
            )
            for i in range(3)
        )
        camera = CameraConfig("cam0", frames)
        assert load_camera_config(write_camera_config(tmp_path / "camera.json", camera)) == camera

    def test_camera_iso_timestamps(self, tmp_path):
        frame = {"translation": [0, 0, 1.5], "rotation": [1, 0, 0, 0], "intrinsic": [[1, 0, 0], [0, 1, 0], [0, 0, 1]]}
        path = write_json(tmp_path / "iso.json", {
            "camera_id": "c", "width": 2, "height": 2,
            "frames": [{**frame, "timestamp": "2023-11-14T22:13:20Z"},
                       {**frame, "timestamp": "2023-11-14T22:13:20.5+00:00"}],
        })
        camera = load_camera_config(path)
        assert camera.timestamps == (1700000000.0, 1700000000.5)
        assert load_camera_config(write_camera_config(tmp_path / "epoch.json", camera)) == camera

    def test_road_network(self, tmp_path, crossroads):
        write_road_network(tmp_path / "rn", crossroads.road_network)
        loaded = load_road_network(tmp_path / "rn")
        assert {c.construct_id: c for c in loaded} == {c.construct_id: c for c in crossroads.road_network}

    def test_detections(self, tmp_path):
        detections = {
            0: (Detection(0, (1.5, 2.25, 30.0, 40.125), "car", 0.875, 12.5), Detection(0, (5.0, 5.0, 6.0, 7.0), "human")),
            7: (Detection(7, (0.1, 0.2, 0.3, 0.4), "truck"),),
        }
        assert load_detections(write_detections(tmp_path / "d.ndjson", detections)) == detections

    def test_tracks(self, tmp_path):
        objects = [
            MovableObject("cam0:0001", "car", (
                ObjectSample(3, 1700000000.25, (10.5, 20.0, 30.25, 40.0), Vec3(12.5, -1.75, 0.0)),
                ObjectSample(4, 1700000000.3333333, (11.0, 20.0, 31.0, 40.0), Vec3(12.9, -1.75, 0.0), True),
            )),
            MovableObject("cam0:f00005:0", "human", (ObjectSample(5, 1700000000.4, (1.0, 2.0, 3.0, 4.0)),)),
        ]
        assert load_tracks(write_tracks(tmp_path / "tracks.json", objects)) == objects

    def test_tracks_out_of_order(self, tmp_path):
        sample = {"timestamp": 0.0, "bbox": [0, 0, 1, 1]}
        path = write_json(tmp_path / "tracks.json", {"objects": [
            {"oid": "a", "type": "car", "samples": [{**sample, "frame": 4}, {**sample, "frame": 2}]},
        ]})
        with pytest.raises(InvariantViolation):
            load_tracks(path)

    def test_manifest(self, tmp_path):
        manifest = LoadedManifest(
            frames={
                "cam0": [ManifestEntry(101, (("cam0:0002",),)), ManifestEntry(103, (("cam0:0001", "cam0:0002"),))],
                "cam1": [],
            },
            snippets={"cam0": [(100, 104)], "cam1": []},
            padding=1,
        )
        path = write_manifest(tmp_path / "manifest.json", manifest.frames, manifest.snippets, manifest.padding)
        assert load_manifest(path) == manifest

    def test_manifest_bad_snippet(self, tmp_path):
        path = write_json(tmp_path / "manifest.json", {"videos": {"cam0": {"frames": [], "snippets": [[5, 2]]}}})
        with pytest.raises(ParseError):
            load_manifest(path)


class TestPredicateCodec:
    """谓词 JSON 编解码测试"""

    @pytest.fixture
    def world(self):
        return World()

    def test_listing_survives_encoding(self, world):
        p = listing_query(world)
        scope = Scope(*world.declarations)
        assert decode_predicate(encode_predicate(p), scope) == p

    def test_construct_type_without_declaration(self, world):
        world.object("o")
        doc = {"contains": {"geog": "lane", "obj": "o"}}
        p = decode_predicate(doc, Scope(*world.declarations))
        assert p.geog.construct_type.value == "lane"

    def test_undeclared_object(self, world):
        with pytest.raises(UnknownReference):
            decode_predicate({"type_eq": {"obj": "ghost", "label": "car"}}, Scope())

    def test_unknown_node(self):
        with pytest.raises(ParseError):
            decode_predicate({"within": {}}, Scope())

    def test_node_with_two_keys(self):
        with pytest.raises(ParseError):
            decode_predicate({"and": [], "or": []}, Scope())

    def test_missing_field(self, world):
        world.object("o")
        with pytest.raises(ParseError):
            decode_predicate({"type_eq": {"obj": "o"}}, Scope(*world.declarations))

    def test_user_predicate_not_encodable(self, world):
        o = world.object()
        with pytest.raises(ValueError):
            encode_predicate(user_predicate("always", lambda b, f: True, o))


class TestWorkflowFile:
    """工作流文件测试"""

    def test_load_written_scene(self, scene_dir, crossroads):
        loaded = load_workflow(scene_dir / "workflow.json")
        world = loaded.world
        assert [v.video_id for v in world.videos] == [crossroads.video_id]
        assert world.videos[0].detection_count == sum(len(d) for d in crossroads.detections.values())
        assert len(world.filters) == 1
        assert world.executions == 0
        assert loaded.output_dir() == scene_dir / "output"

    def test_filters_and_optimizations(self, scene_dir, tmp_path):
        doc = {
            "road_network": str(scene_dir / "road_network"),
            "videos": [{"camera": str(scene_dir / "camera.json")}],
            "objects": ["o"],
            "cameras": ["cam"],
            "filters": [
                {"type_eq": {"obj": "o", "label": "car"}},
                {"distance": {"a": "o", "b": "cam", "op": "<", "meters": 30}},
            ],
            "optimizations": {"efs": False, "max_skip": 3},
        }
        loaded = load_workflow(write_json(tmp_path / "w.json", doc))
        assert len(loaded.world.filters) == 2
        assert loaded.overrides == {"enable_efs": False, "max_skip": 3}

    def test_filter_error_names_index(self, scene_dir, tmp_path):
        doc = {
            "videos": [{"camera": str(scene_dir / "camera.json")}],
            "filters": [{"type_eq": {"obj": "nobody", "label": "car"}}],
        }
        with pytest.raises(UnknownReference) as info:
            load_workflow(write_json(tmp_path / "w.json", doc))
        assert "filters[0]" in info.value.message

    def test_unknown_builtin_query(self, tmp_path):
        with pytest.raises(ParseError):
            load_workflow(write_json(tmp_path / "w.json", {"query": "q99"}))


class TestOptionPrecedence:
    """命令行 > 工作流文件 > 配置"""

    @staticmethod
    def _args(**kwargs):
        return Namespace(**kwargs)

    def test_file_overrides_settings(self):
        options = plan_options(self._args(), {"max_skip": 3})
        assert options.max_skip == 3

    def test_cli_overrides_file(self):
        options = plan_options(self._args(disable_efs=True, max_skip=7), {"enable_efs": True, "max_skip": 3})
        assert options.enable_efs is False
        assert options.max_skip == 7

    def test_disable_all(self):
        options = plan_options(self._args(disable_all_opts=True))
        assert not any(options.toggles.values())


class TestCli:
    """命令行测试"""

    def test_plan_output(self, scene_dir, capsys):
        assert run_cli(["plan", "--workflow", str(scene_dir / "workflow.json")]) == EXIT_OK
        expected = make_plan(listing_query(World()), settings.plan_options()).render()
        assert capsys.readouterr().out.strip() == expected

    def test_plan_all_disabled(self, scene_dir, capsys):
        assert run_cli(["plan", "--workflow", str(scene_dir / "workflow.json"), "--disable-all-opts"]) == EXIT_OK
        out = capsys.readouterr().out
        assert "Prune" not in out
        assert "ExitFrameSample" not in out

    def test_synth_is_deterministic(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        assert run_cli(["synth", "--seed", "3", "--out", str(a)]) == EXIT_OK
        assert run_cli(["synth", "--seed", "3", "--out", str(b)]) == EXIT_OK
        files_a = sorted(p.relative_to(a) for p in a.rglob("*") if p.is_file())
        files_b = sorted(p.relative_to(b) for p in b.rglob("*") if p.is_file())
        assert files_a == files_b
        assert all((a / p).read_bytes() == (b / p).read_bytes() for p in files_a)

    def test_run_writes_output(self, scene_dir, crossroads, tmp_path, capsys):
        out = tmp_path / "result"
        code = run_cli(["run", "--workflow", str(scene_dir / "workflow.json"), "--out", str(out)])
        assert code == EXIT_OK
        summary = json.loads(capsys.readouterr().out)
        manifest = json.loads((out / "manifest.json").read_text())
        video_id = crossroads.video_id
        assert summary["frames"][video_id] == len(manifest["videos"][video_id]["frames"])
        assert (out / "tracks.json").exists()

    def test_stats_json(self, scene_dir, capsys):
        assert run_cli(["stats", "--workflow", str(scene_dir / "workflow.json"), "--json"]) == EXIT_OK
        stats = json.loads(capsys.readouterr().out)
        totals = stats["totals"]
        assert totals["frames_total"] == 240
        assert totals["frames_kept"] + totals["frames_pruned"] == totals["frames_total"]
        assert len(stats["plan"]) == 7

    def test_stats_text(self, scene_dir, capsys):
        assert run_cli(["stats", "--workflow", str(scene_dir / "workflow.json")]) == EXIT_OK
        out = capsys.readouterr().out
        assert out.startswith("plan:")
        assert "skipping_ratio:" in out

    def test_workflow_error_exit_code(self, tmp_path, capsys):
        code = run_cli(["plan", "--workflow", str(tmp_path / "missing.json")])
        assert code == EXIT_WORKFLOW_ERROR
        assert "PARSE_ERROR" in capsys.readouterr().err

    def test_format_stats_lines(self):
        stats = {
            "plan": ["Decode"],
            "totals": {
                "frames_total": 3, "frames_pruned": 1, "frames_decoded": 2, "frames_sampled": 2,
                "frames_tracked": 2, "detections_detected": 4, "detections_pruned": 0,
                "detections_estimated": 4, "detections_dropped": 0, "detections_tracked": 4,
                "skipping_ratio": 0.0, "query_candidates": 4, "query_matches": 1, "timings_ms": {"Decode": 1.5},
            },
        }
        text = format_stats(stats)
        assert "frames: total=3 pruned=1 decoded=2 sampled=2 tracked=2" in text
        assert "  Decode: 1.500" in text


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
