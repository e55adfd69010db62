import math
from datetime import datetime, timezone

import pytest

from app.config import get_settings
from app.errors import NoHeading, OriginOutside
from app.model import ConstructType, GeographicConstruct, RoadNetwork, Vec3
from app.processing.sampler import (
    MotionTuple,
    SampleTrace,
    SamplerConfig,
    exits_camera,
    exits_lane,
    lane_exit,
    new_car,
    sample_frames,
    skipping_ratio,
)
from conftest import camera_from_frames, simple_frame

settings = get_settings()

SPEED_25_MPH = 11.176
CAR = Vec3(70.92, 74.7, 0.0)
# 当天下午 3:51:49.5
START = datetime(2021, 9, 1, 15, 51, 49, 500000, tzinfo=timezone.utc).timestamp()


def walkthrough_lane() -> GeographicConstruct:
    """181° 方向上 5.03 米处结束的车道"""
    left = 70.92 - 5.03 * math.cos(math.radians(1.0))
    return GeographicConstruct("lane_a", ConstructType.LANE, ((left, 72.0), (120.0, 72.0), (120.0, 76.0), (left, 76.0)), (181.0,))


def walkthrough_camera(n=24, rate=12.0):
    return camera_from_frames([simple_frame(i, timestamp=START + i / rate) for i in range(n)])


def ground_truth_locations(scene, object_type="car"):
    """每帧相关物体的真值位置"""
    by_frame = {f: [] for f in range(len(scene.camera))}
    for obj in scene.ground_truth:
        if obj.object_type != object_type:
            continue
        for s in obj.samples:
            by_frame[s.frame_index].append(s.location)
    return by_frame


class TestLaneExit:
    """车道出口估计测试"""

    def test_walkthrough_delay(self):
        """以 25 mph 沿 181° 行驶 5.03 米约需 0.45 秒"""
        info = lane_exit(CAR, walkthrough_lane(), SPEED_25_MPH, START)
        assert info.distance == pytest.approx(5.03, abs=1e-6)
        assert info.time - START == pytest.approx(0.45, abs=0.01)
        assert info.heading == 181.0

    def test_walkthrough_exit_frame(self):
        """12 Hz 下出口前最后一帧是第 5 帧"""
        assert exits_lane(0, CAR, walkthrough_lane(), SPEED_25_MPH, walkthrough_camera()) == 5

    def test_reconstructed_exit_point(self):
        heading = math.degrees(math.atan2(72.7 - 74.7, 66.3 - 70.92)) % 360.0
        ux, uy = math.cos(math.radians(heading)), math.sin(math.radians(heading))
        nx, ny = -uy, ux
        polygon = (
            (66.3 + 2 * nx, 72.7 + 2 * ny),
            (66.3 + 2 * nx - 40 * ux, 72.7 + 2 * ny - 40 * uy),
            (66.3 - 2 * nx - 40 * ux, 72.7 - 2 * ny - 40 * uy),
            (66.3 - 2 * nx, 72.7 - 2 * ny),
        )
        lane = GeographicConstruct("lane_b", ConstructType.LANE, polygon, (round(heading, 1),))
        info = lane_exit(CAR, lane, SPEED_25_MPH, START)
        assert info.point == pytest.approx((66.3, 72.7), abs=0.05)
        assert info.time - START == pytest.approx(0.45, abs=0.01)

    def test_two_way_lane_uses_nearest_exit(self):
        lane = GeographicConstruct("two_way", ConstructType.LANE, ((0, 0), (100, 0), (100, 4), (0, 4)), (0.0, 180.0))
        info = lane_exit(Vec3(90.0, 2.0, 0.0), lane, 10.0, 0.0)
        assert info.heading == 0.0
        assert info.distance == pytest.approx(10.0)

    def test_lane_without_heading(self):
        lane = GeographicConstruct("plain", ConstructType.LANE, ((0, 0), (10, 0), (10, 4), (0, 4)))
        with pytest.raises(NoHeading):
            lane_exit(Vec3(5.0, 2.0, 0.0), lane, 10.0, 0.0)

    def test_car_outside_lane(self):
        with pytest.raises(OriginOutside):
            lane_exit(Vec3(0.0, 0.0, 0.0), walkthrough_lane(), SPEED_25_MPH, START)


class TestEvents:
    """新车与驶出视野事件测试"""

    def test_new_car_sequence(self):
        assert new_car(0, [1, 1, 2, 2]) == 2
        assert new_car(0, [2, 1, 1, 2]) == 3

    def test_new_car_never(self):
        assert new_car(0, [1, 1, 1, 0]) == 3
        assert new_car(1, {1: 1, 2: 1, 3: 1}, last_frame=3, horizon=2) == 2

    def test_motion_tuple(self):
        assert MotionTuple((0.0, 0.0), 90.0).moved(2.0) == pytest.approx((0.0, 2.0))

    def test_exits_camera(self, straight):
        """预测位置一直在视野内时返回最后一帧"""
        camera = straight.camera
        lane = straight.road_network.get("lane_eb")
        car = Vec3(20.0, -1.75, 0.0)
        assert exits_camera(0, car, lane, 8.0, camera, d=100.0) == camera.last_frame
        assert exits_camera(0, car, lane, 8.0, camera, d=100.0, horizon=30) == 30

    def test_exits_camera_fast_car(self, straight):
        """比相机快 20 m/s 的车在约 4 秒后离开 100 米视锥"""
        camera = straight.camera
        lane = straight.road_network.get("lane_eb")
        frame = exits_camera(0, Vec3(20.0, -1.75, 0.0), lane, 28.0, camera, d=100.0)
        assert 45 <= frame <= 50


class TestSampleFrames:
    """出口帧采样测试"""

    def test_unlimited_skip_on_straight_road(self, straight):
        cfg = SamplerConfig(speed=SPEED_25_MPH, max_skip=None, frustum_depth=100.0)
        locations = ground_truth_locations(straight)
        counts = {f: len(v) for f, v in locations.items()}
        frames = list(range(len(straight.camera)))
        sampled = sample_frames(frames, locations, counts, straight.road_network, straight.camera, cfg)
        assert sampled[0] == 0
        assert sampled[-1] == straight.camera.last_frame
        assert skipping_ratio(sampled, len(frames)) >= 0.3

    def test_max_skip_bounds_gaps(self, straight):
        cfg = SamplerConfig(speed=SPEED_25_MPH, max_skip=5, frustum_depth=100.0)
        locations = ground_truth_locations(straight)
        counts = {f: len(v) for f, v in locations.items()}
        frames = list(range(len(straight.camera)))
        trace = SampleTrace()
        sampled = sample_frames(frames, locations, counts, straight.road_network, straight.camera, cfg, trace)
        gaps = [b - a for a, b in zip(sampled, sampled[1:])]
        assert max(gaps) <= 5
        assert skipping_ratio(sampled, len(frames)) >= 0.3
        assert len(trace.steps) == len(sampled) - 1

    def test_max_skip_one_keeps_every_frame(self, straight):
        cfg = SamplerConfig(max_skip=1)
        locations = ground_truth_locations(straight)
        counts = {f: len(v) for f, v in locations.items()}
        frames = list(range(len(straight.camera)))
        assert sample_frames(frames, locations, counts, straight.road_network, straight.camera, cfg) == frames

    def test_car_in_intersection_samples_next_frame(self):
        rn = RoadNetwork([GeographicConstruct("i", ConstructType.INTERSECTION, ((0, 0), (10, 0), (10, 10), (0, 10)))])
        camera = camera_from_frames([simple_frame(i, timestamp=float(i)) for i in range(6)])
        locations = {f: [Vec3(5.0, 5.0, 0.0)] for f in range(6)}
        sampled = sample_frames(range(6), locations, [1] * 6, rn, camera, SamplerConfig(max_skip=None))
        assert sampled == list(range(6))

    def test_empty_frames_and_unknown_locations(self):
        camera = camera_from_frames([simple_frame(i, timestamp=float(i)) for i in range(4)])
        locations = {0: [], 1: [None], 2: [], 3: []}
        sampled = sample_frames([0, 1, 2, 3], locations, [0, 1, 0, 0], RoadNetwork(), camera, SamplerConfig(max_skip=None))
        assert sampled == [0, 1, 2, 3]

    def test_only_available_frames(self, straight):
        cfg = SamplerConfig(max_skip=5)
        locations = ground_truth_locations(straight)
        counts = {f: len(v) for f, v in locations.items()}
        available = list(range(0, len(straight.camera), 3))
        sampled = sample_frames(available, locations, counts, straight.road_network, straight.camera, cfg)
        assert set(sampled) <= set(available)
        assert sampled[0] == available[0]

    def test_no_available_frames(self, straight):
        assert sample_frames([], {}, {}, straight.road_network, straight.camera, SamplerConfig()) == []

    def test_invalid_config(self):
        with pytest.raises(ValueError):
            SamplerConfig(speed=0.0)
        with pytest.raises(ValueError):
            SamplerConfig(max_skip=0)


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
