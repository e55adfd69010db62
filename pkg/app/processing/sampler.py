"""
出口帧采样器

给定当前帧的车辆位置，估计最早发生以下事件的帧：
    1. 某辆车驶出所在车道
    2. 某辆车驶出相机视野
    3. 出现新的车辆
在这之前跳过的帧不需要做数据关联。
"""
from bisect import bisect_right
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Mapping, NamedTuple, Optional, Sequence, Union

from ..errors import DegenerateView, NoHeading, OriginOutside
from ..geometry.camera import viewable_area
from ..geometry.planar import Point2, Polygon2D, heading_unit, point_in_polygon, ray_exit_distance
from ..logger import LogStages, get_logger
from ..model.road_network import RoadNetwork
from ..model.world import CameraConfig, ConstructType, GeographicConstruct, Vec3

logger = get_logger(__name__)

Counts = Union[Sequence[int], Mapping[int, int]]
Locator = Union[Callable[[int], Sequence[Optional[Vec3]]], Mapping[int, Sequence[Optional[Vec3]]]]


@dataclass(frozen=True)
class SamplerConfig:
    speed: float = 11.176
    max_skip: Optional[int] = 5
    frustum_depth: float = 100.0

    def __post_init__(self):
        if self.speed <= 0:
            raise ValueError("sampler speed must be positive")
        if self.max_skip is not None and self.max_skip < 1:
            raise ValueError("max_skip must be at least 1")


class MotionTuple(NamedTuple):
    """车辆运动模型：位置 + 方向（度）"""
    location: Point2
    direction: float

    def moved(self, meters: float) -> Point2:
        ux, uy = heading_unit(self.direction)
        return (self.location[0] + meters * ux, self.location[1] + meters * uy)


@dataclass(frozen=True)
class LaneExit:
    point: Point2
    distance: float
    time: float
    heading: float


def lane_exit(car_loc: Vec3, lane: GeographicConstruct, v: float, start_time: float,
              heading: Optional[float] = None) -> LaneExit:
    """沿车道方向的出口点与预计到达时间；多方向车道取出口最近的方向"""
    if heading is None and not lane.headings:
        raise NoHeading(f"construct {lane.construct_id} has no heading")
    headings = (heading,) if heading is not None else lane.headings
    origin = car_loc.xy
    best: Optional[LaneExit] = None
    for h in headings:
        dist = ray_exit_distance(origin, h, lane.polygon)
        if best is None or dist < best.distance:
            point = MotionTuple(origin, h).moved(dist)
            best = LaneExit(point=point, distance=dist, time=start_time + dist / v, heading=h)
    return best


def exits_lane(current: int, car_loc: Vec3, lane: GeographicConstruct, v: float, cameras: CameraConfig,
               heading: Optional[float] = None) -> int:
    """车辆驶出车道前的最后一帧"""
    exit_info = lane_exit(car_loc, lane, v, cameras[current].timestamp, heading)
    return max(current, cameras.last_frame_before(exit_info.time))


def _minimal_exit_heading(car_loc: Vec3, lane: GeographicConstruct) -> float:
    return lane_exit(car_loc, lane, 1.0, 0.0).heading


class _ViewCache:
    """每帧可视区域，采样过程中按需计算"""

    def __init__(self, cameras: CameraConfig, d: float):
        self.cameras = cameras
        self.d = d
        self._views: Dict[int, Optional[Polygon2D]] = {}

    def contains(self, frame_index: int, point: Point2) -> bool:
        if frame_index not in self._views:
            try:
                self._views[frame_index] = viewable_area(self.cameras[frame_index], self.d)
            except DegenerateView:
                self._views[frame_index] = None
        view = self._views[frame_index]
        return view is not None and point_in_polygon(point, view)


def exits_camera(current: int, car_loc: Vec3, lane: GeographicConstruct, v: float, cameras: CameraConfig,
                 d: float = 100.0, horizon: Optional[int] = None, heading: Optional[float] = None,
                 views: Optional[_ViewCache] = None) -> int:
    """预测位置第一次离开视野的帧减一；一直在视野内则返回最后一帧（或horizon）"""
    if heading is None:
        heading = _minimal_exit_heading(car_loc, lane)
    views = views or _ViewCache(cameras, d)
    motion = MotionTuple(car_loc.xy, heading)
    start = cameras[current].timestamp
    last = cameras.last_frame if horizon is None else min(horizon, cameras.last_frame)
    for frame_index in range(current + 1, last + 1):
        predicted = motion.moved(v * (cameras[frame_index].timestamp - start))
        if not views.contains(frame_index, predicted):
            return frame_index - 1
    return last


def new_car(current: int, counts: Counts, last_frame: Optional[int] = None, horizon: Optional[int] = None) -> int:
    """第一个相关检测数严格增加的帧；没有则返回最后一帧（或horizon）"""
    if isinstance(counts, Mapping):
        get = counts.get
        end = last_frame if last_frame is not None else max(counts, default=current)
    else:
        get = (lambda i: counts[i] if 0 <= i < len(counts) else None)
        end = last_frame if last_frame is not None else len(counts) - 1
    if horizon is not None:
        end = min(end, horizon)
    base = get(current) or 0
    for frame_index in range(current + 1, end + 1):
        count = get(frame_index)
        if count is not None and count > base:
            return frame_index
    return max(end, current)


@dataclass
class SampleTrace:
    """每一步的事件帧，便于调试和统计"""
    steps: List[Dict[str, int]] = field(default_factory=list)


def _next_candidate(
    current: int,
    locations: Sequence[Optional[Vec3]],
    counts: Counts,
    rn: RoadNetwork,
    cameras: CameraConfig,
    cfg: SamplerConfig,
    views: _ViewCache,
) -> int:
    if not locations:
        return current + 1
    horizon = cameras.last_frame if cfg.max_skip is None else min(cameras.last_frame, current + cfg.max_skip)

    candidate = new_car(current, counts, cameras.last_frame, horizon)
    for location in locations:
        if location is None:
            return current + 1
        point = location.xy
        if rn.containing(point, ConstructType.INTERSECTION):
            return current + 1
        lane = rn.lane_at(point)
        if lane is None or not lane.headings:
            return current + 1
        try:
            exit_info = lane_exit(location, lane, cfg.speed, cameras[current].timestamp)
        except OriginOutside:
            return current + 1
        by_lane = max(current, cameras.last_frame_before(exit_info.time))
        by_camera = exits_camera(current, location, lane, cfg.speed, cameras, cfg.frustum_depth,
                                 horizon=horizon, heading=exit_info.heading, views=views)
        candidate = min(candidate, by_lane, by_camera)
    return candidate


def sample_frames(
    available: Sequence[int],
    locations: Locator,
    counts: Counts,
    rn: RoadNetwork,
    cameras: CameraConfig,
    cfg: SamplerConfig,
    trace: Optional[SampleTrace] = None,
) -> List[int]:
    """
    从可用帧（道路可见性剪枝后剩下的帧）中选出需要做数据关联的帧

    locations(frame) 返回该帧相关车辆的位置，估计失败的为 None。
    """
    frames = sorted(available)
    if not frames:
        return []
    locate = locations.__getitem__ if isinstance(locations, Mapping) else locations
    views = _ViewCache(cameras, cfg.frustum_depth)

    result = [frames[0]]
    pos = 0
    while pos < len(frames) - 1:
        current = frames[pos]
        target = _next_candidate(current, locate(current), counts, rn, cameras, cfg, views)
        if cfg.max_skip is not None:
            target = min(target, current + cfg.max_skip)
        target = max(target, current + 1)

        # 映射到可用帧：不超过目标的最后一帧，否则取下一个可用帧
        j = bisect_right(frames, target) - 1
        if j <= pos:
            j = pos + 1
        if trace is not None:
            trace.steps.append({"current": current, "target": target, "next": frames[j]})
        pos = j
        result.append(frames[j])

    logger.debug("Frames sampled", stage=LogStages.SAMPLE, available=len(frames), sampled=len(result))
    return result


def skipping_ratio(sampled: Sequence[int], total: int) -> float:
    """跳过的帧数 / 总帧数"""
    if total <= 0:
        return 0.0
    return 1.0 - len(sampled) / total
