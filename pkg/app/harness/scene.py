"""
合成场景 - 已知真值的相机轨迹、道路网络、检测流

物体的检测框由固定尺寸的3D框投影得到，框底边中点正好是物体地面中心点的投影，
因此几何估计器可以无误差地还原真值位置（噪声为0时）。
"""
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..config import get_settings
from ..errors import BehindCamera
from ..formats.workflow_file import workflow_document
from ..formats.writers import write_camera_config, write_detections, write_json, write_road_network, write_tracks
from ..geometry.camera import world_to_pixel
from ..geometry.planar import heading_unit
from ..logger import LogStages, get_logger
from ..model.road_network import RoadNetwork
from ..model.world import (
    CameraConfig,
    CameraFrame,
    ConstructType,
    Detection,
    DetectionsByFrame,
    GeographicConstruct,
    Intrinsic,
    MovableObject,
    ObjectSample,
    Quaternion,
    Vec3,
)

settings = get_settings()
logger = get_logger(__name__)

Point2 = Tuple[float, float]

# 长、宽、高（米）
OBJECT_EXTENTS: Dict[str, Tuple[float, float, float]] = {
    "car": (4.5, 1.8, 1.5),
    "truck": (8.0, 2.5, 3.2),
    "human": (0.5, 0.5, 1.7),
}

BASE_TIME = 1_700_000_000.0


@dataclass(frozen=True)
class ActorSpec:
    """沿折线匀速运动的物体，只在 [start_time, 到达终点] 期间存在"""
    name: str
    object_type: str
    waypoints: Tuple[Point2, ...]
    speed: float
    start_time: float = 0.0

    @property
    def segment_lengths(self) -> List[float]:
        return [math.dist(a, b) for a, b in zip(self.waypoints, self.waypoints[1:])]

    @property
    def end_time(self) -> float:
        return self.start_time + sum(self.segment_lengths) / self.speed

    def pose_at(self, t: float) -> Optional[Tuple[Point2, float]]:
        """t 秒时的 (位置, 方向度)；不在路径上返回 None"""
        if t < self.start_time or t > self.end_time:
            return None
        travelled = (t - self.start_time) * self.speed
        for (a, b), length in zip(zip(self.waypoints, self.waypoints[1:]), self.segment_lengths):
            if travelled <= length or length == 0:
                w = 0.0 if length == 0 else travelled / length
                heading = math.degrees(math.atan2(b[1] - a[1], b[0] - a[0])) % 360.0
                return (a[0] + (b[0] - a[0]) * w, a[1] + (b[1] - a[1]) * w), heading
            travelled -= length
        a, b = self.waypoints[-2], self.waypoints[-1]
        return b, math.degrees(math.atan2(b[1] - a[1], b[0] - a[0])) % 360.0


@dataclass(frozen=True)
class SceneSpec:
    seed: int = 7
    duration_s: float = 20.0
    frame_rate_hz: float = 12.0
    camera_id: str = "cam0"
    camera_start: Tuple[float, float, float] = (-60.0, -1.75, 1.5)
    camera_speed: float = 8.0
    camera_yaw: float = 0.0
    camera_pitch: float = 0.0
    fx: float = 1266.0
    fy: float = 1266.0
    x0: float = 800.0
    y0: float = 450.0
    width: int = 1600
    height: int = 900
    constructs: Tuple[GeographicConstruct, ...] = ()
    actors: Tuple[ActorSpec, ...] = ()
    pixel_noise: float = 0.0

    @property
    def frame_count(self) -> int:
        return int(round(self.duration_s * self.frame_rate_hz))


@dataclass
class Scene:
    spec: SceneSpec
    camera: CameraConfig
    road_network: RoadNetwork
    detections: DetectionsByFrame
    ground_truth: List[MovableObject] = field(default_factory=list)

    @property
    def video_id(self) -> str:
        return self.camera.camera_id

    def world(self, options=None):
        from ..workflow.world import World

        world = World(options)
        world.add_geog_constructs(self.road_network)
        world.add_video(self.camera, self.detections)
        return world


def camera_rotation(yaw_deg: float, pitch_deg: float) -> np.ndarray:
    """列向量依次为相机的右、下、前方向（世界坐标）"""
    psi, theta = math.radians(yaw_deg), math.radians(pitch_deg)
    right = np.array([math.sin(psi), -math.cos(psi), 0.0])
    forward = np.array([math.cos(theta) * math.cos(psi), math.cos(theta) * math.sin(psi), -math.sin(theta)])
    down = np.cross(forward, right)
    return np.column_stack([right, down, forward])


def _camera(spec: SceneSpec) -> CameraConfig:
    rotation = Quaternion.from_matrix(camera_rotation(spec.camera_yaw, spec.camera_pitch))
    intrinsic = Intrinsic(spec.fx, spec.fy, 0.0, spec.x0, spec.y0)
    ux, uy = heading_unit(spec.camera_yaw)
    x, y, z = spec.camera_start
    frames = []
    for i in range(spec.frame_count):
        t = i / spec.frame_rate_hz
        frames.append(CameraFrame(
            frame_index=i,
            translation=Vec3(x + ux * spec.camera_speed * t, y + uy * spec.camera_speed * t, z),
            rotation=rotation,
            intrinsic=intrinsic,
            timestamp=BASE_TIME + t,
            width=spec.width,
            height=spec.height,
        ))
    return CameraConfig(spec.camera_id, tuple(frames))


def _box_corners(center: Point2, heading: float, extents: Tuple[float, float, float]) -> List[Vec3]:
    length, width, height = extents
    fx, fy = heading_unit(heading)
    lx, ly = -fy, fx
    corners = []
    for a in (-0.5, 0.5):
        for b in (-0.5, 0.5):
            px = center[0] + a * length * fx + b * width * lx
            py = center[1] + a * length * fy + b * width * ly
            for z in (0.0, height):
                corners.append(Vec3(px, py, z))
    return corners


def project_box(
    center: Point2,
    heading: float,
    object_type: str,
    frame: CameraFrame,
) -> Optional[Tuple[Tuple[float, float, float, float], float]]:
    """
    物体3D框 -> (像素框, 地面中心点深度)

    x方向取角点投影的最大半宽，y1取角点最高处，y2是地面中心点的投影。
    任一角点在相机后方或框超出画面时返回 None。
    """
    extents = OBJECT_EXTENTS.get(object_type, OBJECT_EXTENTS["car"])
    try:
        (u, v), depth = world_to_pixel(Vec3(center[0], center[1], 0.0), frame)
        projected = [world_to_pixel(c, frame)[0] for c in _box_corners(center, heading, extents)]
    except BehindCamera:
        return None
    half = max(abs(p.x - u) for p in projected)
    top = min(p.y for p in projected)
    bbox = (u - half, top, u + half, v)
    if bbox[0] < 0 or bbox[1] < 0 or bbox[2] > frame.width or bbox[3] > frame.height:
        return None
    if bbox[2] - bbox[0] <= 0 or bbox[3] - bbox[1] <= 0:
        return None
    return bbox, depth


def generate_scene(spec: SceneSpec) -> Scene:
    """相机、道路网络、检测流和真值轨迹；同一个 SceneSpec 输出完全相同"""
    rng = np.random.default_rng(spec.seed)
    camera = _camera(spec)
    road_network = RoadNetwork(spec.constructs)

    detections: Dict[int, List[Detection]] = {}
    truth: Dict[str, List[ObjectSample]] = {a.name: [] for a in spec.actors}
    for frame in camera.frames:
        t = frame.frame_index / spec.frame_rate_hz
        for actor in spec.actors:
            pose = actor.pose_at(t)
            if pose is None:
                continue
            center, heading = pose
            projected = project_box(center, heading, actor.object_type, frame)
            if projected is None:
                continue
            bbox, depth = projected
            if spec.pixel_noise > 0:
                noise = rng.normal(0.0, spec.pixel_noise, 4)
                x1, y1, x2, y2 = (float(b + n) for b, n in zip(bbox, noise))
                bbox = (min(x1, x2 - 1.0), min(y1, y2 - 1.0), x2, y2)
            detections.setdefault(frame.frame_index, []).append(Detection(
                frame_index=frame.frame_index,
                bbox=tuple(float(b) for b in bbox),
                class_label=actor.object_type,
                confidence=1.0,
                depth_hint=depth,
            ))
            truth[actor.name].append(ObjectSample(
                frame.frame_index, frame.timestamp, tuple(float(b) for b in bbox), Vec3(center[0], center[1], 0.0)
            ))

    ground_truth = [
        MovableObject(f"gt:{actor.name}", actor.object_type, tuple(truth[actor.name]))
        for actor in spec.actors
        if truth[actor.name]
    ]
    logger.debug(
        "Scene generated",
        stage=LogStages.INTEGRATE,
        seed=spec.seed,
        frames=len(camera),
        detections=sum(len(v) for v in detections.values()),
        objects=len(ground_truth),
    )
    return Scene(
        spec,
        camera,
        road_network,
        {f: tuple(dets) for f, dets in sorted(detections.items())},
        ground_truth,
    )


# ============================================================================
# 道路布局
# ============================================================================

def _rect(construct_id: str, construct_type: ConstructType, x1: float, y1: float, x2: float, y2: float,
          headings: Sequence[float] = ()) -> GeographicConstruct:
    return GeographicConstruct(
        construct_id, construct_type, ((x1, y1), (x2, y1), (x2, y2), (x1, y2)), tuple(headings)
    )


def crossroads_layout() -> Tuple[GeographicConstruct, ...]:
    """东西向主路与南北向道路在 x∈[40,55], y∈[-7.5,7.5] 相交"""
    lane, road = ConstructType.LANE, ConstructType.ROADSECTION
    return (
        _rect("intersection_0", ConstructType.INTERSECTION, 40.0, -7.5, 55.0, 7.5),
        _rect("lane_eb_w", lane, -300.0, -3.5, 40.0, 0.0, [0.0]),
        _rect("lane_wb_w", lane, -300.0, 0.0, 40.0, 3.5, [180.0]),
        _rect("lane_eb_e", lane, 55.0, -3.5, 300.0, 0.0, [0.0]),
        _rect("lane_wb_e", lane, 55.0, 0.0, 300.0, 3.5, [180.0]),
        _rect("lane_sb_s", lane, 40.0, -300.0, 47.5, -7.5, [270.0]),
        _rect("lane_nb_s", lane, 47.5, -300.0, 55.0, -7.5, [90.0]),
        _rect("lane_sb_n", lane, 40.0, 7.5, 47.5, 300.0, [270.0]),
        _rect("lane_nb_n", lane, 47.5, 7.5, 55.0, 300.0, [90.0]),
        _rect("road_w", road, -300.0, -3.5, 40.0, 3.5),
        _rect("road_e", road, 55.0, -3.5, 300.0, 3.5),
        _rect("road_s", road, 40.0, -300.0, 55.0, -7.5),
        _rect("road_n", road, 40.0, 7.5, 55.0, 300.0),
    )


def straight_layout() -> Tuple[GeographicConstruct, ...]:
    lane = ConstructType.LANE
    return (
        _rect("lane_eb", lane, -500.0, -3.5, 1000.0, 0.0, [0.0]),
        _rect("lane_wb", lane, -500.0, 0.0, 1000.0, 3.5, [180.0]),
        _rect("road", ConstructType.ROADSECTION, -500.0, -3.5, 1000.0, 3.5),
    )


# 随机物体可选的路线：(类型, 路点, 速度范围)
_ROUTES = (
    ("car", ((160.0, 1.75), (-120.0, 1.75)), (6.0, 11.0)),
    ("car", ((-20.0, -1.75), (220.0, -1.75)), (8.5, 11.0)),
    ("truck", ((180.0, 1.75), (-120.0, 1.75)), (6.0, 9.0)),
    ("car", ((51.25, -80.0), (51.25, 80.0)), (5.0, 10.0)),
    ("car", ((43.75, 80.0), (43.75, -80.0)), (5.0, 10.0)),
    ("human", ((39.0, -12.0), (39.0, 12.0)), (1.0, 1.8)),
    ("human", ((56.0, 12.0), (56.0, -12.0)), (1.0, 1.8)),
)


def _random_actors(rng: np.random.Generator, count: int) -> List[ActorSpec]:
    actors = []
    for k in range(count):
        object_type, waypoints, (lo, hi) = _ROUTES[int(rng.integers(len(_ROUTES)))]
        actors.append(ActorSpec(
            name=f"extra_{k}",
            object_type=object_type,
            waypoints=waypoints,
            speed=round(float(rng.uniform(lo, hi)), 3),
            start_time=round(float(rng.uniform(0.0, 10.0)), 3),
        ))
    return actors


def intersection_scene(seed: int = 7, extra_actors: Optional[int] = None, pixel_noise: float = 0.0,
                       duration_s: Optional[float] = None, frame_rate_hz: Optional[float] = None) -> Scene:
    """
    自车向东穿过十字路口

    50米视锥下前 75 帧和驶过路口后的帧都看不到路口。固定物体：迎面驶来并穿过路口的车、
    同车道前方的车、向北穿过路口的车、在路口横穿的行人；另有按种子随机生成的物体。
    """
    rng = np.random.default_rng(seed)
    count = int(rng.integers(2, 5)) if extra_actors is None else extra_actors
    actors = [
        ActorSpec("oncoming", "car", ((120.0, 1.75), (-60.0, 1.75)), 8.0),
        ActorSpec("leading", "car", ((-45.0, -1.75), (200.0, -1.75)), 10.0),
        ActorSpec("crossing", "car", ((51.25, -60.0), (51.25, 60.0)), 6.0, start_time=2.0),
        ActorSpec("walker", "human", ((42.0, -12.0), (42.0, 12.0)), 1.4, start_time=4.0),
    ] + _random_actors(rng, count)
    spec = SceneSpec(
        seed=seed,
        duration_s=duration_s or settings.synth_duration_s,
        frame_rate_hz=frame_rate_hz or settings.synth_frame_rate_hz,
        constructs=crossroads_layout(),
        actors=tuple(actors),
        pixel_noise=pixel_noise,
    )
    return generate_scene(spec)


def straight_scene(seed: int = 7) -> Scene:
    """直路上一辆车在自车前方 20 米同速行驶"""
    spec = SceneSpec(
        seed=seed,
        duration_s=settings.synth_duration_s,
        frame_rate_hz=settings.synth_frame_rate_hz,
        camera_start=(0.0, -1.75, 1.5),
        constructs=straight_layout(),
        actors=(ActorSpec("follow", "car", ((20.0, -1.75), (400.0, -1.75)), 8.0),),
    )
    return generate_scene(spec)


def write_scene(scene: Scene, out_dir: Union[str, Path], query: str = "listing") -> List[Path]:
    """把场景写成 CLI 可以直接运行的文件集合"""
    out = Path(out_dir)
    written = [
        write_camera_config(out / "camera.json", scene.camera),
        *write_road_network(out / "road_network", scene.road_network),
        write_detections(out / "detections.ndjson", scene.detections),
        write_tracks(out / "ground_truth.json", scene.ground_truth),
    ]
    document = workflow_document(
        road_network="road_network",
        videos=[{"camera": "camera.json", "detections": "detections.ndjson", "id": scene.video_id}],
        query=query,
        observe={"mode": "frames", "out": "output"},
    )
    written.append(write_json(out / "workflow.json", document))
    return written

