"""
工作流入口 - 记录输入、变量声明和过滤条件，只有在 observe 时才真正执行

    world = World()
    world.add_geog_constructs(road_network)
    world.add_video(camera, detections)
    o = world.object(); c = world.camera(); i = world.geog_construct("intersection")
    world.filter((o.type == "car") & (distance(o, c) < 50) & contains(i, o))
    result = world.get_objects()
"""
import asyncio
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from ..config import get_settings
from ..errors import DuplicateRoadNetwork, FrameMismatch, InvariantViolation, UnknownReference, WorkflowError
from ..logger import get_logger
from ..model.road_network import RoadNetwork
from ..model.validation import check_detection, clamp_detection
from ..model.world import CameraConfig, ConstructType, Detection, DetectionsByFrame
from ..planner.plan import ExecutionPlan, PlanOptions, make_plan
from ..processing.stats import RunStats
from ..processing.video_processor import VideoInput, VideoProcessor, VideoResult
from ..query.engine import Match, QueryStats, execute_query
from ..query.predicate import CameraRef, GeogRef, ObjectRef, Predicate, conjoin, references
from .composer import GetObjects, ObserveResult, SaveFrames, compose

settings = get_settings()
logger = get_logger(__name__)


def _group_detections(detections: Union[Mapping[int, Sequence[Detection]], Iterable[Detection], None]) -> DetectionsByFrame:
    if detections is None:
        return {}
    if isinstance(detections, Mapping):
        return {int(f): tuple(dets) for f, dets in sorted(detections.items())}
    grouped: Dict[int, List[Detection]] = {}
    for d in detections:
        grouped.setdefault(d.frame_index, []).append(d)
    return {f: tuple(dets) for f, dets in sorted(grouped.items())}


def _clamp_to_camera(camera: CameraConfig, grouped: DetectionsByFrame) -> DetectionsByFrame:
    """检测框裁剪到所在帧的画面范围；裁剪后退化的框报错"""
    clamped: DetectionsByFrame = {}
    problems: List[str] = []
    for frame_index, dets in grouped.items():
        frame = camera[frame_index]
        clamped[frame_index] = tuple(clamp_detection(d, frame.width, frame.height) for d in dets)
        for i, d in enumerate(clamped[frame_index]):
            problems.extend(check_detection(d, f" {i} of {camera.camera_id}"))
    if problems:
        raise InvariantViolation(problems)
    return clamped


class World:
    """构建 - 过滤 - 观察"""

    def __init__(self, options: Optional[PlanOptions] = None):
        self.options = options or settings.plan_options()
        self.road_network: Optional[RoadNetwork] = None
        self.videos: List[VideoInput] = []
        self.filters: List[Predicate] = []
        self._objects: Dict[str, ObjectRef] = {}
        self._cameras: Dict[str, CameraRef] = {}
        self._geogs: Dict[str, GeogRef] = {}
        # observe 之前必须为 0
        self.executions = 0
        self.last_stats: Optional[RunStats] = None
        self.last_plan: Optional[ExecutionPlan] = None

    # ========================================================================
    # 变量声明
    # ========================================================================

    def object(self, name: Optional[str] = None) -> ObjectRef:
        if name is None:
            # 匿名声明每次都是新的物体
            n = len(self._objects)
            while f"o{n}" in self._objects:
                n += 1
            name = f"o{n}"
        return self._objects.setdefault(name, ObjectRef(name))

    def camera(self, name: Optional[str] = None) -> CameraRef:
        name = name or "cam"
        return self._cameras.setdefault(name, CameraRef(name))

    def geog_construct(
        self,
        construct_type: Union[str, ConstructType],
        construct_id: Optional[str] = None,
        name: Optional[str] = None,
    ) -> GeogRef:
        construct_type = ConstructType(construct_type)
        if name is None:
            name = construct_type.value if construct_id is None else f"{construct_type.value}:{construct_id}"
        ref = GeogRef(name, construct_type, construct_id)
        existing = self._geogs.get(name)
        if existing is not None and existing != ref:
            raise WorkflowError(f"geographic construct '{name}' is already declared as {existing.construct_type.value}")
        self._geogs[name] = ref
        return ref

    @property
    def declarations(self) -> Tuple[Dict[str, ObjectRef], Dict[str, CameraRef], Dict[str, GeogRef]]:
        return dict(self._objects), dict(self._cameras), dict(self._geogs)

    # ========================================================================
    # 输入
    # ========================================================================

    def add_geog_constructs(self, road_network: RoadNetwork) -> "World":
        if self.road_network is not None:
            raise DuplicateRoadNetwork("road network already added")
        self.road_network = road_network
        return self

    def add_video(
        self,
        camera: CameraConfig,
        detections: Union[Mapping[int, Sequence[Detection]], Iterable[Detection], None] = None,
        frames_dir: Optional[Union[str, Path]] = None,
        video_id: Optional[str] = None,
    ) -> "World":
        grouped = _group_detections(detections)
        outside = [f for f in grouped if not 0 <= f < len(camera)]
        if outside:
            raise FrameMismatch(
                f"detections reference frame {outside[0]} but camera '{camera.camera_id}' has {len(camera)} frames"
            )
        grouped = _clamp_to_camera(camera, grouped)
        video_id = video_id or camera.camera_id
        if any(v.video_id == video_id for v in self.videos):
            raise WorkflowError(f"video '{video_id}' already added")
        self.videos.append(VideoInput(video_id, camera, grouped, Path(frames_dir) if frames_dir else None))
        return self

    def filter(self, p: Predicate) -> "World":
        objects, cameras, geogs = references(p)
        for ref in objects:
            if self._objects.get(ref.name) != ref:
                raise UnknownReference(f"object '{ref.name}' is not declared in this world")
        for ref in cameras:
            if self._cameras.get(ref.name) != ref:
                raise UnknownReference(f"camera '{ref.name}' is not declared in this world")
        for ref in geogs:
            if self._geogs.get(ref.name) != ref:
                raise UnknownReference(f"geographic construct '{ref.name}' is not declared in this world")
        self.filters.append(p)
        return self

    @property
    def predicate(self) -> Optional[Predicate]:
        """按记录顺序合取所有过滤条件"""
        return conjoin(self.filters)

    def plan(self, options: Optional[PlanOptions] = None) -> ExecutionPlan:
        return make_plan(self.predicate, options or self.options)

    # ========================================================================
    # 观察
    # ========================================================================

    def _query(self, plan: ExecutionPlan, result: VideoResult) -> List[Match]:
        stats = QueryStats()
        matches = execute_query(
            result.objects, result.video.camera, self.road_network, plan.predicate, stats=stats
        )
        result.stats.query_candidates = stats.candidates
        result.stats.query_matches = stats.matches
        result.stats.timings_ms["Query"] = stats.duration_ms
        return matches

    def _run_video(self, processor: VideoProcessor, plan: ExecutionPlan, video: VideoInput) -> Tuple[VideoResult, List[Match]]:
        result = processor.process(video)
        return result, self._query(plan, result)

    def _prepare(self, options: Optional[PlanOptions]) -> Tuple[ExecutionPlan, VideoProcessor, List[VideoInput]]:
        if not self.videos:
            raise WorkflowError("observe requires at least one video")
        plan = self.plan(options)
        processor = VideoProcessor(plan, self.road_network)
        self.executions += 1
        return plan, processor, sorted(self.videos, key=lambda v: v.video_id)

    def _finish(self, plan: ExecutionPlan, outputs: Sequence[Tuple[VideoResult, List[Match]]], mode) -> ObserveResult:
        results = [r for r, _ in outputs]
        matches = {r.video.video_id: m for r, m in outputs}
        stats = RunStats([r.stats for r in results], [s.render() for s in plan.steps])
        self.last_stats = stats
        self.last_plan = plan
        return compose(results, matches, plan, stats, mode)

    def observe(self, mode=None, options: Optional[PlanOptions] = None) -> ObserveResult:
        """集成 -> 视频处理 -> 查询 -> 组合"""
        plan, processor, videos = self._prepare(options)
        outputs = [self._run_video(processor, plan, v) for v in videos]
        return self._finish(plan, outputs, mode or GetObjects())

    async def observe_async(self, mode=None, options: Optional[PlanOptions] = None) -> ObserveResult:
        """每个视频在独立线程中处理，结果按视频ID合并"""
        plan, _, videos = self._prepare(options)
        if not settings.parallel_videos:
            outputs = [self._run_video(VideoProcessor(plan, self.road_network), plan, v) for v in videos]
        else:
            # 每个线程使用自己的处理器实例
            outputs = await asyncio.gather(*(
                asyncio.to_thread(self._run_video, VideoProcessor(plan, self.road_network), plan, v)
                for v in videos
            ))
        return self._finish(plan, list(outputs), mode or GetObjects())

    def get_objects(self, options: Optional[PlanOptions] = None) -> ObserveResult:
        return self.observe(GetObjects(), options)

    def save_videos(
        self,
        path: Union[str, Path],
        annotate: bool = False,
        padding: int = 0,
        options: Optional[PlanOptions] = None,
    ) -> ObserveResult:
        return self.observe(SaveFrames(Path(path), annotate, padding), options)

    def describe(self) -> Dict[str, Any]:
        return {
            "videos": [v.video_id for v in self.videos],
            "constructs": 0 if self.road_network is None else len(self.road_network),
            "filters": [str(p) for p in self.filters],
            "executions": self.executions,
        }
