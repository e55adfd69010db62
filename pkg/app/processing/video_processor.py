"""
视频处理 - 按执行计划对单个视频依次执行各个步骤

剪枝 -> 解码 -> 检测 -> 类型剪枝 -> 3D估计 -> 出口帧采样 -> 跟踪
"""
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional

from ..config import get_settings
from ..logger import get_logger, pipeline_logger
from ..model.road_network import RoadNetwork
from ..model.world import CameraConfig, Detection, DetectionsByFrame, MovableObject, Vec3
from ..planner.plan import ExecutionPlan, StepKind
from ..query.analysis import relevant_object_types
from .estimator import LocationEstimator
from .pruners import otp_filter, prune_frames
from .sampler import SamplerConfig, sample_frames, skipping_ratio
from .stats import VideoStats
from .tracker import LocatedDetection, Tracker, complete_trajectories, singleton_objects

settings = get_settings()
logger = get_logger(__name__)


@dataclass(frozen=True)
class VideoInput:
    """一个视频：相机、检测流、可选的帧图片目录"""
    video_id: str
    camera: CameraConfig
    detections: DetectionsByFrame = field(default_factory=dict)
    frames_dir: Optional[Path] = None

    @property
    def detection_count(self) -> int:
        return sum(len(v) for v in self.detections.values())


@dataclass
class VideoResult:
    video: VideoInput
    objects: List[MovableObject]
    kept_frames: List[int]
    sampled_frames: List[int]
    stats: VideoStats


class VideoProcessor:
    """执行计划中的视频处理步骤（查询在工作流层执行）"""

    def __init__(self, plan: ExecutionPlan, road_network: Optional[RoadNetwork], tracker_config: Optional[dict] = None):
        self.plan = plan
        self.road_network = road_network if road_network is not None else RoadNetwork()
        self.tracker_config = tracker_config or settings.get_tracker_config()

    def process(self, video: VideoInput) -> VideoResult:
        start = time.perf_counter()
        plan = self.plan
        camera = video.camera
        stats = VideoStats(video.video_id, frames_total=len(camera))

        # 道路可见性剪枝
        kept: List[int] = list(range(len(camera)))
        rvp = plan.step(StepKind.ROAD_VISIBILITY_PRUNE)
        if rvp is not None:
            with stats.timed(StepKind.ROAD_VISIBILITY_PRUNE.value):
                kept, _ = prune_frames(camera, self.road_network, plan.predicate, rvp.param("frustum_depth"))
            pipeline_logger.log_frames_pruned(
                video.video_id, len(camera), len(kept), stats.timings_ms[StepKind.ROAD_VISIBILITY_PRUNE.value]
            )
        stats.frames_kept = len(kept)

        if plan.has(StepKind.DECODE):
            stats.frames_decoded = len(kept)

        # 检测：从检测流读取保留帧上的检测
        detections: Dict[int, List[Detection]] = {}
        if plan.has(StepKind.DETECT):
            with stats.timed(StepKind.DETECT.value):
                detections = {f: list(video.detections.get(f, ())) for f in kept}
            stats.detections_detected = sum(len(v) for v in detections.values())
            pipeline_logger.log_step(
                video.video_id, StepKind.DETECT.value, stats.timings_ms[StepKind.DETECT.value], len(kept),
                stats.detections_detected,
            )

        otp = plan.step(StepKind.OBJECT_TYPE_PRUNE)
        if otp is not None:
            types = otp.param("types")
            with stats.timed(StepKind.OBJECT_TYPE_PRUNE.value):
                detections = {f: otp_filter(dets, types) for f, dets in detections.items()}
            after = sum(len(v) for v in detections.values())
            stats.detections_pruned = stats.detections_detected - after
            pipeline_logger.log_detections_pruned(video.video_id, stats.detections_detected, after, types)

        # 3D位置估计（按需计算并缓存）
        estimator: Optional[LocationEstimator] = None
        estimate_step = plan.step(StepKind.ESTIMATE_3D)
        if estimate_step is not None:
            estimator = LocationEstimator(estimate_step.param("mode"))
        located_cache: Dict[int, List[LocatedDetection]] = {}

        def located(frame_index: int) -> List[LocatedDetection]:
            if frame_index not in located_cache:
                dets = detections.get(frame_index, [])
                if estimator is None:
                    located_cache[frame_index] = [(d, None) for d in dets]
                else:
                    with stats.timed(StepKind.ESTIMATE_3D.value):
                        located_cache[frame_index] = estimator.estimate_frame(dets, camera[frame_index])
            return located_cache[frame_index]

        # 出口帧采样
        sampled = kept
        efs = plan.step(StepKind.EXIT_FRAME_SAMPLE)
        if efs is not None:
            relevant = relevant_object_types(plan.predicate) or frozenset()
            cfg = SamplerConfig(
                speed=efs.param("speed_mps"),
                max_skip=efs.param("max_skip"),
                frustum_depth=efs.param("frustum_depth"),
            )
            counts = {f: sum(1 for d in detections.get(f, []) if d.class_label in relevant) for f in kept}

            def car_locations(frame_index: int) -> List[Optional[Vec3]]:
                return [loc for d, loc in located(frame_index) if d.class_label in relevant]

            with stats.timed(StepKind.EXIT_FRAME_SAMPLE.value):
                sampled = sample_frames(kept, car_locations, counts, self.road_network, camera, cfg)
            stats.skipping_ratio = skipping_ratio(sampled, len(kept))
            pipeline_logger.log_sampling(video.video_id, len(kept), len(sampled), stats.skipping_ratio)
        stats.frames_sampled = len(sampled)

        # 跟踪
        if plan.has(StepKind.TRACK):
            tracker = Tracker(
                camera.camera_id,
                iou_min=self.tracker_config["iou_min"],
                max_age=self.tracker_config["max_age"],
                alpha=self.tracker_config["alpha"],
            )
            frame_inputs = [(f, camera[f].timestamp, located(f)) for f in sampled]
            with stats.timed(StepKind.TRACK.value):
                for frame_index, timestamp, dets in frame_inputs:
                    tracker.step(frame_index, timestamp, dets)
                objects = tracker.result()
                if efs is not None:
                    objects = complete_trajectories(objects, kept, sampled, camera)
            stats.frames_tracked = tracker.frames_tracked
            stats.detections_tracked = tracker.detections_tracked
            stats.association_work = tracker.work
            pipeline_logger.log_step(
                video.video_id, StepKind.TRACK.value, stats.timings_ms[StepKind.TRACK.value], len(sampled), len(objects)
            )
        else:
            objects = singleton_objects([(f, camera[f].timestamp, located(f)) for f in kept], camera.camera_id)

        if estimator is not None:
            stats.detections_estimated = estimator.stats.estimated
            stats.estimation_fallbacks = estimator.stats.fallbacks
            stats.detections_dropped = estimator.stats.dropped
        stats.objects = len(objects)

        duration_ms = (time.perf_counter() - start) * 1000
        pipeline_logger.log_video_processed(
            video.video_id,
            len(objects),
            duration_ms,
            {
                "frames_kept": stats.frames_kept,
                "frames_sampled": stats.frames_sampled,
                "detections_tracked": stats.detections_tracked,
            },
        )
        return VideoResult(video, objects, list(kept), list(sampled), stats)
