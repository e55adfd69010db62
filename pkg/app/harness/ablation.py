"""
消融实验 - 在同一个场景上依次运行 SB、S1 到 S6，与 SB 的输出对比
"""
import time
from dataclasses import asdict, dataclass
from typing import Callable, Dict, List, Optional, Sequence

import pandas as pd

from ..config import get_settings
from ..logger import LogStages, get_logger
from ..planner.plan import ABLATION_SETUPS, PlanOptions, StepKind, setup_options
from ..processing.pruners import prune_frames
from ..query.analysis import relevant_object_types
from ..query.engine import brute_force_query
from ..query.library import QUERIES
from ..query.predicate import Predicate
from ..workflow.composer import ObserveResult
from ..workflow.world import World
from .metrics import association_accuracy_simple, frame_output_accuracy, frames_of, restrict_tracks
from .scene import Scene

settings = get_settings()
logger = get_logger(__name__)

QueryFactory = Callable[[World], Predicate]


@dataclass
class AblationRow:
    setup: str
    plan: str
    runtime_ms: float
    frames_total: int
    frames_decoded: int
    frames_tracked: int
    detections_detected: int
    detections_tracked: int
    skipping_ratio: float
    output_frames: int
    frame_accuracy: float
    association_accuracy: float


@dataclass
class AblationReport:
    scene_seed: int
    query: str
    rows: List[AblationRow]
    results: Dict[str, ObserveResult]

    def row(self, setup: str) -> AblationRow:
        return next(r for r in self.rows if r.setup == setup)

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame([asdict(r) for r in self.rows]).set_index("setup")
        return frame.drop(columns=["plan"])

    def to_text(self) -> str:
        return self.to_frame().to_string(float_format=lambda v: f"{v:.3f}")

    def to_dict(self) -> Dict:
        return {
            "seed": self.scene_seed,
            "query": self.query,
            "setups": [
                {**asdict(r), "runtime_ms": round(r.runtime_ms, 3), "skipping_ratio": round(r.skipping_ratio, 6),
                 "frame_accuracy": round(r.frame_accuracy, 6),
                 "association_accuracy": round(r.association_accuracy, 6)}
                for r in self.rows
            ],
        }


def _resolve(query) -> QueryFactory:
    if isinstance(query, str):
        if query not in QUERIES:
            raise KeyError(f"unknown built-in query '{query}'")
        return QUERIES[query]
    return query


def run_setup(scene: Scene, query, options: PlanOptions) -> ObserveResult:
    world = scene.world(options)
    world.filter(_resolve(query)(world))
    return world.get_objects()


def oracle_frames(scene: Scene, query) -> List[int]:
    """在真值轨迹上直接求值（所有帧、不剪枝）"""
    world = scene.world()
    p = _resolve(query)(world)
    return sorted(frames_of(brute_force_query(scene.ground_truth, scene.camera, scene.road_network, p)))


def kept_frames(scene: Scene, result: ObserveResult) -> Optional[List[int]]:
    """该设置的道路可见性剪枝保留下来的帧；计划里没有剪枝步骤时返回 None"""
    step = None if result.plan is None else result.plan.step(StepKind.ROAD_VISIBILITY_PRUNE)
    if step is None:
        return None
    kept, _ = prune_frames(scene.camera, scene.road_network, result.plan.predicate, step.param("frustum_depth"))
    return kept


def tracking_accuracy(scene: Scene, baseline: ObserveResult, result: ObserveResult) -> float:
    """
    以 SB 的跟踪输出为真值的关联准确率

    两边都只比较查询可能返回的物体类型；被道路可见性剪枝丢弃的帧不参与比较。
    """
    video_id = scene.video_id
    types = relevant_object_types(result.plan.predicate if result.plan is not None else None)
    reference = restrict_tracks(baseline.tracks.get(video_id, []), types, kept_frames(scene, result))
    return association_accuracy_simple(reference, restrict_tracks(result.tracks.get(video_id, []), types))


def run_ablation(
    scene: Scene,
    query="listing",
    setups: Sequence[str] = tuple(ABLATION_SETUPS),
    base: Optional[PlanOptions] = None,
) -> AblationReport:
    """按顺序运行每个设置；帧输出准确率和关联准确率都以 SB 为基准"""
    base = base or settings.plan_options()
    video_id = scene.video_id
    total = len(scene.camera)

    results: Dict[str, ObserveResult] = {}
    timings: Dict[str, float] = {}
    for setup in ["SB"] + [s for s in setups if s != "SB"]:
        start = time.perf_counter()
        results[setup] = run_setup(scene, query, setup_options(setup, base))
        timings[setup] = (time.perf_counter() - start) * 1000

    baseline = set(results["SB"].frames(video_id))
    rows = []
    for setup, result in results.items():
        if setup not in setups:
            continue
        totals = result.stats.to_dict()["totals"]
        rows.append(AblationRow(
            setup=setup,
            plan=" -> ".join(k.value for k in result.plan.kinds),
            runtime_ms=timings[setup],
            frames_total=totals["frames_total"],
            frames_decoded=totals["frames_decoded"],
            frames_tracked=totals["frames_tracked"],
            detections_detected=totals["detections_detected"],
            detections_tracked=totals["detections_tracked"],
            skipping_ratio=result.stats.skipping_ratio,
            output_frames=len(result.frames(video_id)),
            frame_accuracy=frame_output_accuracy(baseline, result.frames(video_id), total),
            association_accuracy=tracking_accuracy(scene, results["SB"], result),
        ))
        logger.info(
            "Ablation setup finished",
            stage=LogStages.COMPOSE,
            setup=setup,
            runtime_ms=round(timings[setup], 3),
            frames_decoded=totals["frames_decoded"],
            output_frames=len(result.frames(video_id)),
        )

    name = query if isinstance(query, str) else getattr(query, "__name__", "custom")
    return AblationReport(scene.spec.seed, name, rows, results)
