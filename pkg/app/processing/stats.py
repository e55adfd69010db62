"""
执行统计 - 每个视频的计数器和步骤耗时
"""
import time
from contextlib import contextmanager
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List


@dataclass
class VideoStats:
    video_id: str
    frames_total: int = 0
    frames_kept: int = 0
    frames_decoded: int = 0
    detections_detected: int = 0
    detections_pruned: int = 0
    detections_estimated: int = 0
    estimation_fallbacks: int = 0
    detections_dropped: int = 0
    frames_sampled: int = 0
    skipping_ratio: float = 0.0
    frames_tracked: int = 0
    detections_tracked: int = 0
    association_work: int = 0
    objects: int = 0
    query_candidates: int = 0
    query_matches: int = 0
    timings_ms: Dict[str, float] = field(default_factory=dict)

    @property
    def frames_pruned(self) -> int:
        return self.frames_total - self.frames_kept

    @contextmanager
    def timed(self, step: str):
        """累计某个步骤的耗时"""
        start = time.perf_counter()
        try:
            yield
        finally:
            elapsed = (time.perf_counter() - start) * 1000
            self.timings_ms[step] = self.timings_ms.get(step, 0.0) + elapsed

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["frames_pruned"] = self.frames_pruned
        data["skipping_ratio"] = round(self.skipping_ratio, 6)
        data["timings_ms"] = {k: round(v, 3) for k, v in sorted(self.timings_ms.items())}
        return data


_SUMMED = (
    "frames_total",
    "frames_kept",
    "frames_decoded",
    "detections_detected",
    "detections_pruned",
    "detections_estimated",
    "estimation_fallbacks",
    "detections_dropped",
    "frames_sampled",
    "frames_tracked",
    "detections_tracked",
    "association_work",
    "objects",
    "query_candidates",
    "query_matches",
)


@dataclass
class RunStats:
    """一次 observe 的统计"""
    videos: List[VideoStats] = field(default_factory=list)
    plan: List[str] = field(default_factory=list)

    def total(self, name: str) -> int:
        return sum(getattr(v, name) for v in self.videos)

    @property
    def skipping_ratio(self) -> float:
        """跨视频的整体跳帧比例（以进入采样器的帧为分母）"""
        kept = self.total("frames_kept")
        if kept == 0:
            return 0.0
        return 1.0 - self.total("frames_sampled") / kept

    def to_dict(self) -> Dict[str, Any]:
        totals = {name: self.total(name) for name in _SUMMED}
        totals["frames_pruned"] = totals["frames_total"] - totals["frames_kept"]
        totals["skipping_ratio"] = round(self.skipping_ratio, 6)
        timings: Dict[str, float] = {}
        for v in self.videos:
            for step, ms in v.timings_ms.items():
                timings[step] = timings.get(step, 0.0) + ms
        totals["timings_ms"] = {k: round(v, 3) for k, v in sorted(timings.items())}
        return {
            "plan": list(self.plan),
            "totals": totals,
            "videos": [v.to_dict() for v in self.videos],
        }
