"""
输出组合 - 把查询结果整理成物体列表、帧清单，并按需写出文件和标注帧
"""
from collections import OrderedDict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from PIL import Image, ImageDraw

from ..config import get_settings
from ..formats.writers import manifest_to_dict, objects_to_dict, write_json, write_manifest, write_tracks
from ..logger import get_logger, pipeline_logger
from ..model.world import ManifestEntry, MovableObject
from ..planner.plan import ExecutionPlan
from ..processing.stats import RunStats
from ..processing.video_processor import VideoResult

settings = get_settings()
logger = get_logger(__name__)

Match = Tuple[int, Tuple[str, ...]]


@dataclass(frozen=True)
class GetObjects:
    """只返回物体"""
    mode: str = "objects"


@dataclass(frozen=True)
class SaveFrames:
    """写出帧清单和轨迹；提供帧图片且 annotate=True 时写出标注后的帧"""
    path: Path
    annotate: bool = False
    padding: int = 0
    mode: str = "frames"


@dataclass
class ObserveResult:
    objects: List[MovableObject]
    frame_manifest: Dict[str, List[ManifestEntry]]
    snippets: Dict[str, List[Tuple[int, int]]] = field(default_factory=dict)
    stats: RunStats = field(default_factory=RunStats)
    plan: Optional[ExecutionPlan] = None
    padding: int = 0
    # 每个视频跟踪到的全部物体（过滤前）
    tracks: Dict[str, List[MovableObject]] = field(default_factory=dict)

    def frames(self, video_id: str) -> List[int]:
        return [e.frame_index for e in self.frame_manifest.get(video_id, [])]

    def matches(self, video_id: str) -> List[Match]:
        return [(e.frame_index, m) for e in self.frame_manifest.get(video_id, []) for m in e.matches]

    def to_dict(self) -> Dict:
        return {
            "objects": objects_to_dict(self.objects)["objects"],
            "manifest": manifest_to_dict(self.frame_manifest, self.snippets, self.padding),
            "plan": None if self.plan is None else self.plan.to_dict(),
            "stats": self.stats.to_dict(),
        }


def group_matches(matches: Sequence[Match]) -> List[ManifestEntry]:
    grouped: "OrderedDict[int, List[Tuple[str, ...]]]" = OrderedDict()
    for frame, oids in matches:
        grouped.setdefault(frame, []).append(oids)
    return [ManifestEntry(frame, tuple(tuples)) for frame, tuples in grouped.items()]


def snippet_ranges(frames: Sequence[int], padding: int, last_frame: int) -> List[Tuple[int, int]]:
    """匹配帧前后各扩展 padding 帧，合并相邻区间（闭区间）"""
    ranges: List[Tuple[int, int]] = []
    for frame in sorted(frames):
        start, end = max(frame - padding, 0), min(frame + padding, last_frame)
        if ranges and start <= ranges[-1][1] + 1:
            ranges[-1] = (ranges[-1][0], max(ranges[-1][1], end))
        else:
            ranges.append((start, end))
    return ranges


def _frame_image(frames_dir: Path, frame_index: int) -> Optional[Path]:
    for path in sorted(frames_dir.iterdir()):
        if path.suffix.lower() not in settings.frame_image_suffixes:
            continue
        try:
            if int(path.stem) == frame_index:
                return path
        except ValueError:
            continue
    return None


def annotate_frames(
    result: VideoResult,
    entries: Sequence[ManifestEntry],
    objects_by_id: Dict[str, MovableObject],
    out_dir: Path,
) -> List[Path]:
    """在匹配帧上画出匹配物体的检测框和ID"""
    frames_dir = result.video.frames_dir
    if frames_dir is None or not Path(frames_dir).is_dir():
        return []
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for entry in entries:
        source = _frame_image(Path(frames_dir), entry.frame_index)
        if source is None:
            continue
        with Image.open(source) as image:
            canvas = image.convert("RGB")
        draw = ImageDraw.Draw(canvas)
        for oid in entry.object_ids:
            sample = objects_by_id[oid].sample_at(entry.frame_index)
            if sample is None:
                continue
            draw.rectangle(sample.bbox, outline=(255, 64, 64), width=2)
            draw.text((sample.bbox[0], max(sample.bbox[1] - 12, 0)), oid, fill=(255, 64, 64))
        target = out_dir / f"{entry.frame_index:06d}.png"
        canvas.save(target)
        written.append(target)
    return written


def compose(
    results: Sequence[VideoResult],
    matches_by_video: Dict[str, List[Match]],
    plan: ExecutionPlan,
    stats: RunStats,
    mode=None,
) -> ObserveResult:
    mode = mode or GetObjects()
    padding = getattr(mode, "padding", 0)

    manifest: Dict[str, List[ManifestEntry]] = {}
    snippets: Dict[str, List[Tuple[int, int]]] = {}
    objects: List[MovableObject] = []
    objects_by_video: Dict[str, Dict[str, MovableObject]] = {}
    for result in results:
        video_id = result.video.video_id
        entries = group_matches(matches_by_video.get(video_id, []))
        manifest[video_id] = entries
        snippets[video_id] = snippet_ranges([e.frame_index for e in entries], padding, result.video.camera.last_frame)
        matched = {oid for e in entries for m in e.matches for oid in m}
        by_id = {o.oid: o for o in result.objects}
        objects_by_video[video_id] = by_id
        # 返回的物体带有完整轨迹
        objects.extend(by_id[oid] for oid in sorted(matched))

    observed = ObserveResult(
        objects, manifest, snippets, stats, plan, padding, {r.video.video_id: list(r.objects) for r in results}
    )

    path = None
    if isinstance(mode, SaveFrames):
        path = Path(mode.path)
        write_manifest(path / "manifest.json", manifest, snippets, padding)
        write_tracks(path / "tracks.json", objects)
        write_json(path / "stats.json", stats.to_dict())
        if mode.annotate:
            for result in results:
                video_id = result.video.video_id
                annotate_frames(result, manifest[video_id], objects_by_video[video_id], path / "frames" / video_id)

    pipeline_logger.log_output(
        getattr(mode, "mode", "objects"),
        sum(len(v) for v in manifest.values()),
        len(objects),
        None if path is None else str(path),
    )
    return observed
