"""
文件加载 - 相机配置、道路网络、检测流、深度文件，以及写出的轨迹和帧清单
"""
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Dict, List, Mapping, Tuple, Union

import orjson
from pydantic import BaseModel, ValidationError

from ..errors import InvariantViolation, ParseError
from ..geometry.planar import normalize_angle
from ..logger import LogStages, get_logger
from ..model.road_network import RoadNetwork
from ..model.validation import check_camera, check_construct, check_detection
from ..model.world import (
    CameraConfig,
    CameraFrame,
    ConstructType,
    Detection,
    DetectionsByFrame,
    GeographicConstruct,
    Intrinsic,
    ManifestEntry,
    MovableObject,
    ObjectSample,
    Quaternion,
    Vec3,
)
from .records import (
    CameraFileRecord,
    ConstructRecord,
    DepthRecord,
    DetectionRecord,
    ManifestFileRecord,
    TracksFileRecord,
    parse_timestamp,
)

logger = get_logger(__name__)

PathLike = Union[str, Path]


def _describe(error: ValidationError) -> str:
    first = error.errors()[0]
    location = ".".join(str(part) for part in first.get("loc", ())) or "<root>"
    return f"field '{location}': {first.get('msg', 'invalid value')}"


def read_json(path: PathLike) -> Any:
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as e:
        raise ParseError(f"cannot read file: {e.strerror or e}", str(path)) from e
    try:
        return orjson.loads(data)
    except orjson.JSONDecodeError as e:
        raise ParseError(e.msg, str(path), e.lineno) from e


def validate_record(model: type, data: Any, path: PathLike, line: int = None) -> BaseModel:
    try:
        return model.model_validate(data)
    except ValidationError as e:
        raise ParseError(_describe(e), str(path), line) from e


def _quaternion(values: List[float]) -> Quaternion:
    q = Quaternion(*(float(v) for v in values))
    if q.norm == 0:
        return q
    # 已经是单位四元数时保持原值，写回后再读取结果不变
    return q if abs(q.norm - 1.0) <= 1e-12 else q.normalized()


def load_camera_config(path: PathLike) -> CameraConfig:
    """相机配置 JSON -> CameraConfig"""
    record = validate_record(CameraFileRecord, read_json(path), path)
    frames = tuple(
        CameraFrame(
            frame_index=i,
            translation=Vec3.from_array(f.translation),
            rotation=_quaternion(f.rotation),
            intrinsic=Intrinsic.from_matrix(f.intrinsic),
            timestamp=parse_timestamp(f.timestamp),
            width=record.width,
            height=record.height,
        )
        for i, f in enumerate(record.frames)
    )
    camera = CameraConfig(record.camera_id, frames)
    problems = check_camera(camera)
    if problems:
        raise InvariantViolation(problems, str(path))
    logger.debug("Camera config loaded", stage=LogStages.IO, path=str(path), frames=len(frames))
    return camera


def load_road_network(directory: PathLike) -> RoadNetwork:
    """从目录读取 lane.json / intersection.json / roadsection.json / lanegroup.json"""
    directory = Path(directory)
    if not directory.is_dir():
        raise ParseError("road network directory not found", str(directory))

    constructs: List[GeographicConstruct] = []
    problems: List[str] = []
    for construct_type in ConstructType:
        path = directory / f"{construct_type.value}.json"
        if not path.exists():
            continue
        data = read_json(path)
        if not isinstance(data, list):
            raise ParseError("expected a JSON array of constructs", str(path))
        for item in data:
            record = validate_record(ConstructRecord, item, path)
            construct = GeographicConstruct(
                construct_id=record.id,
                construct_type=construct_type,
                polygon=tuple((float(x), float(y)) for x, y in record.polygon),
                headings=tuple(normalize_angle(h) for h in record.headings),
            )
            problems.extend(check_construct(construct))
            constructs.append(construct)
    if problems:
        raise InvariantViolation(problems, str(directory))

    network = RoadNetwork(constructs)
    logger.debug("Road network loaded", stage=LogStages.IO, path=str(directory), constructs=len(network))
    return network


def load_detections(path: PathLike) -> DetectionsByFrame:
    """NDJSON 检测流，按帧分组，帧内保持文件顺序"""
    path = Path(path)
    try:
        text = path.read_bytes()
    except OSError as e:
        raise ParseError(f"cannot read file: {e.strerror or e}", str(path)) from e

    grouped: Dict[int, List[Detection]] = {}
    for line_number, raw in enumerate(text.splitlines(), start=1):
        if not raw.strip():
            continue
        try:
            data = orjson.loads(raw)
        except orjson.JSONDecodeError as e:
            raise ParseError(e.msg, str(path), line_number) from e
        record = validate_record(DetectionRecord, data, path, line_number)
        detection = Detection(
            frame_index=record.frame,
            bbox=tuple(float(v) for v in record.bbox),
            class_label=record.class_label,
            confidence=record.confidence,
            depth_hint=record.depth,
        )
        problems = check_detection(detection)
        if problems:
            raise InvariantViolation(problems, f"{path}:{line_number}")
        grouped.setdefault(record.frame, []).append(detection)
    return {frame: tuple(dets) for frame, dets in sorted(grouped.items())}


def load_depths(path: PathLike) -> Dict[Tuple[int, int], float]:
    """深度文件：每行 {frame, index, depth}，index 是检测在该帧中的序号"""
    path = Path(path)
    try:
        text = path.read_bytes()
    except OSError as e:
        raise ParseError(f"cannot read file: {e.strerror or e}", str(path)) from e
    depths: Dict[Tuple[int, int], float] = {}
    for line_number, raw in enumerate(text.splitlines(), start=1):
        if not raw.strip():
            continue
        try:
            data = orjson.loads(raw)
        except orjson.JSONDecodeError as e:
            raise ParseError(e.msg, str(path), line_number) from e
        record = validate_record(DepthRecord, data, path, line_number)
        depths[(record.frame, record.index)] = record.depth
    return depths


def merge_depths(detections: DetectionsByFrame, depths: Mapping[Tuple[int, int], float]) -> DetectionsByFrame:
    """把深度文件合并进检测的 depth_hint"""
    merged = {}
    for frame, dets in detections.items():
        merged[frame] = tuple(
            replace(d, depth_hint=depths[(frame, i)]) if (frame, i) in depths else d
            for i, d in enumerate(dets)
        )
    return merged


def load_tracks(path: PathLike) -> List[MovableObject]:
    """tracks.json -> 物体列表，采样按帧序号升序"""
    record = validate_record(TracksFileRecord, read_json(path), path)
    objects: List[MovableObject] = []
    problems: List[str] = []
    for track in record.objects:
        samples = tuple(
            ObjectSample(
                frame_index=s.frame,
                timestamp=parse_timestamp(s.timestamp),
                bbox=tuple(float(v) for v in s.bbox),
                location=None if s.location is None else Vec3.from_array(s.location),
                interpolated=s.interpolated,
            )
            for s in track.samples
        )
        obj = MovableObject(track.oid, track.type, samples)
        if not obj.is_ordered():
            problems.append(f"object {track.oid}: samples not in strictly increasing frame order")
        objects.append(obj)
    if problems:
        raise InvariantViolation(problems, str(path))
    return objects


@dataclass
class LoadedManifest:
    frames: Dict[str, List[ManifestEntry]]
    snippets: Dict[str, List[Tuple[int, int]]]
    padding: int = 0


def load_manifest(path: PathLike) -> LoadedManifest:
    record = validate_record(ManifestFileRecord, read_json(path), path)
    frames = {
        video_id: [ManifestEntry(f.frame, tuple(tuple(m) for m in f.matches)) for f in video.frames]
        for video_id, video in record.videos.items()
    }
    snippets = {video_id: [(s[0], s[1]) for s in video.snippets] for video_id, video in record.videos.items()}
    return LoadedManifest(frames, snippets, record.padding)
