"""
数据不变量校验 - 生成违反项报告，不抛异常
"""
import math
from dataclasses import dataclass, field, replace
from typing import Iterable, List, Mapping, Optional, Sequence

from ..geometry.planar import is_simple
from .road_network import RoadNetwork
from .world import CameraConfig, Detection, GeographicConstruct


@dataclass
class ValidationReport:
    """校验报告，violations为空表示所有不变量成立"""
    violations: List[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, message: str):
        self.violations.append(message)

    def extend(self, messages: Iterable[str]):
        self.violations.extend(messages)

    def __bool__(self) -> bool:
        return self.ok


def check_construct(construct: GeographicConstruct) -> List[str]:
    cid = construct.construct_id
    problems = []
    if len(construct.polygon) < 3:
        problems.append(f"construct {cid}: polygon has < 3 vertices")
        return problems
    if not all(math.isfinite(v) for p in construct.polygon for v in p):
        problems.append(f"construct {cid}: polygon has non-finite coordinates")
        return problems
    if not is_simple(construct.polygon):
        problems.append(f"construct {cid}: polygon is not simple")
    for heading in construct.headings:
        if not (0.0 <= heading < 360.0):
            problems.append(f"construct {cid}: heading {heading} outside [0, 360)")
    return problems


def check_camera(camera: CameraConfig) -> List[str]:
    cid = camera.camera_id
    if not camera.frames:
        return [f"camera {cid}: no frames"]

    problems = []
    for expected, frame in enumerate(camera.frames):
        if frame.frame_index != expected:
            problems.append(f"camera {cid}: frame_index not contiguous from 0 (got {frame.frame_index} at position {expected})")
            break
    for frame in camera.frames:
        where = f"camera {cid} frame {frame.frame_index}"
        if frame.width <= 0 or frame.height <= 0:
            problems.append(f"{where}: width and height must be positive")
        if frame.intrinsic.fx <= 0 or frame.intrinsic.fy <= 0:
            problems.append(f"{where}: focal lengths must be positive")
        if not frame.translation.is_finite():
            problems.append(f"{where}: translation not finite")
        if frame.rotation.norm == 0 or not math.isfinite(frame.rotation.norm):
            problems.append(f"{where}: rotation quaternion is degenerate")
    timestamps = camera.timestamps
    if any(b <= a for a, b in zip(timestamps, timestamps[1:])):
        problems.append(f"camera {cid}: timestamps not strictly increasing")
    return problems


def check_detection(detection: Detection, label: str = "") -> List[str]:
    where = f"detection{label} at frame {detection.frame_index}"
    x1, y1, x2, y2 = detection.bbox
    problems = []
    if not all(math.isfinite(v) for v in detection.bbox):
        problems.append(f"{where}: bbox not finite")
    elif not (x1 < x2 and y1 < y2):
        problems.append(f"{where}: bbox requires x1 < x2 and y1 < y2")
    if not (0.0 <= detection.confidence <= 1.0):
        problems.append(f"{where}: confidence {detection.confidence} outside [0, 1]")
    if detection.depth_hint is not None and not (detection.depth_hint > 0):
        problems.append(f"{where}: depth hint must be positive")
    return problems


def clamp_detection(detection: Detection, width: int, height: int) -> Detection:
    """把检测框裁剪到画面范围内"""
    x1, y1, x2, y2 = detection.bbox
    bbox = (
        min(max(x1, 0.0), float(width)),
        min(max(y1, 0.0), float(height)),
        min(max(x2, 0.0), float(width)),
        min(max(y2, 0.0), float(height)),
    )
    if bbox == tuple(detection.bbox):
        return detection
    return replace(detection, bbox=bbox)


def validate_world(
    constructs: Optional[RoadNetwork],
    cameras: Sequence[CameraConfig],
    detections: Optional[Mapping[str, Iterable[Detection]]] = None,
) -> ValidationReport:
    """校验道路网络、相机和检测，检测按camera_id分组"""
    report = ValidationReport()

    for construct in constructs or ():
        report.extend(check_construct(construct))

    cameras_by_id = {}
    for camera in cameras:
        report.extend(check_camera(camera))
        cameras_by_id[camera.camera_id] = camera

    for camera_id, stream in (detections or {}).items():
        camera = cameras_by_id.get(camera_id)
        for detection in stream:
            report.extend(check_detection(detection, f" of {camera_id}"))
            if camera is not None and not (0 <= detection.frame_index < len(camera)):
                report.add(f"detection of {camera_id} at frame {detection.frame_index}: frame not in camera")

    return report
