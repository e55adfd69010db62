"""
规范化输出 - 排序键、两空格缩进、末尾换行，输出字节稳定
"""
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Union

import orjson

from ..model.road_network import RoadNetwork
from ..model.world import CameraConfig, ConstructType, DetectionsByFrame, MovableObject

PathLike = Union[str, Path]

JSON_OPTIONS = orjson.OPT_SORT_KEYS | orjson.OPT_INDENT_2 | orjson.OPT_SERIALIZE_NUMPY


def dumps(obj: Any) -> bytes:
    return orjson.dumps(obj, option=JSON_OPTIONS) + b"\n"


def write_json(path: PathLike, obj: Any) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(dumps(obj))
    return path


def camera_to_dict(camera: CameraConfig) -> Dict[str, Any]:
    first = camera.frames[0] if camera.frames else None
    return {
        "camera_id": camera.camera_id,
        "width": first.width if first else 0,
        "height": first.height if first else 0,
        "frames": [
            {
                "translation": [f.translation.x, f.translation.y, f.translation.z],
                "rotation": [f.rotation.w, f.rotation.x, f.rotation.y, f.rotation.z],
                "intrinsic": f.intrinsic.as_rows(),
                "timestamp": f.timestamp,
            }
            for f in camera.frames
        ],
    }


def write_camera_config(path: PathLike, camera: CameraConfig) -> Path:
    return write_json(path, camera_to_dict(camera))


def write_road_network(directory: PathLike, rn: RoadNetwork) -> List[Path]:
    """每种构造类型一个文件，只写出存在的类型"""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for construct_type in ConstructType:
        constructs = sorted(rn.of_type(construct_type), key=lambda c: c.construct_id)
        if not constructs:
            continue
        records = [
            {
                "id": c.construct_id,
                "polygon": [[x, y] for x, y in c.polygon],
                "headings": list(c.headings),
            }
            for c in constructs
        ]
        written.append(write_json(directory / f"{construct_type.value}.json", records))
    return written


def write_detections(path: PathLike, detections: DetectionsByFrame) -> Path:
    """NDJSON，每行一条检测，按帧排序"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = []
    for frame in sorted(detections):
        for d in detections[frame]:
            record = {
                "frame": frame,
                "bbox": list(d.bbox),
                "class": d.class_label,
                "confidence": d.confidence,
            }
            if d.depth_hint is not None:
                record["depth"] = d.depth_hint
            lines.append(orjson.dumps(record, option=orjson.OPT_SORT_KEYS))
    path.write_bytes(b"\n".join(lines) + (b"\n" if lines else b""))
    return path


def objects_to_dict(objects: Iterable[MovableObject]) -> Dict[str, Any]:
    return {
        "objects": [
            {
                "oid": o.oid,
                "type": o.object_type,
                "samples": [
                    {
                        "frame": s.frame_index,
                        "timestamp": s.timestamp,
                        "bbox": list(s.bbox),
                        "location": None if s.location is None else [s.location.x, s.location.y, s.location.z],
                        "interpolated": s.interpolated,
                    }
                    for s in o.samples
                ],
            }
            for o in objects
        ]
    }


def write_tracks(path: PathLike, objects: Iterable[MovableObject]) -> Path:
    return write_json(path, objects_to_dict(objects))


def manifest_to_dict(
    manifest: Mapping[str, Sequence[Any]],
    snippets: Optional[Mapping[str, Sequence[Sequence[int]]]] = None,
    padding: int = 0,
) -> Dict[str, Any]:
    videos = {}
    for video_id, entries in manifest.items():
        videos[video_id] = {
            "frames": [{"frame": e.frame_index, "matches": [list(m) for m in e.matches]} for e in entries],
            "snippets": [list(s) for s in (snippets or {}).get(video_id, [])],
        }
    return {"padding": padding, "videos": videos}


def write_manifest(path: PathLike, manifest, snippets=None, padding: int = 0) -> Path:
    return write_json(path, manifest_to_dict(manifest, snippets, padding))
