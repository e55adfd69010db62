"""
基于检测的多目标跟踪

匈牙利算法在预测框与检测框的重叠度上做关联，预测使用像素空间的恒速模型，
速度按采样间隔缩放，因此跳帧后仍然能关联。
关联按物体类型分组求解，类型不同的配对代价为 +inf。
"""
from collections import defaultdict
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..model.world import BBox, CameraConfig, Detection, MovableObject, ObjectSample, Vec3
from .hungarian import hungarian

LocatedDetection = Tuple[Detection, Optional[Vec3]]


def iou(a: BBox, b: BBox) -> float:
    ix1, iy1 = max(a[0], b[0]), max(a[1], b[1])
    ix2, iy2 = min(a[2], b[2]), min(a[3], b[3])
    inter = max(0.0, ix2 - ix1) * max(0.0, iy2 - iy1)
    if inter <= 0:
        return 0.0
    area_a = (a[2] - a[0]) * (a[3] - a[1])
    area_b = (b[2] - b[0]) * (b[3] - b[1])
    return inter / (area_a + area_b - inter)


def _center(bbox: BBox) -> Tuple[float, float]:
    return ((bbox[0] + bbox[2]) / 2.0, (bbox[1] + bbox[3]) / 2.0)


@dataclass
class TrackState:
    """一条活跃轨迹"""
    oid: str
    object_type: str
    bbox: BBox
    frame_index: int
    velocity: Tuple[float, float] = (0.0, 0.0)
    misses: int = 0
    samples: List[ObjectSample] = field(default_factory=list)

    def predict(self, frame_index: int) -> BBox:
        """按速度 x 间隔平移框中心"""
        gap = frame_index - self.frame_index
        dx, dy = self.velocity[0] * gap, self.velocity[1] * gap
        x1, y1, x2, y2 = self.bbox
        return (x1 + dx, y1 + dy, x2 + dx, y2 + dy)

    def to_object(self) -> MovableObject:
        return MovableObject(self.oid, self.object_type, tuple(self.samples))


@dataclass
class Association:
    matches: List[Tuple[int, int]] = field(default_factory=list)
    births: List[int] = field(default_factory=list)
    misses: List[int] = field(default_factory=list)
    work: int = 0


def associate_frame(
    tracks: Sequence[TrackState],
    detections: Sequence[Detection],
    frame_index: int,
    iou_min: float = 0.1,
) -> Association:
    """把当前帧的检测关联到已有轨迹（下标），未匹配的检测为新生，未匹配的轨迹为丢失"""
    result = Association()
    track_groups: Dict[str, List[int]] = defaultdict(list)
    det_groups: Dict[str, List[int]] = defaultdict(list)
    for i, track in enumerate(tracks):
        track_groups[track.object_type].append(i)
    for j, det in enumerate(detections):
        det_groups[det.class_label].append(j)

    matched_tracks, matched_dets = set(), set()
    for label in sorted(set(track_groups) & set(det_groups)):
        rows, cols = track_groups[label], det_groups[label]
        result.work += len(rows) * len(cols)
        cost = np.full((len(rows), len(cols)), np.inf)
        for r, ti in enumerate(rows):
            predicted = tracks[ti].predict(frame_index)
            for c, dj in enumerate(cols):
                overlap = iou(predicted, detections[dj].bbox)
                if overlap >= iou_min and overlap > 0:
                    cost[r, c] = 1.0 - overlap
        for r, c in sorted(hungarian(cost).items()):
            result.matches.append((rows[r], cols[c]))
            matched_tracks.add(rows[r])
            matched_dets.add(cols[c])

    result.births = [j for j in range(len(detections)) if j not in matched_dets]
    result.misses = [i for i in range(len(tracks)) if i not in matched_tracks]
    return result


class Tracker:
    """单个视频的跟踪器，状态不跨视频共享"""

    def __init__(self, camera_id: str, iou_min: float = 0.1, max_age: int = 2, alpha: float = 0.7):
        self.camera_id = camera_id
        self.iou_min = iou_min
        self.max_age = max_age
        self.alpha = alpha
        self.active: List[TrackState] = []
        self.finished: List[TrackState] = []
        self.work = 0
        self.detections_tracked = 0
        self.frames_tracked = 0
        self._next_id = 0

    def _new_oid(self) -> str:
        oid = f"{self.camera_id}:{self._next_id:04d}"
        self._next_id += 1
        return oid

    def step(self, frame_index: int, timestamp: float, located: Sequence[LocatedDetection]):
        detections = [d for d, _ in located]
        assoc = associate_frame(self.active, detections, frame_index, self.iou_min)
        self.work += assoc.work
        self.frames_tracked += 1
        self.detections_tracked += len(detections)

        for ti, dj in assoc.matches:
            track = self.active[ti]
            det, location = located[dj]
            gap = max(frame_index - track.frame_index, 1)
            (cx0, cy0), (cx1, cy1) = _center(track.bbox), _center(det.bbox)
            step_velocity = ((cx1 - cx0) / gap, (cy1 - cy0) / gap)
            a = self.alpha
            track.velocity = (
                a * step_velocity[0] + (1 - a) * track.velocity[0],
                a * step_velocity[1] + (1 - a) * track.velocity[1],
            )
            track.bbox = det.bbox
            track.frame_index = frame_index
            track.misses = 0
            track.samples.append(ObjectSample(frame_index, timestamp, det.bbox, location))

        retired = set()
        for ti in assoc.misses:
            track = self.active[ti]
            track.misses += 1
            if track.misses > self.max_age:
                retired.add(ti)

        survivors = [t for i, t in enumerate(self.active) if i not in retired]
        self.finished.extend(t for i, t in enumerate(self.active) if i in retired)

        for dj in assoc.births:
            det, location = located[dj]
            survivors.append(TrackState(
                oid=self._new_oid(),
                object_type=det.class_label,
                bbox=det.bbox,
                frame_index=frame_index,
                samples=[ObjectSample(frame_index, timestamp, det.bbox, location)],
            ))
        self.active = survivors

    def result(self) -> List[MovableObject]:
        """所有轨迹，按ID排序"""
        tracks = self.finished + self.active
        return sorted((t.to_object() for t in tracks), key=lambda o: o.oid)


def track_video(
    frames: Sequence[Tuple[int, float, Sequence[LocatedDetection]]],
    camera_id: str = "cam",
    iou_min: float = 0.1,
    max_age: int = 2,
    alpha: float = 0.7,
) -> List[MovableObject]:
    """按采样帧顺序依次关联，输出可移动物体"""
    tracker = Tracker(camera_id, iou_min, max_age, alpha)
    for frame_index, timestamp, located in frames:
        tracker.step(frame_index, timestamp, located)
    return tracker.result()


def singleton_objects(
    frames: Sequence[Tuple[int, float, Sequence[LocatedDetection]]],
    camera_id: str = "cam",
) -> List[MovableObject]:
    """计划中没有跟踪步骤时，每个检测单独成为一个物体"""
    objects = []
    for frame_index, timestamp, located in frames:
        for k, (det, location) in enumerate(located):
            objects.append(MovableObject(
                f"{camera_id}:f{frame_index:05d}:{k}",
                det.class_label,
                (ObjectSample(frame_index, timestamp, det.bbox, location),),
            ))
    return objects


def _lerp(a: float, b: float, w: float) -> float:
    return a + (b - a) * w


def complete_trajectories(
    objects: Sequence[MovableObject],
    kept_frames: Sequence[int],
    sampled_frames: Sequence[int],
    camera: CameraConfig,
) -> List[MovableObject]:
    """
    为采样器跳过的帧补上线性插值的采样

    只在两个相邻采样之间没有其它被采样帧时补齐（即轨迹在该区间没有丢失）。
    被道路可见性剪枝掉的帧不补。
    """
    kept = sorted(kept_frames)
    sampled = set(sampled_frames)
    kept_set = set(kept)
    completed = []
    for obj in objects:
        samples: List[ObjectSample] = []
        for a, b in zip(obj.samples, obj.samples[1:]):
            samples.append(a)
            between = [f for f in range(a.frame_index + 1, b.frame_index) if f in kept_set]
            if not between or any(f in sampled for f in between):
                continue
            span = b.timestamp - a.timestamp
            for f in between:
                t = camera[f].timestamp
                w = (t - a.timestamp) / span if span > 0 else 0.0
                bbox = tuple(_lerp(pa, pb, w) for pa, pb in zip(a.bbox, b.bbox))
                location = None
                if a.location is not None and b.location is not None:
                    location = Vec3(
                        _lerp(a.location.x, b.location.x, w),
                        _lerp(a.location.y, b.location.y, w),
                        _lerp(a.location.z, b.location.z, w),
                    )
                samples.append(ObjectSample(f, t, bbox, location, interpolated=True))
        if obj.samples:
            samples.append(obj.samples[-1])
        completed.append(replace(obj, samples=tuple(samples)))
    return completed
