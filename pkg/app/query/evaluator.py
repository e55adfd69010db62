"""
谓词求值 - 在单帧上对一组绑定求布尔值
"""
from dataclasses import dataclass
from typing import Mapping, Optional

from ..errors import MissingSample, NoHeading, Stationary, VerticalCamera
from ..geometry.camera import camera_heading
from ..geometry.planar import normalize_angle
from ..model.road_network import RoadNetwork
from ..model.world import CameraConfig, MovableObject, Vec3
from .heading import object_heading
from .predicate import (
    And,
    CameraRef,
    Contains,
    Distance,
    HeadingDiff,
    Not,
    ObjectRef,
    Or,
    Predicate,
    TypeEq,
    UserPredicate,
    object_refs,
)


@dataclass
class Bindings:
    """物体引用 -> 物体；所有相机引用绑定到视频的相机"""
    objects: Mapping[ObjectRef, MovableObject]
    camera: CameraConfig
    road_network: Optional[RoadNetwork] = None
    heading_window: int = 1

    def location(self, ref, frame_index: int) -> Vec3:
        if isinstance(ref, CameraRef):
            return self.camera_frame(frame_index).translation
        sample = self.objects[ref].sample_at(frame_index)
        if sample is None:
            raise MissingSample(f"{ref} has no sample at frame {frame_index}")
        if sample.location is None:
            raise MissingSample(f"{ref} has no 3D location at frame {frame_index}")
        return sample.location

    def camera_frame(self, frame_index: int):
        if not 0 <= frame_index < len(self.camera):
            raise MissingSample(f"camera {self.camera.camera_id} has no frame {frame_index}")
        return self.camera[frame_index]

    def heading(self, ref, frame_index: int) -> float:
        if isinstance(ref, CameraRef):
            return camera_heading(self.camera_frame(frame_index))
        return object_heading(self.objects[ref], frame_index, self.heading_window)


def _eval(p: Predicate, b: Bindings, frame: int) -> bool:
    if isinstance(p, And):
        return all(_eval(c, b, frame) for c in p.operands)
    if isinstance(p, Or):
        return any(_eval(c, b, frame) for c in p.operands)
    if isinstance(p, Not):
        return not _eval(p.operand, b, frame)
    if isinstance(p, TypeEq):
        return b.objects[p.obj].object_type == p.label
    if isinstance(p, Distance):
        return p.holds(b.location(p.a, frame).distance_to(b.location(p.b, frame)))
    if isinstance(p, Contains):
        if b.road_network is None:
            return False
        point = b.location(p.obj, frame).xy
        matches = b.road_network.containing(point, p.geog.construct_type)
        if p.geog.construct_id is not None:
            return any(c.construct_id == p.geog.construct_id for c in matches)
        return bool(matches)
    if isinstance(p, HeadingDiff):
        try:
            diff = normalize_angle(b.heading(p.a, frame) - b.heading(p.b, frame))
        except (Stationary, NoHeading, VerticalCamera):
            return False
        return p.lo <= diff <= p.hi
    if isinstance(p, UserPredicate):
        return bool(p.fn(b, frame))
    raise TypeError(f"unknown predicate node {type(p).__name__}")


def evaluate(p: Predicate, bindings: Bindings, frame_index: int) -> bool:
    """对绑定在 frame_index 上求值；被引用的物体必须在该帧有采样"""
    for ref in object_refs(p):
        track = bindings.objects.get(ref)
        if track is None:
            raise MissingSample(f"{ref} is not bound")
        if not track.has_frame(frame_index):
            raise MissingSample(f"object {track.oid} has no sample at frame {frame_index}")
    return _eval(p, bindings, frame_index)
