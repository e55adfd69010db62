"""
剪枝器 - 道路可见性剪枝（整帧）和物体类型剪枝（单个检测）
"""
from typing import AbstractSet, Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

from ..errors import DegenerateView
from ..geometry.camera import viewable_area
from ..model.road_network import RoadNetwork
from ..model.world import CameraConfig, CameraFrame, ConstructType, Detection
from ..query.predicate import And, Contains, Not, Or, Predicate

VisibleTypes = FrozenSet[ConstructType]


def visible_construct_types(frame: CameraFrame, rn: RoadNetwork, d: float) -> VisibleTypes:
    """与该帧可视区域重叠的构造类型"""
    try:
        area = viewable_area(frame, d)
    except DegenerateView:
        return frozenset()
    return frozenset(c.construct_type for c in rn.overlapping(area))


def _substitute(p: Predicate, visible: AbstractSet[ConstructType]) -> Optional[bool]:
    """三值求值：None 表示检测之前无法判断"""
    if isinstance(p, And):
        values = [_substitute(c, visible) for c in p.operands]
        if any(v is False for v in values):
            return False
        return None if any(v is None for v in values) else True
    if isinstance(p, Or):
        values = [_substitute(c, visible) for c in p.operands]
        if any(v is True for v in values):
            return True
        return None if any(v is None for v in values) else False
    if isinstance(p, Not):
        value = _substitute(p.operand, visible)
        return None if value is None else not value
    if isinstance(p, Contains):
        # 构造类型不可见时 contains 一定为假
        return None if p.geog.construct_type in visible else False
    return None


def rvp_keep_frame(p: Optional[Predicate], visible: AbstractSet[ConstructType]) -> bool:
    """
    contains 原子替换为构造类型是否可见，其它原子视为未知（保留）

    只有在结果确定为 False 时才剪掉该帧。
    """
    if p is None:
        return True
    return _substitute(p, visible) is not False


def otp_filter(dets: Iterable[Detection], types: AbstractSet[str]) -> List[Detection]:
    """只保留相关类型的检测，保持顺序"""
    return [d for d in dets if d.class_label in types]


def prune_frames(
    camera: CameraConfig,
    rn: Optional[RoadNetwork],
    p: Optional[Predicate],
    d: float,
    frames: Optional[Sequence[int]] = None,
) -> Tuple[List[int], Dict[int, VisibleTypes]]:
    """对视频的每一帧做道路可见性剪枝，返回 (保留的帧, 每帧可见类型)"""
    rn = rn if rn is not None else RoadNetwork()
    frames = range(len(camera)) if frames is None else frames
    kept: List[int] = []
    visible_by_frame: Dict[int, VisibleTypes] = {}
    for frame_index in frames:
        visible = visible_construct_types(camera[frame_index], rn, d)
        visible_by_frame[frame_index] = visible
        if rvp_keep_frame(p, visible):
            kept.append(frame_index)
    return kept, visible_by_frame
