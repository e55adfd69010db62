"""
3D位置估计

GeometryBased：检测框底边中点的反投影射线与地面 z=0 求交。
ExternalDepth：使用外部深度文件提供的相机坐标深度。
"""
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ..errors import BehindCamera, NoIntersection, NonPositiveDepth
from ..geometry.camera import pixel_to_world, ray_direction_world
from ..logger import LogStages, get_logger
from ..model.world import BBox, CameraFrame, Detection, Vec3
from ..planner.plan import EstimatorMode

logger = get_logger(__name__)

GROUND_NORMAL = (0.0, 0.0, 1.0)
GROUND_OFFSET = 0.0


def bottom_center(bbox: BBox) -> Tuple[float, float]:
    x1, _, x2, y2 = bbox
    return ((x1 + x2) / 2.0, y2)


def solve_plane_depth(
    pixel: Sequence[float],
    frame: CameraFrame,
    normal: Sequence[float] = GROUND_NORMAL,
    offset: float = GROUND_OFFSET,
) -> float:
    """
    求深度 d 使 pixel_to_world(pixel, d) 落在平面 n·x = c 上

    world(d) = t + d * R C [x_p, y_p, 1]，n·world(d) 对 d 是线性的。
    """
    n = np.asarray(normal, dtype=float)
    ray = ray_direction_world(pixel, frame)
    denom = float(n @ ray)
    if abs(denom) < 1e-12:
        raise NoIntersection(f"ray through pixel {tuple(pixel)} is parallel to the ground plane")
    d = (offset - float(n @ frame.translation_array)) / denom

    if d <= 0:
        raise BehindCamera(f"ground intersection is behind the camera (d={d:.3g})")
    return d


def ground_point_3d(
    bbox: BBox,
    frame: CameraFrame,
    normal: Sequence[float] = GROUND_NORMAL,
    offset: float = GROUND_OFFSET,
) -> Vec3:
    """检测框底边中点对应的地面点"""
    pixel = bottom_center(bbox)
    d = solve_plane_depth(pixel, frame, normal, offset)
    point = pixel_to_world(pixel, d, frame)
    if tuple(normal) == GROUND_NORMAL and offset == 0.0:
        # 消除浮点误差，地面点 z 严格为 0
        point = Vec3(point.x, point.y, 0.0)
    return point


@dataclass
class EstimatorStats:
    estimated: int = 0
    fallbacks: int = 0
    dropped: int = 0


class LocationEstimator:
    """按计划模式为检测估计世界坐标，失败的检测被丢弃并计数"""

    def __init__(self, mode: EstimatorMode):
        self.mode = mode
        self.stats = EstimatorStats()

    def _from_depth(self, detection: Detection, frame: CameraFrame) -> Optional[Vec3]:
        if detection.depth_hint is None:
            return None
        try:
            return pixel_to_world(detection.bottom_center, detection.depth_hint, frame)
        except NonPositiveDepth:
            return None

    def estimate(self, detection: Detection, frame: CameraFrame) -> Optional[Vec3]:
        if self.mode == EstimatorMode.GEOMETRY_BASED:
            try:
                location = ground_point_3d(detection.bbox, frame)
            except (BehindCamera, NoIntersection):
                # 退回外部深度，没有深度则丢弃
                location = self._from_depth(detection, frame)
                if location is not None:
                    self.stats.fallbacks += 1
        else:
            location = self._from_depth(detection, frame)

        if location is None:
            self.stats.dropped += 1
            logger.debug(
                "Detection dropped: no 3D location",
                stage=LogStages.ESTIMATE,
                frame_index=detection.frame_index,
                class_label=detection.class_label,
                mode=self.mode.value,
            )
            return None
        self.stats.estimated += 1
        return location

    def estimate_frame(self, detections: Sequence[Detection], frame: CameraFrame) -> List[Tuple[Detection, Vec3]]:
        located = []
        for detection in detections:
            location = self.estimate(detection, frame)
            if location is not None:
                located.append((detection, location))
        return located
