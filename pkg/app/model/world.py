"""
世界数据模型 - 地理构造、可移动物体、相机

所有类型构造后不可变，可以在并行的视频处理线程之间共享。
构造函数不做校验，校验统一由 validate_world 完成并输出报告。
"""
import math
from bisect import bisect_left
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

Point2 = Tuple[float, float]
BBox = Tuple[float, float, float, float]


@dataclass(frozen=True)
class Vec3:
    """三维点，世界坐标系或相机坐标系（米）"""
    x: float
    y: float
    z: float

    @classmethod
    def from_array(cls, values: Sequence[float]) -> "Vec3":
        return cls(float(values[0]), float(values[1]), float(values[2]))

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=float)

    @property
    def xy(self) -> Point2:
        return (self.x, self.y)

    def is_finite(self) -> bool:
        return math.isfinite(self.x) and math.isfinite(self.y) and math.isfinite(self.z)

    def distance_to(self, other: "Vec3") -> float:
        return math.dist((self.x, self.y, self.z), (other.x, other.y, other.z))


@dataclass(frozen=True)
class Quaternion:
    """Hamilton四元数，旋转方向为相机坐标系 -> 世界坐标系"""
    w: float
    x: float
    y: float
    z: float

    @property
    def norm(self) -> float:
        return math.sqrt(self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z)

    def normalized(self) -> "Quaternion":
        n = self.norm
        if n == 0.0:
            raise ValueError("zero quaternion")
        return Quaternion(self.w / n, self.x / n, self.y / n, self.z / n)

    def to_matrix(self) -> np.ndarray:
        w, x, y, z = (self.w, self.x, self.y, self.z)
        n = self.norm
        w, x, y, z = w / n, x / n, y / n, z / n
        return np.array([
            [1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)],
            [2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)],
            [2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)],
        ])

    @classmethod
    def from_matrix(cls, matrix: np.ndarray) -> "Quaternion":
        """旋转矩阵转四元数（Shepperd方法）"""
        m = np.asarray(matrix, dtype=float)
        trace = m[0, 0] + m[1, 1] + m[2, 2]
        if trace > 0:
            s = 2.0 * math.sqrt(trace + 1.0)
            q = (0.25 * s, (m[2, 1] - m[1, 2]) / s, (m[0, 2] - m[2, 0]) / s, (m[1, 0] - m[0, 1]) / s)
        elif m[0, 0] > m[1, 1] and m[0, 0] > m[2, 2]:
            s = 2.0 * math.sqrt(1.0 + m[0, 0] - m[1, 1] - m[2, 2])
            q = ((m[2, 1] - m[1, 2]) / s, 0.25 * s, (m[0, 1] + m[1, 0]) / s, (m[0, 2] + m[2, 0]) / s)
        elif m[1, 1] > m[2, 2]:
            s = 2.0 * math.sqrt(1.0 + m[1, 1] - m[0, 0] - m[2, 2])
            q = ((m[0, 2] - m[2, 0]) / s, (m[0, 1] + m[1, 0]) / s, 0.25 * s, (m[1, 2] + m[2, 1]) / s)
        else:
            s = 2.0 * math.sqrt(1.0 + m[2, 2] - m[0, 0] - m[1, 1])
            q = ((m[1, 0] - m[0, 1]) / s, (m[0, 2] + m[2, 0]) / s, (m[1, 2] + m[2, 1]) / s, 0.25 * s)
        quat = cls(*(float(v) for v in q))
        # w >= 0 的规范形式
        if quat.w < 0:
            quat = cls(-quat.w, -quat.x, -quat.y, -quat.z)
        return quat.normalized()

    @classmethod
    def identity(cls) -> "Quaternion":
        return cls(1.0, 0.0, 0.0, 0.0)


@dataclass(frozen=True)
class Intrinsic:
    """相机内参：焦距(f_x, f_y)、倾斜系数s、光心(x_0, y_0)，单位像素"""
    fx: float
    fy: float
    s: float = 0.0
    x0: float = 0.0
    y0: float = 0.0

    @classmethod
    def from_matrix(cls, matrix: Sequence[Sequence[float]]) -> "Intrinsic":
        m = [list(map(float, row)) for row in matrix]
        return cls(fx=m[0][0], fy=m[1][1], s=m[0][1], x0=m[0][2], y0=m[1][2])

    def matrix(self) -> np.ndarray:
        return np.array([
            [self.fx, self.s, self.x0],
            [0.0, self.fy, self.y0],
            [0.0, 0.0, 1.0],
        ])

    def as_rows(self) -> List[List[float]]:
        return self.matrix().tolist()


@dataclass(frozen=True)
class CameraFrame:
    """单帧相机位姿 (l_i, r_i, it_i, t_i)"""
    frame_index: int
    translation: Vec3
    rotation: Quaternion
    intrinsic: Intrinsic
    timestamp: float
    width: int
    height: int

    @cached_property
    def rotation_matrix(self) -> np.ndarray:
        return self.rotation.to_matrix()

    @cached_property
    def translation_array(self) -> np.ndarray:
        return self.translation.as_array()


@dataclass(frozen=True)
class CameraConfig:
    """一个视频对应的相机，帧序号从0开始连续"""
    camera_id: str
    frames: Tuple[CameraFrame, ...]

    def __len__(self) -> int:
        return len(self.frames)

    def __getitem__(self, frame_index: int) -> CameraFrame:
        return self.frames[frame_index]

    @cached_property
    def timestamps(self) -> Tuple[float, ...]:
        return tuple(f.timestamp for f in self.frames)

    @property
    def last_frame(self) -> int:
        return len(self.frames) - 1

    def last_frame_before(self, time: float) -> int:
        """时间戳严格小于time的最后一帧（没有则返回-1）"""
        return bisect_left(self.timestamps, time) - 1


class ConstructType(str, Enum):
    """地理构造类型"""
    LANE = "lane"
    INTERSECTION = "intersection"
    ROADSECTION = "roadsection"
    LANEGROUP = "lanegroup"


@dataclass(frozen=True)
class GeographicConstruct:
    """z=0平面上带类型的多边形，可带行驶方向（逆时针，相对正东，度）"""
    construct_id: str
    construct_type: ConstructType
    polygon: Tuple[Point2, ...]
    headings: Tuple[float, ...] = ()

    @cached_property
    def bbox(self) -> BBox:
        xs = [p[0] for p in self.polygon]
        ys = [p[1] for p in self.polygon]
        return (min(xs), min(ys), max(xs), max(ys))

    @cached_property
    def area(self) -> float:
        from ..geometry.planar import polygon_area
        return polygon_area(self.polygon)


@dataclass(frozen=True)
class Detection:
    """单帧2D检测框"""
    frame_index: int
    bbox: BBox
    class_label: str
    confidence: float = 1.0
    depth_hint: Optional[float] = None

    @property
    def bottom_center(self) -> Point2:
        x1, _, x2, y2 = self.bbox
        return ((x1 + x2) / 2.0, y2)


DetectionsByFrame = Dict[int, Tuple[Detection, ...]]


@dataclass(frozen=True)
class ObjectSample:
    """物体在某一帧的采样；location 在未做3D估计的计划中为 None"""
    frame_index: int
    timestamp: float
    bbox: BBox
    location: Optional[Vec3] = None
    interpolated: bool = False


@dataclass(frozen=True)
class MovableObject:
    """物体身份及按帧排序的采样序列"""
    oid: str
    object_type: str
    samples: Tuple[ObjectSample, ...] = field(default_factory=tuple)

    @cached_property
    def _by_frame(self) -> Dict[int, int]:
        return {s.frame_index: i for i, s in enumerate(self.samples)}

    @property
    def frames(self) -> List[int]:
        return [s.frame_index for s in self.samples]

    def has_frame(self, frame_index: int) -> bool:
        return frame_index in self._by_frame

    def sample_index(self, frame_index: int) -> Optional[int]:
        return self._by_frame.get(frame_index)

    def sample_at(self, frame_index: int) -> Optional[ObjectSample]:
        i = self._by_frame.get(frame_index)
        return None if i is None else self.samples[i]

    def is_ordered(self) -> bool:
        frames = self.frames
        return all(a < b for a, b in zip(frames, frames[1:]))


@dataclass(frozen=True)
class ManifestEntry:
    """一帧及该帧上满足谓词的物体ID元组"""
    frame_index: int
    matches: Tuple[Tuple[str, ...], ...]

    @property
    def object_ids(self) -> List[str]:
        return sorted({oid for match in self.matches for oid in match})
