"""
相机投影 - 像素坐标、相机坐标、世界坐标之间的转换

相机坐标系：Z轴朝前，X轴朝右，Y轴朝下。
旋转四元数把相机坐标转换到世界坐标，平移是相机在世界中的位置。
"""
import math
from typing import List, NamedTuple, Sequence, Tuple

import numpy as np

from ..errors import BehindCamera, NonPositiveDepth, VerticalCamera
from ..model.world import CameraFrame, Intrinsic, Vec3
from .planar import Polygon2D, convex_hull, normalize_angle

# 相机坐标z小于该值视为在相机后方
BEHIND_EPS = 1e-12


class Pixel(NamedTuple):
    """像素坐标，原点左上角，x向右，y向下"""
    x: float
    y: float


def intrinsic_inverse(intrinsic: Intrinsic) -> np.ndarray:
    """内参矩阵的闭式逆矩阵"""
    fx, fy, s = intrinsic.fx, intrinsic.fy, intrinsic.s
    x0, y0 = intrinsic.x0, intrinsic.y0
    return np.array([
        [1.0 / fx, -s / (fx * fy), (s * y0 - fy * x0) / (fx * fy)],
        [0.0, 1.0 / fy, -y0 / fy],
        [0.0, 0.0, 1.0],
    ])


def extrinsic_matrix(frame: CameraFrame) -> np.ndarray:
    """3x4 [R|t]"""
    return np.hstack([frame.rotation_matrix, frame.translation_array.reshape(3, 1)])


def pixel_to_camera(pixel: Sequence[float], depth: float, intrinsic: Intrinsic) -> np.ndarray:
    if depth <= 0:
        raise NonPositiveDepth(f"depth must be positive, got {depth}")
    xp, yp = float(pixel[0]), float(pixel[1])
    return intrinsic_inverse(intrinsic) @ np.array([xp * depth, yp * depth, depth])


def pixel_to_world(pixel: Sequence[float], depth: float, frame: CameraFrame) -> Vec3:
    """像素 + 相机坐标深度 z_c -> 世界坐标"""
    p_cam = pixel_to_camera(pixel, depth, frame.intrinsic)
    return Vec3.from_array(frame.rotation_matrix @ p_cam + frame.translation_array)


def world_to_camera(point: Vec3, frame: CameraFrame) -> np.ndarray:
    return frame.rotation_matrix.T @ (point.as_array() - frame.translation_array)


def world_to_pixel(point: Vec3, frame: CameraFrame) -> Tuple[Pixel, float]:
    """世界坐标 -> (像素, 深度z_c)"""
    p_cam = world_to_camera(point, frame)
    z = float(p_cam[2])
    if z <= BEHIND_EPS:
        raise BehindCamera(f"point {point} is behind camera (z_c={z:.3g})")
    projected = frame.intrinsic.matrix() @ (p_cam / z)
    return Pixel(float(projected[0]), float(projected[1])), z


def ray_direction_world(pixel: Sequence[float], frame: CameraFrame) -> np.ndarray:
    """像素对应射线在世界坐标系中的方向（深度为1时的位移）"""
    return frame.rotation_matrix @ (intrinsic_inverse(frame.intrinsic) @ np.array([pixel[0], pixel[1], 1.0]))


def frame_corners_world(frame: CameraFrame, d: float) -> List[Vec3]:
    """
    画面四个角 B=(0,0), C=(w,0), D=(w,h), E=(0,h) 在深度d处的世界坐标

    用矩阵形式一次计算: [R|t] x C4 x M，M的每一列是 (x_p*d, y_p*d, d, 1)
    """
    if d <= 0:
        raise NonPositiveDepth(f"frustum depth must be positive, got {d}")
    w, h = float(frame.width), float(frame.height)
    corners = np.array([
        [0.0, w, w, 0.0],
        [0.0, 0.0, h, h],
    ])
    m = np.vstack([corners * d, np.full((1, 4), d), np.ones((1, 4))])
    c4 = np.eye(4)
    c4[:3, :3] = intrinsic_inverse(frame.intrinsic)
    world = extrinsic_matrix(frame) @ c4 @ m
    return [Vec3.from_array(world[:, i]) for i in range(4)]


def viewable_area(frame: CameraFrame, d: float) -> Polygon2D:
    """相机位置A和四个角点投影到z=0后的凸包"""
    corners = frame_corners_world(frame, d)
    points = [frame.translation.xy] + [c.xy for c in corners]
    return convex_hull(points)


def camera_heading(frame: CameraFrame) -> float:
    """相机朝向（相机z轴在地面上的投影，逆时针相对正东，度）"""
    forward = frame.rotation_matrix[:, 2]
    norm = math.hypot(forward[0], forward[1])
    if norm < 1e-9:
        raise VerticalCamera(f"camera forward axis is vertical at frame {frame.frame_index}")
    return normalize_angle(math.degrees(math.atan2(forward[1], forward[0])))
