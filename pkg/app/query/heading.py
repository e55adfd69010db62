import math

from ..errors import MissingSample, NoHeading, Stationary
from ..geometry.planar import normalize_angle
from ..model.world import MovableObject

# 位移小于该值视为静止（米）
STATIONARY_EPS = 1e-6


def object_heading(track: MovableObject, frame_index: int, window: int = 1) -> float:
    """物体在该帧的行驶方向（逆时针相对正东，度），取相邻采样的位移"""
    i = track.sample_index(frame_index)
    if i is None:
        raise MissingSample(f"object {track.oid} has no sample at frame {frame_index}")
    samples = track.samples
    if len(samples) < 2:
        raise NoHeading(f"object {track.oid} has a single sample")

    window = max(1, window)
    if i > 0:
        a, b = samples[max(i - window, 0)], samples[i]
    else:
        # 轨迹起点用下一个采样
        a, b = samples[0], samples[min(window, len(samples) - 1)]
    if a.location is None or b.location is None:
        raise NoHeading(f"object {track.oid} has no 3D location at frame {frame_index}")

    dx = b.location.x - a.location.x
    dy = b.location.y - a.location.y
    if math.hypot(dx, dy) < STATIONARY_EPS:
        raise Stationary(f"object {track.oid} is stationary at frame {frame_index}")
    return normalize_angle(math.degrees(math.atan2(dy, dx)))
