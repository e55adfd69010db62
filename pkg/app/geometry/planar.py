"""
平面几何 - 凸包、点在多边形内、射线出口、多边形重叠

多边形统一用逆时针顶点序列表示，首尾不重复。
"""
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, List, Optional, Sequence, Tuple, Union

from ..errors import DegenerateView, OriginOutside

Point2 = Tuple[float, float]

# 相对容差，乘以坐标尺度使用
_EPS = 1e-12


@dataclass(frozen=True)
class Polygon2D:
    """二维多边形（米）"""
    vertices: Tuple[Point2, ...]

    def __len__(self) -> int:
        return len(self.vertices)

    def __iter__(self):
        return iter(self.vertices)

    @cached_property
    def bbox(self) -> Tuple[float, float, float, float]:
        xs = [p[0] for p in self.vertices]
        ys = [p[1] for p in self.vertices]
        return (min(xs), min(ys), max(xs), max(ys))

    @cached_property
    def area(self) -> float:
        return polygon_area(self.vertices)


PolygonLike = Union[Polygon2D, Sequence[Point2]]


def _vertices(poly: PolygonLike) -> Tuple[Point2, ...]:
    if isinstance(poly, Polygon2D):
        return poly.vertices
    return tuple((float(p[0]), float(p[1])) for p in poly)


def _scale(points: Iterable[Point2]) -> float:
    return max((max(abs(p[0]), abs(p[1])) for p in points), default=0.0) + 1.0


def cross(o: Point2, a: Point2, b: Point2) -> float:
    """(a-o) x (b-o)，>0 表示 b 在 o->a 左侧"""
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def signed_area(poly: PolygonLike) -> float:
    pts = _vertices(poly)
    total = 0.0
    for i in range(len(pts)):
        x1, y1 = pts[i]
        x2, y2 = pts[(i + 1) % len(pts)]
        total += x1 * y2 - x2 * y1
    return total / 2.0


def polygon_area(poly: PolygonLike) -> float:
    return abs(signed_area(poly))


def to_counterclockwise(poly: PolygonLike) -> Tuple[Point2, ...]:
    pts = _vertices(poly)
    return pts if signed_area(pts) >= 0 else tuple(reversed(pts))


def normalize_angle(degrees: float) -> float:
    """归一化到 [0, 360)"""
    value = math.fmod(degrees, 360.0)
    if value < 0:
        value += 360.0
    # fmod(-1e-18, 360) + 360 == 360.0
    return 0.0 if value >= 360.0 else value


def heading_unit(degrees: float) -> Point2:
    rad = math.radians(degrees)
    return (math.cos(rad), math.sin(rad))


def convex_hull(points: Iterable[Point2]) -> Polygon2D:
    """单调链凸包，逆时针输出，不含共线点"""
    unique = sorted({(float(p[0]), float(p[1])) for p in points})
    if len(unique) < 3:
        raise DegenerateView(f"convex hull needs 3 distinct points, got {len(unique)}")

    lower: List[Point2] = []
    for p in unique:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)

    upper: List[Point2] = []
    for p in reversed(unique):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)

    hull = lower[:-1] + upper[:-1]
    scale = _scale(unique)
    if len(hull) < 3 or polygon_area(hull) <= _EPS * scale * scale:
        raise DegenerateView("all points are collinear")
    return Polygon2D(tuple(hull))


def on_segment(p: Point2, a: Point2, b: Point2, eps: Optional[float] = None) -> bool:
    """p 是否在线段 ab 上（含端点）"""
    if eps is None:
        eps = _EPS * _scale((p, a, b)) ** 2
    if abs(cross(a, b, p)) > eps:
        return False
    return (min(a[0], b[0]) - 1e-12 <= p[0] <= max(a[0], b[0]) + 1e-12
            and min(a[1], b[1]) - 1e-12 <= p[1] <= max(a[1], b[1]) + 1e-12)


def winding_number(p: Point2, poly: PolygonLike) -> int:
    """绕数（边界上的点结果不确定，调用方先判断边界）"""
    pts = _vertices(poly)
    wn = 0
    n = len(pts)
    for i in range(n):
        a = pts[i]
        b = pts[(i + 1) % n]
        if a[1] <= p[1]:
            if b[1] > p[1] and cross(a, b, p) > 0:
                wn += 1
        elif b[1] <= p[1] and cross(a, b, p) < 0:
            wn -= 1
    return wn


def point_in_polygon(p: Point2, poly: PolygonLike) -> bool:
    """点在多边形内部或边界上"""
    pts = _vertices(poly)
    p = (float(p[0]), float(p[1]))
    if isinstance(poly, Polygon2D):
        xmin, ymin, xmax, ymax = poly.bbox
        if p[0] < xmin - 1e-9 or p[0] > xmax + 1e-9 or p[1] < ymin - 1e-9 or p[1] > ymax + 1e-9:
            return False
    n = len(pts)
    eps = _EPS * _scale(pts + (p,)) ** 2
    for i in range(n):
        if on_segment(p, pts[i], pts[(i + 1) % n], eps):
            return True
    return winding_number(p, pts) != 0


def segments_intersect(p1: Point2, p2: Point2, q1: Point2, q2: Point2) -> bool:
    """线段相交（含端点接触与共线重叠）"""
    d1 = cross(q1, q2, p1)
    d2 = cross(q1, q2, p2)
    d3 = cross(p1, p2, q1)
    d4 = cross(p1, p2, q2)
    if ((d1 > 0 and d2 < 0) or (d1 < 0 and d2 > 0)) and ((d3 > 0 and d4 < 0) or (d3 < 0 and d4 > 0)):
        return True
    eps = _EPS * _scale((p1, p2, q1, q2)) ** 2
    return (on_segment(p1, q1, q2, eps) or on_segment(p2, q1, q2, eps)
            or on_segment(q1, p1, p2, eps) or on_segment(q2, p1, p2, eps))


def _bbox(pts: Sequence[Point2]) -> Tuple[float, float, float, float]:
    xs = [p[0] for p in pts]
    ys = [p[1] for p in pts]
    return (min(xs), min(ys), max(xs), max(ys))


def polygons_overlap(a: PolygonLike, b: PolygonLike) -> bool:
    """两个简单多边形是否重叠（共享面积或边界接触）"""
    pa = _vertices(a)
    pb = _vertices(b)
    ax1, ay1, ax2, ay2 = a.bbox if isinstance(a, Polygon2D) else _bbox(pa)
    bx1, by1, bx2, by2 = b.bbox if isinstance(b, Polygon2D) else _bbox(pb)
    if ax2 < bx1 or bx2 < ax1 or ay2 < by1 or by2 < ay1:
        return False
    if any(point_in_polygon(p, pb) for p in pa):
        return True
    if any(point_in_polygon(p, pa) for p in pb):
        return True
    na, nb = len(pa), len(pb)
    for i in range(na):
        a1, a2 = pa[i], pa[(i + 1) % na]
        for j in range(nb):
            if segments_intersect(a1, a2, pb[j], pb[(j + 1) % nb]):
                return True
    return False


def is_simple(poly: PolygonLike) -> bool:
    """O(n^2) 检查非相邻边不相交"""
    pts = _vertices(poly)
    n = len(pts)
    if n < 3:
        return False
    for i in range(n):
        a1, a2 = pts[i], pts[(i + 1) % n]
        for j in range(i + 1, n):
            # 相邻边共享端点
            if j == i + 1 or (i == 0 and j == n - 1):
                continue
            if segments_intersect(a1, a2, pts[j], pts[(j + 1) % n]):
                return False
    return True


def _ray_segment_hit(origin: Point2, direction: Point2, a: Point2, b: Point2) -> Optional[float]:
    """射线 origin + t*direction 与线段 ab 的交点参数 t（t >= 0）"""
    ex, ey = b[0] - a[0], b[1] - a[1]
    denom = direction[0] * ey - direction[1] * ex
    wx, wy = a[0] - origin[0], a[1] - origin[1]
    if abs(denom) < 1e-15:
        # 平行：共线时取较近的端点
        if abs(wx * direction[1] - wy * direction[0]) > 1e-12:
            return None
        ts = [(p[0] - origin[0]) * direction[0] + (p[1] - origin[1]) * direction[1] for p in (a, b)]
        ts = [t for t in ts if t >= 0]
        return min(ts) if ts else None
    t = (wx * ey - wy * ex) / denom
    u = (wx * direction[1] - wy * direction[0]) / denom
    if t < -1e-12 or u < -1e-12 or u > 1 + 1e-12:
        return None
    return max(t, 0.0)


def ray_exit_distance(origin: Point2, direction_deg: float, poly: PolygonLike) -> float:
    """射线离开多边形前走过的距离"""
    pts = _vertices(poly)
    if not point_in_polygon(origin, pts):
        raise OriginOutside(f"ray origin {origin} is outside the polygon")
    direction = heading_unit(direction_deg)
    n = len(pts)
    hits = sorted(
        t for t in (_ray_segment_hit(origin, direction, pts[i], pts[(i + 1) % n]) for i in range(n))
        if t is not None
    )
    if not hits:
        raise OriginOutside(f"ray from {origin} never leaves the polygon")
    probe = 1e-7 * _scale(pts)
    # 第一个之后即在多边形外的交点
    for t in hits:
        q = (origin[0] + (t + probe) * direction[0], origin[1] + (t + probe) * direction[1])
        if not point_in_polygon(q, pts):
            return t
    return hits[-1]


def polygon_ray_exit(origin: Point2, direction_deg: float, poly: PolygonLike) -> Point2:
    """射线 {origin + t*unit(direction)} 的最近边界出口"""
    t = ray_exit_distance(origin, direction_deg, poly)
    ux, uy = heading_unit(direction_deg)
    return (origin[0] + t * ux, origin[1] + t * uy)
