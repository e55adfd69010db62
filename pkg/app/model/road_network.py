"""
道路网络 - 地理构造集合 + 均匀网格空间索引
"""
import math
import statistics
from collections import defaultdict
from dataclasses import replace
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Set, Tuple

from ..errors import DuplicateConstructId
from ..geometry.planar import (
    Point2,
    Polygon2D,
    normalize_angle,
    point_in_polygon,
    polygons_overlap,
    to_counterclockwise,
)
from .world import BBox, ConstructType, GeographicConstruct

Cell = Tuple[int, int]


class GridIndex:
    """
    均匀网格索引，按构造的外接矩形登记到所有覆盖的格子

    查询结果是所有外接矩形与查询矩形相交的构造的超集。
    """

    def __init__(self, constructs: Sequence[GeographicConstruct], cell_size: Optional[float] = None):
        self.cell_size = cell_size or self._default_cell_size(constructs)
        self._cells: Dict[Cell, List[int]] = defaultdict(list)
        for i, construct in enumerate(constructs):
            for cell in self._cells_for(construct.bbox):
                self._cells[cell].append(i)

    @staticmethod
    def _default_cell_size(constructs: Sequence[GeographicConstruct]) -> float:
        """格子边长 = 外接矩形对角线的中位数"""
        diagonals = [
            math.hypot(c.bbox[2] - c.bbox[0], c.bbox[3] - c.bbox[1]) for c in constructs
        ]
        diagonals = [d for d in diagonals if d > 0]
        return statistics.median(diagonals) if diagonals else 1.0

    def _cell_range(self, bbox: BBox) -> Tuple[int, int, int, int]:
        size = self.cell_size
        return (
            math.floor(bbox[0] / size),
            math.floor(bbox[1] / size),
            math.floor(bbox[2] / size),
            math.floor(bbox[3] / size),
        )

    def _cells_for(self, bbox: BBox) -> Iterator[Cell]:
        cx1, cy1, cx2, cy2 = self._cell_range(bbox)
        for cx in range(cx1, cx2 + 1):
            for cy in range(cy1, cy2 + 1):
                yield (cx, cy)

    def query(self, bbox: BBox) -> List[int]:
        """外接矩形可能相交的构造下标（升序）"""
        cx1, cy1, cx2, cy2 = self._cell_range(bbox)
        # 查询矩形远大于索引范围时直接扫描已有格子
        if (cx2 - cx1 + 1) * (cy2 - cy1 + 1) > len(self._cells):
            found = {
                i for (cx, cy), items in self._cells.items()
                if cx1 <= cx <= cx2 and cy1 <= cy <= cy2
                for i in items
            }
        else:
            found = set()
            for cell in self._cells_for(bbox):
                found.update(self._cells.get(cell, ()))
        return sorted(found)


def _bboxes_intersect(a: BBox, b: BBox) -> bool:
    return not (a[2] < b[0] or b[2] < a[0] or a[3] < b[1] or b[3] < a[1])


class RoadNetwork:
    """道路网络，构造按ID唯一"""

    def __init__(self, constructs: Iterable[GeographicConstruct] = ()):
        normalized: List[GeographicConstruct] = []
        seen: Set[str] = set()
        for construct in constructs:
            if construct.construct_id in seen:
                raise DuplicateConstructId(f"duplicate construct id '{construct.construct_id}'")
            seen.add(construct.construct_id)
            normalized.append(self._normalize(construct))

        self.constructs: Tuple[GeographicConstruct, ...] = tuple(normalized)
        self._by_id = {c.construct_id: c for c in self.constructs}
        self._polygons = [Polygon2D(c.polygon) for c in self.constructs]
        self.index = GridIndex(self.constructs)

    @staticmethod
    def _normalize(construct: GeographicConstruct) -> GeographicConstruct:
        """多边形统一为逆时针，方向归一化到 [0, 360)"""
        polygon = construct.polygon
        if len(polygon) >= 3:
            polygon = to_counterclockwise(polygon)
        headings = tuple(normalize_angle(h) for h in construct.headings)
        return replace(construct, polygon=tuple(polygon), headings=headings)

    def __len__(self) -> int:
        return len(self.constructs)

    def __iter__(self) -> Iterator[GeographicConstruct]:
        return iter(self.constructs)

    def get(self, construct_id: str) -> Optional[GeographicConstruct]:
        return self._by_id.get(construct_id)

    @property
    def construct_types(self) -> Set[ConstructType]:
        return {c.construct_type for c in self.constructs}

    def of_type(self, construct_type: ConstructType) -> List[GeographicConstruct]:
        return [c for c in self.constructs if c.construct_type == construct_type]

    def candidates(self, bbox: BBox) -> List[GeographicConstruct]:
        """索引候选（超集）"""
        return [self.constructs[i] for i in self.index.query(bbox)]

    def intersecting_bbox(self, bbox: BBox) -> List[GeographicConstruct]:
        """外接矩形与bbox相交的构造（暴力扫描，供测试对照）"""
        return [c for c in self.constructs if _bboxes_intersect(c.bbox, bbox)]

    def overlapping(self, polygon: Polygon2D) -> List[GeographicConstruct]:
        """与多边形重叠的构造"""
        result = []
        for i in self.index.query(polygon.bbox):
            if polygons_overlap(self._polygons[i], polygon):
                result.append(self.constructs[i])
        return result

    def containing(self, point: Point2, construct_type: Optional[ConstructType] = None) -> List[GeographicConstruct]:
        """包含该点的构造（可按类型过滤）"""
        x, y = point
        result = []
        for i in self.index.query((x, y, x, y)):
            construct = self.constructs[i]
            if construct_type is not None and construct.construct_type != construct_type:
                continue
            if point_in_polygon(point, self._polygons[i]):
                result.append(construct)
        return result

    def lane_at(self, point: Point2) -> Optional[GeographicConstruct]:
        """包含该点的面积最小的车道，面积相同按ID"""
        lanes = self.containing(point, ConstructType.LANE)
        if not lanes:
            return None
        return min(lanes, key=lambda c: (c.area, c.construct_id))
