"""
查询引擎 - 在跟踪结果上逐帧执行谓词

按帧流式生成候选元组，不在内存中物化所有帧的组合。
"""
import time
from collections import defaultdict
from dataclasses import dataclass
from itertools import combinations, permutations, product
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

from ..config import get_settings
from ..logger import get_logger, pipeline_logger
from ..model.road_network import RoadNetwork
from ..model.world import CameraConfig, MovableObject
from .analysis import is_symmetric, types_by_ref
from .evaluator import Bindings, evaluate
from .heading import object_heading
from .predicate import Predicate, object_refs

settings = get_settings()
logger = get_logger(__name__)

Match = Tuple[int, Tuple[str, ...]]


@dataclass
class QueryStats:
    """查询计数器"""
    candidates: int = 0
    prefiltered: int = 0
    matches: int = 0
    duration_ms: float = 0.0


def _objects_by_frame(objects: Iterable[MovableObject]) -> Dict[int, List[MovableObject]]:
    by_frame: Dict[int, List[MovableObject]] = defaultdict(list)
    for obj in sorted(objects, key=lambda o: o.oid):
        for sample in obj.samples:
            by_frame[sample.frame_index].append(obj)
    return by_frame


def iter_matches(
    objects: Sequence[MovableObject],
    camera: CameraConfig,
    road_network: Optional[RoadNetwork],
    p: Optional[Predicate],
    heading_window: Optional[int] = None,
    stats: Optional[QueryStats] = None,
    type_prefilter: bool = True,
) -> Iterator[Match]:
    """按 (帧, 物体ID元组) 顺序生成所有满足谓词的结果"""
    stats = stats if stats is not None else QueryStats()
    window = heading_window or settings.heading_smoothing_window
    by_frame = _objects_by_frame(objects)

    if p is None:
        for frame in sorted(by_frame):
            for obj in by_frame[frame]:
                stats.candidates += 1
                stats.matches += 1
                yield frame, (obj.oid,)
        return

    refs = object_refs(p)
    if not refs:
        # 只涉及相机的谓词
        bindings = Bindings({}, camera, road_network, window)
        for frame in range(len(camera)):
            stats.candidates += 1
            if evaluate(p, bindings, frame):
                stats.matches += 1
                yield frame, ()
        return

    constraints = types_by_ref(p) if type_prefilter else {}
    symmetric = is_symmetric(p)

    for frame in sorted(by_frame):
        present = by_frame[frame]
        pools = []
        for ref in refs:
            allowed = constraints.get(ref)
            pool = present if allowed is None else [o for o in present if o.object_type in allowed]
            stats.prefiltered += len(present) - len(pool)
            pools.append(pool)

        if symmetric:
            tuples = combinations(pools[0], len(refs))
        else:
            tuples = (t for t in product(*pools) if len({o.oid for o in t}) == len(t))

        for combo in tuples:
            stats.candidates += 1
            bindings = Bindings(dict(zip(refs, combo)), camera, road_network, window)
            if evaluate(p, bindings, frame):
                stats.matches += 1
                yield frame, tuple(o.oid for o in combo)


def execute_query(
    objects: Sequence[MovableObject],
    camera: CameraConfig,
    road_network: Optional[RoadNetwork],
    p: Optional[Predicate],
    heading_window: Optional[int] = None,
    stats: Optional[QueryStats] = None,
    type_prefilter: bool = True,
) -> List[Match]:
    """执行查询，结果按帧、再按物体ID排序"""
    stats = stats if stats is not None else QueryStats()
    start = time.perf_counter()
    matches = list(iter_matches(objects, camera, road_network, p, heading_window, stats, type_prefilter))
    stats.duration_ms = (time.perf_counter() - start) * 1000
    pipeline_logger.log_query(camera.camera_id, stats.matches, stats.candidates, stats.duration_ms)
    return matches


def brute_force_query(
    objects: Sequence[MovableObject],
    camera: CameraConfig,
    road_network: Optional[RoadNetwork],
    p: Optional[Predicate],
    heading_window: Optional[int] = None,
) -> List[Match]:
    """对照实现：所有帧 x 所有有序元组，不做类型预过滤"""
    window = heading_window or settings.heading_smoothing_window
    refs = object_refs(p) if p is not None else ()
    k = max(len(refs), 1)
    symmetric = is_symmetric(p)
    frames = sorted({s.frame_index for o in objects for s in o.samples})
    found = set()
    for frame in frames:
        for combo in permutations(objects, k):
            if not all(o.has_frame(frame) for o in combo):
                continue
            if p is not None:
                bindings = Bindings(dict(zip(refs, combo)), camera, road_network, window)
                if not evaluate(p, bindings, frame):
                    continue
            oids = tuple(o.oid for o in combo)
            found.add((frame, tuple(sorted(oids)) if symmetric else oids))
    return sorted(found)


__all__ = [
    "Match",
    "QueryStats",
    "brute_force_query",
    "execute_query",
    "iter_matches",
    "object_heading",
]
