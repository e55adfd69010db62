"""
谓词静态分析 - 规划器和剪枝器使用

所有分析都偏向可靠性：不能确定时返回 None（不剪枝），从不丢掉可能满足谓词的数据。
"""
from itertools import permutations
from typing import Dict, FrozenSet, Optional, Set, Tuple

from ..model.world import ConstructType
from .predicate import (
    ALL_STEPS,
    And,
    CameraRef,
    Contains,
    Distance,
    HeadingDiff,
    Not,
    ObjectRef,
    Or,
    Predicate,
    Step,
    StepSet,
    TypeEq,
    UserPredicate,
    object_refs,
    prefix_closed,
)

Labels = Optional[FrozenSet[str]]


def required_steps(p: Optional[Predicate]) -> StepSet:
    """谓词需要的视频处理步骤（前缀闭合）"""
    if p is None:
        # 没有过滤条件时返回完整轨迹
        return ALL_STEPS
    steps: Set[Step] = set()
    for node in p.walk():
        if isinstance(node, TypeEq):
            steps.add(Step.DETECT)
        elif isinstance(node, (Distance, Contains)):
            steps.add(Step.ESTIMATE_3D)
        elif isinstance(node, (HeadingDiff, UserPredicate)):
            steps.add(Step.TRACK)
    return prefix_closed(steps)


def _types_for(p: Predicate, ref: ObjectRef) -> Labels:
    """ref 满足 p 时类型必须落在的集合；None 表示无限制"""
    if isinstance(p, TypeEq):
        return frozenset({p.label}) if p.obj == ref else None
    if isinstance(p, And):
        bounded = [t for t in (_types_for(c, ref) for c in p.operands) if t is not None]
        if not bounded:
            return None
        result = bounded[0]
        for t in bounded[1:]:
            result = result & t
        return result
    if isinstance(p, Or):
        parts = [_types_for(c, ref) for c in p.operands]
        if any(t is None for t in parts):
            return None
        return frozenset().union(*parts)
    # Not 和其它原子不约束类型
    return None


def types_by_ref(p: Optional[Predicate]) -> Dict[ObjectRef, Labels]:
    """每个物体引用的类型约束"""
    if p is None:
        return {}
    return {ref: _types_for(p, ref) for ref in object_refs(p)}


def relevant_object_types(p: Optional[Predicate]) -> Labels:
    """
    谓词可能返回的物体类型集合

    任一物体引用没有类型约束、谓词里有用户自定义叶子、或没有物体引用时返回 None。
    """
    if p is None:
        return None
    if any(isinstance(node, UserPredicate) for node in p.walk()):
        return None
    per_ref = types_by_ref(p)
    if not per_ref or any(t is None for t in per_ref.values()):
        return None
    return frozenset().union(*per_ref.values())


def contains_targets(p: Optional[Predicate]) -> FrozenSet[ConstructType]:
    """contains 原子第一个参数的构造类型"""
    if p is None:
        return frozenset()
    return frozenset(node.geog.construct_type for node in p.walk() if isinstance(node, Contains))


def _is_camera_object_pair(node: Distance) -> bool:
    return (
        (isinstance(node.a, ObjectRef) and isinstance(node.b, CameraRef))
        or (isinstance(node.a, CameraRef) and isinstance(node.b, ObjectRef))
    )


def distance_bound(p: Optional[Predicate]) -> Optional[float]:
    """合取约束下物体到相机距离的上界（米）"""
    if p is None:
        return None
    if isinstance(p, Distance):
        if p.comparator in ("<", "<=") and _is_camera_object_pair(p):
            return p.meters
        return None
    if isinstance(p, And):
        bounds = [b for b in (distance_bound(c) for c in p.operands) if b is not None]
        return max(bounds) if bounds else None
    if isinstance(p, Or):
        bounds = [distance_bound(c) for c in p.operands]
        if any(b is None for b in bounds):
            return None
        return max(bounds)
    return None


# ============================================================================
# 对称性：决定结果元组是有序还是无序
# ============================================================================

def _canon_ref(ref, rename: Dict[ObjectRef, ObjectRef]):
    if isinstance(ref, ObjectRef):
        return ("o", rename.get(ref, ref).name)
    return ("c", ref.name)


def _canonical(p: Predicate, rename: Dict[ObjectRef, ObjectRef]):
    if isinstance(p, (And, Or)):
        tag = "and" if isinstance(p, And) else "or"
        return (tag, tuple(sorted((_canonical(c, rename) for c in p.operands), key=repr)))
    if isinstance(p, Not):
        return ("not", _canonical(p.operand, rename))
    if isinstance(p, TypeEq):
        return ("type", _canon_ref(p.obj, rename), p.label)
    if isinstance(p, Distance):
        pair = tuple(sorted((_canon_ref(p.a, rename), _canon_ref(p.b, rename))))
        return ("dist", pair, p.comparator, p.meters)
    if isinstance(p, Contains):
        return ("contains", p.geog.construct_type.value, p.geog.construct_id, _canon_ref(p.obj, rename))
    if isinstance(p, HeadingDiff):
        a, b = _canon_ref(p.a, rename), _canon_ref(p.b, rename)
        lo, hi = p.lo, p.hi
        # diff(a,b) in [lo,hi]  <=>  diff(b,a) in [360-hi, 360-lo]
        if b < a:
            a, b, lo, hi = b, a, 360.0 - hi, 360.0 - lo
        return ("heading", a, b, lo, hi)
    if isinstance(p, UserPredicate):
        return ("user", p.name, tuple(str(r) for r in p.refs))
    return ("?", repr(p))


def canonical_form(p: Predicate) -> Tuple:
    return _canonical(p, {})


def is_symmetric(p: Optional[Predicate]) -> bool:
    """交换任意物体引用后谓词不变；对称时结果元组按无序集合去重"""
    if p is None:
        return True
    refs = object_refs(p)
    if len(refs) < 2:
        return True
    if any(isinstance(node, UserPredicate) for node in p.walk()):
        return False
    base = canonical_form(p)
    for perm in permutations(refs):
        rename = dict(zip(refs, perm))
        if _canonical(p, rename) != base:
            return False
    return True
