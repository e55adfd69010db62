"""
过滤谓词 AST

用法与工作流API一致:
    o = world.object(); c = world.camera(); i = world.geog_construct("intersection")
    p = ((o.type == "car") | (o.type == "truck")) & (distance(o, c) < 50) & contains(i, o)
"""
import operator
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Any, Callable, FrozenSet, Iterable, Optional, Tuple, Union

from ..model.world import ConstructType


# ============================================================================
# 引用
# ============================================================================

class _TypeAttr:
    """obj.type，与字符串比较得到 TypeEq"""
    __slots__ = ("ref",)

    def __init__(self, ref: "ObjectRef"):
        self.ref = ref

    def __eq__(self, label: object) -> "TypeEq":  # type: ignore[override]
        if not isinstance(label, str):
            return NotImplemented
        return TypeEq(self.ref, label)

    def __ne__(self, label: object) -> "Predicate":  # type: ignore[override]
        if not isinstance(label, str):
            return NotImplemented
        return Not(TypeEq(self.ref, label))

    __hash__ = None  # type: ignore[assignment]


@dataclass(frozen=True, order=True)
class ObjectRef:
    name: str

    @property
    def type(self) -> _TypeAttr:
        return _TypeAttr(self)

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True, order=True)
class CameraRef:
    name: str = "cam"

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True, order=True)
class GeogRef:
    """地理构造引用；construct_id 不为空时只匹配该构造"""
    name: str
    construct_type: ConstructType
    construct_id: Optional[str] = None

    def __str__(self) -> str:
        return self.name


Ref = Union[ObjectRef, CameraRef]


# ============================================================================
# 处理步骤
# ============================================================================

class Step(IntEnum):
    """视频处理步骤，按流水线顺序"""
    DECODE = 1
    DETECT = 2
    ESTIMATE_3D = 3
    TRACK = 4

    @property
    def label(self) -> str:
        return {1: "Decode", 2: "Detect", 3: "Estimate3D", 4: "Track"}[self.value]


StepSet = FrozenSet[Step]

ALL_STEPS: StepSet = frozenset(Step)


def prefix_closed(steps: Iterable[Step]) -> StepSet:
    """补齐前置步骤：Track => Estimate3D => Detect => Decode"""
    steps = list(steps)
    if not steps:
        return frozenset()
    highest = max(steps)
    return frozenset(s for s in Step if s <= highest)


# ============================================================================
# 谓词节点
# ============================================================================

COMPARATORS = {
    "<": operator.lt,
    "<=": operator.le,
    ">": operator.gt,
    ">=": operator.ge,
}


class Predicate:
    """谓词基类，支持 & | ~"""

    def __and__(self, other: "Predicate") -> "Predicate":
        return And.of(self, other)

    def __or__(self, other: "Predicate") -> "Predicate":
        return Or.of(self, other)

    def __invert__(self) -> "Predicate":
        return Not(self)

    def children(self) -> Tuple["Predicate", ...]:
        return ()

    def walk(self):
        """先序遍历所有节点"""
        yield self
        for child in self.children():
            yield from child.walk()


@dataclass(frozen=True)
class And(Predicate):
    operands: Tuple[Predicate, ...]

    @classmethod
    def of(cls, *operands: Predicate) -> Predicate:
        flat = []
        for p in operands:
            flat.extend(p.operands if isinstance(p, And) else (p,))
        return flat[0] if len(flat) == 1 else cls(tuple(flat))

    def children(self):
        return self.operands

    def __str__(self) -> str:
        return "(" + " & ".join(str(p) for p in self.operands) + ")"


@dataclass(frozen=True)
class Or(Predicate):
    operands: Tuple[Predicate, ...]

    @classmethod
    def of(cls, *operands: Predicate) -> Predicate:
        flat = []
        for p in operands:
            flat.extend(p.operands if isinstance(p, Or) else (p,))
        return flat[0] if len(flat) == 1 else cls(tuple(flat))

    def children(self):
        return self.operands

    def __str__(self) -> str:
        return "(" + " | ".join(str(p) for p in self.operands) + ")"


@dataclass(frozen=True)
class Not(Predicate):
    operand: Predicate

    def children(self):
        return (self.operand,)

    def __str__(self) -> str:
        return f"~{self.operand}"


@dataclass(frozen=True)
class TypeEq(Predicate):
    obj: ObjectRef
    label: str

    def __str__(self) -> str:
        return f"{self.obj}.type == {self.label!r}"


@dataclass(frozen=True)
class Distance(Predicate):
    """三维欧氏距离比较，a/b 可以是物体或相机"""
    a: Ref
    b: Ref
    comparator: str
    meters: float

    def __post_init__(self):
        if self.comparator not in COMPARATORS:
            raise ValueError(f"unsupported comparator {self.comparator!r}")

    def holds(self, value: float) -> bool:
        return COMPARATORS[self.comparator](value, self.meters)

    def __str__(self) -> str:
        return f"distance({self.a}, {self.b}) {self.comparator} {self.meters:g}"


@dataclass(frozen=True)
class Contains(Predicate):
    geog: GeogRef
    obj: ObjectRef

    def __str__(self) -> str:
        return f"contains({self.geog}, {self.obj})"


@dataclass(frozen=True)
class HeadingDiff(Predicate):
    """((heading(a) - heading(b)) mod 360) 在 [lo, hi] 内（闭区间）"""
    a: Ref
    b: Ref
    lo: float
    hi: float

    def __post_init__(self):
        if not (0.0 <= self.lo <= 360.0 and 0.0 <= self.hi <= 360.0):
            raise ValueError(f"heading bounds must lie in [0, 360], got [{self.lo}, {self.hi}]")

    def __str__(self) -> str:
        return f"heading_diff({self.a}, {self.b}, between=[{self.lo:g}, {self.hi:g}])"


@dataclass(frozen=True)
class UserPredicate(Predicate):
    """
    用户自定义叶子谓词

    fn(bindings, frame_index) -> bool，refs 列出它用到的引用。
    规划器把它当作黑盒：需要全部步骤，两个剪枝器都关闭。
    """
    name: str
    fn: Callable[[Any, int], bool] = field(compare=False, hash=False)
    refs: Tuple[Union[ObjectRef, CameraRef, GeogRef], ...] = ()

    def __str__(self) -> str:
        return f"{self.name}({', '.join(str(r) for r in self.refs)})"


# ============================================================================
# 构造函数
# ============================================================================

class _DistanceExpr:
    __slots__ = ("a", "b")

    def __init__(self, a: Ref, b: Ref):
        self.a = a
        self.b = b

    def __lt__(self, meters: float) -> Distance:
        return Distance(self.a, self.b, "<", float(meters))

    def __le__(self, meters: float) -> Distance:
        return Distance(self.a, self.b, "<=", float(meters))

    def __gt__(self, meters: float) -> Distance:
        return Distance(self.a, self.b, ">", float(meters))

    def __ge__(self, meters: float) -> Distance:
        return Distance(self.a, self.b, ">=", float(meters))


def distance(a: Ref, b: Ref) -> _DistanceExpr:
    return _DistanceExpr(a, b)


def contains(geog: GeogRef, obj: ObjectRef) -> Contains:
    return Contains(geog, obj)


def heading_diff(a: Ref, b: Ref, between: Tuple[float, float]) -> HeadingDiff:
    lo, hi = between
    return HeadingDiff(a, b, float(lo), float(hi))


def user_predicate(name: str, fn: Callable[[Any, int], bool], *refs) -> UserPredicate:
    return UserPredicate(name, fn, tuple(refs))


def conjoin(predicates: Iterable[Predicate]) -> Optional[Predicate]:
    """链式filter按记录顺序合取；没有filter返回None"""
    predicates = list(predicates)
    if not predicates:
        return None
    return And.of(*predicates)


def references(p: Predicate) -> Tuple[FrozenSet[ObjectRef], FrozenSet[CameraRef], FrozenSet[GeogRef]]:
    """谓词中出现的 (物体, 相机, 地理构造) 引用"""
    objects, cameras, geogs = set(), set(), set()

    def visit(ref):
        if isinstance(ref, ObjectRef):
            objects.add(ref)
        elif isinstance(ref, CameraRef):
            cameras.add(ref)
        elif isinstance(ref, GeogRef):
            geogs.add(ref)

    for node in p.walk():
        if isinstance(node, TypeEq):
            visit(node.obj)
        elif isinstance(node, (Distance, HeadingDiff)):
            visit(node.a)
            visit(node.b)
        elif isinstance(node, Contains):
            visit(node.geog)
            visit(node.obj)
        elif isinstance(node, UserPredicate):
            for ref in node.refs:
                visit(ref)
    return frozenset(objects), frozenset(cameras), frozenset(geogs)


def object_refs(p: Optional[Predicate]) -> Tuple[ObjectRef, ...]:
    """物体引用，按名字排序"""
    if p is None:
        return ()
    return tuple(sorted(references(p)[0]))
