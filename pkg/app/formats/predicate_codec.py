"""
谓词 JSON 编码，与 AST 一一对应:

    {"and": [...]}  {"or": [...]}  {"not": {...}}
    {"type_eq": {"obj": "o", "label": "car"}}
    {"distance": {"a": "o", "b": "cam", "op": "<", "meters": 50}}
    {"contains": {"geog": "intersection", "obj": "o"}}
    {"heading_diff": {"a": "o", "b": "cam", "between": [135, 225]}}
"""
from dataclasses import dataclass, field
from typing import Any, Dict

from ..errors import ParseError, UnknownReference
from ..model.world import ConstructType
from ..query.predicate import (
    And,
    CameraRef,
    Contains,
    Distance,
    GeogRef,
    HeadingDiff,
    Not,
    ObjectRef,
    Or,
    Predicate,
    TypeEq,
    UserPredicate,
)


@dataclass
class Scope:
    """名字 -> 引用"""
    objects: Dict[str, ObjectRef] = field(default_factory=dict)
    cameras: Dict[str, CameraRef] = field(default_factory=dict)
    geogs: Dict[str, GeogRef] = field(default_factory=dict)

    def obj(self, name: str) -> ObjectRef:
        if name not in self.objects:
            raise UnknownReference(f"undeclared object '{name}'")
        return self.objects[name]

    def ref(self, name: str):
        if name in self.objects:
            return self.objects[name]
        if name in self.cameras:
            return self.cameras[name]
        raise UnknownReference(f"undeclared object or camera '{name}'")

    def geog(self, name: str) -> GeogRef:
        if name in self.geogs:
            return self.geogs[name]
        # 未声明时允许直接使用构造类型名
        try:
            return GeogRef(name, ConstructType(name))
        except ValueError:
            raise UnknownReference(f"undeclared geographic construct '{name}'") from None


def _body(doc: Dict[str, Any], key: str) -> Dict[str, Any]:
    body = doc[key]
    if not isinstance(body, dict):
        raise ParseError(f"'{key}' expects an object")
    return body


def decode_predicate(doc: Any, scope: Scope) -> Predicate:
    if not isinstance(doc, dict) or len(doc) != 1:
        raise ParseError(f"predicate node must be an object with exactly one key, got {doc!r}")
    (key, value), = doc.items()
    try:
        if key in ("and", "or"):
            if not isinstance(value, list) or not value:
                raise ParseError(f"'{key}' expects a non-empty list")
            children = [decode_predicate(child, scope) for child in value]
            return And.of(*children) if key == "and" else Or.of(*children)
        if key == "not":
            return Not(decode_predicate(value, scope))
        if key == "type_eq":
            body = _body(doc, key)
            return TypeEq(scope.obj(body["obj"]), str(body["label"]))
        if key == "distance":
            body = _body(doc, key)
            return Distance(scope.ref(body["a"]), scope.ref(body["b"]), body.get("op", "<"), float(body["meters"]))
        if key == "contains":
            body = _body(doc, key)
            return Contains(scope.geog(body["geog"]), scope.obj(body["obj"]))
        if key == "heading_diff":
            body = _body(doc, key)
            lo, hi = body["between"]
            return HeadingDiff(scope.ref(body["a"]), scope.ref(body["b"]), float(lo), float(hi))
    except KeyError as e:
        raise ParseError(f"'{key}' is missing field {e.args[0]!r}") from None
    except (TypeError, ValueError) as e:
        raise ParseError(f"invalid '{key}' node: {e}") from None
    raise ParseError(f"unknown predicate node '{key}'")


def encode_predicate(p: Predicate) -> Dict[str, Any]:
    if isinstance(p, And):
        return {"and": [encode_predicate(c) for c in p.operands]}
    if isinstance(p, Or):
        return {"or": [encode_predicate(c) for c in p.operands]}
    if isinstance(p, Not):
        return {"not": encode_predicate(p.operand)}
    if isinstance(p, TypeEq):
        return {"type_eq": {"obj": p.obj.name, "label": p.label}}
    if isinstance(p, Distance):
        return {"distance": {"a": p.a.name, "b": p.b.name, "op": p.comparator, "meters": p.meters}}
    if isinstance(p, Contains):
        return {"contains": {"geog": p.geog.name, "obj": p.obj.name}}
    if isinstance(p, HeadingDiff):
        return {"heading_diff": {"a": p.a.name, "b": p.b.name, "between": [p.lo, p.hi]}}
    if isinstance(p, UserPredicate):
        raise ValueError(f"user predicate '{p.name}' has no JSON encoding")
    raise TypeError(f"unknown predicate node {type(p).__name__}")


def scope_declarations(scope: Scope) -> Dict[str, Any]:
    """作用域的声明部分（写入工作流文件）"""
    return {
        "objects": sorted(scope.objects),
        "cameras": sorted(scope.cameras),
        "geogs": {
            name: ({"type": ref.construct_type.value, "id": ref.construct_id} if ref.construct_id
                   else {"type": ref.construct_type.value})
            for name, ref in sorted(scope.geogs.items())
        },
    }
