"""
内置查询 - 评估用的典型工作流谓词

每个工厂函数接收一个可以声明变量的对象（World），声明需要的引用并返回谓词。
"""
from typing import Callable, Dict, Protocol

from ..model.world import ConstructType
from .predicate import CameraRef, GeogRef, ObjectRef, Predicate, contains, distance, heading_diff

VEHICLES = ("car", "truck")

# 视为同向 / 反向 / 垂直的方向差区间
SAME_DIRECTION = ((0.0, 45.0), (315.0, 360.0))
OPPOSITE_DIRECTION = (135.0, 225.0)
PERPENDICULAR = ((45.0, 135.0), (225.0, 315.0))


class Declarer(Protocol):
    def object(self, name: str = None) -> ObjectRef: ...

    def camera(self, name: str = None) -> CameraRef: ...

    def geog_construct(self, construct_type, construct_id: str = None, name: str = None) -> GeogRef: ...


def _is_vehicle(o: ObjectRef) -> Predicate:
    return (o.type == VEHICLES[0]) | (o.type == VEHICLES[1])


def _either(a, b, ranges) -> Predicate:
    first, second = ranges
    return heading_diff(a, b, between=first) | heading_diff(a, b, between=second)


def listing_query(world: Declarer) -> Predicate:
    """迎面驶来、50米内、位于路口的车辆"""
    o = world.object()
    c = world.camera()
    intersection = world.geog_construct(ConstructType.INTERSECTION)
    return (
        _is_vehicle(o)
        & (distance(o, c) < 50)
        & contains(intersection, o)
        & heading_diff(o, c, between=OPPOSITE_DIRECTION)
    )


def q1_pedestrian_perpendicular(world: Declarer) -> Predicate:
    """路口处朝向与相机垂直的行人"""
    o = world.object()
    c = world.camera()
    intersection = world.geog_construct(ConstructType.INTERSECTION)
    return (o.type == "human") & contains(intersection, o) & _either(o, c, PERPENDICULAR)


def q2_opposing_cars(world: Declarer) -> Predicate:
    """路口处相向行驶的两辆车"""
    a = world.object()
    b = world.object()
    intersection = world.geog_construct(ConstructType.INTERSECTION)
    return (
        _is_vehicle(a) & _is_vehicle(b)
        & contains(intersection, a) & contains(intersection, b)
        & heading_diff(a, b, between=OPPOSITE_DIRECTION)
    )


def q3_camera_against_lane(world: Declarer) -> Predicate:
    """相机逆着车道方向行驶，10米内有一辆顺着车道的车"""
    o = world.object()
    c = world.camera()
    lane = world.geog_construct(ConstructType.LANE)
    return (
        _is_vehicle(o)
        & contains(lane, o)
        & (distance(o, c) < 10)
        & heading_diff(o, c, between=OPPOSITE_DIRECTION)
    )


def q4_convoys(world: Declarer) -> Predicate:
    """一辆车与相机同向同车道；另外两辆车在对向车道上结伴行驶"""
    a = world.object()
    b = world.object()
    d = world.object()
    c = world.camera()
    lane = world.geog_construct(ConstructType.LANE)
    return (
        _is_vehicle(a) & _is_vehicle(b) & _is_vehicle(d)
        & contains(lane, a) & contains(lane, b) & contains(lane, d)
        & _either(a, c, SAME_DIRECTION)
        & (distance(a, c) < 20)
        & _either(b, d, SAME_DIRECTION)
        & (distance(b, d) < 10)
        & heading_diff(b, c, between=OPPOSITE_DIRECTION)
        & heading_diff(d, c, between=OPPOSITE_DIRECTION)
    )


def qe1_pedestrian_at_intersection(world: Declarer) -> Predicate:
    o = world.object()
    intersection = world.geog_construct(ConstructType.INTERSECTION)
    return (o.type == "human") & contains(intersection, o)


def qe2_two_cars_at_intersection(world: Declarer) -> Predicate:
    a = world.object()
    b = world.object()
    intersection = world.geog_construct(ConstructType.INTERSECTION)
    return (a.type == "car") & (b.type == "car") & contains(intersection, a) & contains(intersection, b)


def qe3_car_near_camera(world: Declarer) -> Predicate:
    o = world.object()
    c = world.camera()
    lane = world.geog_construct(ConstructType.LANE)
    return (o.type == "car") & contains(lane, o) & (distance(o, c) < 10)


def qe4_three_cars_on_lanes(world: Declarer) -> Predicate:
    cars = [world.object() for _ in range(3)]
    lane = world.geog_construct(ConstructType.LANE)
    p = None
    for o in cars:
        term = (o.type == "car") & contains(lane, o)
        p = term if p is None else p & term
    return p


QUERIES: Dict[str, Callable[[Declarer], Predicate]] = {
    "listing": listing_query,
    "q1": q1_pedestrian_perpendicular,
    "q2": q2_opposing_cars,
    "q3": q3_camera_against_lane,
    "q4": q4_convoys,
    "qe1": qe1_pedestrian_at_intersection,
    "qe2": qe2_two_cars_at_intersection,
    "qe3": qe3_car_near_camera,
    "qe4": qe4_three_cars_on_lanes,
}
