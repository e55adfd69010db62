import pytest

from app.config import get_settings
from app.errors import MissingSample
from app.harness.scene import camera_rotation
from app.model import ConstructType, GeographicConstruct, MovableObject, ObjectSample, Quaternion, RoadNetwork, Vec3
from app.query.analysis import (
    contains_targets,
    distance_bound,
    is_symmetric,
    relevant_object_types,
    required_steps,
)
from app.query.evaluator import Bindings, evaluate
from app.query.library import QUERIES, listing_query
from app.query.predicate import (
    ALL_STEPS,
    And,
    CameraRef,
    GeogRef,
    Not,
    ObjectRef,
    Step,
    TypeEq,
    conjoin,
    contains,
    distance,
    heading_diff,
    references,
    user_predicate,
)
from app.workflow.world import World
from conftest import camera_from_frames, simple_frame

settings = get_settings()

o = ObjectRef("o")
o2 = ObjectRef("o2")
cam = CameraRef("cam")
intersection = GeogRef("intersection", ConstructType.INTERSECTION)
lane = GeogRef("lane", ConstructType.LANE)


def track(oid, object_type, locations, start=0):
    samples = tuple(
        ObjectSample(start + i, float(start + i), (0, 0, 1, 1), loc) for i, loc in enumerate(locations)
    )
    return MovableObject(oid, object_type, samples)


def east_camera(n=3):
    rotation = Quaternion.from_matrix(camera_rotation(0.0, 0.0))
    return camera_from_frames([simple_frame(i, timestamp=float(i), rotation=rotation) for i in range(n)])


class TestPredicateBuilding:
    """谓词构造测试"""

    def test_type_comparison_builds_atom(self):
        assert (o.type == "car") == TypeEq(o, "car")
        assert (o.type != "car") == Not(TypeEq(o, "car"))

    def test_and_flattens(self):
        p = (o.type == "car") & (o.type == "truck") & contains(intersection, o)
        assert isinstance(p, And)
        assert len(p.operands) == 3

    def test_conjoin(self):
        p1, p2 = o.type == "car", distance(o, cam) < 50
        assert conjoin([p1, p2]) == And((p1, p2))
        assert conjoin([p1]) == p1
        assert conjoin([]) is None

    def test_references(self):
        objects, cameras, geogs = references((o.type == "car") & contains(lane, o2) & (distance(o, cam) < 3))
        assert objects == {o, o2}
        assert cameras == {cam}
        assert geogs == {lane}

    def test_heading_bounds_checked(self):
        with pytest.raises(ValueError):
            heading_diff(o, cam, between=(-10, 20))


class TestAnalysis:
    """谓词静态分析测试"""

    def test_required_steps_type_only(self):
        assert required_steps(o.type == "car") == {Step.DECODE, Step.DETECT}

    def test_required_steps_contains(self):
        assert required_steps(contains(intersection, o)) == {Step.DECODE, Step.DETECT, Step.ESTIMATE_3D}

    def test_required_steps_listing(self):
        assert required_steps(listing_query(World())) == ALL_STEPS

    def test_required_steps_no_filter(self):
        assert required_steps(None) == ALL_STEPS

    def test_relevant_types_disjunction(self):
        p = ((o.type == "car") | (o.type == "truck")) & contains(intersection, o)
        assert relevant_object_types(p) == {"car", "truck"}

    def test_relevant_types_single(self):
        assert relevant_object_types((o.type == "human") & contains(intersection, o)) == {"human"}

    def test_relevant_types_negation_unbounded(self):
        assert relevant_object_types(Not(o.type == "car")) is None

    def test_relevant_types_unconstrained_ref(self):
        p = (o.type == "car") & (distance(o, o2) < 5)
        assert relevant_object_types(p) is None

    def test_relevant_types_user_predicate(self):
        p = (o.type == "car") & user_predicate("near", lambda b, f: True, o)
        assert relevant_object_types(p) is None

    def test_contains_targets(self):
        assert contains_targets(listing_query(World())) == {ConstructType.INTERSECTION}
        assert contains_targets(o.type == "car") == frozenset()
        assert contains_targets(contains(lane, o) & contains(intersection, o2)) == {
            ConstructType.LANE, ConstructType.INTERSECTION,
        }

    def test_distance_bound(self):
        assert distance_bound(listing_query(World())) == 50
        assert distance_bound(o.type == "car") is None
        p = ((distance(o, cam) < 50) | (distance(o, cam) < 80)) & (o.type == "car")
        assert distance_bound(p) == 80

    def test_distance_bound_ignores_lower_bounds(self):
        assert distance_bound(distance(o, cam) > 10) is None
        assert distance_bound((distance(o, cam) < 50) | (o.type == "car")) is None

    def test_symmetry(self):
        world = World()
        assert is_symmetric(QUERIES["qe2"](world))
        assert is_symmetric(QUERIES["q2"](World()))
        assert not is_symmetric(QUERIES["q4"](World()))
        assert not is_symmetric((o.type == "car") & (o2.type == "human"))


class TestEvaluate:
    """单帧求值测试"""

    def test_distance_three_four_five(self):
        camera = camera_from_frames([simple_frame(0)])
        bindings = Bindings({o: track("a", "car", [Vec3(3, 4, 0)])}, camera)
        assert evaluate(distance(o, cam) < 6, bindings, 0)
        assert not evaluate(distance(o, cam) < 5, bindings, 0)
        assert evaluate(distance(o, cam) <= 5, bindings, 0)

    def test_contains_unit_square(self):
        rn = RoadNetwork([GeographicConstruct(
            "i0", ConstructType.INTERSECTION, ((0, 0), (1, 0), (1, 1), (0, 1)),
        )])
        camera = camera_from_frames([simple_frame(0)])
        bindings = Bindings({o: track("a", "car", [Vec3(0.5, 0.5, 1.2)])}, camera, rn)
        assert evaluate(contains(intersection, o), bindings, 0)
        assert not evaluate(contains(lane, o), bindings, 0)
        assert evaluate(contains(GeogRef("i", ConstructType.INTERSECTION, "i0"), o), bindings, 0)
        assert not evaluate(contains(GeogRef("i", ConstructType.INTERSECTION, "other"), o), bindings, 0)

    def test_contains_empty_network(self):
        camera = camera_from_frames([simple_frame(0)])
        bindings = Bindings({o: track("a", "car", [Vec3(0.5, 0.5, 0)])}, camera, RoadNetwork())
        assert not evaluate(contains(intersection, o), bindings, 0)

    def test_heading_diff_opposite(self):
        """物体向西（180°），相机向东（0°）"""
        camera = east_camera()
        westbound = track("a", "car", [Vec3(10 - i, 0, 0) for i in range(3)])
        bindings = Bindings({o: westbound}, camera)
        assert evaluate(heading_diff(o, cam, between=(135, 225)), bindings, 1)
        assert not evaluate(heading_diff(o, cam, between=(0, 45)), bindings, 1)

    def test_heading_diff_stationary_is_false(self):
        camera = east_camera()
        parked = track("a", "car", [Vec3(5, 0, 0)] * 3)
        bindings = Bindings({o: parked}, camera)
        assert not evaluate(heading_diff(o, cam, between=(0, 360)), bindings, 1)

    def test_heading_diff_vertical_camera_is_false(self):
        camera = camera_from_frames([simple_frame(i, timestamp=float(i)) for i in range(3)])
        moving = track("a", "car", [Vec3(i, 0, 0) for i in range(3)])
        bindings = Bindings({o: moving}, camera)
        assert not evaluate(heading_diff(o, cam, between=(0, 360)), bindings, 1)

    def test_missing_sample(self):
        camera = east_camera()
        bindings = Bindings({o: track("a", "car", [Vec3(0, 0, 0)], start=2)}, camera)
        with pytest.raises(MissingSample):
            evaluate(o.type == "car", bindings, 0)

    def test_user_predicate(self):
        camera = camera_from_frames([simple_frame(0)])
        bindings = Bindings({o: track("a", "car", [Vec3(1, 0, 0)])}, camera)
        east_of_origin = user_predicate("east", lambda b, f: b.location(o, f).x > 0, o)
        assert evaluate(east_of_origin, bindings, 0)
        assert not evaluate(~east_of_origin, bindings, 0)


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
