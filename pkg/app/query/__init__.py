from .analysis import (
    contains_targets,
    distance_bound,
    is_symmetric,
    relevant_object_types,
    required_steps,
)
from .engine import QueryStats, brute_force_query, execute_query
from .evaluator import Bindings, evaluate
from .heading import object_heading
from .predicate import (
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
    Step,
    TypeEq,
    UserPredicate,
    conjoin,
    contains,
    distance,
    heading_diff,
    user_predicate,
)

__all__ = [
    "And",
    "Bindings",
    "CameraRef",
    "Contains",
    "Distance",
    "GeogRef",
    "HeadingDiff",
    "Not",
    "ObjectRef",
    "Or",
    "Predicate",
    "QueryStats",
    "Step",
    "TypeEq",
    "UserPredicate",
    "brute_force_query",
    "conjoin",
    "contains",
    "contains_targets",
    "distance",
    "distance_bound",
    "evaluate",
    "execute_query",
    "heading_diff",
    "is_symmetric",
    "object_heading",
    "relevant_object_types",
    "required_steps",
    "user_predicate",
]
