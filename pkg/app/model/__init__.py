from .world import (
    BBox,
    CameraConfig,
    CameraFrame,
    ConstructType,
    Detection,
    DetectionsByFrame,
    GeographicConstruct,
    Intrinsic,
    ManifestEntry,
    MovableObject,
    ObjectSample,
    Quaternion,
    Vec3,
)
from .road_network import GridIndex, RoadNetwork
from .validation import ValidationReport, validate_world

__all__ = [
    "BBox",
    "CameraConfig",
    "CameraFrame",
    "ConstructType",
    "Detection",
    "DetectionsByFrame",
    "GeographicConstruct",
    "GridIndex",
    "Intrinsic",
    "ManifestEntry",
    "MovableObject",
    "ObjectSample",
    "Quaternion",
    "RoadNetwork",
    "ValidationReport",
    "Vec3",
    "validate_world",
]
