from .composer import GetObjects, ManifestEntry, ObserveResult, SaveFrames, group_matches, snippet_ranges
from .world import World

__all__ = [
    "GetObjects",
    "ManifestEntry",
    "ObserveResult",
    "SaveFrames",
    "World",
    "group_matches",
    "snippet_ranges",
]
