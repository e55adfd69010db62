from .loaders import (
    LoadedManifest,
    load_camera_config,
    load_depths,
    load_detections,
    load_manifest,
    load_road_network,
    load_tracks,
    merge_depths,
    read_json,
)
from .predicate_codec import Scope, decode_predicate, encode_predicate
from .workflow_file import LoadedWorkflow, load_workflow, workflow_document
from .writers import (
    dumps,
    write_camera_config,
    write_detections,
    write_json,
    write_manifest,
    write_road_network,
    write_tracks,
)

__all__ = [
    "LoadedManifest",
    "LoadedWorkflow",
    "Scope",
    "decode_predicate",
    "dumps",
    "encode_predicate",
    "load_camera_config",
    "load_depths",
    "load_detections",
    "load_manifest",
    "load_road_network",
    "load_tracks",
    "load_workflow",
    "merge_depths",
    "read_json",
    "workflow_document",
    "write_camera_config",
    "write_detections",
    "write_json",
    "write_manifest",
    "write_road_network",
    "write_tracks",
]
