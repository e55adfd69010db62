from .ablation import AblationReport, AblationRow, oracle_frames, run_ablation, run_setup
from .metrics import assign_predictions, association_accuracy_simple, frame_output_accuracy, frames_of, restrict_tracks
from .scene import (
    ActorSpec,
    Scene,
    SceneSpec,
    crossroads_layout,
    generate_scene,
    intersection_scene,
    project_box,
    straight_layout,
    straight_scene,
    write_scene,
)

__all__ = [
    "AblationReport",
    "AblationRow",
    "ActorSpec",
    "Scene",
    "SceneSpec",
    "assign_predictions",
    "association_accuracy_simple",
    "crossroads_layout",
    "frame_output_accuracy",
    "frames_of",
    "generate_scene",
    "intersection_scene",
    "oracle_frames",
    "project_box",
    "restrict_tracks",
    "run_ablation",
    "run_setup",
    "straight_layout",
    "straight_scene",
    "write_scene",
]
