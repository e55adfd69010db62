from .estimator import LocationEstimator, ground_point_3d
from .hungarian import hungarian
from .pruners import otp_filter, prune_frames, rvp_keep_frame, visible_construct_types
from .sampler import SamplerConfig, exits_camera, exits_lane, new_car, sample_frames, skipping_ratio
from .stats import RunStats, VideoStats
from .tracker import Tracker, associate_frame, complete_trajectories, iou, track_video
from .video_processor import VideoInput, VideoProcessor, VideoResult

__all__ = [
    "LocationEstimator",
    "RunStats",
    "SamplerConfig",
    "Tracker",
    "VideoInput",
    "VideoProcessor",
    "VideoResult",
    "VideoStats",
    "associate_frame",
    "complete_trajectories",
    "exits_camera",
    "exits_lane",
    "ground_point_3d",
    "hungarian",
    "iou",
    "new_car",
    "otp_filter",
    "prune_frames",
    "rvp_keep_frame",
    "sample_frames",
    "skipping_ratio",
    "track_video",
    "visible_construct_types",
]
