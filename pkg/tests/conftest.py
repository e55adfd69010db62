import pytest

from app.harness.scene import intersection_scene, straight_scene
from app.model.world import CameraConfig, CameraFrame, Intrinsic, Quaternion, Vec3


def simple_frame(frame_index: int = 0, width: int = 2, height: int = 2, timestamp: float = 0.0,
                 translation: Vec3 = Vec3(0.0, 0.0, 0.0), rotation: Quaternion = None,
                 intrinsic: Intrinsic = None) -> CameraFrame:
    """单位内参、单位旋转的相机帧"""
    return CameraFrame(
        frame_index=frame_index,
        translation=translation,
        rotation=rotation or Quaternion.identity(),
        intrinsic=intrinsic or Intrinsic(1.0, 1.0, 0.0, 0.0, 0.0),
        timestamp=timestamp,
        width=width,
        height=height,
    )


def camera_from_frames(frames, camera_id: str = "cam") -> CameraConfig:
    return CameraConfig(camera_id, tuple(frames))


@pytest.fixture(scope="session")
def crossroads():
    """种子 7 的路口场景"""
    return intersection_scene(7)


@pytest.fixture(scope="session")
def straight():
    return straight_scene(7)
