from pydantic import Field
from pydantic_settings import BaseSettings
from functools import lru_cache
from typing import List
from dotenv import load_dotenv

# 加载 .env 文件
load_dotenv()

class Settings(BaseSettings):
    """应用配置设置 - 地理视频分析工作流引擎"""

    # ========================================================================
    # 应用配置
    # ========================================================================
    log_level: str = Field(
        default="INFO",
        description="Logging level"
    )
    environment: str = Field(
        default="development",
        description="Application environment (development renders console logs, production renders JSON)"
    )
    port: int = Field(
        default=8000,
        description="Service port"
    )

    # ========================================================================
    # 优化开关（可被CLI参数和工作流文件覆盖）
    # ========================================================================
    enable_rvp: bool = Field(
        default=True,
        description="Enable the Road Visibility Pruner"
    )
    enable_otp: bool = Field(
        default=True,
        description="Enable the Object Type Pruner"
    )
    enable_geo3d: bool = Field(
        default=True,
        description="Enable the Geometry-Based 3D Location Estimator"
    )
    enable_efs: bool = Field(
        default=True,
        description="Enable the Exit Frame Sampler"
    )

    # ========================================================================
    # 采样器配置
    # ========================================================================
    speed_limit_mps: float = Field(
        default=11.176,  # 25 mph
        description="Assumed car speed in meters per second"
    )
    max_skip: int = Field(
        default=5,
        description="Maximum frames the sampler may skip (0 disables the limit)"
    )
    default_frustum_depth_m: float = Field(
        default=100.0,
        description="Frustum depth when the predicate has no distance bound"
    )

    # ========================================================================
    # 物体类型
    # ========================================================================
    groundable_types: List[str] = Field(
        default=["car", "truck", "bus", "bicycle", "motorcycle", "human", "pedestrian"],
        description="Object types assumed to touch the ground plane"
    )
    vehicle_types: List[str] = Field(
        default=["car", "truck", "bus"],
        description="Object types the Exit Frame Sampler supports"
    )

    # ========================================================================
    # 跟踪器配置
    # ========================================================================
    tracker_iou_min: float = Field(
        default=0.1,
        description="Minimum IoU between predicted box and detection"
    )
    tracker_max_age: int = Field(
        default=2,
        description="Sampled frames a track may miss before retiring"
    )
    tracker_velocity_alpha: float = Field(
        default=0.7,
        description="EMA weight of the newest per-frame displacement"
    )

    # ========================================================================
    # 查询配置
    # ========================================================================
    heading_smoothing_window: int = Field(
        default=1,
        description="Sample distance used when computing object headings"
    )
    parallel_videos: bool = Field(
        default=True,
        description="Process videos in parallel worker threads in observe_async"
    )

    # ========================================================================
    # 合成场景配置
    # ========================================================================
    synth_frame_rate_hz: float = Field(
        default=12.0,
        description="Frame rate of generated scenes"
    )
    synth_duration_s: float = Field(
        default=20.0,
        description="Duration of generated scenes"
    )
    frame_image_suffixes: List[str] = Field(
        default=[".png", ".jpg", ".jpeg"],
        description="Accepted frame image suffixes"
    )

    # ========================================================================
    # Pydantic配置
    # ========================================================================
    model_config = {
        "env_file": ".env",
        "env_file_encoding": "utf-8",
        "case_sensitive": False,
        "extra": "ignore",  # 忽略额外的环境变量
        "validate_assignment": True,  # 验证赋值
    }

    def __init__(self, **kwargs):
        """初始化设置，支持从环境变量读取"""
        super().__init__(**kwargs)

        # 验证配置取值
        self._validate_required_settings()

    def _validate_required_settings(self):
        """验证必需的配置项"""
        if self.environment == "production":
            invalid = []
            if self.speed_limit_mps <= 0:
                invalid.append("SPEED_LIMIT_MPS")
            if self.default_frustum_depth_m <= 0:
                invalid.append("DEFAULT_FRUSTUM_DEPTH_M")
            if self.max_skip < 0:
                invalid.append("MAX_SKIP")

            if invalid:
                raise ValueError(f"Invalid settings for production: {', '.join(invalid)}")

    @property
    def is_production(self) -> bool:
        """检查是否为生产环境"""
        return self.environment.lower() == "production"

    def plan_options(self, **overrides):
        """获取规划器选项，允许覆盖"""
        from .planner.plan import PlanOptions

        options = {
            "enable_rvp": self.enable_rvp,
            "enable_otp": self.enable_otp,
            "enable_geo3d": self.enable_geo3d,
            "enable_efs": self.enable_efs,
            "speed_mps": self.speed_limit_mps,
            "max_skip": self.max_skip or None,
            "default_frustum_depth": self.default_frustum_depth_m,
            "groundable_types": frozenset(self.groundable_types),
            "vehicle_types": frozenset(self.vehicle_types),
        }
        options.update({k: v for k, v in overrides.items() if v is not None})
        # max_skip=0 表示不限制
        if not options["max_skip"]:
            options["max_skip"] = None
        return PlanOptions(**options)

    def get_tracker_config(self) -> dict:
        """获取跟踪器配置"""
        return {
            "iou_min": self.tracker_iou_min,
            "max_age": self.tracker_max_age,
            "alpha": self.tracker_velocity_alpha,
        }

# ========================================================================
# 全局设置实例
# ========================================================================
@lru_cache()
def get_settings() -> Settings:
    """获取应用设置（带缓存）"""
    return Settings()
