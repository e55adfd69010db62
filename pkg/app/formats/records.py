"""
文件记录模型 - 所有输入文件先经过 pydantic 校验再转换成领域类型
"""
from datetime import timezone
from typing import Any, Dict, List, Literal, Optional, Union

from dateutil import parser as date_parser
from pydantic import BaseModel, ConfigDict, Field, field_validator

from ..model.world import ConstructType


def parse_timestamp(value: Union[float, int, str]) -> float:
    """时间戳：数字为epoch秒，字符串按ISO-8601解析（无时区按UTC）"""
    if isinstance(value, (int, float)):
        return float(value)
    moment = date_parser.isoparse(value)
    if moment.tzinfo is None:
        moment = moment.replace(tzinfo=timezone.utc)
    return moment.timestamp()


class CameraFrameRecord(BaseModel):
    model_config = ConfigDict(extra="ignore")

    translation: List[float] = Field(..., min_length=3, max_length=3)
    rotation: List[float] = Field(..., min_length=4, max_length=4, description="[w, x, y, z]")
    intrinsic: List[List[float]]
    timestamp: Union[float, str]

    @field_validator("intrinsic")
    @classmethod
    def _check_intrinsic(cls, value: List[List[float]]) -> List[List[float]]:
        if len(value) != 3 or any(len(row) != 3 for row in value):
            raise ValueError("intrinsic must be a 3x3 matrix")
        return value

    @field_validator("timestamp")
    @classmethod
    def _check_timestamp(cls, value: Union[float, str]) -> Union[float, str]:
        if isinstance(value, str):
            parse_timestamp(value)
        return value


class CameraFileRecord(BaseModel):
    model_config = ConfigDict(extra="ignore")

    camera_id: str
    width: int
    height: int
    frames: List[CameraFrameRecord]


class ConstructRecord(BaseModel):
    model_config = ConfigDict(extra="ignore")

    id: str
    polygon: List[List[float]]
    headings: List[float] = Field(default_factory=list)

    @field_validator("polygon")
    @classmethod
    def _check_points(cls, value: List[List[float]]) -> List[List[float]]:
        if any(len(point) != 2 for point in value):
            raise ValueError("polygon points must be [x, y]")
        return value


class DetectionRecord(BaseModel):
    model_config = ConfigDict(extra="ignore", populate_by_name=True)

    frame: int = Field(..., ge=0)
    bbox: List[float] = Field(..., min_length=4, max_length=4)
    class_label: str = Field(..., alias="class")
    confidence: float = 1.0
    depth: Optional[float] = None


class DepthRecord(BaseModel):
    frame: int = Field(..., ge=0)
    index: int = Field(..., ge=0)
    depth: float


class TrackSampleRecord(BaseModel):
    frame: int = Field(..., ge=0)
    timestamp: Union[float, str]
    bbox: List[float] = Field(..., min_length=4, max_length=4)
    location: Optional[List[float]] = Field(default=None, min_length=3, max_length=3)
    interpolated: bool = False


class TrackRecord(BaseModel):
    oid: str
    type: str
    samples: List[TrackSampleRecord] = Field(default_factory=list)


class TracksFileRecord(BaseModel):
    objects: List[TrackRecord] = Field(default_factory=list)


class ManifestFrameRecord(BaseModel):
    frame: int = Field(..., ge=0)
    matches: List[List[str]] = Field(default_factory=list)


class ManifestVideoRecord(BaseModel):
    frames: List[ManifestFrameRecord] = Field(default_factory=list)
    snippets: List[List[int]] = Field(default_factory=list)

    @field_validator("snippets")
    @classmethod
    def _check_snippets(cls, value: List[List[int]]) -> List[List[int]]:
        if any(len(s) != 2 or s[0] > s[1] for s in value):
            raise ValueError("snippets must be [start, end] with start <= end")
        return value


class ManifestFileRecord(BaseModel):
    padding: int = Field(default=0, ge=0)
    videos: Dict[str, ManifestVideoRecord] = Field(default_factory=dict)


class GeogRecord(BaseModel):
    type: ConstructType
    id: Optional[str] = None


class VideoRecord(BaseModel):
    model_config = ConfigDict(extra="ignore")

    camera: str
    detections: Optional[str] = None
    depths: Optional[str] = None
    frames: Optional[str] = None
    id: Optional[str] = None


class ObserveRecord(BaseModel):
    mode: Literal["objects", "frames"] = "objects"
    out: Optional[str] = None
    annotate: bool = False
    padding: int = Field(default=0, ge=0)


class OptimizationsRecord(BaseModel):
    rvp: Optional[bool] = None
    otp: Optional[bool] = None
    geo3d: Optional[bool] = None
    efs: Optional[bool] = None
    speed_mps: Optional[float] = Field(default=None, gt=0)
    max_skip: Optional[int] = Field(default=None, ge=0)
    frustum_depth: Optional[float] = Field(default=None, gt=0)

    def overrides(self) -> Dict[str, Any]:
        """转换为 PlanOptions 的字段名"""
        mapping = {
            "rvp": "enable_rvp",
            "otp": "enable_otp",
            "geo3d": "enable_geo3d",
            "efs": "enable_efs",
            "speed_mps": "speed_mps",
            "max_skip": "max_skip",
            "frustum_depth": "default_frustum_depth",
        }
        return {mapping[k]: v for k, v in self.model_dump().items() if v is not None}


class WorkflowRecord(BaseModel):
    """工作流文件：输入、变量声明、过滤条件、观察方式、优化开关"""
    model_config = ConfigDict(extra="ignore")

    road_network: Optional[str] = None
    videos: List[VideoRecord] = Field(default_factory=list)
    objects: List[str] = Field(default_factory=list)
    cameras: List[str] = Field(default_factory=list)
    geogs: Dict[str, GeogRecord] = Field(default_factory=dict)
    filters: List[Dict[str, Any]] = Field(default_factory=list)
    query: Optional[str] = Field(default=None, description="Name of a built-in query")
    observe: ObserveRecord = Field(default_factory=ObserveRecord)
    optimizations: OptimizationsRecord = Field(default_factory=OptimizationsRecord)
