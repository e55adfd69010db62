"""
执行计划 - 把过滤谓词转换为有序的视频处理步骤，并按规则插入优化步骤

步骤顺序固定：
    RoadVisibilityPrune -> Decode -> Detect -> ObjectTypePrune -> Estimate3D -> ExitFrameSample -> Track
"""
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Dict, FrozenSet, List, Optional, Tuple

from ..logger import get_logger, pipeline_logger
from ..query.analysis import contains_targets, distance_bound, relevant_object_types, required_steps
from ..query.predicate import Predicate, Step

logger = get_logger(__name__)


class StepKind(str, Enum):
    ROAD_VISIBILITY_PRUNE = "RoadVisibilityPrune"
    DECODE = "Decode"
    DETECT = "Detect"
    OBJECT_TYPE_PRUNE = "ObjectTypePrune"
    ESTIMATE_3D = "Estimate3D"
    EXIT_FRAME_SAMPLE = "ExitFrameSample"
    TRACK = "Track"


# 流水线顺序
STEP_ORDER: Tuple[StepKind, ...] = tuple(StepKind)


class EstimatorMode(str, Enum):
    GEOMETRY_BASED = "GeometryBased"
    EXTERNAL_DEPTH = "ExternalDepth"


@dataclass(frozen=True)
class PlanOptions:
    """优化开关与配置；默认值来自 Settings.plan_options()"""
    enable_rvp: bool = True
    enable_otp: bool = True
    enable_geo3d: bool = True
    enable_efs: bool = True
    speed_mps: float = 11.176
    max_skip: Optional[int] = 5
    default_frustum_depth: float = 100.0
    groundable_types: FrozenSet[str] = frozenset({"car", "truck", "bus", "bicycle", "motorcycle", "human", "pedestrian"})
    vehicle_types: FrozenSet[str] = frozenset({"car", "truck", "bus"})

    def with_toggles(self, rvp: bool, otp: bool, geo3d: bool, efs: bool) -> "PlanOptions":
        return replace(self, enable_rvp=rvp, enable_otp=otp, enable_geo3d=geo3d, enable_efs=efs)

    def all_disabled(self) -> "PlanOptions":
        return self.with_toggles(False, False, False, False)

    @property
    def toggles(self) -> Dict[str, bool]:
        return {
            "rvp": self.enable_rvp,
            "otp": self.enable_otp,
            "geo3d": self.enable_geo3d,
            "efs": self.enable_efs,
        }


def _format_value(value: Any) -> str:
    if isinstance(value, (frozenset, set, list, tuple)):
        items = sorted(v.value if isinstance(v, Enum) else str(v) for v in value)
        return "[" + ", ".join(items) + "]"
    if isinstance(value, Enum):
        return str(value.value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


@dataclass(frozen=True)
class PlanStep:
    """计划中的一个步骤及其配置"""
    kind: StepKind
    params: Tuple[Tuple[str, Any], ...] = ()

    def param(self, name: str, default: Any = None) -> Any:
        for key, value in self.params:
            if key == name:
                return value
        return default

    def render(self) -> str:
        if not self.params:
            return self.kind.value
        inner = ", ".join(f"{key}={_format_value(value)}" for key, value in self.params)
        return f"{self.kind.value}({inner})"

    def to_dict(self) -> Dict[str, Any]:
        params = {}
        for key, value in self.params:
            if isinstance(value, (frozenset, set, tuple, list)):
                params[key] = sorted(v.value if isinstance(v, Enum) else v for v in value)
            elif isinstance(value, Enum):
                params[key] = value.value
            else:
                params[key] = value
        return {"step": self.kind.value, "params": params}


@dataclass(frozen=True)
class ExecutionPlan:
    """有序的视频处理计划，所有视频共享"""
    steps: Tuple[PlanStep, ...]
    predicate: Optional[Predicate] = field(default=None, compare=False)
    options: PlanOptions = field(default_factory=PlanOptions, compare=False)

    def __iter__(self):
        return iter(self.steps)

    def __len__(self) -> int:
        return len(self.steps)

    @property
    def kinds(self) -> List[StepKind]:
        return [s.kind for s in self.steps]

    def has(self, kind: StepKind) -> bool:
        return any(s.kind == kind for s in self.steps)

    def step(self, kind: StepKind) -> Optional[PlanStep]:
        for s in self.steps:
            if s.kind == kind:
                return s
        return None

    @property
    def estimator_mode(self) -> Optional[EstimatorMode]:
        s = self.step(StepKind.ESTIMATE_3D)
        return None if s is None else s.param("mode")

    def render(self) -> str:
        """稳定的文本格式：每行一个编号步骤"""
        return "\n".join(f"{i}. {s.render()}" for i, s in enumerate(self.steps, start=1))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "steps": [s.to_dict() for s in self.steps],
            "predicate": None if self.predicate is None else str(self.predicate),
        }


def make_plan(p: Optional[Predicate], opts: Optional[PlanOptions] = None) -> ExecutionPlan:
    """按放置规则生成执行计划"""
    opts = opts or PlanOptions()
    steps = required_steps(p)
    relevant = relevant_object_types(p)
    targets = contains_targets(p)
    bound = distance_bound(p)
    frustum_depth = float(bound) if bound is not None else float(opts.default_frustum_depth)

    plan: List[PlanStep] = []

    # 道路可见性剪枝放在解码之前
    if opts.enable_rvp and targets:
        plan.append(PlanStep(StepKind.ROAD_VISIBILITY_PRUNE, (
            ("frustum_depth", frustum_depth),
            ("construct_types", frozenset(targets)),
        )))

    if Step.DECODE in steps:
        plan.append(PlanStep(StepKind.DECODE))

    if Step.DETECT in steps:
        plan.append(PlanStep(StepKind.DETECT))
        # 物体类型剪枝紧跟在检测之后
        if opts.enable_otp and relevant is not None:
            plan.append(PlanStep(StepKind.OBJECT_TYPE_PRUNE, (("types", frozenset(relevant)),)))

    if Step.ESTIMATE_3D in steps:
        groundable = relevant is not None and relevant <= opts.groundable_types
        mode = EstimatorMode.GEOMETRY_BASED if (opts.enable_geo3d and groundable) else EstimatorMode.EXTERNAL_DEPTH
        plan.append(PlanStep(StepKind.ESTIMATE_3D, (("mode", mode),)))

    if Step.TRACK in steps:
        # 出口帧采样只支持车辆
        if opts.enable_efs and relevant and relevant <= opts.vehicle_types:
            plan.append(PlanStep(StepKind.EXIT_FRAME_SAMPLE, (
                ("speed_mps", float(opts.speed_mps)),
                ("max_skip", opts.max_skip),
                ("frustum_depth", frustum_depth),
            )))
        plan.append(PlanStep(StepKind.TRACK))

    result = ExecutionPlan(tuple(plan), p, opts)
    pipeline_logger.log_plan([s.render() for s in result.steps], str(p) if p is not None else "<none>")
    return result


def check_plan_order(plan: ExecutionPlan) -> List[str]:
    """返回违反顺序规则的描述（空列表表示合法）"""
    problems = []
    kinds = plan.kinds
    positions = [STEP_ORDER.index(k) for k in kinds]
    if positions != sorted(positions) or len(set(kinds)) != len(kinds):
        problems.append("steps are not in pipeline order")
    if StepKind.ROAD_VISIBILITY_PRUNE in kinds and kinds[0] != StepKind.ROAD_VISIBILITY_PRUNE:
        problems.append("RoadVisibilityPrune must be first")
    if StepKind.OBJECT_TYPE_PRUNE in kinds:
        i = kinds.index(StepKind.OBJECT_TYPE_PRUNE)
        if i == 0 or kinds[i - 1] != StepKind.DETECT:
            problems.append("ObjectTypePrune must follow Detect")
    if StepKind.EXIT_FRAME_SAMPLE in kinds:
        i = kinds.index(StepKind.EXIT_FRAME_SAMPLE)
        if (i == 0 or kinds[i - 1] != StepKind.ESTIMATE_3D
                or i + 1 >= len(kinds) or kinds[i + 1] != StepKind.TRACK):
            problems.append("ExitFrameSample must sit between Estimate3D and Track")
    return problems


# 消融实验的七种设置
ABLATION_SETUPS: Dict[str, Dict[str, bool]] = {
    "SB": {"rvp": False, "otp": False, "geo3d": False, "efs": False},
    "S1": {"rvp": True, "otp": False, "geo3d": False, "efs": False},
    "S2": {"rvp": False, "otp": True, "geo3d": False, "efs": False},
    "S3": {"rvp": False, "otp": False, "geo3d": True, "efs": False},
    "S4": {"rvp": False, "otp": False, "geo3d": False, "efs": True},
    "S5": {"rvp": True, "otp": True, "geo3d": True, "efs": False},
    "S6": {"rvp": True, "otp": True, "geo3d": True, "efs": True},
}


def setup_options(setup: str, base: Optional[PlanOptions] = None) -> PlanOptions:
    toggles = ABLATION_SETUPS[setup]
    return (base or PlanOptions()).with_toggles(toggles["rvp"], toggles["otp"], toggles["geo3d"], toggles["efs"])
