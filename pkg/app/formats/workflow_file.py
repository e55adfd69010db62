"""
工作流文件 - 声明输入、变量、过滤条件、观察方式和优化开关的 JSON 文档

文件中的相对路径以工作流文件所在目录为基准。
"""
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional, Union

from ..errors import ParseError, UnknownReference
from ..logger import LogStages, get_logger
from ..query.library import QUERIES
from .loaders import load_camera_config, load_depths, load_detections, load_road_network, merge_depths, read_json, validate_record
from .predicate_codec import Scope, decode_predicate, encode_predicate, scope_declarations
from .records import ObserveRecord, WorkflowRecord

logger = get_logger(__name__)

PathLike = Union[str, Path]


@dataclass
class LoadedWorkflow:
    world: Any
    observe: ObserveRecord = field(default_factory=ObserveRecord)
    overrides: Dict[str, Any] = field(default_factory=dict)
    base_dir: Path = Path(".")

    def output_dir(self, override: Optional[PathLike] = None) -> Optional[Path]:
        if override is not None:
            return Path(override)
        if self.observe.out is None:
            return None
        out = Path(self.observe.out)
        return out if out.is_absolute() else self.base_dir / out

    def observe_mode(self, out: Optional[PathLike] = None):
        """文件里的 observe 记录 -> GetObjects / SaveFrames；指定 out 时总是写文件"""
        from ..workflow.composer import GetObjects, SaveFrames

        target = self.output_dir(out)
        if target is None or (self.observe.mode == "objects" and out is None):
            return GetObjects()
        return SaveFrames(target, self.observe.annotate, self.observe.padding)


def _resolve(base: Path, value: Optional[str]) -> Optional[Path]:
    if value is None:
        return None
    path = Path(value)
    return path if path.is_absolute() else base / path


def load_workflow(path: PathLike, world_factory=None) -> LoadedWorkflow:
    """读取工作流文件并构建一个尚未执行的 World"""
    path = Path(path)
    record: WorkflowRecord = validate_record(WorkflowRecord, read_json(path), path)
    loaded = build_workflow(record, path.parent, world_factory, str(path))
    logger.info(
        "Workflow loaded",
        stage=LogStages.IO,
        path=str(path),
        videos=len(record.videos),
        filters=len(loaded.world.filters),
    )
    return loaded


def build_workflow(record: WorkflowRecord, base: Path, world_factory=None, source: str = None) -> LoadedWorkflow:
    """按工作流记录构建 World；source 用于错误信息"""
    if world_factory is None:
        from ..workflow.world import World as world_factory

    world = world_factory()

    if record.road_network is not None:
        world.add_geog_constructs(load_road_network(_resolve(base, record.road_network)))

    for video in record.videos:
        camera = load_camera_config(_resolve(base, video.camera))
        detections = {}
        if video.detections is not None:
            detections = load_detections(_resolve(base, video.detections))
        if video.depths is not None:
            detections = merge_depths(detections, load_depths(_resolve(base, video.depths)))
        world.add_video(camera, detections, _resolve(base, video.frames), video.id)

    for name in record.objects:
        world.object(name)
    for name in record.cameras:
        world.camera(name)
    for name, geog in record.geogs.items():
        world.geog_construct(geog.type, geog.id, name)

    if record.query is not None:
        factory = QUERIES.get(record.query)
        if factory is None:
            raise ParseError(f"unknown built-in query '{record.query}'", source)
        world.filter(factory(world))

    objects, cameras, geogs = world.declarations
    scope = Scope(objects, cameras, geogs)
    for i, doc in enumerate(record.filters):
        try:
            world.filter(decode_predicate(doc, scope))
        except ParseError as e:
            raise ParseError(f"filters[{i}]: {e.reason}", source) from e
        except UnknownReference as e:
            raise UnknownReference(f"filters[{i}]: {e.message}") from e

    return LoadedWorkflow(world, record.observe, record.optimizations.overrides(), base)


def workflow_document(
    road_network: Optional[str],
    videos: list,
    scope: Optional[Scope] = None,
    filters: list = (),
    query: Optional[str] = None,
    observe: Optional[Dict[str, Any]] = None,
    optimizations: Optional[Dict[str, Any]] = None,
) -> Dict[str, Any]:
    """生成工作流文件内容（synth 使用）"""
    doc: Dict[str, Any] = {"videos": list(videos)}
    if scope is not None:
        doc.update(scope_declarations(scope))
    if road_network is not None:
        doc["road_network"] = road_network
    if query is not None:
        doc["query"] = query
    doc["filters"] = [encode_predicate(p) for p in filters]
    doc["observe"] = observe or {"mode": "objects"}
    if optimizations:
        doc["optimizations"] = optimizations
    return doc
