import logging
import sys
from typing import Any, Dict, Iterable, Optional

import structlog

from .config import get_settings

settings = get_settings()

_configured = False

def _configure():
    """配置structlog（只执行一次）"""
    global _configured
    if _configured:
        return

    log_level = getattr(logging, settings.log_level.upper(), logging.INFO)

    # 日志写到stderr，CLI的stdout留给机器可读输出
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(message)s"))
    root = logging.getLogger("geovid")
    root.handlers = [handler]
    root.setLevel(log_level)
    root.propagate = False

    # 根据环境选择renderer
    if settings.is_production:
        renderer = structlog.processors.JSONRenderer()
    else:
        renderer = structlog.dev.ConsoleRenderer(colors=False)

    structlog.configure(
        processors=[
            structlog.stdlib.filter_by_level,
            structlog.stdlib.add_log_level,
            structlog.stdlib.add_logger_name,
            structlog.processors.TimeStamper(fmt="iso", utc=True),
            structlog.processors.format_exc_info,
            renderer,
        ],
        logger_factory=structlog.stdlib.LoggerFactory(),
        wrapper_class=structlog.stdlib.BoundLogger,
        cache_logger_on_first_use=True,
    )
    _configured = True

def get_logger(name: str) -> structlog.stdlib.BoundLogger:
    """获取配置好的logger实例"""
    _configure()
    return structlog.get_logger(f"geovid.{name}")

class LogStages:
    """日志阶段常量"""
    INTEGRATE = "integrate"
    PLAN = "plan"
    PRUNE = "prune"
    DETECT = "detect"
    ESTIMATE = "estimate"
    SAMPLE = "sample"
    TRACK = "track"
    QUERY = "query"
    COMPOSE = "compose"
    IO = "io"
    ERROR = "error"

class PipelineLogger:
    """工作流日志记录器，包含结构化日志方法"""

    def __init__(self, logger_name: str):
        self.logger = get_logger(logger_name)

    def log_plan(self, steps: Iterable[str], predicate_summary: str):
        """记录执行计划"""
        steps = list(steps)
        self.logger.info(
            "Execution plan created",
            stage=LogStages.PLAN,
            steps=steps,
            step_count=len(steps),
            predicate=predicate_summary,
        )

    def log_step(self, video_id: str, step: str, duration_ms: float, items_in: int, items_out: int):
        """记录单个处理步骤"""
        self.logger.debug(
            f"Step {step} finished for {video_id}",
            stage=step,
            video_id=video_id,
            duration_ms=round(duration_ms, 3),
            items_in=items_in,
            items_out=items_out,
        )

    def log_frames_pruned(self, video_id: str, total: int, kept: int, duration_ms: float):
        """记录道路可见性剪枝"""
        self.logger.info(
            f"Road visibility pruning kept {kept}/{total} frames for {video_id}",
            stage=LogStages.PRUNE,
            video_id=video_id,
            frames_total=total,
            frames_kept=kept,
            duration_ms=round(duration_ms, 3),
        )

    def log_detections_pruned(self, video_id: str, before: int, after: int, types: Iterable[str]):
        """记录物体类型剪枝"""
        self.logger.info(
            f"Object type pruning kept {after}/{before} detections for {video_id}",
            stage=LogStages.PRUNE,
            video_id=video_id,
            detections_before=before,
            detections_after=after,
            types=sorted(types),
        )

    def log_sampling(self, video_id: str, available: int, sampled: int, skipping_ratio: float):
        """记录帧采样结果"""
        self.logger.info(
            f"Exit frame sampler picked {sampled}/{available} frames for {video_id}",
            stage=LogStages.SAMPLE,
            video_id=video_id,
            frames_available=available,
            frames_sampled=sampled,
            skipping_ratio=round(skipping_ratio, 4),
        )

    def log_video_processed(self, video_id: str, objects: int, duration_ms: float, counters: Optional[Dict[str, Any]] = None):
        """记录视频处理完成"""
        self.logger.info(
            f"Video {video_id} processed: {objects} movable objects",
            stage=LogStages.TRACK,
            video_id=video_id,
            objects=objects,
            duration_ms=round(duration_ms, 3),
            counters=counters or {},
        )

    def log_query(self, video_id: str, matches: int, candidates: int, duration_ms: float):
        """记录查询执行"""
        self.logger.info(
            f"Query matched {matches} (frame, tuple) pairs in {video_id}",
            stage=LogStages.QUERY,
            video_id=video_id,
            matches=matches,
            candidates=candidates,
            duration_ms=round(duration_ms, 3),
        )

    def log_output(self, mode: str, frames: int, objects: int, path: Optional[str] = None):
        """记录输出组合"""
        self.logger.info(
            f"Observe ({mode}) produced {frames} frames, {objects} objects",
            stage=LogStages.COMPOSE,
            mode=mode,
            frames=frames,
            objects=objects,
            path=path,
        )

    def log_error(self, stage: str, error_code: str, error_msg: str, exception: Optional[Exception] = None):
        """记录错误"""
        self.logger.error(
            f"Error in {stage}: {error_msg}",
            stage=LogStages.ERROR,
            original_stage=stage,
            error_code=error_code,
            exc_info=exception,
        )

# 全局工作流日志记录器实例
pipeline_logger = PipelineLogger("pipeline")
