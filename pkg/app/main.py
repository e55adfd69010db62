"""
地理视频分析工作流 - HTTP 服务
"""
import time
from contextlib import asynccontextmanager
from pathlib import Path
from typing import Any, Dict, Optional

import uvicorn
from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .config import get_settings
from .errors import WorkflowError
from .formats.records import OptimizationsRecord, WorkflowRecord
from .formats.workflow_file import build_workflow, load_workflow
from .logger import LogStages, get_logger, pipeline_logger

settings = get_settings()
logger = get_logger(__name__)

VERSION = "1.0.0"


@asynccontextmanager
async def lifespan(app: FastAPI):
    """应用生命周期管理"""
    logger.info("Starting geospatial video workflow service", environment=settings.environment)
    defaults = settings.plan_options()
    logger.info("Optimization defaults", **defaults.toggles, max_skip=defaults.max_skip)
    yield
    logger.info("Service shutdown completed")


# 创建FastAPI应用
app = FastAPI(
    title="Geospatial Video Workflow Engine",
    description="Build, filter and observe geospatial video workflows with road-aware optimizations",
    version=VERSION,
    lifespan=lifespan,
    docs_url="/docs",
    redoc_url="/redoc",
)

app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)


@app.middleware("http")
async def log_requests(request: Request, call_next):
    """请求日志中间件"""
    start_time = time.time()
    client_ip = request.client.host if request.client else "unknown"
    response = await call_next(request)
    duration_ms = int((time.time() - start_time) * 1000)
    logger.info(
        "Request handled",
        method=request.method,
        path=request.url.path,
        client=client_ip,
        status=response.status_code,
        duration_ms=duration_ms,
    )
    return response


@app.exception_handler(WorkflowError)
async def workflow_error_handler(request: Request, exc: WorkflowError):
    pipeline_logger.log_error(LogStages.ERROR, exc.error_code, exc.message, exc)
    return JSONResponse(status_code=400, content={"error_code": exc.error_code, "detail": exc.message})


class RunRequest(BaseModel):
    workflow: str = Field(..., description="Path of a workflow file on the server")
    optimizations: OptimizationsRecord = Field(default_factory=OptimizationsRecord)
    out: Optional[str] = Field(default=None, description="Write manifest and tracks to this directory")


@app.get("/")
async def root():
    """根路径 - 显示服务信息"""
    return {
        "message": "Geospatial video workflow engine is running",
        "status": "healthy",
        "version": VERSION,
        "endpoints": {
            "health": "/health",
            "docs": "/docs",
            "plan": "/plan",
            "run": "/run",
        },
    }


@app.get("/health")
async def health_check():
    """健康检查端点"""
    return {
        "status": "healthy",
        "timestamp": time.time(),
        "version": VERSION,
        "environment": settings.environment,
        "optimizations": settings.plan_options().toggles,
    }


@app.post("/plan")
async def plan_workflow(record: WorkflowRecord) -> Dict[str, Any]:
    """只生成执行计划，不读取视频"""
    if record.videos or record.road_network:
        record = record.model_copy(update={"videos": [], "road_network": None})
    loaded = build_workflow(record, Path("."), source="<request>")
    plan = loaded.world.plan(settings.plan_options(**loaded.overrides))
    return {"plan": plan.render(), **plan.to_dict()}


@app.post("/run")
async def run_workflow(request: RunRequest) -> Dict[str, Any]:
    """执行工作流文件，视频在工作线程中并行处理"""
    loaded = load_workflow(request.workflow)
    overrides = {**loaded.overrides, **request.optimizations.overrides()}
    result = await loaded.world.observe_async(
        loaded.observe_mode(request.out), settings.plan_options(**overrides)
    )
    return result.to_dict()


if __name__ == "__main__":
    uvicorn.run("app.main:app", host="0.0.0.0", port=settings.port, reload=not settings.is_production)
