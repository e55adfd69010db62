"""
工作流错误类型 - 每个错误都带有error_code，便于日志和CLI诊断
"""
from typing import List, Optional


class WorkflowError(Exception):
    """所有工作流错误的基类"""
    error_code = "WORKFLOW_ERROR"

    def __init__(self, message: str = ""):
        super().__init__(message or self.error_code)
        self.message = message or self.error_code


# ============================================================================
# 几何错误
# ============================================================================

class NonPositiveDepth(WorkflowError):
    error_code = "NON_POSITIVE_DEPTH"


class BehindCamera(WorkflowError):
    error_code = "BEHIND_CAMERA"


class NoIntersection(WorkflowError):
    """射线与地面平行"""
    error_code = "NO_INTERSECTION"


class DegenerateView(WorkflowError):
    """点共线，无法构成凸包"""
    error_code = "DEGENERATE_VIEW"


class OriginOutside(WorkflowError):
    error_code = "ORIGIN_OUTSIDE"


class VerticalCamera(WorkflowError):
    error_code = "VERTICAL_CAMERA"


# ============================================================================
# 查询错误
# ============================================================================

class MissingSample(WorkflowError):
    error_code = "MISSING_SAMPLE"


class Stationary(WorkflowError):
    error_code = "STATIONARY"


class NoHeading(WorkflowError):
    error_code = "NO_HEADING"


class UnknownReference(WorkflowError):
    error_code = "UNKNOWN_REFERENCE"


# ============================================================================
# 工作流构建错误
# ============================================================================

class DuplicateRoadNetwork(WorkflowError):
    error_code = "DUPLICATE_ROAD_NETWORK"


class FrameMismatch(WorkflowError):
    error_code = "FRAME_MISMATCH"


class DuplicateConstructId(WorkflowError):
    error_code = "DUPLICATE_CONSTRUCT_ID"


# ============================================================================
# 文件错误
# ============================================================================

class ParseError(WorkflowError):
    """文件解析失败，带路径和行号"""
    error_code = "PARSE_ERROR"

    def __init__(self, message: str, path: Optional[str] = None, line: Optional[int] = None):
        location = path or "<input>"
        if line is not None:
            location = f"{location}:{line}"
        super().__init__(f"{location}: {message}")
        self.reason = message
        self.path = path
        self.line = line


class InvariantViolation(WorkflowError):
    """一个或多个数据不变量不成立"""
    error_code = "INVARIANT_VIOLATION"

    def __init__(self, violations: List[str], path: Optional[str] = None):
        prefix = f"{path}: " if path else ""
        super().__init__(prefix + "; ".join(violations))
        self.violations = list(violations)
        self.path = path
