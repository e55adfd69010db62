from .plan import (
    ABLATION_SETUPS,
    EstimatorMode,
    ExecutionPlan,
    PlanOptions,
    PlanStep,
    StepKind,
    check_plan_order,
    make_plan,
    setup_options,
)

__all__ = [
    "ABLATION_SETUPS",
    "EstimatorMode",
    "ExecutionPlan",
    "PlanOptions",
    "PlanStep",
    "StepKind",
    "check_plan_order",
    "make_plan",
    "setup_options",
]
