"""
命令行入口

    python -m app plan --workflow w.json
    python -m app run --workflow w.json --out result/ --disable-efs
    python -m app stats --workflow w.json
    python -m app synth --seed 7 --out scene/
    python -m app ablation --seed 7 --out ablation.json
"""
import argparse
import asyncio
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from .config import get_settings
from .errors import WorkflowError
from .formats.workflow_file import load_workflow
from .formats.writers import dumps, write_json
from .logger import LogStages, get_logger, pipeline_logger
from .planner.plan import PlanOptions
from .workflow.composer import SaveFrames

settings = get_settings()
logger = get_logger(__name__)

EXIT_OK = 0
EXIT_WORKFLOW_ERROR = 2


def _add_optimization_flags(parser: argparse.ArgumentParser):
    group = parser.add_argument_group("optimizations")
    group.add_argument("--disable-rvp", action="store_true", help="Disable the Road Visibility Pruner")
    group.add_argument("--disable-otp", action="store_true", help="Disable the Object Type Pruner")
    group.add_argument("--disable-geo3d", action="store_true", help="Use external depth instead of ground-plane geometry")
    group.add_argument("--disable-efs", action="store_true", help="Disable the Exit Frame Sampler")
    group.add_argument("--disable-all-opts", action="store_true", help="Disable every optimization")
    group.add_argument("--speed-mps", type=float, help="Assumed car speed (m/s)")
    group.add_argument("--max-skip", type=int, help="Maximum frames the sampler may skip (0 disables the limit)")
    group.add_argument("--frustum-depth", type=float, help="Frustum depth when the predicate has no distance bound")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="geovid", description="Geospatial video workflow engine")
    sub = parser.add_subparsers(dest="command", required=True)

    plan = sub.add_parser("plan", help="Print the execution plan of a workflow")
    plan.add_argument("--workflow", required=True, type=Path)
    _add_optimization_flags(plan)

    run = sub.add_parser("run", help="Execute a workflow and write tracks and the frame manifest")
    run.add_argument("--workflow", required=True, type=Path)
    run.add_argument("--out", type=Path, help="Output directory (defaults to the workflow's observe.out)")
    run.add_argument("--parallel", action="store_true", help="Process videos in worker threads")
    _add_optimization_flags(run)

    stats = sub.add_parser("stats", help="Execute a workflow and print per-step statistics")
    stats.add_argument("--workflow", required=True, type=Path)
    stats.add_argument("--json", action="store_true", help="Print the statistics as JSON")
    _add_optimization_flags(stats)

    synth = sub.add_parser("synth", help="Generate a synthetic scene in the workflow file formats")
    synth.add_argument("--seed", type=int, default=7)
    synth.add_argument("--out", required=True, type=Path)
    synth.add_argument("--scene", choices=["intersection", "straight"], default="intersection")
    synth.add_argument("--query", default="listing", help="Built-in query written into workflow.json")
    synth.add_argument("--noise", type=float, default=0.0, help="Pixel noise standard deviation")

    ablation = sub.add_parser("ablation", help="Run setups SB and S1-S6 on a synthetic scene")
    ablation.add_argument("--seed", type=int, default=7)
    ablation.add_argument("--query", default="listing")
    ablation.add_argument("--out", type=Path, help="Write the report as JSON")
    ablation.add_argument("--speed-mps", type=float)
    ablation.add_argument("--max-skip", type=int)
    ablation.add_argument("--frustum-depth", type=float)
    return parser


def plan_options(args: argparse.Namespace, file_overrides: Optional[Dict[str, Any]] = None) -> PlanOptions:
    """优先级：命令行参数 > 工作流文件 > 配置"""
    overrides: Dict[str, Any] = dict(file_overrides or {})
    for flag, name in (
        ("disable_rvp", "enable_rvp"),
        ("disable_otp", "enable_otp"),
        ("disable_geo3d", "enable_geo3d"),
        ("disable_efs", "enable_efs"),
    ):
        if getattr(args, flag, False) or getattr(args, "disable_all_opts", False):
            overrides[name] = False
    if getattr(args, "speed_mps", None) is not None:
        overrides["speed_mps"] = args.speed_mps
    if getattr(args, "max_skip", None) is not None:
        overrides["max_skip"] = args.max_skip
    if getattr(args, "frustum_depth", None) is not None:
        overrides["default_frustum_depth"] = args.frustum_depth
    return settings.plan_options(**overrides)


def _cmd_plan(args) -> int:
    loaded = load_workflow(args.workflow)
    plan = loaded.world.plan(plan_options(args, loaded.overrides))
    print(plan.render())
    return EXIT_OK


def _observe(args, mode):
    loaded = load_workflow(args.workflow)
    options = plan_options(args, loaded.overrides)
    if mode is None:
        target = loaded.output_dir(args.out) or loaded.base_dir / "output"
        mode = SaveFrames(target, loaded.observe.annotate, loaded.observe.padding)
    if getattr(args, "parallel", False):
        return asyncio.run(loaded.world.observe_async(mode, options))
    return loaded.world.observe(mode, options)


def _cmd_run(args) -> int:
    result = _observe(args, None)
    summary = {
        "frames": {video_id: len(entries) for video_id, entries in sorted(result.frame_manifest.items())},
        "objects": len(result.objects),
        "plan": [s.render() for s in result.plan.steps],
        "totals": result.stats.to_dict()["totals"],
    }
    sys.stdout.write(dumps(summary).decode())
    return EXIT_OK


def format_stats(stats: Dict[str, Any]) -> str:
    totals = stats["totals"]
    lines = ["plan:"] + [f"  {step}" for step in stats["plan"]]
    lines.append(f"frames: total={totals['frames_total']} pruned={totals['frames_pruned']} "
                 f"decoded={totals['frames_decoded']} sampled={totals['frames_sampled']} "
                 f"tracked={totals['frames_tracked']}")
    lines.append(f"detections: detected={totals['detections_detected']} pruned={totals['detections_pruned']} "
                 f"estimated={totals['detections_estimated']} dropped={totals['detections_dropped']} "
                 f"tracked={totals['detections_tracked']}")
    lines.append(f"skipping_ratio: {totals['skipping_ratio']:.4f}")
    lines.append(f"query: candidates={totals['query_candidates']} matches={totals['query_matches']}")
    lines.append("timings_ms:")
    lines.extend(f"  {step}: {ms:.3f}" for step, ms in totals["timings_ms"].items())
    return "\n".join(lines)


def _cmd_stats(args) -> int:
    from .workflow.composer import GetObjects

    result = _observe(args, GetObjects())
    stats = result.stats.to_dict()
    if args.json:
        sys.stdout.write(dumps(stats).decode())
    else:
        print(format_stats(stats))
    return EXIT_OK


def _cmd_synth(args) -> int:
    from .harness.scene import intersection_scene, straight_scene, write_scene

    if args.scene == "straight":
        scene = straight_scene(args.seed)
    else:
        scene = intersection_scene(args.seed, pixel_noise=args.noise)
    written = write_scene(scene, args.out, args.query)
    logger.info("Synthetic scene written", stage=LogStages.IO, out=str(args.out), files=len(written))
    print(str(args.out))
    return EXIT_OK


def _cmd_ablation(args) -> int:
    from .harness.ablation import run_ablation
    from .harness.scene import intersection_scene

    report = run_ablation(intersection_scene(args.seed), args.query, base=plan_options(args))
    print(report.to_text())
    if args.out is not None:
        write_json(args.out, report.to_dict())
    return EXIT_OK


COMMANDS = {
    "plan": _cmd_plan,
    "run": _cmd_run,
    "stats": _cmd_stats,
    "synth": _cmd_synth,
    "ablation": _cmd_ablation,
}


def run_cli(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(list(argv) if argv is not None else None)
    try:
        return COMMANDS[args.command](args)
    except WorkflowError as e:
        pipeline_logger.log_error(LogStages.ERROR, e.error_code, e.message, e)
        print(f"error [{e.error_code}]: {e.message}", file=sys.stderr)
        return EXIT_WORKFLOW_ERROR


def main(argv: Optional[List[str]] = None):
    sys.exit(run_cli(argv))
