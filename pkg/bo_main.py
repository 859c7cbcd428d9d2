#!/usr/bin/env python3
"""
EI-GN Bayesian Optimization - Command Line Entry Point

Subcommands:
    run       one BO run (or a manifest replay), writes its trace CSV and manifest
    suite     multi-seed, multi-method runs with summary and plot data
    validate  closed-form vs Monte Carlo sweeps, JSON pass/fail report
    profile   acquisition values on a grid for a 1-d problem
    topk      top-k distinct queried points of one run
"""

import argparse
import asyncio
import logging
import os
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import orjson
import yaml
from dotenv import load_dotenv
from pydantic import ValidationError

# Add src to path for imports
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from src.acquisition.validation import run_validation
from src.config import get_settings
from src.harness.bo_loop import run_bo
from src.harness.emit import (
    PROFILE_DESIGN_SIZES,
    compare_top_spread,
    emit_acquisition_profile,
    emit_manifest,
    emit_results,
    emit_top_solutions,
    emit_trace,
    load_manifest,
    profile_design,
    profile_geometry,
    safe_name,
    search_profile_design,
    trace_filename,
    write_text,
)
from src.harness.suite import build_suite_configs, run_suite
from src.metrics import start_metrics_server
from src.objectives.registry import get_problem, list_problems, validate_problem_name
from src.protocols.bo_schema import AcquisitionKind, RunConfig
from src.protocols.errors import DimensionMismatch, EIGNError

logger = logging.getLogger("eign")

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_ERROR = 2

# CLI flag -> RunConfig field
FLAG_FIELDS = {
    "problem": "problem",
    "acq": "acquisition",
    "alpha": "alpha",
    "seed": "seed",
    "budget": "budget",
    "n_init": "n_init",
    "out": "output_dir",
    "raw_samples": "raw_samples",
    "num_restarts": "num_restarts",
    "literal_counts": "literal_counts",
    "fit_restarts": "fit_restarts",
}


def _float_list(text: str) -> List[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def _method_list(text: str) -> List[AcquisitionKind]:
    try:
        return [AcquisitionKind(v.strip()) for v in text.split(",") if v.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e))


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML file with RunConfig keys; flags override it")
    common.add_argument("--problem", help=f"Problem name ({', '.join(list_problems())})")
    common.add_argument("--acq", choices=[k.value for k in AcquisitionKind], help="Acquisition")
    common.add_argument("--alpha", type=float, help="EI-GN penalty weight")
    common.add_argument("--seed", type=int, help="Master seed")
    common.add_argument("--budget", type=int, help="BO iterations after the initial design")
    common.add_argument("--n-init", type=int, help="Initial Sobol points")
    common.add_argument("--out", help="Output directory")
    common.add_argument("--raw-samples", type=int, help="Acquisition raw pool size")
    common.add_argument("--num-restarts", type=int, help="Acquisition restarts")
    common.add_argument("--table1-literal", "--literal-counts", dest="literal_counts", action="store_true",
                        default=None, help="Use the printed raw/restart columns without swapping")
    common.add_argument("--fit-restarts", type=int, help="Hyperparameter multi-starts per fit")
    common.add_argument("--log-level", help="Logging level (default EIGN_LOG_LEVEL)")

    parser = argparse.ArgumentParser(prog="bo_main.py", description="EI-GN Bayesian optimization engine")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", parents=[common], help="Single BO run")
    run.add_argument("--manifest", help="Replay the runs recorded in a manifest")

    suite = sub.add_parser("suite", parents=[common], help="Multi-seed, multi-method suite")
    suite.add_argument("--methods", type=_method_list, default=None,
                       help="Comma-separated acquisitions (default ei_gn,ei,ts,sobol)")
    suite.add_argument("--seeds", type=int, default=20, help="Number of seeds, starting at --seed")
    suite.add_argument("--alphas", type=_float_list, default=None, help="EI-GN alpha sweep, e.g. 0,0.3,0.6")
    suite.add_argument("--workers", type=int, default=None, help="Process pool size")
    suite.add_argument("--sequential", action="store_true", help="Run in-process one after another")

    validate = sub.add_parser("validate", help="Closed-form vs Monte Carlo sweeps")
    validate.add_argument("--cases", type=int, default=200, help="Random configurations")
    validate.add_argument("--mc-n", type=int, default=1_000_000, help="Monte Carlo draws per case")
    validate.add_argument("--seed", type=int, default=0, help="Master seed")
    validate.add_argument("--out", default=None, help="Report path (default <output_dir>/validation.json)")
    validate.add_argument("--log-level", help="Logging level")

    profile = sub.add_parser("profile", parents=[common], help="Acquisition profile of a 1-d problem")
    profile.add_argument("--grid-n", type=int, default=501, help="Grid points")
    profile.add_argument("--n-design", type=int, default=None, help="Design points (default: try 3, 4 and 5)")
    profile.add_argument("--search-seeds", type=int, default=64,
                         help="Design seeds tried from --seed until the two-basin shape appears; 1 uses --seed as is")

    topk = sub.add_parser("topk", parents=[common], help="Top-k distinct queries of one run")
    topk.add_argument("--k", type=int, default=5, help="Number of solutions")
    topk.add_argument("--compare-seeds", type=int, default=0,
                      help="Also run EI on this many seeds from --seed and compare top-k spread")
    return parser


def merged_config(args: argparse.Namespace, defaults: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
    """Defaults, then the YAML file, then explicit flags."""
    merged: Dict[str, Any] = dict(defaults or {})
    if getattr(args, "config", None):
        with open(args.config) as f:
            loaded = yaml.safe_load(f) or {}
        if not isinstance(loaded, dict):
            raise ValueError(f"{args.config} must hold a key/value mapping")
        merged.update(loaded)
    for flag, field in FLAG_FIELDS.items():
        value = getattr(args, flag, None)
        if value is not None:
            merged[field] = value
    merged.setdefault("output_dir", get_settings().output_dir)
    return merged


def cmd_run(args: argparse.Namespace) -> int:
    if args.manifest:
        cfgs = load_manifest(args.manifest)
        if args.out:
            cfgs = [c.model_copy(update={"output_dir": args.out}) for c in cfgs]
    else:
        cfgs = [RunConfig(**merged_config(args))]
    for cfg in cfgs:
        validate_problem_name(cfg.problem)

    status = EXIT_OK
    traces = []
    for cfg in cfgs:
        trace = run_bo(cfg)
        traces.append(trace)
        best = trace.recommendation()
        if trace.aborted:
            print(f"❌ {cfg.problem}/{cfg.method}/seed={cfg.seed} aborted: {trace.errors[-1]['message']}")
            status = EXIT_FAILED
        else:
            print(f"✅ {cfg.problem}/{cfg.method}/seed={cfg.seed}: best f {best.y:.6g} "
                  f"after {len(trace.records)} evaluations")
    name = f"manifest_{Path(trace_filename(cfgs[0])).stem}.json" if len(cfgs) == 1 else "manifest.json"
    asyncio.run(emit_results(traces, cfgs[0].output_dir, manifest_name=name))
    return status


def cmd_suite(args: argparse.Namespace) -> int:
    base = merged_config(args)
    problem = base.pop("problem", None)
    if problem is None:
        raise ValueError("suite needs --problem")
    validate_problem_name(problem)
    first_seed = base.pop("seed", 0)
    base.pop("acquisition", None)
    methods = args.methods or [AcquisitionKind.EI_GN, AcquisitionKind.EI, AcquisitionKind.TS, AcquisitionKind.SOBOL]
    seeds = list(range(first_seed, first_seed + args.seeds))
    cfgs = build_suite_configs(problem, methods, seeds, alphas=args.alphas, **base)

    result = asyncio.run(run_suite(cfgs, max_workers=args.workers, sequential=args.sequential))
    out_dir = base["output_dir"]
    asyncio.run(emit_results(result.traces, out_dir, summary=result.summary, problem=problem,
                             manifest_kind="suite", manifest_name=f"manifest_suite_{safe_name(problem)}.json"))

    final = result.summary.groupby("method").tail(1)
    for _, row in final.iterrows():
        print(f"📊 {row['method']}: mean best f {row['mean_best_f']:.6g} ± {row['stderr']:.3g} "
              f"({int(row['n_seeds'])} seeds)")
    if result.failures:
        print(f"⚠️ {sum(result.failures.values())} failed runs excluded: {result.failures}")
        return EXIT_FAILED
    return EXIT_OK


def cmd_validate(args: argparse.Namespace) -> int:
    report = run_validation(cases=args.cases, mc_n=args.mc_n, seed=args.seed)
    out = Path(args.out) if args.out else Path(get_settings().output_dir) / "validation.json"
    payload = orjson.dumps(report.model_dump(), option=orjson.OPT_INDENT_2 | orjson.OPT_SERIALIZE_NUMPY)
    asyncio.run(write_text(out, payload))
    for check in report.checks:
        print(f"{'✅' if check.passed else '❌'} {check.name}: {check.cases - check.failures}/{check.cases}")
    print(f"Report written to {out}")
    return EXIT_OK if report.passed else EXIT_FAILED


def cmd_profile(args: argparse.Namespace) -> int:
    cfg = RunConfig(**merged_config(args, {"problem": "fig2mix"}))
    problem = get_problem(cfg.problem)
    if problem.dim != 1:
        raise DimensionMismatch(f"acquisition profiles need a 1-d problem, {problem.name} has dimension {problem.dim}")
    if args.search_seeds < 1:
        raise ValueError(f"--search-seeds must be at least 1, got {args.search_seeds}")
    sizes = (args.n_design,) if args.n_design else PROFILE_DESIGN_SIZES
    out_dir = Path(cfg.output_dir)
    if args.search_seeds == 1 and len(sizes) == 1:
        seed, X = cfg.seed, profile_design(problem, sizes[0], cfg.seed)
        out = out_dir / f"profile_{safe_name(problem.name)}_{seed}.csv"
        frame = asyncio.run(emit_acquisition_profile(problem, X, args.grid_n, out, acq_cfg=cfg.acquisition_config(),
                                                     fit_restarts=cfg.fit_restarts, seed=seed))
        geometry = profile_geometry(frame)
    else:
        found = search_profile_design(problem, range(cfg.seed, cfg.seed + args.search_seeds), sizes,
                                      grid_n=args.grid_n, acq_cfg=cfg.acquisition_config(),
                                      fit_restarts=cfg.fit_restarts)
        seed, X, frame, geometry = found.seed, found.X, found.frame, found.geometry
        out = out_dir / f"profile_{safe_name(problem.name)}_{seed}.csv"
        asyncio.run(write_text(out, frame.to_csv(index=False)))

    design = {
        "problem": problem.name,
        "seed": seed,
        "design": X[:, 0].tolist(),
        "grid_n": args.grid_n,
        "ei_argmax": geometry.ei_argmax,
        "ei_gn_peaks": list(geometry.ei_gn_peaks),
        "two_basin_shape": geometry.reproduced,
    }
    asyncio.run(write_text(out.with_name(f"{out.stem}_design.json"), orjson.dumps(design, option=orjson.OPT_INDENT_2)))

    print(f"📈 design seed={seed}, {len(X)} points: {', '.join(f'{v:.4f}' for v in X[:, 0])}")
    print(f"📈 ei: argmax x = {geometry.ei_argmax:.4f}")
    print(f"📈 ei_gn: local maxima at {', '.join(f'{p:.4f}' for p in geometry.ei_gn_peaks) or 'none'}")
    if not geometry.reproduced:
        print("⚠️ no two-basin shape: EI argmax outside the wide basin or no EI-GN peak over the narrow one")
    print(f"Profile written to {out}")
    return EXIT_OK


def cmd_topk_compare(cfg: RunConfig, k: int, n_seeds: int) -> int:
    if cfg.acquisition == AcquisitionKind.EI:
        raise ValueError("--compare-seeds compares against ei; pick another --acq")
    base = cfg.model_dump(exclude={"acquisition", "seed", "label"})
    seeds = list(range(cfg.seed, cfg.seed + n_seeds))
    cfgs = [RunConfig(**base, acquisition=kind, seed=s)
            for kind in (cfg.acquisition, AcquisitionKind.EI) for s in seeds]
    result = asyncio.run(run_suite(cfgs, sequential=True))
    comparison = compare_top_spread(result.traces, cfg.acquisition.value, AcquisitionKind.EI.value, k)
    out = Path(cfg.output_dir) / f"topk_spread_{safe_name(cfg.problem)}_{cfg.acquisition.value}.json"
    asyncio.run(write_text(out, orjson.dumps(comparison.to_dict(), option=orjson.OPT_INDENT_2)))
    print(f"🏆 {cfg.acquisition.value} top-{k} spread >= ei on {comparison.win_fraction:.0%} of "
          f"{len(comparison.seeds)} seeds, written to {out}")
    return EXIT_FAILED if result.failures else EXIT_OK


def cmd_topk(args: argparse.Namespace) -> int:
    cfg = RunConfig(**merged_config(args, {"problem": "holder"}))
    validate_problem_name(cfg.problem)
    if args.compare_seeds < 0:
        raise ValueError(f"--compare-seeds must be non-negative, got {args.compare_seeds}")
    if args.compare_seeds:
        return cmd_topk_compare(cfg, args.k, args.compare_seeds)
    trace = run_bo(cfg)
    out_dir = Path(cfg.output_dir)
    asyncio.run(emit_trace(trace, out_dir))
    asyncio.run(emit_manifest([cfg], out_dir, name=f"manifest_topk_{safe_name(cfg.method)}_{cfg.seed}.json"))
    out = out_dir / f"topk_{safe_name(cfg.problem)}_{safe_name(cfg.method)}_{cfg.seed}.csv"
    frame = asyncio.run(emit_top_solutions(trace, args.k, out))
    print(f"🏆 {len(frame)} distinct solutions written to {out}")
    return EXIT_FAILED if trace.aborted else EXIT_OK


COMMANDS = {
    "run": cmd_run,
    "suite": cmd_suite,
    "validate": cmd_validate,
    "profile": cmd_profile,
    "topk": cmd_topk,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    load_dotenv()
    args = build_parser().parse_args(argv)
    settings = get_settings()
    logging.basicConfig(
        level=(args.log_level or settings.log_level).upper(),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=[logging.StreamHandler()]
    )
    start_metrics_server()
    try:
        return COMMANDS[args.command](args)
    except (EIGNError, ValidationError, ValueError, OSError) as e:
        logger.error(f"{args.command} failed: {e}")
        print(f"❌ {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
