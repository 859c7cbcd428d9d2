"""
Multi-Seed Suite Driver

Fans BO runs out over a process pool and aggregates best-f curves into a
per-iteration mean and standard error per method.
"""

import asyncio
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np
import pandas as pd

from ..config import get_settings
from ..protocols.bo_schema import AcquisitionKind, RunConfig, Trace
from .bo_loop import run_bo

logger = logging.getLogger(__name__)

SUMMARY_COLUMNS = ["iteration", "method", "mean_best_f", "stderr", "n_seeds"]


@dataclass
class SuiteResult:
    """Completed traces, the aggregated summary and per-method failure counts."""
    traces: List[Trace]
    summary: pd.DataFrame
    failures: Dict[str, int] = field(default_factory=dict)
    errors: List[Dict[str, object]] = field(default_factory=list)


def alpha_label(alpha: float) -> str:
    return f"ei_gn(a={alpha:g})"


def expand_alpha_sweep(cfgs: Iterable[RunConfig], alphas: Optional[Sequence[float]]) -> List[RunConfig]:
    """Replace every EI-GN config by one labelled copy per alpha."""
    expanded: List[RunConfig] = []
    for cfg in cfgs:
        if alphas and cfg.acquisition == AcquisitionKind.EI_GN:
            expanded.extend(cfg.model_copy(update={"alpha": float(a), "label": alpha_label(float(a))})
                            for a in alphas)
        else:
            expanded.append(cfg)
    return expanded


def build_suite_configs(problem: str, methods: Sequence[AcquisitionKind], seeds: Sequence[int],
                        alphas: Optional[Sequence[float]] = None, **overrides: object) -> List[RunConfig]:
    """One RunConfig per (method, seed); EI-GN expands over alphas when given."""
    cfgs = [RunConfig(problem=problem, acquisition=m, seed=s, **overrides) for m in methods for s in seeds]
    return expand_alpha_sweep(cfgs, alphas)


def summarize(traces: Sequence[Trace]) -> pd.DataFrame:
    """
    Per-iteration mean and standard error of best_f across seeds.

    Traces are ordered by seed before aggregation so the result does not
    depend on completion order. Aborted traces are skipped; a single seed
    gets a standard error of 0.
    """
    by_method: Dict[str, List[Trace]] = {}
    for trace in traces:
        if trace.aborted:
            continue
        by_method.setdefault(trace.config.method, []).append(trace)

    frames = []
    for method in sorted(by_method):
        runs = sorted(by_method[method], key=lambda tr: tr.config.seed)
        length = min(len(tr.records) for tr in runs)
        curves = np.array([tr.best_curve[:length] for tr in runs], dtype=float)
        n = curves.shape[0]
        mean = np.mean(curves, axis=0)
        stderr = np.std(curves, axis=0, ddof=1) / np.sqrt(n) if n > 1 else np.zeros(length)
        frames.append(pd.DataFrame({
            "iteration": np.arange(1, length + 1),
            "method": method,
            "mean_best_f": mean,
            "stderr": stderr,
            "n_seeds": n,
        }))
    if not frames:
        return pd.DataFrame(columns=SUMMARY_COLUMNS)
    return pd.concat(frames, ignore_index=True)[SUMMARY_COLUMNS]


async def run_suite(
    cfgs: Sequence[RunConfig],
    max_workers: Optional[int] = None,
    sequential: bool = False,
) -> SuiteResult:
    """
    Run every config and aggregate.

    Args:
        cfgs: Nonempty list of run configurations
        max_workers: Process pool size (defaults to EIGN_MAX_WORKERS)
        sequential: Run in-process one after another

    Returns:
        SuiteResult; failed runs are excluded from the summary and counted
    """
    if not cfgs:
        raise ValueError("run_suite needs at least one configuration")
    workers = max_workers or get_settings().max_workers
    logger.info(f"Running suite of {len(cfgs)} runs ({'sequential' if sequential else f'{workers} workers'})")

    if sequential:
        outcomes: List[object] = []
        for cfg in cfgs:
            try:
                outcomes.append(run_bo(cfg))
            except Exception as e:
                outcomes.append(e)
    else:
        loop = asyncio.get_running_loop()
        semaphore = asyncio.Semaphore(workers)
        with ProcessPoolExecutor(max_workers=workers) as pool:

            async def run_one(cfg: RunConfig) -> Trace:
                async with semaphore:
                    return await loop.run_in_executor(pool, run_bo, cfg)

            outcomes = await asyncio.gather(*(run_one(cfg) for cfg in cfgs), return_exceptions=True)

    traces: List[Trace] = []
    failures: Dict[str, int] = {}
    errors: List[Dict[str, object]] = []
    for cfg, outcome in zip(cfgs, outcomes):
        if isinstance(outcome, Trace) and not outcome.aborted:
            traces.append(outcome)
            continue
        failures[cfg.method] = failures.get(cfg.method, 0) + 1
        if isinstance(outcome, Trace):
            traces.append(outcome)
            message = outcome.errors[-1]["message"] if outcome.errors else "aborted"
        else:
            message = f"{type(outcome).__name__}: {outcome}"
        errors.append({"method": cfg.method, "seed": cfg.seed, "message": message})
        logger.error(f"[{cfg.problem}/{cfg.method}/seed={cfg.seed}] Run failed: {message}")

    if failures:
        logger.warning(f"Excluded {sum(failures.values())} failed runs from the summary: {failures}")
    return SuiteResult(traces=traces, summary=summarize(traces), failures=failures, errors=errors)
