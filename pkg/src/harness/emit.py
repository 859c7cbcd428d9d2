"""
Result Emission

Writes per-run trace CSVs, suite summaries, plot-data files, run manifests,
the 1-d acquisition profile and top-k solution tables. CSV text is built
with pandas and written asynchronously with aiofiles.
"""

import logging
import re
from importlib import metadata
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import aiofiles
import numpy as np
import orjson
import pandas as pd
from numpy.typing import ArrayLike
from scipy.signal import find_peaks
from scipy.spatial.distance import pdist

from .. import __version__
from ..acquisition.closed_form import select_incumbent
from ..acquisition.functions import EIGradientNorm, ExpectedImprovement, LogExpectedImprovement
from ..objectives.registry import get_problem, surrogate_config
from ..objectives.synthetic import Problem
from ..optimizer.acq_optimizer import sobol_points
from ..protocols.bo_schema import AcquisitionConfig, AcquisitionKind, RunConfig, Trace
from ..protocols.errors import DimensionMismatch, EIGNError
from ..surrogates.gp import fit
from ..surrogates.gradient import fit_gradient_models
from .bo_loop import gradient_fit_config, resolve_counts
from .streams import Stream, stream_generator, stream_seed

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

DEDUP_DISTANCE = 1e-3
PROFILE_METHODS = (AcquisitionKind.EI, AcquisitionKind.EI_GN)
VERSIONED_PACKAGES = ("numpy", "scipy", "pandas", "pydantic")

# Two-basin shape of the 1-d mixture profile: EI peaks in the wide basin,
# EI-GN keeps a local peak over the narrow one.
EI_ARGMAX_RANGE = (0.15, 0.45)
EI_GN_PEAK_RANGE = (0.80, 0.90)
PROFILE_DESIGN_SIZES = (3, 4, 5)


class EmitError(EIGNError):
    """Raised when an output file cannot be written; carries the path."""

    def __init__(self, path: PathLike, cause: Exception):
        self.path = str(path)
        super().__init__(f"cannot write {self.path}: {cause}")


def safe_name(name: str) -> str:
    """File-system safe form of a problem or method name."""
    return re.sub(r"[^A-Za-z0-9_.=()+-]", "-", name)


def trace_filename(cfg: RunConfig) -> str:
    return f"{safe_name(cfg.problem)}_{safe_name(cfg.method)}_{cfg.seed}.csv"


def summary_filename(problem: str) -> str:
    return f"summary_{safe_name(problem)}.csv"


async def write_text(path: PathLike, text: Union[str, bytes]) -> Path:
    """Write a file, creating parent directories; I/O errors name the path."""
    target = Path(path)
    try:
        target.parent.mkdir(parents=True, exist_ok=True)
        mode = "wb" if isinstance(text, bytes) else "w"
        async with aiofiles.open(target, mode) as f:
            await f.write(text)
    except OSError as e:
        raise EmitError(target, e) from e
    logger.debug(f"Wrote {target}")
    return target


def trace_columns(dim: int) -> List[str]:
    return ["iteration", "seed", "best_f", "y", "acq_value"] + [f"x_{i}" for i in range(dim)] + ["wall_ms", "fallback"]


def trace_frame(trace: Trace) -> pd.DataFrame:
    """One row per evaluation; an empty trace gives a header-only frame."""
    columns = trace_columns(trace.dim)
    rows = [
        [r.iteration, trace.config.seed, r.best_f, r.y, r.acq_value, *r.x, r.wall_ms, r.fallback]
        for r in trace.records
    ]
    return pd.DataFrame(rows, columns=columns)


def read_trace(path: PathLike) -> pd.DataFrame:
    """Parse a trace CSV with exact float round-tripping."""
    return pd.read_csv(path, float_precision="round_trip")


async def emit_trace(trace: Trace, out_dir: PathLike) -> Path:
    text = trace_frame(trace).to_csv(index=False)
    return await write_text(Path(out_dir) / trace_filename(trace.config), text)


async def emit_summary(summary: pd.DataFrame, problem: str, out_dir: PathLike) -> Path:
    return await write_text(Path(out_dir) / summary_filename(problem), summary.to_csv(index=False))


async def emit_plot_data(summary: pd.DataFrame, problem: str, out_dir: PathLike) -> List[Path]:
    """One (x, y, stderr) file per method: x is the evaluation index, y the mean best f."""
    paths = []
    for method, group in summary.groupby("method", sort=True):
        frame = pd.DataFrame({"x": group["iteration"].to_numpy(), "y": group["mean_best_f"].to_numpy(),
                              "stderr": group["stderr"].to_numpy()})
        name = f"plot_{safe_name(problem)}_{safe_name(str(method))}.csv"
        paths.append(await write_text(Path(out_dir) / name, frame.to_csv(index=False)))
    return paths


def library_versions() -> Dict[str, str]:
    versions = {"eign": __version__}
    for package in VERSIONED_PACKAGES:
        try:
            versions[package] = metadata.version(package)
        except metadata.PackageNotFoundError:
            versions[package] = "unknown"
    return versions


def derived_seeds(cfg: RunConfig) -> Dict[str, str]:
    """Top-level substream seeds of a run, as decimal strings (they exceed 64 bits)."""
    return {stream.name.lower(): str(stream_seed(cfg.seed, stream)) for stream in Stream}


def build_manifest(cfgs: Sequence[RunConfig], kind: str = "run") -> Dict[str, object]:
    runs = []
    for cfg in cfgs:
        entry: Dict[str, object] = {"config": cfg.model_dump(mode="json"), "seeds": derived_seeds(cfg),
                                    "trace_file": trace_filename(cfg)}
        try:
            counts = resolve_counts(cfg, get_problem(cfg.problem))
            entry["resolved"] = {"n_init": counts.n_init, "budget": counts.budget,
                                 "raw_samples": counts.raw_samples, "num_restarts": counts.num_restarts}
        except EIGNError:
            pass
        runs.append(entry)
    return {"kind": kind, "versions": library_versions(), "runs": runs}


async def emit_manifest(cfgs: Sequence[RunConfig], out_dir: PathLike, name: str = "manifest.json",
                        kind: str = "run") -> Path:
    payload = orjson.dumps(build_manifest(cfgs, kind), option=orjson.OPT_INDENT_2 | orjson.OPT_SORT_KEYS)
    return await write_text(Path(out_dir) / name, payload)


def load_manifest(path: PathLike) -> List[RunConfig]:
    """RunConfigs recorded in a manifest, in order."""
    with open(path, "rb") as f:
        data = orjson.loads(f.read())
    return [RunConfig.model_validate(entry["config"]) for entry in data["runs"]]


async def emit_results(traces: Iterable[Trace], out_dir: PathLike, summary: Optional[pd.DataFrame] = None,
                       problem: Optional[str] = None, manifest_kind: str = "run",
                       manifest_name: str = "manifest.json") -> List[Path]:
    """Trace CSVs, then summary and plot data when given, then the manifest."""
    traces = list(traces)
    paths = [await emit_trace(trace, out_dir) for trace in traces]
    if summary is not None and problem is not None:
        paths.append(await emit_summary(summary, problem, out_dir))
        paths.extend(await emit_plot_data(summary, problem, out_dir))
    paths.append(await emit_manifest([t.config for t in traces], out_dir, name=manifest_name, kind=manifest_kind))
    logger.info(f"Wrote {len(paths)} files to {out_dir}")
    return paths


def profile_design(problem: Problem, n: int, seed: int) -> np.ndarray:
    """Seeded Sobol design used for acquisition profiles."""
    return sobol_points(n, problem.lower, problem.upper, stream_seed(seed, Stream.INIT))


def acquisition_profile(
    problem: Problem,
    X: ArrayLike,
    grid_n: int,
    methods: Sequence[AcquisitionKind] = PROFILE_METHODS,
    acq_cfg: Optional[AcquisitionConfig] = None,
    fit_restarts: int = 5,
    seed: int = 0,
) -> pd.DataFrame:
    """
    Acquisition values on a uniform grid of a 1-d problem.

    The surrogates are fitted on (X, f(X), grad f(X)); EI-GN pool statistics
    are taken over the grid itself.

    Returns:
        Frame with column x and one column per method
    """
    if problem.dim != 1:
        raise DimensionMismatch(f"acquisition profiles need a 1-d problem, {problem.name} has dimension {problem.dim}")
    if grid_n < 1:
        raise ValueError(f"grid_n must be positive, got {grid_n}")
    acq_cfg = acq_cfg or AcquisitionConfig()
    Xa = np.atleast_2d(np.asarray(X, dtype=float)).reshape(-1, 1)
    evaluations = [problem.evaluate(x) for x in Xa]
    y = np.array([e[0] for e in evaluations])
    G = np.vstack([e[1] for e in evaluations])
    f_cfg = surrogate_config(problem.name, fit_restarts)
    model = fit(Xa, y, f_cfg, bounds=problem.bounds, rng=stream_generator(seed, Stream.FIT, 0, 0))
    grid = np.linspace(problem.lower[0], problem.upper[0], grid_n)[:, None]

    frame = pd.DataFrame({"x": grid[:, 0]})
    for method in methods:
        if method == AcquisitionKind.EI:
            frame["ei"] = ExpectedImprovement(model, float(np.max(y)))(grid)
        elif method == AcquisitionKind.LOG_EI:
            frame["log_ei"] = LogExpectedImprovement(model, float(np.max(y)))(grid)
        elif method == AcquisitionKind.EI_GN:
            seeds = [stream_seed(seed, Stream.FIT, 0, 1)]
            grads = fit_gradient_models(Xa, G, gradient_fit_config(f_cfg, fit_restarts),
                                        bounds=problem.bounds, seeds=seeds)
            acq = EIGradientNorm(model, grads, select_incumbent(Xa, y, G, acq_cfg), acq_cfg)
            acq.prepare_pool(grid)
            frame["ei_gn"] = acq(grid)
        else:
            raise ValueError(f"no profile for acquisition {method.value}")
    return frame


async def emit_acquisition_profile(
    problem: Problem,
    X: ArrayLike,
    grid_n: int,
    out_path: PathLike,
    methods: Sequence[AcquisitionKind] = PROFILE_METHODS,
    acq_cfg: Optional[AcquisitionConfig] = None,
    fit_restarts: int = 5,
    seed: int = 0,
) -> pd.DataFrame:
    frame = acquisition_profile(problem, X, grid_n, methods, acq_cfg, fit_restarts=fit_restarts, seed=seed)
    await write_text(out_path, frame.to_csv(index=False))
    return frame


@dataclass(frozen=True)
class ProfileGeometry:
    """Where EI peaks and where EI-GN has interior local maxima."""
    ei_argmax: float
    ei_gn_peaks: Tuple[float, ...]

    @property
    def reproduced(self) -> bool:
        lo, hi = EI_ARGMAX_RANGE
        peak_lo, peak_hi = EI_GN_PEAK_RANGE
        return lo <= self.ei_argmax <= hi and any(peak_lo <= p <= peak_hi for p in self.ei_gn_peaks)


def profile_geometry(frame: pd.DataFrame) -> ProfileGeometry:
    """Summarize a profile frame with ei and ei_gn columns."""
    x = frame["x"].to_numpy()
    peaks, _ = find_peaks(frame["ei_gn"].to_numpy())
    return ProfileGeometry(ei_argmax=float(x[int(np.argmax(frame["ei"].to_numpy()))]),
                           ei_gn_peaks=tuple(float(v) for v in x[peaks]))


@dataclass(frozen=True)
class ProfileSearch:
    """Outcome of a seeded design search."""
    seed: int
    X: np.ndarray
    frame: pd.DataFrame
    geometry: ProfileGeometry
    tried: int


def search_profile_design(
    problem: Problem,
    seeds: Iterable[int],
    design_sizes: Sequence[int] = PROFILE_DESIGN_SIZES,
    grid_n: int = 501,
    acq_cfg: Optional[AcquisitionConfig] = None,
    fit_restarts: int = 5,
) -> ProfileSearch:
    """
    First seeded Sobol design whose EI / EI-GN profile has the two-basin shape.

    Seeds are tried in order, each with every design size. When no design
    qualifies, the first one tried is returned and its geometry says so.
    """
    first: Optional[ProfileSearch] = None
    tried = 0
    for seed in seeds:
        for n in design_sizes:
            X = profile_design(problem, n, seed)
            frame = acquisition_profile(problem, X, grid_n, PROFILE_METHODS, acq_cfg,
                                        fit_restarts=fit_restarts, seed=seed)
            geometry = profile_geometry(frame)
            tried += 1
            if geometry.reproduced:
                logger.info(f"[{problem.name}] Design seed={seed} n={n} reproduces the profile shape "
                            f"after {tried} tries")
                return ProfileSearch(seed, X, frame, geometry, tried)
            if first is None:
                first = ProfileSearch(seed, X, frame, geometry, tried)
    if first is None:
        raise ValueError("design search needs at least one seed")
    logger.warning(f"[{problem.name}] No design among {tried} tries reproduces the profile shape")
    return ProfileSearch(first.seed, first.X, first.frame, first.geometry, tried)


def top_solutions(trace: Trace, k: int, min_distance: float = DEDUP_DISTANCE) -> pd.DataFrame:
    """
    The k highest-f queried points, pairwise at least min_distance apart.

    Points are taken greedily in decreasing f (lowest iteration first on
    ties). When fewer than k distinct points exist, all are returned with a
    fewer_than_k column set to True.
    """
    if k < 1:
        raise ValueError(f"k must be at least 1, got {k}")
    order = sorted(range(len(trace.records)), key=lambda i: (-trace.records[i].y, i))
    chosen: List[int] = []
    for i in order:
        x = np.asarray(trace.records[i].x)
        if all(np.linalg.norm(x - np.asarray(trace.records[j].x)) >= min_distance for j in chosen):
            chosen.append(i)
            if len(chosen) == k:
                break
    frame = pd.DataFrame(
        [trace.records[i].x + [trace.records[i].y] for i in chosen],
        columns=[f"x{j + 1}" for j in range(trace.dim)] + ["f"],
    )
    if len(chosen) < k:
        logger.warning(f"[{trace.config.problem}/{trace.config.method}/seed={trace.config.seed}] "
                       f"Only {len(chosen)} distinct points for top-{k}")
        frame["fewer_than_k"] = True
    return frame


def mean_pairwise_distance(points: ArrayLike) -> float:
    """Average Euclidean distance over distinct pairs; 0 for fewer than two points."""
    P = np.atleast_2d(np.asarray(points, dtype=float))
    if P.shape[0] < 2:
        return 0.0
    return float(pdist(P).mean())


@dataclass(frozen=True)
class SpreadComparison:
    """Per-seed top-k spread of a method against a baseline."""
    method: str
    baseline: str
    k: int
    seeds: Tuple[int, ...]
    method_spread: Tuple[float, ...]
    baseline_spread: Tuple[float, ...]

    @property
    def win_fraction(self) -> float:
        wins = sum(m >= b for m, b in zip(self.method_spread, self.baseline_spread))
        return wins / len(self.seeds)

    def to_dict(self) -> Dict[str, object]:
        return {
            "method": self.method,
            "baseline": self.baseline,
            "k": self.k,
            "seeds": list(self.seeds),
            "method_spread": list(self.method_spread),
            "baseline_spread": list(self.baseline_spread),
            "win_fraction": self.win_fraction,
        }


def compare_top_spread(traces: Iterable[Trace], method: str, baseline: str, k: int = 5) -> SpreadComparison:
    """
    Mean pairwise distance of each run's top-k solutions, paired by seed.

    Only seeds with a run of both methods are compared.
    """
    spread: Dict[Tuple[str, int], float] = {}
    for trace in traces:
        xs = top_solutions(trace, k)[[f"x{j + 1}" for j in range(trace.dim)]].to_numpy()
        spread[(trace.config.method, trace.config.seed)] = mean_pairwise_distance(xs)
    seeds = sorted(s for (m, s) in spread if m == method and (baseline, s) in spread)
    if not seeds:
        raise ValueError(f"no seed has runs of both {method!r} and {baseline!r}")
    return SpreadComparison(
        method=method, baseline=baseline, k=k, seeds=tuple(seeds),
        method_spread=tuple(spread[(method, s)] for s in seeds),
        baseline_spread=tuple(spread[(baseline, s)] for s in seeds),
    )


async def emit_top_solutions(trace: Trace, k: int, out_path: PathLike) -> pd.DataFrame:
    frame = top_solutions(trace, k)
    await write_text(out_path, frame.to_csv(index=False))
    return frame
