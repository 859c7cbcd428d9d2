"""
Bayesian Optimization Loop

Runs one (problem, method, seed) experiment: a scrambled Sobol initial
design, then per iteration fit the f-surrogate (and, for EI-GN, the
gradient surrogates), build the acquisition, maximize it, evaluate the
objective with its gradient and append to the dataset.
"""

import logging
import time
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
from numpy.typing import NDArray

from ..acquisition.closed_form import select_incumbent
from ..acquisition.functions import (
    AcquisitionFunction,
    EIGradientNorm,
    ExpectedImprovement,
    LogExpectedImprovement,
)
from ..acquisition.thompson import thompson_select
from ..config import get_settings
from ..metrics import BO_ITERATIONS, FALLBACK_QUERIES, ITERATION_SECONDS
from ..objectives.registry import get_problem, surrogate_config
from ..objectives.synthetic import Problem
from ..optimizer.acq_optimizer import draw_sobol, optimize_acquisition, sobol_engine, sobol_points
from ..protocols.bo_schema import AcquisitionKind, FitConfig, OptSpec, RunConfig, Trace, TraceRecord
from ..protocols.errors import EIGNError
from ..surrogates.gp import fit
from ..surrogates.gradient import fit_gradient_models
from .streams import Stream, stream_generator, stream_seed

logger = logging.getLogger(__name__)

TS_CANDIDATES_PER_DIM = 1024


@dataclass(frozen=True)
class RunCounts:
    """Evaluation and optimizer counts after applying problem defaults."""
    n_init: int
    budget: int
    raw_samples: int
    num_restarts: int


def resolve_counts(cfg: RunConfig, problem: Problem) -> RunCounts:
    """
    Fill unset counts from the problem's table row.

    The tables print fewer raw samples than restarts; by default the larger
    column becomes the raw pool and the smaller the restart count. With
    literal_counts the printed columns are used as-is, restarts clamped to
    the pool size.
    """
    defaults = problem.defaults
    if cfg.literal_counts:
        raw, restarts = defaults.table_raw, defaults.table_restarts
    else:
        raw = max(defaults.table_raw, defaults.table_restarts)
        restarts = min(defaults.table_raw, defaults.table_restarts)
    raw = cfg.raw_samples if cfg.raw_samples is not None else raw
    restarts = cfg.num_restarts if cfg.num_restarts is not None else restarts
    if restarts > raw:
        logger.warning(f"[{cfg.problem}] num_restarts {restarts} exceeds raw_samples {raw}; clamping to {raw}")
        restarts = raw
    return RunCounts(
        n_init=cfg.n_init if cfg.n_init is not None else defaults.n_init,
        budget=cfg.budget if cfg.budget is not None else defaults.budget,
        raw_samples=raw,
        num_restarts=restarts,
    )


def gradient_fit_config(f_cfg: FitConfig, restarts: int) -> FitConfig:
    """Gradient surrogates reuse the f settings unless those pin the generating prior."""
    if f_cfg.fixed_hyperparams is not None:
        return FitConfig(restarts=restarts)
    return f_cfg


class BOLoop:
    """
    State of one BO run.

    Every random choice comes from a named substream of cfg.seed, so a run
    is a pure function of its config.
    """

    def __init__(self, cfg: RunConfig, problem: Optional[Problem] = None):
        self.cfg = cfg
        self.problem = problem or get_problem(cfg.problem)
        self.counts = resolve_counts(cfg, self.problem)
        self.fit_cfg = surrogate_config(cfg.problem, cfg.fit_restarts)
        self.grad_cfg = gradient_fit_config(self.fit_cfg, cfg.fit_restarts)
        self.acq_cfg = cfg.acquisition_config()
        self.opt_spec = OptSpec(
            raw_samples=self.counts.raw_samples,
            num_restarts=self.counts.num_restarts,
            lower=self.problem.lower.tolist(),
            upper=self.problem.upper.tolist(),
            max_refine_iters=cfg.max_refine_iters,
        )
        self.prefix = f"[{cfg.problem}/{cfg.method}/seed={cfg.seed}]"
        d = self.problem.dim
        self.init_engine = sobol_engine(d, stream_seed(cfg.seed, Stream.INIT))
        self.fallback_engine = sobol_engine(d, stream_seed(cfg.seed, Stream.FALLBACK))
        self.X: List[NDArray[np.float64]] = []
        self.y: List[float] = []
        self.G: List[NDArray[np.float64]] = []
        self.trace = Trace(config=cfg, dim=d)

    @property
    def best_f(self) -> float:
        return max(self.y) if self.y else float("-inf")

    def _observe(self, x: NDArray[np.float64], phase: str, acq_value: float, started: float,
                 fallback: bool = False) -> TraceRecord:
        y, grad = self.problem.evaluate(x)
        self.X.append(np.asarray(x, dtype=float))
        self.y.append(y)
        self.G.append(grad)
        record = TraceRecord(
            iteration=len(self.y),
            phase=phase,
            x=[float(v) for v in x],
            y=y,
            grad_y=[float(v) for v in grad],
            best_f=self.best_f,
            acq_value=acq_value,
            wall_ms=(time.perf_counter() - started) * 1000.0,
            fallback=fallback,
        )
        self.trace.records.append(record)
        return record

    def _initial_design(self) -> None:
        started = time.perf_counter()
        X0 = draw_sobol(self.init_engine, self.counts.n_init, self.problem.lower, self.problem.upper)
        for x in X0:
            self._observe(x, "init", float("nan"), started)
            started = time.perf_counter()
        logger.info(f"{self.prefix} Initial design of {self.counts.n_init} points, best f {self.best_f:.6g}")

    def _propose(self, t: int) -> Tuple[NDArray[np.float64], float]:
        """Next query and its acquisition value (NaN when the method has none)."""
        kind = self.cfg.acquisition
        lower, upper = self.problem.lower, self.problem.upper
        if kind == AcquisitionKind.SOBOL:
            return draw_sobol(self.init_engine, 1, lower, upper)[0], float("nan")

        X = np.vstack(self.X)
        y = np.asarray(self.y)
        model = fit(X, y, self.fit_cfg, bounds=self.problem.bounds,
                    rng=stream_generator(self.cfg.seed, Stream.FIT, t, 0))

        if kind == AcquisitionKind.TS:
            n_cand = TS_CANDIDATES_PER_DIM * min(self.problem.dim, 8)
            candidates = sobol_points(n_cand, lower, upper, stream_seed(self.cfg.seed, Stream.TS, t, 0))
            x = thompson_select(model, candidates, stream_seed(self.cfg.seed, Stream.TS, t, 1), cfg=self.fit_cfg)
            return x, float("nan")

        acq: AcquisitionFunction
        if kind == AcquisitionKind.EI:
            acq = ExpectedImprovement(model, float(np.max(y)))
        elif kind == AcquisitionKind.LOG_EI:
            acq = LogExpectedImprovement(model, float(np.max(y)))
        else:
            G = np.vstack(self.G)
            seeds = [stream_seed(self.cfg.seed, Stream.FIT, t, i + 1) for i in range(self.problem.dim)]
            grads = fit_gradient_models(X, G, self.grad_cfg, bounds=self.problem.bounds, seeds=seeds,
                                        max_workers=get_settings().gradient_workers)
            incumbent = select_incumbent(X, y, G, self.acq_cfg)
            acq = EIGradientNorm(model, grads, incumbent, self.acq_cfg)

        x, diag = optimize_acquisition(acq, self.opt_spec, stream_seed(self.cfg.seed, Stream.ACQ, t))
        return x, diag.best_value

    def _fallback(self, t: int, error: EIGNError) -> NDArray[np.float64]:
        logger.warning(f"{self.prefix} Iteration {t} numerical failure ({type(error).__name__}: {error}); "
                       f"using a Sobol query")
        self.trace.errors.append({"iteration": t, "type": type(error).__name__, "message": str(error),
                                  "fallback": True})
        FALLBACK_QUERIES.labels(problem=self.cfg.problem, acquisition=self.cfg.acquisition.value).inc()
        return draw_sobol(self.fallback_engine, 1, self.problem.lower, self.problem.upper)[0]

    def run(self) -> Trace:
        logger.info(f"{self.prefix} Starting: {self.counts.n_init} init + {self.counts.budget} iterations, "
                    f"raw {self.counts.raw_samples}, restarts {self.counts.num_restarts}")
        try:
            self._initial_design()
        except Exception as e:
            return self._abort(0, e)

        for t in range(1, self.counts.budget + 1):
            started = time.perf_counter()
            try:
                fallback = False
                try:
                    x, acq_value = self._propose(t)
                except EIGNError as e:
                    x, acq_value, fallback = self._fallback(t, e), float("nan"), True
                record = self._observe(x, "bo", acq_value, started, fallback)
            except Exception as e:
                return self._abort(t, e)
            ITERATION_SECONDS.observe(record.wall_ms / 1000.0)
            BO_ITERATIONS.labels(problem=self.cfg.problem, acquisition=self.cfg.acquisition.value).inc()
            logger.debug(f"{self.prefix} Iteration {t}: y {record.y:.6g}, best {record.best_f:.6g}, "
                         f"acq {record.acq_value:.4g}")

        best = self.trace.recommendation()
        logger.info(f"{self.prefix} Finished: best f {best.y if best else float('nan'):.6g} "
                    f"after {len(self.trace.records)} evaluations")
        return self.trace

    def _abort(self, t: int, error: Exception) -> Trace:
        logger.error(f"{self.prefix} Aborted at iteration {t}: {type(error).__name__}: {error}")
        self.trace.errors.append({"iteration": t, "type": type(error).__name__, "message": str(error),
                                  "fallback": False})
        self.trace.aborted = True
        return self.trace


def run_bo(cfg: RunConfig, problem: Optional[Problem] = None) -> Trace:
    """
    Run one BO experiment.

    Args:
        cfg: Validated run configuration
        problem: Objective override; looked up by cfg.problem when None

    Returns:
        Trace with n_init + budget records, or a partial trace with
        aborted=True and an error record

    Raises:
        UnknownProblem: if cfg.problem is not registered
    """
    return BOLoop(cfg, problem).run()
