"""BO loop: count resolution, seed streams, fallbacks and aborts."""

import logging

import numpy as np
import pytest

from src.harness.bo_loop import BOLoop, gradient_fit_config, resolve_counts, run_bo
from src.harness.streams import Stream, stream_generator, stream_seed
from src.objectives import get_problem
from src.objectives.synthetic import Problem, ProblemDefaults
from src.optimizer import draw_sobol, sobol_engine
from src.protocols.bo_schema import AcquisitionKind, FitConfig, KernelSpec, RunConfig
from src.protocols.errors import FactorizationFailed


def quick(problem="fig2mix", acquisition=AcquisitionKind.EI, **kwargs) -> RunConfig:
    base = dict(problem=problem, acquisition=acquisition, n_init=3, budget=2, raw_samples=32, num_restarts=2,
                fit_restarts=1, max_refine_iters=20)
    base.update(kwargs)
    return RunConfig(**base)


def flaky_problem(fail_after: int) -> Problem:
    calls = {"n": 0}

    def fn(x):
        calls["n"] += 1
        if calls["n"] > fail_after:
            raise RuntimeError("simulator crashed")
        return float(-np.sum(x * x)), -2.0 * x

    return Problem(name="flaky", dim=2, lower=np.zeros(2), upper=np.ones(2), fn=fn,
                   defaults=ProblemDefaults(3, 5, 4, 16))


class TestResolveCounts:
    """Table defaults, literal mode and overrides."""

    def test_swapped_defaults(self):
        counts = resolve_counts(RunConfig(problem="hartmann6"), get_problem("hartmann6"))
        assert (counts.n_init, counts.budget) == (18, 150)
        assert (counts.raw_samples, counts.num_restarts) == (512, 10)

    def test_literal_mode_clamps(self, caplog):
        with caplog.at_level(logging.WARNING):
            counts = resolve_counts(RunConfig(problem="hartmann6", literal_counts=True), get_problem("hartmann6"))
        assert counts.raw_samples == 10 and counts.num_restarts == 10
        assert "clamping" in caplog.text

    def test_overrides_win(self):
        cfg = RunConfig(problem="holder", raw_samples=64, num_restarts=4, budget=7, n_init=2)
        counts = resolve_counts(cfg, get_problem("holder"))
        assert (counts.n_init, counts.budget, counts.raw_samples, counts.num_restarts) == (2, 7, 64, 4)

    def test_gradient_config_in_within_mode(self):
        fixed = FitConfig(fixed_hyperparams=KernelSpec(lengthscales=[0.2]))
        assert gradient_fit_config(fixed, 3).fixed_hyperparams is None
        assert gradient_fit_config(fixed, 3).restarts == 3
        plain = FitConfig(restarts=4)
        assert gradient_fit_config(plain, 3) is plain


class TestStreams:
    """Substream seeds."""

    def test_deterministic_and_distinct(self):
        seeds = {stream_seed(7, s, 1, 0) for s in Stream}
        assert len(seeds) == len(Stream)
        assert stream_seed(7, Stream.FIT, 3, 0) == stream_seed(7, Stream.FIT, 3, 0)
        assert stream_seed(7, Stream.FIT, 3, 0) != stream_seed(7, Stream.FIT, 3, 1)
        assert stream_seed(7, Stream.FIT, 3, 0) != stream_seed(8, Stream.FIT, 3, 0)

    def test_seed_width(self):
        assert 0 <= stream_seed(0, Stream.INIT) < 2**128

    def test_generator_matches_seed(self):
        a = stream_generator(4, Stream.ACQ, 2).standard_normal(3)
        b = np.random.Generator(np.random.Philox(stream_seed(4, Stream.ACQ, 2))).standard_normal(3)
        assert np.array_equal(a, b)


class TestRun:
    """Single runs on cheap problems."""

    def test_trace_length_and_phases(self):
        trace = run_bo(quick())
        assert len(trace.records) == 5
        assert [r.phase for r in trace.records] == ["init"] * 3 + ["bo"] * 2
        assert [r.iteration for r in trace.records] == [1, 2, 3, 4, 5]
        assert not trace.aborted

    def test_best_f_monotone(self):
        trace = run_bo(quick(acquisition=AcquisitionKind.EI_GN, budget=3))
        curve = trace.best_curve
        assert all(b >= a for a, b in zip(curve, curve[1:]))
        assert curve[-1] == max(r.y for r in trace.records)

    def test_sobol_continues_initial_design(self):
        cfg = quick(acquisition=AcquisitionKind.SOBOL, seed=9)
        trace = run_bo(cfg)
        problem = get_problem("fig2mix")
        expected = draw_sobol(sobol_engine(1, stream_seed(9, Stream.INIT)), 5, problem.lower, problem.upper)
        assert np.array_equal(np.array([r.x for r in trace.records]), expected)

    def test_queries_stay_in_bounds(self):
        for kind in (AcquisitionKind.LOG_EI, AcquisitionKind.TS):
            trace = run_bo(quick(problem="holder", acquisition=kind))
            X = np.array([r.x for r in trace.records])
            assert np.all(X >= -10.0) and np.all(X <= 10.0), f"{kind.value} left the box"

    def test_numerical_failure_falls_back(self, monkeypatch):
        import src.harness.bo_loop as loop_module

        def broken_fit(*args, **kwargs):
            raise FactorizationFailed(1e-2)

        monkeypatch.setattr(loop_module, "fit", broken_fit)
        trace = run_bo(quick(budget=3))
        assert len(trace.records) == 6 and not trace.aborted
        assert [r.fallback for r in trace.records[3:]] == [True, True, True]
        assert len(trace.errors) == 3 and all(e["fallback"] for e in trace.errors)

    def test_other_errors_abort_with_partial_trace(self):
        cfg = RunConfig(problem="flaky", acquisition=AcquisitionKind.SOBOL, n_init=3, budget=5)
        trace = BOLoop(cfg, flaky_problem(fail_after=4)).run()
        assert trace.aborted
        assert len(trace.records) == 4
        assert trace.errors[-1]["type"] == "RuntimeError" and trace.errors[-1]["iteration"] == 2

    def test_reproducible(self):
        a = run_bo(quick(acquisition=AcquisitionKind.EI_GN, seed=3))
        b = run_bo(quick(acquisition=AcquisitionKind.EI_GN, seed=3))
        assert [r.x for r in a.records] == [r.x for r in b.records]
        assert [r.y for r in a.records] == [r.y for r in b.records]

    def test_gradient_workers_setting_reaches_fits(self, monkeypatch):
        import src.harness.bo_loop as loop_module
        from src.config import get_settings

        seen = []
        real_fit_gradient_models = loop_module.fit_gradient_models

        def recording_fit(*args, **kwargs):
            seen.append(kwargs.get("max_workers"))
            return real_fit_gradient_models(*args, **kwargs)

        monkeypatch.setattr(loop_module, "fit_gradient_models", recording_fit)
        cfg = quick(problem="holder", acquisition=AcquisitionKind.EI_GN, seed=4)
        get_settings.cache_clear()
        monkeypatch.setenv("EIGN_GRADIENT_WORKERS", "2")
        try:
            threaded = run_bo(cfg)
        finally:
            get_settings.cache_clear()
        monkeypatch.delenv("EIGN_GRADIENT_WORKERS")
        serial = run_bo(cfg)
        assert seen == [2, 2, 1, 1], "one gradient fit per BO iteration, with the configured thread count"
        assert [r.x for r in threaded.records] == [r.x for r in serial.records], "threads do not change the run"
