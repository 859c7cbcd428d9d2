"""Suite configuration, aggregation and execution."""

import math

import pytest

from src.harness.suite import (
    SUMMARY_COLUMNS,
    alpha_label,
    build_suite_configs,
    expand_alpha_sweep,
    run_suite,
    summarize,
)
from src.protocols.bo_schema import AcquisitionKind, RunConfig, Trace, TraceRecord


def curve_trace(method: AcquisitionKind, seed: int, curve, aborted: bool = False) -> Trace:
    cfg = RunConfig(problem="holder", acquisition=method, seed=seed)
    records = [TraceRecord(iteration=i, x=[0.0, 0.0], y=v, grad_y=[0.0, 0.0], best_f=v)
               for i, v in enumerate(curve, start=1)]
    return Trace(config=cfg, dim=2, records=records, aborted=aborted)


class TestConfigs:
    """Method and alpha expansion."""

    def test_alpha_labels(self):
        assert alpha_label(0.6) == "ei_gn(a=0.6)"
        assert alpha_label(0.0) == "ei_gn(a=0)"

    def test_build(self):
        cfgs = build_suite_configs("holder", [AcquisitionKind.EI, AcquisitionKind.EI_GN], [0, 1, 2], budget=4)
        assert len(cfgs) == 6
        assert all(c.budget == 4 for c in cfgs)

    def test_alpha_sweep_only_touches_ei_gn(self):
        cfgs = [RunConfig(problem="holder", acquisition=AcquisitionKind.EI),
                RunConfig(problem="holder", acquisition=AcquisitionKind.EI_GN)]
        expanded = expand_alpha_sweep(cfgs, [0.0, 0.3])
        assert [c.method for c in expanded] == ["ei", "ei_gn(a=0)", "ei_gn(a=0.3)"]
        assert [c.alpha for c in expanded[1:]] == [0.0, 0.3]


class TestSummarize:
    """Mean and standard error across seeds."""

    def test_single_seed_has_zero_stderr(self):
        frame = summarize([curve_trace(AcquisitionKind.EI, 0, [1.0, 2.0])])
        assert list(frame.columns) == SUMMARY_COLUMNS
        assert frame["stderr"].tolist() == [0.0, 0.0]
        assert frame["n_seeds"].tolist() == [1, 1]

    def test_two_seeds(self):
        frame = summarize([curve_trace(AcquisitionKind.EI, 0, [1.0, 4.0]),
                           curve_trace(AcquisitionKind.EI, 1, [3.0, 4.0])])
        assert frame["mean_best_f"].tolist() == [2.0, 4.0]
        assert frame["stderr"].iloc[0] == pytest.approx(abs(1.0 - 3.0) / 2.0)
        assert frame["stderr"].iloc[1] == 0.0

    def test_order_invariance(self):
        traces = [curve_trace(AcquisitionKind.EI, s, [0.1 * s, 0.3 * s + 1.0]) for s in range(5)]
        a = summarize(traces)
        b = summarize(list(reversed(traces)))
        assert a.equals(b)

    def test_aborted_runs_excluded(self):
        frame = summarize([curve_trace(AcquisitionKind.EI, 0, [1.0, 2.0]),
                           curve_trace(AcquisitionKind.EI, 1, [5.0], aborted=True)])
        assert frame["n_seeds"].tolist() == [1, 1]

    def test_methods_kept_apart(self):
        frame = summarize([curve_trace(AcquisitionKind.EI, 0, [1.0]), curve_trace(AcquisitionKind.TS, 0, [3.0])])
        assert sorted(frame["method"]) == ["ei", "ts"]

    def test_empty(self):
        assert list(summarize([]).columns) == SUMMARY_COLUMNS


class TestRunSuite:
    """Execution."""

    @pytest.mark.asyncio
    async def test_sequential_small_suite(self):
        cfgs = build_suite_configs("fig2mix", [AcquisitionKind.SOBOL, AcquisitionKind.EI], [0, 1],
                                   n_init=2, budget=2, raw_samples=16, num_restarts=2, fit_restarts=1)
        result = await run_suite(cfgs, sequential=True)
        assert len(result.traces) == 4 and not result.failures
        assert sorted(set(result.summary["method"])) == ["ei", "sobol"]
        assert result.summary["n_seeds"].eq(2).all()
        assert all(math.isfinite(v) for v in result.summary["mean_best_f"])

    @pytest.mark.asyncio
    async def test_unknown_problem_counts_as_failure(self):
        cfgs = [RunConfig(problem="nope", acquisition=AcquisitionKind.SOBOL, budget=1)]
        result = await run_suite(cfgs, sequential=True)
        assert result.failures == {"sobol": 1}
        assert result.summary.empty

    @pytest.mark.asyncio
    async def test_empty_rejected(self):
        with pytest.raises(ValueError):
            await run_suite([])
