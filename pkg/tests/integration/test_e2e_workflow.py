#!/usr/bin/env python3
"""
End-to-End Workflow Integration Tests

Full BO runs and the command-line surface: run, manifest replay, suite,
validate, profile and topk, each with reduced counts.
"""

import logging

import numpy as np
import orjson
import pandas as pd
import pytest
import yaml

from bo_main import EXIT_ERROR, EXIT_OK, main
from src.harness.bo_loop import run_bo
from src.harness.emit import read_trace
from src.protocols.bo_schema import AcquisitionKind, RescaleMode, RunConfig

logger = logging.getLogger(__name__)

SMALL = ["--n-init", "3", "--budget", "2", "--raw-samples", "16", "--num-restarts", "2", "--fit-restarts", "1"]


class TestBOWorkflow:
    """Complete runs through the harness."""

    def test_alpha_zero_ei_gn_matches_ei(self):
        common = dict(problem="hartmann6", n_init=6, budget=2, raw_samples=64, num_restarts=2, fit_restarts=1,
                      max_refine_iters=30, seed=5, rescale=RescaleMode.NONE)
        ei_trace = run_bo(RunConfig(acquisition=AcquisitionKind.EI, **common))
        eign_trace = run_bo(RunConfig(acquisition=AcquisitionKind.EI_GN, alpha=0.0, **common))
        assert [r.x for r in ei_trace.records] == [r.x for r in eign_trace.records], \
            "EI-GN at alpha 0 must query exactly what EI queries"
        assert ei_trace.best_curve == eign_trace.best_curve

    def test_budget_one(self):
        trace = run_bo(RunConfig(problem="fig2mix", acquisition=AcquisitionKind.EI_GN, n_init=2, budget=1,
                                 raw_samples=16, num_restarts=2, fit_restarts=1))
        assert len(trace.records) == 3
        assert trace.recommendation().y == max(r.y for r in trace.records)

    def test_gp_sample_within_mode(self):
        trace = run_bo(RunConfig(problem="gp-within-2:1", acquisition=AcquisitionKind.EI_GN, n_init=4, budget=2,
                                 raw_samples=32, num_restarts=2, fit_restarts=1))
        assert len(trace.records) == 6 and not trace.aborted
        curve = trace.best_curve
        assert all(b >= a for a, b in zip(curve, curve[1:]))


class TestCommandLine:
    """bo_main subcommands."""

    def test_run_and_replay(self, output_dir, tmp_path):
        code = main(["run", "--problem", "fig2mix", "--acq", "ei_gn", "--seed", "3", "--out", str(output_dir)] + SMALL)
        assert code == EXIT_OK
        trace_path = output_dir / "fig2mix_ei_gn_3.csv"
        manifest_path = output_dir / "manifest_fig2mix_ei_gn_3.json"
        assert trace_path.exists() and manifest_path.exists()
        first = read_trace(trace_path)
        assert len(first) == 5

        replay_dir = tmp_path / "replay"
        assert main(["run", "--manifest", str(manifest_path), "--out", str(replay_dir)]) == EXIT_OK
        second = read_trace(replay_dir / "fig2mix_ei_gn_3.csv")
        pd.testing.assert_frame_equal(first.drop(columns=["wall_ms"]), second.drop(columns=["wall_ms"]))

    def test_yaml_config_with_flag_override(self, output_dir, tmp_path):
        config = tmp_path / "run.yaml"
        config.write_text(yaml.safe_dump({"problem": "holder", "acquisition": "sobol", "budget": 9, "n_init": 2}))
        code = main(["run", "--config", str(config), "--budget", "1", "--out", str(output_dir)])
        assert code == EXIT_OK
        assert len(read_trace(output_dir / "holder_sobol_0.csv")) == 3

    def test_unknown_problem_writes_nothing(self, output_dir):
        code = main(["suite", "--problem", "nope", "--seeds", "2", "--sequential", "--out", str(output_dir)])
        assert code == EXIT_ERROR
        assert list(output_dir.iterdir()) == []

    def test_suite_outputs(self, output_dir):
        code = main(["suite", "--problem", "fig2mix", "--methods", "sobol,ei_gn", "--alphas", "0,0.6",
                     "--seeds", "2", "--sequential", "--out", str(output_dir)] + SMALL)
        assert code == EXIT_OK
        summary = pd.read_csv(output_dir / "summary_fig2mix.csv")
        assert sorted(set(summary["method"])) == ["ei_gn(a=0)", "ei_gn(a=0.6)", "sobol"]
        assert (summary["n_seeds"] == 2).all()
        assert (output_dir / "plot_fig2mix_sobol.csv").exists()
        manifest = orjson.loads((output_dir / "manifest_suite_fig2mix.json").read_bytes())
        assert manifest["kind"] == "suite" and len(manifest["runs"]) == 6

    def test_validate_report(self, output_dir):
        report_path = output_dir / "validation.json"
        code = main(["validate", "--cases", "4", "--mc-n", "20000", "--out", str(report_path)])
        report = orjson.loads(report_path.read_bytes())
        assert code == (EXIT_OK if report["passed"] else 1)
        assert {c["name"] for c in report["checks"]} >= {"closed_form_equivalence", "alpha_zero_reduction"}

    def test_profile(self, output_dir):
        code = main(["profile", "--grid-n", "11", "--n-design", "3", "--search-seeds", "1", "--fit-restarts", "1",
                     "--out", str(output_dir)])
        assert code == EXIT_OK
        frame = pd.read_csv(output_dir / "profile_fig2mix_0.csv")
        assert len(frame) == 11 and list(frame.columns) == ["x", "ei", "ei_gn"]
        assert np.all(frame["ei"] >= 0.0)
        design = orjson.loads((output_dir / "profile_fig2mix_0_design.json").read_bytes())
        assert design["seed"] == 0 and len(design["design"]) == 3
        assert np.min(np.abs(frame["x"] - design["ei_argmax"])) < 1e-9

    def test_profile_reproduces_two_basin_shape(self, output_dir):
        code = main(["profile", "--grid-n", "201", "--fit-restarts", "2", "--out", str(output_dir)])
        assert code == EXIT_OK
        [design_path] = list(output_dir.glob("profile_fig2mix_*_design.json"))
        design = orjson.loads(design_path.read_bytes())
        assert design["two_basin_shape"], f"no searched design shows the shape: {design}"
        assert 0.15 <= design["ei_argmax"] <= 0.45
        assert any(0.80 <= p <= 0.90 for p in design["ei_gn_peaks"])

    def test_alternate_names_are_accepted(self, output_dir):
        code = main(["run", "--problem", "mix1d", "--acq", "sobol", "--table1-literal", "--n-init", "2", "--budget", "1",
                     "--out", str(output_dir)])
        assert code == EXIT_OK
        assert len(read_trace(output_dir / "mix1d_sobol_0.csv")) == 3

    def test_profile_rejects_multidimensional(self, output_dir):
        assert main(["profile", "--problem", "holder", "--grid-n", "5", "--out", str(output_dir)]) == EXIT_ERROR

    def test_topk(self, output_dir):
        code = main(["topk", "--problem", "holder", "--acq", "sobol", "--n-init", "3", "--budget", "5", "--k", "3",
                     "--out", str(output_dir)])
        assert code == EXIT_OK
        frame = pd.read_csv(output_dir / "topk_holder_sobol_0.csv")
        assert len(frame) == 3
        assert list(frame["f"]) == sorted(frame["f"], reverse=True)

    def test_topk_spread_against_ei(self, output_dir):
        code = main(["topk", "--problem", "holder", "--acq", "ei_gn", "--n-init", "4", "--budget", "4",
                     "--raw-samples", "32", "--num-restarts", "2", "--fit-restarts", "1", "--k", "5",
                     "--compare-seeds", "3", "--out", str(output_dir)])
        assert code == EXIT_OK
        report = orjson.loads((output_dir / "topk_spread_holder_ei_gn.json").read_bytes())
        assert report["seeds"] == [0, 1, 2]
        assert report["method"] == "ei_gn" and report["baseline"] == "ei"
        wins = sum(m >= b for m, b in zip(report["method_spread"], report["baseline_spread"]))
        assert report["win_fraction"] == pytest.approx(wins / 3)
        assert all(s > 0.0 for s in report["method_spread"] + report["baseline_spread"])

    def test_topk_spread_needs_another_method(self, output_dir):
        code = main(["topk", "--problem", "holder", "--acq", "ei", "--compare-seeds", "2", "--out", str(output_dir)])
        assert code == EXIT_ERROR

    @pytest.mark.parametrize("argv", [["run", "--problem", "holder", "--budget", "0"],
                                      ["run", "--problem", "holder", "--alpha", "-1"]])
    def test_invalid_config_is_an_error(self, argv, output_dir):
        assert main(argv + ["--out", str(output_dir)]) == EXIT_ERROR
