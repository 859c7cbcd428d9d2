# Harness Package
from .bo_loop import BOLoop, RunCounts, resolve_counts, run_bo
from .emit import (
    acquisition_profile,
    compare_top_spread,
    emit_acquisition_profile,
    emit_results,
    emit_top_solutions,
    load_manifest,
    profile_geometry,
    read_trace,
    search_profile_design,
    top_solutions,
    trace_frame,
)
from .streams import Stream, stream_seed
from .suite import SuiteResult, build_suite_configs, expand_alpha_sweep, run_suite, summarize

__all__ = [
    "BOLoop", "RunCounts", "resolve_counts", "run_bo",
    "acquisition_profile", "compare_top_spread", "emit_acquisition_profile", "emit_results", "emit_top_solutions",
    "load_manifest", "profile_geometry", "read_trace", "search_profile_design", "top_solutions", "trace_frame",
    "Stream", "stream_seed",
    "SuiteResult", "build_suite_configs", "expand_alpha_sweep", "run_suite", "summarize",
]
