# Objectives Package
from .gp_samples import GPSampleProblem, make_gp_sample_objective, surrogate_config_for
from .registry import get_problem, list_problems, parse_gp_sample_name, surrogate_config, validate_problem_name
from .synthetic import PROBLEM_ALIASES, SYNTHETIC_PROBLEMS, Problem, ProblemDefaults, eval_synthetic, finite_diff_check

__all__ = [
    "GPSampleProblem", "make_gp_sample_objective", "surrogate_config_for",
    "get_problem", "list_problems", "parse_gp_sample_name", "surrogate_config", "validate_problem_name",
    "PROBLEM_ALIASES", "SYNTHETIC_PROBLEMS", "Problem", "ProblemDefaults", "eval_synthetic", "finite_diff_check",
]
