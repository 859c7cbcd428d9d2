"""
Problem Registry

Resolves CLI problem names: the synthetic table (shekel4, hartmann6,
cosine8, griewank10, ackley14, holder, fig2mix) and GP-sample problems
gp-within-{d} / gp-out-{d} with an optional ':{seed}' suffix.
"""

import logging
import re
from typing import List, Optional

from ..config import get_settings
from ..protocols.bo_schema import FitConfig, GPSampleSpec, ProblemMode
from ..protocols.errors import UnknownProblem
from .gp_samples import make_gp_sample_objective, surrogate_config_for
from .synthetic import PROBLEM_ALIASES, SYNTHETIC_PROBLEMS, Problem

logger = logging.getLogger(__name__)

GP_SAMPLE_PATTERN = re.compile(r"^gp-(within|out)-(\d+)(?::(\d+))?$")


def parse_gp_sample_name(name: str) -> Optional[GPSampleSpec]:
    """GPSampleSpec for a gp-* name, None for anything else."""
    match = GP_SAMPLE_PATTERN.match(name)
    if not match:
        return None
    mode, dim, seed = match.groups()
    if int(dim) < 1:
        raise UnknownProblem(name)
    seed_value = int(seed) if seed is not None else get_settings().gp_sample_seed
    return GPSampleSpec(dim=int(dim), seed=seed_value, mode=ProblemMode(mode))


def validate_problem_name(name: str) -> None:
    """Raise UnknownProblem without building anything."""
    if PROBLEM_ALIASES.get(name, name) not in SYNTHETIC_PROBLEMS and parse_gp_sample_name(name) is None:
        raise UnknownProblem(name)


def get_problem(name: str) -> Problem:
    """
    Look up a problem by registry name.

    Raises:
        UnknownProblem: for unregistered names
    """
    name = PROBLEM_ALIASES.get(name, name)
    if name in SYNTHETIC_PROBLEMS:
        return SYNTHETIC_PROBLEMS[name]
    spec = parse_gp_sample_name(name)
    if spec is None:
        raise UnknownProblem(name)
    return make_gp_sample_objective(spec)


def surrogate_config(name: str, restarts: int = 5) -> FitConfig:
    """Surrogate settings for a problem: GP-sample modes pick their own, everything else Matérn-5/2 ARD."""
    spec = parse_gp_sample_name(name)
    if spec is not None:
        cfg = surrogate_config_for(spec)
        return cfg if cfg.fixed_hyperparams is not None else cfg.model_copy(update={"restarts": restarts})
    return FitConfig(restarts=restarts)


def list_problems() -> List[str]:
    return sorted(SYNTHETIC_PROBLEMS) + ["gp-within-{d}[:seed]", "gp-out-{d}[:seed]"]
