# Optimizer Package
from .acq_optimizer import (
    OptDiagnostics,
    boltzmann_indices,
    boltzmann_restarts,
    draw_raw_pool,
    draw_sobol,
    optimize_acquisition,
    refine,
    sobol_engine,
    sobol_points,
)
from .finite_diff import fd_gradient

__all__ = [
    "OptDiagnostics", "boltzmann_indices", "boltzmann_restarts", "draw_raw_pool", "draw_sobol", "optimize_acquisition", "refine",
    "sobol_engine", "sobol_points", "fd_gradient",
]
