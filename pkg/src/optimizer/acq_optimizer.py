"""
Acquisition Optimizer

Maximizes an acquisition over a box: a scrambled Sobol raw pool, Boltzmann
selection of restart points from the z-scored pool values, then bounded
L-BFGS-B refinement of each start with finite-difference gradients.
"""

import logging
import warnings
from dataclasses import dataclass, field
from typing import Callable, List, Tuple, Union

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.optimize import minimize
from scipy.stats import qmc

from ..protocols.bo_schema import OptSpec
from ..protocols.errors import NonFiniteAcquisition
from .finite_diff import fd_gradient

logger = logging.getLogger(__name__)

# Acquisitions take an (m, d) batch and return m values.
BatchAcquisition = Callable[[NDArray[np.float64]], ArrayLike]

NONFINITE_PENALTY = 1e12


@dataclass
class OptDiagnostics:
    """What happened inside one optimize_acquisition call."""
    pool_size: int
    pool_best_value: float
    pool_best_index: int
    start_indices: List[int] = field(default_factory=list)
    restart_values: List[float] = field(default_factory=list)
    best_value: float = float("-inf")
    best_restart: int = -1
    from_pool: bool = False


def _generator(seed: Union[int, np.random.SeedSequence, np.random.Generator]) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.Philox(seed))


def _scalar(acq: BatchAcquisition, x: NDArray[np.float64]) -> float:
    return float(np.asarray(acq(x[None, :]), dtype=float).ravel()[0])


def sobol_engine(dim: int, seed: Union[int, np.random.SeedSequence, np.random.Generator]) -> qmc.Sobol:
    """A scrambled Sobol engine; successive draws continue one sequence."""
    return qmc.Sobol(d=dim, scramble=True, seed=_generator(seed))


def draw_sobol(engine: qmc.Sobol, n: int, lower: ArrayLike, upper: ArrayLike) -> NDArray[np.float64]:
    """Next n points of the engine's sequence, scaled to the box."""
    lo = np.asarray(lower, dtype=float)
    hi = np.asarray(upper, dtype=float)
    with warnings.catch_warnings():
        # balance properties need powers of two; pool sizes follow the benchmark tables instead
        warnings.simplefilter("ignore", UserWarning)
        unit = engine.random(n)
    return qmc.scale(unit, lo, hi)


def sobol_points(n: int, lower: ArrayLike, upper: ArrayLike,
                 seed: Union[int, np.random.SeedSequence, np.random.Generator]) -> NDArray[np.float64]:
    """n scrambled Sobol points scaled to the box."""
    return draw_sobol(sobol_engine(np.asarray(lower).size, seed), n, lower, upper)


def draw_raw_pool(spec: OptSpec, seed: Union[int, np.random.SeedSequence, np.random.Generator]) -> NDArray[np.float64]:
    """raw_samples scrambled Sobol points inside the spec's box."""
    pool = sobol_points(spec.raw_samples, spec.lower, spec.upper, seed)
    return np.clip(pool, spec.lower, spec.upper)


def _zscore(values: NDArray[np.float64]) -> NDArray[np.float64]:
    std = float(np.std(values))
    if not std > 0.0:
        return np.zeros_like(values)
    return (values - float(np.mean(values))) / std


def boltzmann_indices(acq_values: ArrayLike, k: int,
                      seed: Union[int, np.random.SeedSequence, np.random.Generator]) -> NDArray[np.int64]:
    """
    k distinct indices drawn without replacement with p ~ exp(zscore(values)).

    Non-finite values get zero probability.
    """
    v = np.asarray(acq_values, dtype=float).ravel()
    finite = np.isfinite(v)
    n_finite = int(np.sum(finite))
    if k >= v.size and n_finite == v.size:
        return np.arange(v.size)
    z = np.full(v.shape, -np.inf)
    z[finite] = _zscore(v[finite])
    p = np.exp(z - np.max(z[finite]))
    p /= p.sum()
    rng = _generator(seed)
    return rng.choice(v.size, size=min(k, n_finite), replace=False, p=p)


def boltzmann_restarts(pool: ArrayLike, acq_values: ArrayLike, k: int,
                       seed: Union[int, np.random.SeedSequence, np.random.Generator]) -> NDArray[np.float64]:
    """
    Sample k restart points from the pool.

    Args:
        pool: (n, d) candidates
        acq_values: (n,) finite acquisition values
        k: Restarts wanted (k <= n)
        seed: Seed for the selection draw

    Returns:
        (k, d) distinct pool points
    """
    P = np.atleast_2d(np.asarray(pool, dtype=float))
    if k > P.shape[0]:
        raise ValueError(f"cannot choose {k} restarts from a pool of {P.shape[0]}")
    return P[boltzmann_indices(acq_values, k, seed)]


def refine(start: ArrayLike, acq: BatchAcquisition, spec: OptSpec) -> Tuple[NDArray[np.float64], float]:
    """
    Bounded quasi-Newton ascent from one start.

    Returns:
        (x, value) with value >= acq(start) and x inside the box

    Raises:
        NonFiniteAcquisition: if acq is NaN/inf at the start
    """
    lo = np.asarray(spec.lower, dtype=float)
    hi = np.asarray(spec.upper, dtype=float)
    x0 = np.clip(np.asarray(start, dtype=float).ravel(), lo, hi)
    f0 = _scalar(acq, x0)
    if not np.isfinite(f0):
        raise NonFiniteAcquisition(x0, f0)

    def objective(x: NDArray[np.float64]) -> float:
        value = _scalar(acq, np.clip(x, lo, hi))
        return -value if np.isfinite(value) else NONFINITE_PENALTY

    steps = spec.fd_step * (hi - lo)

    def gradient(x: NDArray[np.float64]) -> NDArray[np.float64]:
        return fd_gradient(objective, np.clip(x, lo, hi), steps, lo, hi)

    result = minimize(objective, x0, jac=gradient, method="L-BFGS-B", bounds=list(zip(lo, hi)),
                      options={"maxiter": spec.max_refine_iters, "ftol": spec.ftol, "gtol": spec.gtol})
    x = np.clip(result.x, lo, hi)
    value = _scalar(acq, x)
    if not (np.isfinite(value) and value >= f0):
        return x0, f0
    return x, value


def optimize_acquisition(acq: BatchAcquisition, spec: OptSpec,
                         seed: Union[int, np.random.SeedSequence]) -> Tuple[NDArray[np.float64], OptDiagnostics]:
    """
    Raw pool -> pool statistics -> Boltzmann restarts -> refinement -> best point.

    The acquisition's prepare_pool(pool), when present, runs right after the
    pool is drawn so rescaling statistics stay fixed during refinement.

    Returns:
        (x_next, diagnostics); acq(x_next) >= best raw-pool value
    """
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    pool_seed, restart_seed = ss.spawn(2)
    pool = draw_raw_pool(spec, pool_seed)
    prepare = getattr(acq, "prepare_pool", None)
    if callable(prepare):
        prepare(pool)
    values = np.asarray(acq(pool), dtype=float).ravel()
    finite = np.isfinite(values)
    if not np.any(finite):
        raise NonFiniteAcquisition(pool[0], float(values[0]))

    masked = np.where(finite, values, -np.inf)
    pool_best = int(np.argmax(masked))
    diag = OptDiagnostics(pool_size=pool.shape[0], pool_best_value=float(values[pool_best]),
                          pool_best_index=pool_best)

    starts = boltzmann_indices(values, spec.num_restarts, restart_seed)
    best_x, best_value = pool[pool_best].copy(), float(values[pool_best])
    diag.from_pool = True
    for r, idx in enumerate(starts):
        x, value = refine(pool[idx], acq, spec)
        diag.start_indices.append(int(idx))
        diag.restart_values.append(value)
        # strict comparison keeps the lowest restart index on ties
        if value > best_value:
            best_x, best_value = x, value
            diag.best_restart, diag.from_pool = r, False
    diag.best_value = best_value
    logger.debug(f"Acquisition optimum {best_value:.6g} (pool best {diag.pool_best_value:.6g}, "
                 f"{len(starts)} restarts)")
    return best_x, diag
