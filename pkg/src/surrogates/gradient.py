"""
Gradient Surrogate

d independent GP surrogates, one per partial derivative of the objective.
The posterior gradient has mean mu_grad(x) and a strictly diagonal covariance.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
from numpy.typing import ArrayLike, NDArray

from ..protocols.bo_schema import FitConfig
from ..protocols.errors import DimensionMismatch, FactorizationFailed
from .gp import GPModel, fit, posterior
from .kernels import as_points

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class PosteriorGradient:
    """Gradient posterior at one point: mean vector and diagonal variances."""
    mean: NDArray[np.float64]
    var_diag: NDArray[np.float64]

    def __post_init__(self):
        if self.mean.shape != self.var_diag.shape:
            raise DimensionMismatch(f"mean {self.mean.shape} and var_diag {self.var_diag.shape} differ")
        if np.any(self.var_diag < 0.0):
            raise ValueError("var_diag must be elementwise nonnegative")

    @classmethod
    def of(cls, mean: ArrayLike, var_diag: ArrayLike) -> "PosteriorGradient":
        return cls(np.atleast_1d(np.asarray(mean, dtype=float)),
                   np.atleast_1d(np.asarray(var_diag, dtype=float)))

    @property
    def dim(self) -> int:
        return self.mean.shape[-1]


@dataclass(frozen=True, eq=False)
class GradientSurrogate:
    """One GPModel per gradient coordinate, all on the same inputs."""
    models: Tuple[GPModel, ...]

    @property
    def dim(self) -> int:
        return len(self.models)


def fit_gradient_models(
    X: ArrayLike,
    grad_y: ArrayLike,
    cfg: FitConfig,
    bounds: Optional[ArrayLike] = None,
    seeds: Optional[List[int]] = None,
    max_workers: int = 1,
) -> GradientSurrogate:
    """
    Fit one GP per gradient column.

    Args:
        X: (N, d) inputs in original units
        grad_y: (N, d) observed gradients in original units
        cfg: Shared fit settings; each coordinate gets its own hyperparameters
        bounds: (2, d) input box
        seeds: Per-coordinate restart seeds (default: coordinate index)
        max_workers: Threads for per-coordinate fits; results do not depend on it

    Returns:
        GradientSurrogate with d models

    Raises:
        FactorizationFailed: with the failing coordinate in .dimension
    """
    Xa = as_points(X)
    G = np.asarray(grad_y, dtype=float)
    if G.ndim == 1:
        G = G[:, None]
    if G.shape != Xa.shape:
        raise DimensionMismatch(f"grad_y shape {G.shape} does not match inputs {Xa.shape}")
    d = Xa.shape[1]
    seeds = list(range(d)) if seeds is None else list(seeds)
    if len(seeds) != d:
        raise DimensionMismatch(f"need {d} coordinate seeds, got {len(seeds)}")

    def fit_one(i: int) -> GPModel:
        try:
            return fit(Xa, G[:, i], cfg, bounds=bounds, rng=np.random.default_rng(seeds[i]))
        except FactorizationFailed as e:
            raise FactorizationFailed(e.max_jitter, dimension=i) from e

    if max_workers > 1 and d > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            models = list(pool.map(fit_one, range(d)))
    else:
        models = [fit_one(i) for i in range(d)]
    logger.debug(f"Fitted {d} gradient surrogates on {Xa.shape[0]} points")
    return GradientSurrogate(models=tuple(models))


def posterior_gradient(s: GradientSurrogate, x: ArrayLike) -> PosteriorGradient:
    """
    Coordinate-wise posterior of the gradient.

    For a batch x of shape (m, d) the mean and var_diag have shape (m, d).
    """
    single = np.ndim(x) == 1
    Q = as_points(x)
    if Q.shape[1] != s.dim:
        raise DimensionMismatch(f"query dimension {Q.shape[1]} does not match surrogate dimension {s.dim}")
    mean = np.empty_like(Q)
    var = np.empty_like(Q)
    for i, model in enumerate(s.models):
        mean[:, i], var[:, i] = posterior(model, Q)
    if single:
        return PosteriorGradient(mean[0], var[0])
    return PosteriorGradient(mean, var)
