"""
Closed-Form EI-GN Components

Incumbent selection, whitening of the incumbent gradient against the
gradient posterior, the mean-field stationarity term and the EI-GN
combination rule.

The stationarity term is the expected squared-norm change restricted to
the orthant {z >= z+} of the whitened gradient. With a diagonal gradient
posterior it separates per coordinate:

    P  * ( ||mu||^2 - ||g+||^2 + 2 sum mu_i L_i w_i + sum s_i^2 (1 + z_i w_i) )

where P = prod Phi(-z_i), w_i = phi(z_i) / Phi(-z_i) and s_i = L_i.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.special import log_ndtr

from ..protocols.bo_schema import AcquisitionConfig, IncumbentRule, RescaleMode
from ..protocols.errors import DimensionMismatch, NonpositiveVariance
from ..surrogates.gradient import PosteriorGradient
from .gaussian import inverse_mills

logger = logging.getLogger(__name__)

POOL_STD_FLOOR = 1e-12


@dataclass(frozen=True, eq=False)
class Incumbent:
    """The observation anchoring both improvement terms."""
    index: int
    x_plus: NDArray[np.float64]
    f_plus: float
    grad_plus: NDArray[np.float64]
    g_plus: float


@dataclass(frozen=True, eq=False)
class WhitenedIncumbent:
    """Incumbent gradient in the whitened coordinates of a gradient posterior."""
    L_diag: NDArray[np.float64]
    z_plus: NDArray[np.float64]
    w: NDArray[np.float64]
    log_phi_prod: Union[float, NDArray[np.float64]]


@dataclass(frozen=True)
class PoolStats:
    """Frozen component statistics of the optimizer's raw pool."""
    mean_f: float
    std_f: float
    mean_s: float
    std_s: float

    @classmethod
    def from_pool(cls, ei_f: ArrayLike, ei_s: ArrayLike) -> "PoolStats":
        f = np.asarray(ei_f, dtype=float)
        s = np.asarray(ei_s, dtype=float)
        return cls(float(np.mean(f)), _floored_std(f), float(np.mean(s)), _floored_std(s))


def _floored_std(v: NDArray) -> float:
    std = float(np.std(v))
    return std if std > POOL_STD_FLOOR else 1.0


def select_incumbent(X: ArrayLike, y: ArrayLike, grad_y: ArrayLike, cfg: AcquisitionConfig) -> Incumbent:
    """
    Pick x+ by the configured rule.

    g_incumbent maximizes y - alpha ||grad y||^2, f_incumbent maximizes y;
    ties go to the lowest observation index.
    """
    Xa = np.atleast_2d(np.asarray(X, dtype=float))
    ya = np.asarray(y, dtype=float).ravel()
    G = np.atleast_2d(np.asarray(grad_y, dtype=float))
    if ya.size == 0:
        raise DimensionMismatch("incumbent selection needs at least one observation")
    if not (Xa.shape[0] == ya.size == G.shape[0]):
        raise DimensionMismatch(f"dataset sizes differ: X {Xa.shape}, y {ya.shape}, grad {G.shape}")
    g = ya - cfg.alpha * np.sum(G * G, axis=1)
    idx = int(np.argmax(g if cfg.incumbent_rule == IncumbentRule.G_INCUMBENT else ya))
    return Incumbent(index=idx, x_plus=Xa[idx].copy(), f_plus=float(ya[idx]),
                     grad_plus=G[idx].copy(), g_plus=float(g[idx]))


def whiten(pg: PosteriorGradient, grad_plus: ArrayLike) -> WhitenedIncumbent:
    """
    z+ = L^-1 (grad_plus - mu) for diagonal L = sqrt(var_diag).

    Broadcasts over a batch of posteriors (mean of shape (m, d)).

    Raises:
        NonpositiveVariance: if any var_diag entry is <= 0
    """
    gp_ = np.asarray(grad_plus, dtype=float)
    if gp_.shape[-1] != pg.dim:
        raise DimensionMismatch(f"grad_plus has {gp_.shape[-1]} entries, posterior has {pg.dim}")
    if np.any(~(pg.var_diag > 0.0)):
        raise NonpositiveVariance("gradient variances must be floored above zero before whitening")
    L = np.sqrt(pg.var_diag)
    z = (gp_ - pg.mean) / L
    log_phi_prod = np.sum(log_ndtr(-z), axis=-1)
    return WhitenedIncumbent(L_diag=L, z_plus=z, w=inverse_mills(z), log_phi_prod=log_phi_prod)


def ei_s_bar(pg: PosteriorGradient, grad_plus: ArrayLike) -> Union[float, NDArray[np.float64]]:
    """
    Mean-field stationarity improvement, O(d) per candidate.

    Returns a float for a single posterior, an (m,) array for a batch.
    """
    wi = whiten(pg, grad_plus)
    gp_ = np.asarray(grad_plus, dtype=float)
    mu = pg.mean
    term = (
        np.sum(mu * mu, axis=-1)
        - float(gp_ @ gp_)
        + 2.0 * np.sum(mu * wi.L_diag * wi.w, axis=-1)
        + np.sum(pg.var_diag * (1.0 + wi.z_plus * wi.w), axis=-1)
    )
    value = np.exp(wi.log_phi_prod) * term
    return float(value) if np.ndim(value) == 0 else value


def ei_gn(
    ei_f: ArrayLike,
    ei_s: ArrayLike,
    cfg: AcquisitionConfig,
    pool_stats: Optional[PoolStats] = None,
) -> Union[float, NDArray[np.float64]]:
    """
    Combine the two components.

    rescale none: ei_f - alpha * ei_s (exactly ei_f when alpha == 0).
    rescale pool_zscore: zscore(ei_f) - alpha * zscore(ei_s) with frozen pool statistics.
    """
    if cfg.rescale == RescaleMode.NONE:
        if cfg.alpha == 0.0:
            return ei_f
        return np.asarray(ei_f) - cfg.alpha * np.asarray(ei_s)
    if pool_stats is None:
        raise ValueError("pool_zscore rescaling needs pool statistics")
    zf = (np.asarray(ei_f) - pool_stats.mean_f) / pool_stats.std_f
    zs = (np.asarray(ei_s) - pool_stats.mean_s) / pool_stats.std_s
    return zf - cfg.alpha * zs
