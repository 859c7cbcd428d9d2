"""
Acquisition Functions

Batch-evaluable acquisition objects wrapping fitted surrogates. Each maps
an (m, d) array of candidates in problem units to m values; the inner
optimizer maximizes them.
"""

import logging
from abc import ABC, abstractmethod
from typing import Optional, Tuple

import numpy as np
from numpy.typing import ArrayLike, NDArray

from ..protocols.bo_schema import AcquisitionConfig, RescaleMode
from ..surrogates.gp import GPModel, posterior
from ..surrogates.gradient import GradientSurrogate, PosteriorGradient, posterior_gradient
from .closed_form import Incumbent, PoolStats, ei_gn, ei_s_bar
from .gaussian import ei, log_ei

logger = logging.getLogger(__name__)


class AcquisitionFunction(ABC):
    """
    Base class for acquisitions.

    Subclasses implement evaluate(); prepare_pool() is called once with the
    optimizer's raw pool before any refinement.
    """

    def __call__(self, X: ArrayLike) -> NDArray[np.float64]:
        Q = np.atleast_2d(np.asarray(X, dtype=float))
        return np.asarray(self.evaluate(Q), dtype=float).reshape(Q.shape[0])

    @abstractmethod
    def evaluate(self, X: NDArray[np.float64]) -> NDArray[np.float64]:
        pass

    def prepare_pool(self, X: NDArray[np.float64]) -> None:
        pass


class ExpectedImprovement(AcquisitionFunction):
    """Closed-form EI against a fixed best value."""

    def __init__(self, model: GPModel, best: float):
        self.model = model
        self.best = best

    def evaluate(self, X: NDArray[np.float64]) -> NDArray[np.float64]:
        mu, var = posterior(self.model, X)
        return ei(mu, np.sqrt(var), self.best)


class LogExpectedImprovement(AcquisitionFunction):
    """log EI; zero posterior variance gives -inf instead of raising."""

    def __init__(self, model: GPModel, best: float):
        self.model = model
        self.best = best

    def evaluate(self, X: NDArray[np.float64]) -> NDArray[np.float64]:
        mu, var = posterior(self.model, X)
        sigma = np.sqrt(var)
        out = np.full(mu.shape, -np.inf)
        ok = sigma > 0.0
        if np.any(ok):
            out[ok] = log_ei(mu[ok], sigma[ok], self.best)
        return out


class EIGradientNorm(AcquisitionFunction):
    """
    EI-GN: EI on f minus alpha times the mean-field stationarity term.

    Both components share one incumbent. With pool_zscore rescaling the
    component statistics are frozen by prepare_pool().
    """

    def __init__(self, model: GPModel, grad_surrogate: GradientSurrogate, incumbent: Incumbent,
                 cfg: AcquisitionConfig):
        self.model = model
        self.grad_surrogate = grad_surrogate
        self.incumbent = incumbent
        self.cfg = cfg
        self.pool_stats: Optional[PoolStats] = None

    def components(self, X: ArrayLike) -> Tuple[NDArray[np.float64], NDArray[np.float64]]:
        """(ei_f, ei_s) for a batch of candidates."""
        Q = np.atleast_2d(np.asarray(X, dtype=float))
        mu, var = posterior(self.model, Q)
        ei_f = ei(mu, np.sqrt(var), self.incumbent.f_plus)
        pg = posterior_gradient(self.grad_surrogate, Q)
        floored = PosteriorGradient(pg.mean, np.maximum(pg.var_diag, self.cfg.variance_floor))
        ei_s = ei_s_bar(floored, self.incumbent.grad_plus)
        return np.atleast_1d(ei_f), np.atleast_1d(ei_s)

    def prepare_pool(self, X: NDArray[np.float64]) -> None:
        if self.cfg.rescale != RescaleMode.POOL_ZSCORE:
            return
        ei_f, ei_s = self.components(X)
        self.pool_stats = PoolStats.from_pool(ei_f, ei_s)
        logger.debug(
            f"Frozen pool statistics over {len(ei_f)} candidates: "
            f"ei_f {self.pool_stats.mean_f:.3g}+/-{self.pool_stats.std_f:.3g}, "
            f"ei_s {self.pool_stats.mean_s:.3g}+/-{self.pool_stats.std_s:.3g}"
        )

    def evaluate(self, X: NDArray[np.float64]) -> NDArray[np.float64]:
        if self.cfg.rescale == RescaleMode.POOL_ZSCORE and self.pool_stats is None:
            self.prepare_pool(X)
        ei_f, ei_s = self.components(X)
        return ei_gn(ei_f, ei_s, self.cfg, self.pool_stats)
