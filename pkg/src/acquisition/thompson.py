"""
Thompson Sampling

Draws one joint posterior sample over a finite candidate set and returns
its maximizer.
"""

import logging
from typing import Optional, Union

import numpy as np
from numpy.typing import ArrayLike, NDArray

from ..protocols.bo_schema import FitConfig
from ..surrogates.gp import GPModel, adaptive_cholesky, joint_posterior
from ..surrogates.kernels import as_points

logger = logging.getLogger(__name__)


def thompson_select(
    model: GPModel,
    candidates: ArrayLike,
    seed: Union[int, np.random.Generator],
    cfg: Optional[FitConfig] = None,
) -> NDArray[np.float64]:
    """
    Maximizer of one joint posterior draw over the candidates.

    Args:
        model: Fitted GP
        candidates: (m, d) points in problem units
        seed: Seed or generator for the standard-normal draw
        cfg: Jitter ladder for the joint covariance (defaults to FitConfig())

    Returns:
        The selected candidate (d,)

    Raises:
        FactorizationFailed: if the joint covariance cannot be factorized
    """
    C = as_points(candidates)
    if C.shape[0] == 1:
        return C[0].copy()
    cfg = cfg or FitConfig()
    rng = seed if isinstance(seed, np.random.Generator) else np.random.Generator(np.random.Philox(seed))
    mu, cov = joint_posterior(model, C)
    # factorize in standardized units so the jitter ladder is scale-free
    scale2 = model.standardizer.y_std ** 2
    L, jitter = adaptive_cholesky(cov / scale2, cfg)
    sample = mu / model.standardizer.y_std + L @ rng.standard_normal(C.shape[0])
    idx = int(np.argmax(sample))
    logger.debug(f"Thompson draw over {C.shape[0]} candidates (jitter {jitter:g}) picked index {idx}")
    return C[idx].copy()
