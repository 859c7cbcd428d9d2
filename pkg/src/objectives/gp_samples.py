"""
GP-Sample Objectives

Black-box objectives drawn from a zero-mean RBF GP prior: a joint sample at
scrambled Sobol anchors in the unit cube, interpolated by the noiseless
posterior mean. The objective's gradient is the analytic gradient of that
posterior mean.
"""

import logging
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

import numpy as np
from numpy.typing import NDArray

from ..protocols.bo_schema import FitConfig, GPSampleSpec, HyperpriorSpec, KernelFamily, ProblemMode
from ..optimizer.acq_optimizer import sobol_points
from ..surrogates.gp import adaptive_cholesky, fit, posterior, posterior_mean_gradient
from ..surrogates.kernels import eval_kernel_matrix
from .synthetic import Problem, ProblemDefaults

logger = logging.getLogger(__name__)

# init, budget, printed raw, printed restarts per dimension
GP_SAMPLE_DEFAULTS = {
    7: ProblemDefaults(21, 175, 10, 512),
    8: ProblemDefaults(24, 200, 20, 1024),
    9: ProblemDefaults(27, 250, 20, 1024),
}


@dataclass(frozen=True, eq=False)
class GPSampleProblem(Problem):
    """A Problem that also keeps its generating spec and anchor sample."""
    spec: Optional[GPSampleSpec] = None
    anchors: Optional[NDArray[np.float64]] = field(default=None, repr=False)
    anchor_values: Optional[NDArray[np.float64]] = field(default=None, repr=False)


def gp_sample_defaults(dim: int) -> ProblemDefaults:
    return GP_SAMPLE_DEFAULTS.get(dim, ProblemDefaults(3 * dim, 25 * dim, 20, 1024))


def surrogate_config_for(spec: GPSampleSpec) -> FitConfig:
    """
    Surrogate settings matching the comparison mode.

    within: the generating prior, fixed, noiseless, unstandardized.
    out: Matérn-5/2 ARD with the default hyperpriors, refit every iteration.
    """
    if spec.mode == ProblemMode.WITHIN:
        return FitConfig(family=KernelFamily.RBF, ard=False, noise=0.0, standardize_outputs=False,
                         fixed_hyperparams=spec.prior_kernel())
    return FitConfig(family=KernelFamily.MATERN52, ard=True, hyperpriors=HyperpriorSpec())


@lru_cache(maxsize=32)
def make_gp_sample_objective(spec: GPSampleSpec) -> GPSampleProblem:
    """
    Build the objective for a GP-sample spec; deterministic per seed.

    Raises:
        FactorizationFailed: if the anchor covariance cannot be factorized
    """
    d = spec.dim
    kernel = spec.prior_kernel()
    anchor_seed = np.random.SeedSequence([spec.seed, 0])
    value_seed = np.random.SeedSequence([spec.seed, 1])
    anchors = sobol_points(spec.anchors, np.zeros(d), np.ones(d), anchor_seed)
    cfg = FitConfig(family=KernelFamily.RBF, ard=False, noise=0.0, standardize_outputs=False,
                    fixed_hyperparams=kernel)
    L, jitter = adaptive_cholesky(eval_kernel_matrix(kernel, anchors, 0.0), cfg)
    values = L @ np.random.Generator(np.random.Philox(value_seed)).standard_normal(anchors.shape[0])
    model = fit(anchors, values, cfg)
    logger.info(f"Built gp-{spec.mode.value}-{d} seed {spec.seed}: {anchors.shape[0]} anchors, "
                f"lengthscale {spec.lengthscale:.4f}, jitter {jitter:g}")

    def evaluate(x: np.ndarray):
        mu, _ = posterior(model, x)
        return mu, posterior_mean_gradient(model, x)

    return GPSampleProblem(
        name=f"gp-{spec.mode.value}-{d}:{spec.seed}", dim=d, lower=np.zeros(d), upper=np.ones(d),
        fn=evaluate, defaults=gp_sample_defaults(d), spec=spec, anchors=anchors, anchor_values=values,
    )
