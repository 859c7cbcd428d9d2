# Surrogates Package
from .gp import GPModel, adaptive_cholesky, fit, joint_posterior, log_marginal_likelihood, posterior, posterior_mean_gradient
from .gradient import GradientSurrogate, PosteriorGradient, fit_gradient_models, posterior_gradient
from .kernels import eval_kernel, eval_kernel_matrix, log_hyperprior

__all__ = [
    "GPModel", "adaptive_cholesky", "fit", "joint_posterior", "log_marginal_likelihood", "posterior",
    "posterior_mean_gradient", "GradientSurrogate", "PosteriorGradient", "fit_gradient_models",
    "posterior_gradient", "eval_kernel", "eval_kernel_matrix", "log_hyperprior",
]
