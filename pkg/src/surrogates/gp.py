"""
Exact GP Surrogate

GP regression with standardized inputs/outputs, an adaptive-jitter
Cholesky factorization, MAP hyperparameter fitting in log space and
posterior prediction (mean, variance, mean gradient, joint covariance).
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Tuple, Union

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import stats
from scipy.linalg import LinAlgError, cho_solve, cholesky, solve_triangular
from scipy.optimize import minimize

from ..metrics import CHOLESKY_JITTER, GP_FITS
from ..optimizer.finite_diff import fd_gradient
from ..protocols.bo_schema import FitConfig, KernelSpec
from ..protocols.errors import DimensionMismatch, FactorizationFailed
from .kernels import as_points, eval_kernel_matrix, kernel_cross, kernel_input_gradient, log_hyperprior

logger = logging.getLogger(__name__)

LOG_2PI = math.log(2.0 * math.pi)

# returned to the minimizer when a trial kernel cannot be factorized
FAILED_FIT_PENALTY = 1e10


@dataclass(frozen=True, eq=False)
class Standardizer:
    """Affine maps: inputs to the unit cube, outputs to zero mean / unit std."""
    lower: NDArray[np.float64]
    scale: NDArray[np.float64]
    y_mean: float = 0.0
    y_std: float = 1.0

    @classmethod
    def build(cls, X: NDArray, y: NDArray, bounds: Optional[ArrayLike], standardize_outputs: bool) -> "Standardizer":
        d = X.shape[1]
        if bounds is None:
            lower, scale = np.zeros(d), np.ones(d)
        else:
            b = np.asarray(bounds, dtype=float)
            if b.shape != (2, d):
                raise DimensionMismatch(f"bounds must have shape (2, {d}), got {b.shape}")
            lower, scale = b[0].copy(), b[1] - b[0]
        if not standardize_outputs:
            return cls(lower, scale)
        mean = float(np.mean(y))
        std = float(np.std(y))
        if not std > 0.0:
            std = 1.0
        return cls(lower, scale, mean, std)

    def inputs(self, X: NDArray) -> NDArray[np.float64]:
        return (X - self.lower) / self.scale

    def outputs(self, y: NDArray) -> NDArray[np.float64]:
        return (y - self.y_mean) / self.y_std


@dataclass(frozen=True, eq=False)
class GPModel:
    """
    A factorized GP posterior.

    X and y_std live in normalized space; posterior() takes and returns
    original units.
    """
    X: NDArray[np.float64]
    y_std: NDArray[np.float64]
    kernel: KernelSpec
    noise: float
    jitter: float
    chol: NDArray[np.float64]
    alpha_vec: NDArray[np.float64]
    standardizer: Standardizer
    restart_values: Tuple[Tuple[float, float], ...] = field(default=())

    @property
    def dim(self) -> int:
        return self.X.shape[1]

    @property
    def n(self) -> int:
        return self.X.shape[0]


def adaptive_cholesky(
    K: NDArray[np.float64], cfg: FitConfig, record: bool = True
) -> Tuple[NDArray[np.float64], float]:
    """
    Cholesky factor of K with the smallest jitter on the ladder that works.

    Args:
        K: Square symmetric matrix
        cfg: Supplies the jitter ladder bounds
        record: Log and count jitter escalation (off inside fitting loops)

    Returns:
        (L, jitter_used) with L @ L.T == K + jitter_used * I

    Raises:
        FactorizationFailed: when even max_jitter does not give a factor
    """
    K = np.asarray(K, dtype=float)
    if K.ndim != 2 or K.shape[0] != K.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {K.shape}")
    if not np.all(np.isfinite(K)):
        raise FactorizationFailed(cfg.max_jitter, detail="matrix has non-finite entries")
    for jitter in cfg.jitter_ladder():
        try:
            Kj = K.copy()
            Kj[np.diag_indices_from(Kj)] += jitter
            L = cholesky(Kj, lower=True, overwrite_a=True, check_finite=False)
        except LinAlgError:
            continue
        if not np.all(np.isfinite(L)):
            continue
        if not record:
            return L, jitter
        if jitter > 1e-6:
            logger.warning(f"Cholesky needed jitter {jitter:g} for a {K.shape[0]}x{K.shape[0]} matrix")
        CHOLESKY_JITTER.labels(level=f"{jitter:g}").inc()
        return L, jitter
    raise FactorizationFailed(cfg.max_jitter)


def _factorize(
    X: NDArray, y_std: NDArray, kernel: KernelSpec, cfg: FitConfig, standardizer: Standardizer,
    restart_values: Tuple[Tuple[float, float], ...] = (), record: bool = True,
) -> GPModel:
    K = eval_kernel_matrix(kernel, X, cfg.noise)
    L, jitter = adaptive_cholesky(K, cfg, record)
    alpha_vec = cho_solve((L, True), y_std - kernel.mean_constant, check_finite=False)
    return GPModel(
        X=X, y_std=y_std, kernel=kernel, noise=cfg.noise, jitter=jitter, chol=L,
        alpha_vec=alpha_vec, standardizer=standardizer, restart_values=restart_values,
    )


def log_marginal_likelihood(model: GPModel) -> float:
    """log N(y_std | m, K) for a factorized model."""
    resid = model.y_std - model.kernel.mean_constant
    return float(
        -0.5 * resid @ model.alpha_vec
        - np.sum(np.log(np.diag(model.chol)))
        - 0.5 * model.n * LOG_2PI
    )


def _kernel_from_theta(theta: NDArray, cfg: FitConfig) -> KernelSpec:
    return KernelSpec(
        family=cfg.family,
        lengthscales=np.exp(theta[:-1]).tolist(),
        outputscale=float(np.exp(theta[-1])),
    )


def _initial_thetas(n_ls: int, cfg: FitConfig, rng: np.random.Generator) -> NDArray[np.float64]:
    """Restart 0 at the prior median lengthscale and unit scale; the rest drawn from the priors."""
    lo, hi = cfg.log_bounds
    pri = cfg.hyperpriors
    starts = np.empty((cfg.restarts, n_ls + 1))
    starts[0, :n_ls] = pri.lengthscale_loc
    starts[0, n_ls] = 0.0
    if cfg.restarts > 1:
        m = cfg.restarts - 1
        ls = stats.lognorm.rvs(s=pri.lengthscale_scale, scale=math.exp(pri.lengthscale_loc),
                               size=(m, n_ls), random_state=rng)
        os_ = stats.gamma.rvs(a=pri.outputscale_shape, scale=1.0 / pri.outputscale_rate,
                              size=m, random_state=rng)
        starts[1:, :n_ls] = np.log(ls)
        starts[1:, n_ls] = np.log(os_)
    return np.clip(starts, lo, hi)


def fit(
    X: ArrayLike,
    y: ArrayLike,
    cfg: FitConfig,
    bounds: Optional[ArrayLike] = None,
    rng: Optional[Union[np.random.Generator, int]] = None,
) -> GPModel:
    """
    Fit a GP by multi-start MAP in log-hyperparameter space.

    Args:
        X: (N, d) training inputs in original units
        y: (N,) targets
        cfg: Fit settings; fixed_hyperparams skips optimization
        bounds: (2, d) box mapped to the unit cube; identity map when None
        rng: Generator or seed for the prior-sampled restarts

    Returns:
        Factorized GPModel

    Raises:
        FactorizationFailed: if no restart gives a factorizable kernel
    """
    Xa = as_points(X)
    ya = np.asarray(y, dtype=float).ravel()
    if Xa.shape[0] != ya.shape[0]:
        raise DimensionMismatch(f"{Xa.shape[0]} inputs but {ya.shape[0]} targets")
    if Xa.shape[0] < 1:
        raise DimensionMismatch("fit needs at least one observation")
    standardizer = Standardizer.build(Xa, ya, bounds, cfg.standardize_outputs)
    Xn = standardizer.inputs(Xa)
    ys = standardizer.outputs(ya)

    if cfg.fixed_hyperparams is not None:
        GP_FITS.labels(kind="fixed").inc()
        return _factorize(Xn, ys, cfg.fixed_hyperparams, cfg, standardizer)

    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(0 if rng is None else rng)

    d = Xn.shape[1]
    n_ls = d if cfg.ard else 1
    lo, hi = cfg.log_bounds
    box_lo = np.full(n_ls + 1, lo)
    box_hi = np.full(n_ls + 1, hi)

    def objective(theta: NDArray) -> float:
        kernel = _kernel_from_theta(theta, cfg)
        try:
            model = _factorize(Xn, ys, kernel, cfg, standardizer, record=False)
        except FactorizationFailed:
            return FAILED_FIT_PENALTY
        value = -(log_marginal_likelihood(model) + log_hyperprior(kernel, cfg.hyperpriors))
        return value if np.isfinite(value) else FAILED_FIT_PENALTY

    def gradient(theta: NDArray) -> NDArray:
        return fd_gradient(objective, theta, cfg.fd_step, box_lo, box_hi)

    best_theta: Optional[NDArray] = None
    best_value = np.inf
    history = []
    for i, theta0 in enumerate(_initial_thetas(n_ls, cfg, rng)):
        start_value = objective(theta0)
        result = minimize(objective, theta0, jac=gradient, method="L-BFGS-B",
                          bounds=list(zip(box_lo, box_hi)), options={"maxiter": cfg.max_iters})
        theta, value = (result.x, float(result.fun)) if result.fun <= start_value else (theta0, start_value)
        history.append((-start_value, -value))
        logger.debug(f"GP fit restart {i}: MAP objective {-start_value:.4f} -> {-value:.4f}")
        # strict comparison keeps the lowest restart index on ties
        if value < best_value:
            best_theta, best_value = theta, value

    if best_theta is None or best_value >= FAILED_FIT_PENALTY:
        raise FactorizationFailed(cfg.max_jitter, detail="no restart produced a factorizable kernel")
    GP_FITS.labels(kind="map").inc()
    return _factorize(Xn, ys, _kernel_from_theta(best_theta, cfg), cfg, standardizer, tuple(history))


def _query(model: GPModel, x: ArrayLike) -> Tuple[NDArray[np.float64], bool]:
    single = np.ndim(x) == 1
    Q = as_points(x)
    if Q.shape[1] != model.dim:
        raise DimensionMismatch(f"query dimension {Q.shape[1]} does not match model dimension {model.dim}")
    return model.standardizer.inputs(Q), single


def posterior(model: GPModel, x: ArrayLike) -> Tuple[Union[float, NDArray], Union[float, NDArray]]:
    """
    Posterior mean and variance in original units.

    Args:
        model: Fitted GP
        x: Point (d,) or batch (m, d) in original units

    Returns:
        (mu, var) as floats for a single point, else arrays of shape (m,)
    """
    Q, single = _query(model, x)
    Ks = kernel_cross(model.kernel, Q, model.X)
    mu = model.kernel.mean_constant + Ks @ model.alpha_vec
    v = solve_triangular(model.chol, Ks.T, lower=True, check_finite=False)
    var = np.maximum(model.kernel.outputscale - np.sum(v * v, axis=0), 0.0)
    s = model.standardizer
    mu = s.y_mean + s.y_std * mu
    var = s.y_std**2 * var
    if single:
        return float(mu[0]), float(var[0])
    return mu, var


def posterior_mean_gradient(model: GPModel, x: ArrayLike) -> NDArray[np.float64]:
    """d mu / dx in original units; shape (d,) or (m, d)."""
    Q, single = _query(model, x)
    dK = kernel_input_gradient(model.kernel, Q, model.X)
    grad = np.einsum("mnd,n->md", dK, model.alpha_vec)
    grad = grad * model.standardizer.y_std / model.standardizer.scale
    return grad[0] if single else grad


def joint_posterior(model: GPModel, x: ArrayLike) -> Tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Joint posterior mean (m,) and covariance (m, m) in original units."""
    Q, _ = _query(model, x)
    Ks = kernel_cross(model.kernel, Q, model.X)
    mu = model.kernel.mean_constant + Ks @ model.alpha_vec
    v = solve_triangular(model.chol, Ks.T, lower=True, check_finite=False)
    cov = kernel_cross(model.kernel, Q, Q) - v.T @ v
    cov = 0.5 * (cov + cov.T)
    s = model.standardizer
    return s.y_mean + s.y_std * mu, s.y_std**2 * cov
