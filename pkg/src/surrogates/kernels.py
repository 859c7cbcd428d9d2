"""
Kernel Core

Matérn-5/2 and RBF covariance functions with ARD lengthscales, their input
gradients, and the hyperprior log-density used for MAP fitting.
"""

import logging
import math

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import stats
from scipy.spatial.distance import cdist

from ..protocols.bo_schema import HyperpriorSpec, KernelFamily, KernelSpec
from ..protocols.errors import DimensionMismatch, InvalidHyperparameter

logger = logging.getLogger(__name__)

SQRT5 = math.sqrt(5.0)


def as_points(X: ArrayLike) -> NDArray[np.float64]:
    """Coerce to a 2-d float array of shape (n, d)."""
    arr = np.asarray(X, dtype=float)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2:
        raise DimensionMismatch(f"expected points of shape (n, d), got {arr.shape}")
    return arr


def lengthscale_vector(spec: KernelSpec, dim: int) -> NDArray[np.float64]:
    ls = np.asarray(spec.lengthscales, dtype=float)
    if ls.size == 1:
        return np.full(dim, ls[0])
    if ls.size != dim:
        raise DimensionMismatch(f"kernel has {ls.size} ARD lengthscales but inputs have dimension {dim}")
    return ls


def _scaled_sqdist(spec: KernelSpec, X1: NDArray, X2: NDArray) -> NDArray[np.float64]:
    if X1.shape[1] != X2.shape[1]:
        raise DimensionMismatch(f"point dimensions differ: {X1.shape[1]} vs {X2.shape[1]}")
    ls = lengthscale_vector(spec, X1.shape[1])
    return cdist(X1 / ls, X2 / ls, metric="sqeuclidean")


def _from_sqdist(spec: KernelSpec, sq: NDArray) -> NDArray[np.float64]:
    if spec.family == KernelFamily.RBF:
        return spec.outputscale * np.exp(-0.5 * sq)
    r = np.sqrt(sq)
    # r == 0 gives exactly outputscale; no division by r anywhere
    s5r = SQRT5 * r
    return spec.outputscale * (1.0 + s5r + (5.0 / 3.0) * sq) * np.exp(-s5r)


def kernel_cross(spec: KernelSpec, X1: ArrayLike, X2: ArrayLike) -> NDArray[np.float64]:
    """k(X1, X2) as an (n1, n2) matrix."""
    A, B = as_points(X1), as_points(X2)
    return _from_sqdist(spec, _scaled_sqdist(spec, A, B))


def eval_kernel(spec: KernelSpec, x1: ArrayLike, x2: ArrayLike) -> float:
    """
    Covariance between two points.

    Args:
        spec: Kernel family and hyperparameters
        x1: First point (length d)
        x2: Second point (length d)

    Returns:
        k(x1, x2), symmetric in its arguments
    """
    a = np.atleast_1d(np.asarray(x1, dtype=float))
    b = np.atleast_1d(np.asarray(x2, dtype=float))
    if a.ndim != 1 or b.ndim != 1 or a.shape != b.shape:
        raise DimensionMismatch(f"points must be vectors of equal length, got {a.shape} and {b.shape}")
    return float(kernel_cross(spec, a, b)[0, 0])


def eval_kernel_matrix(spec: KernelSpec, X: ArrayLike, noise: float = 0.0) -> NDArray[np.float64]:
    """
    Kernel matrix K = k(X, X) + noise * I.

    Args:
        spec: Kernel family and hyperparameters
        X: Nonempty (n, d) point set
        noise: Nonnegative diagonal term

    Returns:
        Symmetric (n, n) matrix
    """
    P = as_points(X)
    if P.shape[0] == 0:
        raise DimensionMismatch("kernel matrix needs at least one point")
    K = kernel_cross(spec, P, P)
    K[np.diag_indices_from(K)] += noise
    return K


def kernel_input_gradient(spec: KernelSpec, x: ArrayLike, X: ArrayLike) -> NDArray[np.float64]:
    """
    Gradient of k(x, X_j) with respect to x.

    Returns:
        Array of shape (m, n, d) for m query points and n training points
    """
    Q, P = as_points(x), as_points(X)
    ls = lengthscale_vector(spec, Q.shape[1])
    diff = (Q[:, None, :] - P[None, :, :]) / ls**2
    sq = _scaled_sqdist(spec, Q, P)
    if spec.family == KernelFamily.RBF:
        k = spec.outputscale * np.exp(-0.5 * sq)
        return -k[:, :, None] * diff
    r = np.sqrt(sq)
    coeff = -(5.0 / 3.0) * spec.outputscale * (1.0 + SQRT5 * r) * np.exp(-SQRT5 * r)
    return coeff[:, :, None] * diff


def log_hyperprior(spec: KernelSpec, priors: HyperpriorSpec) -> float:
    """
    Sum of hyperprior log-densities over all lengthscales and the outputscale.

    Raises:
        InvalidHyperparameter: if any hyperparameter is not positive
    """
    ls = np.asarray(spec.lengthscales, dtype=float)
    if np.any(~(ls > 0.0)) or not (spec.outputscale > 0.0):
        raise InvalidHyperparameter(
            f"hyperparameters must be positive: lengthscales={spec.lengthscales}, outputscale={spec.outputscale}"
        )
    ls_term = stats.lognorm.logpdf(ls, s=priors.lengthscale_scale, scale=math.exp(priors.lengthscale_loc))
    os_term = stats.gamma.logpdf(spec.outputscale, a=priors.outputscale_shape, scale=1.0 / priors.outputscale_rate)
    return float(np.sum(ls_term) + os_term)
