"""
Gaussian Utilities and Expected Improvement

Standard-normal quantities in numerically stable form, closed-form EI and
log-EI. All functions broadcast over numpy arrays.
"""

import math
from typing import Tuple

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.special import erfcx, log_ndtr, ndtr

from ..protocols.errors import DegenerateVariance

LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)
SQRT_HALF_PI = math.sqrt(0.5 * math.pi)
INV_SQRT2 = 1.0 / math.sqrt(2.0)

# above this z the Mills ratio is evaluated in log space
MILLS_LOG_SWITCH = 5.0
# below this u log-EI switches to the erfcx form
LOG_EI_TAIL = -8.0
LOG_EI_ASYMPTOTIC = -1e3


def normal_logpdf(z: ArrayLike) -> NDArray[np.float64]:
    z = np.asarray(z, dtype=float)
    return -0.5 * z * z - LOG_SQRT_2PI


def inverse_mills(z: ArrayLike) -> NDArray[np.float64]:
    """phi(z) / Phi(-z), the standard-normal hazard."""
    z = np.asarray(z, dtype=float)
    direct = np.exp(normal_logpdf(z)) / np.maximum(ndtr(-z), np.finfo(float).tiny)
    logspace = np.exp(normal_logpdf(z) - log_ndtr(-z))
    return np.where(z > MILLS_LOG_SWITCH, logspace, direct)


def normal_pdf_cdf(z: ArrayLike) -> Tuple[NDArray, NDArray, NDArray, NDArray]:
    """
    Standard-normal pdf, cdf, log-cdf and inverse Mills ratio at z.

    Returns:
        (pdf, cdf, log_cdf, mills) with mills = phi(z) / Phi(-z)
    """
    z = np.asarray(z, dtype=float)
    return np.exp(normal_logpdf(z)), ndtr(z), log_ndtr(z), inverse_mills(z)


def ei(mu: ArrayLike, sigma: ArrayLike, best: ArrayLike) -> NDArray[np.float64]:
    """
    Expected improvement E[max(f - best, 0)] for f ~ N(mu, sigma^2).

    sigma == 0 gives max(mu - best, 0).
    """
    mu, sigma, best = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (mu, sigma, best)))
    diff = mu - best
    with np.errstate(divide="ignore", invalid="ignore"):
        u = np.where(sigma > 0.0, diff / np.where(sigma > 0.0, sigma, 1.0), 0.0)
        val = diff * ndtr(u) + sigma * np.exp(normal_logpdf(u))
    out = np.where(sigma > 0.0, np.maximum(val, 0.0), np.maximum(diff, 0.0))
    return out if out.ndim else out[()]


def _log_h(u: NDArray) -> NDArray:
    """log(phi(u) + u * Phi(u)), the standardized log-EI."""
    out = np.empty_like(u)
    upper = u >= LOG_EI_TAIL
    uu = u[upper]
    out[upper] = np.log(np.exp(normal_logpdf(uu)) + uu * ndtr(uu))
    mid = (u < LOG_EI_TAIL) & (u >= LOG_EI_ASYMPTOTIC)
    um = u[mid]
    # phi(u) + u Phi(u) = phi(u) (1 + u r), r = Phi(u)/phi(u) = sqrt(pi/2) erfcx(-u/sqrt 2)
    r = SQRT_HALF_PI * erfcx(-um * INV_SQRT2)
    out[mid] = normal_logpdf(um) + np.log1p(um * r)
    deep = u < LOG_EI_ASYMPTOTIC
    inv2 = 1.0 / u[deep] ** 2
    # 1 + u r = 1/u^2 - 3/u^4 + 15/u^6 - ...
    out[deep] = normal_logpdf(u[deep]) + np.log(inv2) + np.log1p(-3.0 * inv2 + 15.0 * inv2 * inv2)
    return out


def log_ei(mu: ArrayLike, sigma: ArrayLike, best: ArrayLike) -> NDArray[np.float64]:
    """
    log EI computed without underflow in the deep tail.

    Raises:
        DegenerateVariance: if any sigma <= 0
    """
    mu, sigma, best = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (mu, sigma, best)))
    if np.any(~(sigma > 0.0)):
        raise DegenerateVariance("log_ei requires sigma > 0")
    u = np.atleast_1d((mu - best) / sigma)
    out = (_log_h(u) + np.log(np.atleast_1d(sigma))).reshape(mu.shape)
    return out if out.ndim else out[()]
