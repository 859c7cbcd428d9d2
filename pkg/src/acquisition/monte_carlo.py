"""
Monte Carlo Oracles

Sampling estimates of EI_f, EI_s, the orthant-restricted stationarity
term, EI_g and the improvement-event probability. All oracles draw from
one counter-based (Philox) stream with a fixed layout per chunk: first the
f-noise, then the (chunk, d) gradient noise. Oracles called with the same
seed therefore see the same samples, so the lower bound and the event
bound hold sample for sample.

The orthant oracle is the exception: it samples the whitened gradient
conditionally on the orthant, coordinate by coordinate, and weights by the
orthant probability, so rare orthants still get a finite standard error.
"""

import logging
import math
from dataclasses import dataclass
from typing import Iterator, Optional, Tuple

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import stats
from scipy.special import log_ndtr

from ..config import get_settings
from ..protocols.bo_schema import EventSpec
from ..surrogates.gradient import PosteriorGradient
from .closed_form import Incumbent

logger = logging.getLogger(__name__)

ORTHANT_VARIANCE_FLOOR = 1e-12
# exp() of anything lower is 0.0 in double precision
LOG_WEIGHT_FLOOR = -745.0


@dataclass(frozen=True)
class MCEstimate:
    """Sample mean with its standard error (sample std / sqrt(n))."""
    estimate: float
    std_error: float

    def __iter__(self):
        return iter((self.estimate, self.std_error))


@dataclass(frozen=True)
class BoundCheck:
    """Lower-bound comparison ei_g >= ei_f - alpha * ei_s."""
    ei_g: MCEstimate
    ei_f: MCEstimate
    ei_s: MCEstimate
    combined_se: float
    holds: bool


@dataclass(frozen=True)
class EventCheck:
    """Event-bound comparison ei_g >= alpha (1 - c) delta P(event)."""
    p_event: float
    lhs_ei_g: float
    rhs_bound: float
    combined_se: float
    holds: bool

    def __iter__(self):
        return iter((self.p_event, self.lhs_ei_g, self.rhs_bound, self.holds))


class _Accumulator:
    """Running sums for a mean and its standard error."""

    def __init__(self):
        self.n = 0
        self.total = 0.0
        self.total_sq = 0.0

    def add(self, v: NDArray) -> None:
        self.n += v.size
        self.total += float(np.sum(v))
        self.total_sq += float(np.sum(v * v))

    def result(self) -> MCEstimate:
        mean = self.total / self.n
        if self.n < 2:
            return MCEstimate(mean, 0.0)
        var = max(self.total_sq - self.n * mean * mean, 0.0) / (self.n - 1)
        return MCEstimate(mean, math.sqrt(var / self.n))


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


def _draw_joint(seed: int, n: int, d: int, chunk: Optional[int] = None) -> Iterator[Tuple[NDArray, NDArray]]:
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n}")
    rng = _rng(seed)
    chunk = chunk or get_settings().mc_chunk
    for start in range(0, n, chunk):
        m = min(chunk, n - start)
        eps = rng.standard_normal(m)
        Z = rng.standard_normal((m, d))
        yield eps, Z


def _grad_samples(pg: PosteriorGradient, Z: NDArray) -> NDArray:
    return pg.mean + np.sqrt(pg.var_diag) * Z


def mc_ei_f(mu: float, sigma: float, best: float, n: int, seed: int, dim: int = 0) -> MCEstimate:
    """
    E[max(f - best, 0)] with f ~ N(mu, sigma^2).

    dim only fixes the draw layout so the f-noise matches a joint oracle of
    that gradient dimension at the same seed.
    """
    acc = _Accumulator()
    for eps, _ in _draw_joint(seed, n, dim):
        acc.add(np.maximum(mu + sigma * eps - best, 0.0))
    return acc.result()


def mc_ei_s(pg: PosteriorGradient, grad_plus: ArrayLike, n: int, seed: int) -> MCEstimate:
    """E[max(||grad||^2 - ||grad_plus||^2, 0)] with grad ~ N(mu, diag(var))."""
    gp2 = float(np.sum(np.square(grad_plus)))
    acc = _Accumulator()
    for _, Z in _draw_joint(seed, n, pg.dim):
        G = _grad_samples(pg, Z)
        acc.add(np.maximum(np.sum(G * G, axis=1) - gp2, 0.0))
    return acc.result()


def mc_ei_s_orthant(pg: PosteriorGradient, grad_plus: ArrayLike, n: int, seed: int) -> MCEstimate:
    """
    E[(||mu + L z||^2 - ||grad_plus||^2) 1{z >= z+}], the sampling
    counterpart of the mean-field closed form.

    Estimated as P(z >= z+) * E[... | z >= z+]: each whitened coordinate is
    drawn from a standard normal truncated to [z+_i, inf).
    """
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n}")
    gp_ = np.asarray(grad_plus, dtype=float)
    gp2 = float(gp_ @ gp_)
    L = np.sqrt(np.maximum(pg.var_diag, ORTHANT_VARIANCE_FLOOR))
    z_plus = (gp_ - pg.mean) / L
    log_weight = float(np.sum(log_ndtr(-z_plus)))
    if log_weight < LOG_WEIGHT_FLOOR:
        return MCEstimate(0.0, 0.0)
    weight = math.exp(log_weight)
    rng = _rng(seed)
    chunk = get_settings().mc_chunk
    acc = _Accumulator()
    for start in range(0, n, chunk):
        m = min(chunk, n - start)
        Z = stats.truncnorm.rvs(z_plus, np.inf, size=(m, pg.dim), random_state=rng)
        G = pg.mean + L * Z
        acc.add(weight * (np.sum(G * G, axis=1) - gp2))
    return acc.result()


def mc_ei_g(
    f_post: Tuple[float, float],
    pg: PosteriorGradient,
    inc: Incumbent,
    alpha: float,
    n: int,
    seed: int,
) -> MCEstimate:
    """
    E[max(g(x) - g+, 0)] with g = f - alpha ||grad f||^2.

    f and grad f are sampled independently, matching the separate surrogates.
    """
    mu, sigma = f_post
    acc = _Accumulator()
    for eps, Z in _draw_joint(seed, n, pg.dim):
        G = _grad_samples(pg, Z)
        g = mu + sigma * eps - alpha * np.sum(G * G, axis=1)
        acc.add(np.maximum(g - inc.g_plus, 0.0))
    return acc.result()


def lower_bound_check(
    f_post: Tuple[float, float],
    pg: PosteriorGradient,
    inc: Incumbent,
    alpha: float,
    n: int,
    seed: int,
    n_se: float = 4.0,
) -> BoundCheck:
    """Check ei_g >= ei_f - alpha * ei_s up to n_se combined standard errors."""
    est_g = mc_ei_g(f_post, pg, inc, alpha, n, seed)
    est_f = mc_ei_f(f_post[0], f_post[1], inc.f_plus, n, seed, dim=pg.dim)
    est_s = mc_ei_s(pg, inc.grad_plus, n, seed)
    se = math.sqrt(est_g.std_error**2 + est_f.std_error**2 + (alpha * est_s.std_error) ** 2)
    holds = est_g.estimate >= est_f.estimate - alpha * est_s.estimate - n_se * se
    return BoundCheck(est_g, est_f, est_s, se, bool(holds))


def event_bound_check(
    f_post: Tuple[float, float],
    pg: PosteriorGradient,
    inc: Incumbent,
    alpha: float,
    spec: EventSpec,
    n: int,
    seed: int,
    n_se: float = 4.0,
) -> EventCheck:
    """
    Estimate P(event) and compare ei_g to alpha (1 - c) delta P(event).

    The event is ||grad f(x)||^2 <= ||grad_plus||^2 - delta together with
    f(x) >= f_plus - alpha c delta.
    """
    mu, sigma = f_post
    gp2 = float(np.sum(np.square(inc.grad_plus)))
    acc_g = _Accumulator()
    acc_e = _Accumulator()
    for eps, Z in _draw_joint(seed, n, pg.dim):
        f = mu + sigma * eps
        G = _grad_samples(pg, Z)
        sq = np.sum(G * G, axis=1)
        acc_g.add(np.maximum(f - alpha * sq - inc.g_plus, 0.0))
        event = (sq <= gp2 - spec.delta) & (f >= inc.f_plus - alpha * spec.c * spec.delta)
        acc_e.add(event.astype(float))
    est_g, est_e = acc_g.result(), acc_e.result()
    scale = alpha * (1.0 - spec.c) * spec.delta
    rhs = scale * est_e.estimate
    se = math.sqrt(est_g.std_error**2 + (scale * est_e.std_error) ** 2)
    holds = est_g.estimate >= rhs - n_se * se
    return EventCheck(est_e.estimate, est_g.estimate, rhs, se, bool(holds))


def positive_part_gap(n: int, seed: int, scale: float = 10.0) -> Tuple[float, int]:
    """
    Check max(A - B, 0) >= max(A, 0) - max(B, 0) on n random pairs.

    Returns:
        (smallest gap, number of violations)
    """
    rng = _rng(seed)
    A = scale * rng.standard_normal(n)
    B = scale * rng.standard_normal(n)
    gap = np.maximum(A - B, 0.0) - (np.maximum(A, 0.0) - np.maximum(B, 0.0))
    return float(np.min(gap)), int(np.sum(gap < 0.0))
