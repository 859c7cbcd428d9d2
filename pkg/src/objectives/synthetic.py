"""
Synthetic Benchmark Objectives

Standard test functions in maximization form (minimization benchmarks are
negated) with exact analytic gradients of the returned value.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Tuple

import numpy as np
from numpy.typing import ArrayLike, NDArray

from ..protocols.bo_schema import Provenance
from ..protocols.errors import DimensionMismatch, UnknownProblem

logger = logging.getLogger(__name__)

Evaluation = Tuple[float, NDArray[np.float64]]


@dataclass(frozen=True)
class ProblemDefaults:
    """
    Benchmark settings as printed in the protocol tables.

    table_raw / table_restarts keep the printed column order; the harness
    decides how to map them onto the optimizer.
    """
    n_init: int
    budget: int
    table_raw: int
    table_restarts: int


@dataclass(frozen=True, eq=False)
class Problem:
    """A deterministic black-box objective with gradients, to be maximized."""
    name: str
    dim: int
    lower: NDArray[np.float64]
    upper: NDArray[np.float64]
    fn: Callable[[NDArray[np.float64]], Evaluation] = field(repr=False)
    defaults: ProblemDefaults
    known_best: Optional[float] = None
    provenance: Optional[Provenance] = None
    maximization: bool = True

    @property
    def bounds(self) -> NDArray[np.float64]:
        return np.vstack([self.lower, self.upper])

    def evaluate(self, x: ArrayLike) -> Evaluation:
        xa = np.asarray(x, dtype=float).ravel()
        if xa.size != self.dim:
            raise DimensionMismatch(f"{self.name} expects dimension {self.dim}, got {xa.size}")
        f, g = self.fn(xa)
        return float(f), np.asarray(g, dtype=float)


# Shekel, m = 10
SHEKEL_A = np.array([
    [4.0, 4.0, 4.0, 4.0],
    [1.0, 1.0, 1.0, 1.0],
    [8.0, 8.0, 8.0, 8.0],
    [6.0, 6.0, 6.0, 6.0],
    [3.0, 7.0, 3.0, 7.0],
    [2.0, 9.0, 2.0, 9.0],
    [5.0, 5.0, 3.0, 3.0],
    [8.0, 1.0, 8.0, 1.0],
    [6.0, 2.0, 6.0, 2.0],
    [7.0, 3.6, 7.0, 3.6],
])
SHEKEL_C = np.array([0.1, 0.2, 0.2, 0.4, 0.4, 0.6, 0.3, 0.7, 0.5, 0.5])

HARTMANN6_ALPHA = np.array([1.0, 1.2, 3.0, 3.2])
HARTMANN6_A = np.array([
    [10.0, 3.0, 17.0, 3.5, 1.7, 8.0],
    [0.05, 10.0, 17.0, 0.1, 8.0, 14.0],
    [3.0, 3.5, 1.7, 10.0, 17.0, 8.0],
    [17.0, 8.0, 0.05, 10.0, 0.1, 14.0],
])
HARTMANN6_P = 1e-4 * np.array([
    [1312, 1696, 5569, 124, 8283, 5886],
    [2329, 4135, 8307, 3736, 1004, 9991],
    [2348, 1451, 3522, 2883, 3047, 6650],
    [4047, 8828, 8732, 5743, 1091, 381],
])
HARTMANN6_ARGMAX = np.array([0.20169, 0.150011, 0.476874, 0.275332, 0.311652, 0.6573])

ACKLEY_A, ACKLEY_B, ACKLEY_C = 20.0, 0.2, 2.0 * math.pi


def shekel(x: NDArray) -> Evaluation:
    diff = x[None, :] - SHEKEL_A
    s = np.sum(diff * diff, axis=1) + SHEKEL_C
    f = np.sum(1.0 / s)
    grad = -2.0 * np.sum(diff / (s * s)[:, None], axis=0)
    return f, grad


def hartmann6(x: NDArray) -> Evaluation:
    diff = x[None, :] - HARTMANN6_P
    e = HARTMANN6_ALPHA * np.exp(-np.sum(HARTMANN6_A * diff * diff, axis=1))
    f = np.sum(e)
    grad = -2.0 * np.sum(e[:, None] * HARTMANN6_A * diff, axis=0)
    return f, grad


def cosine_mixture(x: NDArray) -> Evaluation:
    f = 0.1 * np.sum(np.cos(5.0 * math.pi * x)) - np.sum(x * x)
    grad = -0.5 * math.pi * np.sin(5.0 * math.pi * x) - 2.0 * x
    return f, grad


def griewank(x: NDArray) -> Evaluation:
    root = np.sqrt(np.arange(1, x.size + 1, dtype=float))
    u = x / root
    cos_u = np.cos(u)
    # products of cos over all coordinates except k
    prefix = np.concatenate([[1.0], np.cumprod(cos_u)[:-1]])
    suffix = np.concatenate([np.cumprod(cos_u[::-1])[:-1][::-1], [1.0]])
    others = prefix * suffix
    f = -(1.0 + np.sum(x * x) / 4000.0 - np.prod(cos_u))
    grad = -(x / 2000.0 + np.sin(u) / root * others)
    return f, grad


def ackley(x: NDArray) -> Evaluation:
    d = x.size
    r = math.sqrt(float(np.sum(x * x)) / d)
    e1 = math.exp(-ACKLEY_B * r)
    e2 = math.exp(float(np.sum(np.cos(ACKLEY_C * x))) / d)
    f = -(-ACKLEY_A * e1 - e2 + ACKLEY_A + math.e)
    # not differentiable at the origin; the subgradient 0 is returned there
    g1 = ACKLEY_A * ACKLEY_B * e1 * x / (d * r) if r > 0.0 else np.zeros(d)
    g2 = e2 * ACKLEY_C * np.sin(ACKLEY_C * x) / d
    return f, -(g1 + g2)


def holder_table(x: NDArray) -> Evaluation:
    x1, x2 = x
    r = math.hypot(x1, x2)
    q = 1.0 - r / math.pi
    E = math.exp(abs(q))
    u = math.sin(x1) * math.cos(x2)
    h = u * E
    sign_h = 1.0 if h >= 0.0 else -1.0
    du = np.array([math.cos(x1) * math.cos(x2), -math.sin(x1) * math.sin(x2)])
    dq = (1.0 if q >= 0.0 else -1.0) * (-1.0 / math.pi) * (x / r if r > 0.0 else np.zeros(2))
    grad = sign_h * E * (du + u * dq)
    return abs(h), grad


def bimodal_mixture(x: NDArray) -> Evaluation:
    t = x[0]
    a = (t - 0.25) / 0.06
    b = (t - 0.85) / 0.01
    e1 = 0.85 * math.exp(-0.5 * a * a)
    e2 = math.exp(-0.5 * b * b)
    f = e1 + e2 - 0.05 * t
    grad = -e1 * a / 0.06 - e2 * b / 0.01 - 0.05
    return f, np.array([grad])


def _box(dim: int, lo: float, hi: float) -> Tuple[NDArray, NDArray]:
    return np.full(dim, lo), np.full(dim, hi)


def _synthetic_table() -> Dict[str, Problem]:
    table = {}
    specs = [
        ("shekel4", 4, (0.0, 10.0), shekel, ProblemDefaults(12, 125, 8, 256), 10.5364, Provenance.DERIVED),
        ("hartmann6", 6, (0.0, 1.0), hartmann6, ProblemDefaults(18, 150, 10, 512), 3.32237, Provenance.DERIVED),
        ("cosine8", 8, (-1.0, 1.0), cosine_mixture, ProblemDefaults(24, 200, 20, 1024), 0.8, Provenance.ANALYTIC),
        ("griewank10", 10, (-10.0, 10.0), griewank, ProblemDefaults(30, 300, 20, 1024), 0.0, Provenance.ANALYTIC),
        ("ackley14", 14, (-5.0, 5.0), ackley, ProblemDefaults(42, 500, 20, 1024), 0.0, Provenance.ANALYTIC),
        ("holder", 2, (-10.0, 10.0), holder_table, ProblemDefaults(6, 50, 10, 256), 19.2085, Provenance.DERIVED),
        ("fig2mix", 1, (0.0, 1.0), bimodal_mixture, ProblemDefaults(3, 20, 10, 256), 0.9575, Provenance.DERIVED),
    ]
    for name, dim, (lo, hi), fn, defaults, best, prov in specs:
        lower, upper = _box(dim, lo, hi)
        table[name] = Problem(name=name, dim=dim, lower=lower, upper=upper, fn=fn, defaults=defaults,
                              known_best=best, provenance=prov)
    return table


SYNTHETIC_PROBLEMS: Dict[str, Problem] = _synthetic_table()
# alternate name -> registry name
PROBLEM_ALIASES: Dict[str, str] = {"mix1d": "fig2mix"}


def eval_synthetic(name: str, x: ArrayLike) -> Evaluation:
    """
    Evaluate a named synthetic benchmark.

    Raises:
        UnknownProblem: for names outside the synthetic table
    """
    problem = SYNTHETIC_PROBLEMS.get(PROBLEM_ALIASES.get(name, name))
    if problem is None:
        raise UnknownProblem(name)
    return problem.evaluate(x)


def finite_diff_check(problem: Problem, x: ArrayLike, h: float = 1e-5) -> float:
    """
    Largest per-coordinate relative error of the analytic gradient against
    central differences; the denominator is max(|g_i|, 1).
    """
    xa = np.asarray(x, dtype=float).ravel()
    _, grad = problem.evaluate(xa)
    fd = np.empty_like(xa)
    for i in range(xa.size):
        xp, xm = xa.copy(), xa.copy()
        xp[i] += h
        xm[i] -= h
        fd[i] = (problem.evaluate(xp)[0] - problem.evaluate(xm)[0]) / (2.0 * h)
    return float(np.max(np.abs(fd - grad) / np.maximum(np.abs(grad), 1.0)))
