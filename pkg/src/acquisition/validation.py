"""
Acquisition Validation Sweeps

Property sweeps that compare the closed-form acquisition terms against
the Monte Carlo oracles and check the positive-part inequality, the EI_g
lower bound and the event bound. run_validation() aggregates them into a
machine-readable pass/fail report.
"""

import logging
import time
from typing import Any, Dict, List, Optional

import numpy as np
from pydantic import BaseModel, Field

from ..protocols.bo_schema import AcquisitionConfig, EventSpec, RescaleMode
from ..surrogates.gradient import PosteriorGradient
from .closed_form import Incumbent, ei_gn, ei_s_bar
from .gaussian import ei
from .monte_carlo import event_bound_check, lower_bound_check, mc_ei_s_orthant, positive_part_gap

logger = logging.getLogger(__name__)


class CheckResult(BaseModel):
    """Outcome of one property sweep."""
    name: str = Field(..., description="Sweep identifier")
    passed: bool = Field(..., description="Whether the sweep met its criterion")
    cases: int = Field(..., description="Number of cases evaluated")
    failures: int = Field(0, description="Cases that missed the per-case tolerance")
    seconds: float = Field(0.0, description="Wall-clock duration")
    details: Dict[str, Any] = Field(default_factory=dict, description="Sweep-specific numbers")


class ValidationReport(BaseModel):
    """All sweeps of one validate run."""
    passed: bool
    seed: int
    mc_n: int
    checks: List[CheckResult]


def random_gradient_posterior(rng: np.random.Generator, d: int, mean_sd: float = 2.0,
                              var_low: float = 0.1, var_high: float = 4.0) -> PosteriorGradient:
    return PosteriorGradient.of(mean_sd * rng.standard_normal(d), rng.uniform(var_low, var_high, d))


def _random_incumbent(rng: np.random.Generator, d: int, alpha: float) -> Incumbent:
    grad_plus = rng.standard_normal(d)
    f_plus = float(rng.standard_normal())
    return Incumbent(index=0, x_plus=np.zeros(d), f_plus=f_plus, grad_plus=grad_plus,
                     g_plus=f_plus - alpha * float(grad_plus @ grad_plus))


def closed_form_equivalence(cases: int = 200, mc_n: int = 1_000_000, seed: int = 0,
                            max_dim: int = 10, n_se: float = 3.0, atol: float = 1e-6,
                            min_pass_fraction: float = 195 / 200) -> CheckResult:
    """
    Mean-field closed form vs the orthant sampling oracle on random configurations.

    A case passes when |closed - mc| <= n_se * se + atol; atol absorbs
    rounding on orthants whose probability underflows.
    """
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    failures = 0
    worst = 0.0
    for case in range(cases):
        d = int(rng.integers(1, max_dim + 1))
        pg = random_gradient_posterior(rng, d)
        grad_plus = 2.0 * rng.standard_normal(d)
        closed = ei_s_bar(pg, grad_plus)
        est, se = mc_ei_s_orthant(pg, grad_plus, mc_n, seed * 100_003 + case)
        err = abs(closed - est)
        worst = max(worst, err / (se + atol))
        if err > n_se * se + atol:
            failures += 1
            logger.debug(f"Equivalence case {case} (d={d}) off by {err:.3g} with se {se:.3g}")

    analytic = {
        "d1": ei_s_bar(PosteriorGradient.of([0.0], [1.0]), [0.0]),
        "d3": ei_s_bar(PosteriorGradient.of(np.zeros(3), np.ones(3)), np.zeros(3)),
    }
    analytic_ok = abs(analytic["d1"] - 0.5) <= 1e-3 and abs(analytic["d3"] - 0.375) <= 1e-3
    passed = analytic_ok and (cases - failures) >= min_pass_fraction * cases
    return CheckResult(name="closed_form_equivalence", passed=passed, cases=cases, failures=failures,
                       seconds=time.perf_counter() - t0,
                       details={"analytic": analytic, "worst_se_ratio": worst, "mc_n": mc_n})


def alpha_zero_reduction(n: int = 10_000, seed: int = 0) -> CheckResult:
    """EI-GN with alpha = 0 and no rescaling must equal EI bitwise."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    mu = 3.0 * rng.standard_normal(n)
    sigma = rng.uniform(0.0, 3.0, n)
    best = 3.0 * rng.standard_normal(n)
    ei_f = ei(mu, sigma, best)
    ei_s = rng.uniform(0.0, 10.0, n)
    combined = ei_gn(ei_f, ei_s, AcquisitionConfig(alpha=0.0, rescale=RescaleMode.NONE))
    mismatches = int(np.sum(np.asarray(combined) != ei_f))
    return CheckResult(name="alpha_zero_reduction", passed=mismatches == 0, cases=n, failures=mismatches,
                       seconds=time.perf_counter() - t0)


def positive_part_lemma(n: int = 1_000_000, seed: int = 0) -> CheckResult:
    t0 = time.perf_counter()
    min_gap, violations = positive_part_gap(n, seed)
    return CheckResult(name="positive_part_lemma", passed=violations == 0, cases=n, failures=violations,
                       seconds=time.perf_counter() - t0, details={"min_gap": min_gap})


def lower_bound_sweep(cases: int = 100, mc_n: int = 1_000_000, seed: int = 0,
                      alpha: float = 0.6, max_dim: int = 5) -> CheckResult:
    """EI_g against EI_f - alpha EI_s on random posteriors."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed + 1)
    failures = 0
    for case in range(cases):
        d = int(rng.integers(1, max_dim + 1))
        pg = random_gradient_posterior(rng, d, mean_sd=1.0, var_low=0.05, var_high=2.0)
        f_post = (float(rng.standard_normal()), float(rng.uniform(0.05, 2.0)))
        inc = _random_incumbent(rng, d, alpha)
        check = lower_bound_check(f_post, pg, inc, alpha, mc_n, seed * 100_003 + case)
        if not check.holds:
            failures += 1
    return CheckResult(name="lower_bound", passed=failures == 0, cases=cases, failures=failures,
                       seconds=time.perf_counter() - t0, details={"alpha": alpha, "mc_n": mc_n})


def event_bound_sweep(cases: int = 100, mc_n: int = 1_000_000, seed: int = 0,
                      alpha: float = 0.6, max_dim: int = 5,
                      deltas: Optional[List[float]] = None, cs: Optional[List[float]] = None) -> CheckResult:
    """EI_g against alpha (1 - c) delta P(event) on random posteriors."""
    t0 = time.perf_counter()
    deltas = deltas or [0.1, 1.0]
    cs = cs or [0.25, 0.5, 0.75]
    rng = np.random.default_rng(seed + 2)
    failures = 0
    max_p = 0.0
    for case in range(cases):
        d = int(rng.integers(1, max_dim + 1))
        pg = random_gradient_posterior(rng, d, mean_sd=1.0, var_low=0.05, var_high=2.0)
        f_post = (float(rng.standard_normal()), float(rng.uniform(0.05, 2.0)))
        inc = _random_incumbent(rng, d, alpha)
        spec = EventSpec(delta=deltas[case % len(deltas)], c=cs[case % len(cs)])
        check = event_bound_check(f_post, pg, inc, alpha, spec, mc_n, seed * 100_003 + case)
        max_p = max(max_p, check.p_event)
        if not check.holds:
            failures += 1
    return CheckResult(name="event_bound", passed=failures == 0, cases=cases, failures=failures,
                       seconds=time.perf_counter() - t0, details={"max_p_event": max_p, "mc_n": mc_n})


def run_validation(cases: int = 200, mc_n: int = 1_000_000, seed: int = 0) -> ValidationReport:
    """
    Run every sweep.

    Args:
        cases: Configurations for the closed-form sweep; bound sweeps use half
        mc_n: Monte Carlo draws per case
        seed: Master seed

    Returns:
        ValidationReport with passed = all sweeps passed
    """
    bound_cases = max(1, cases // 2)
    checks = [
        closed_form_equivalence(cases=cases, mc_n=mc_n, seed=seed),
        alpha_zero_reduction(seed=seed),
        positive_part_lemma(seed=seed),
        lower_bound_sweep(cases=bound_cases, mc_n=mc_n, seed=seed),
        event_bound_sweep(cases=bound_cases, mc_n=mc_n, seed=seed),
    ]
    for check in checks:
        status = "PASS" if check.passed else "FAIL"
        logger.info(f"[validate] {check.name}: {status} ({check.cases - check.failures}/{check.cases}, "
                    f"{check.seconds:.1f}s)")
    return ValidationReport(passed=all(c.passed for c in checks), seed=seed, mc_n=mc_n, checks=checks)
