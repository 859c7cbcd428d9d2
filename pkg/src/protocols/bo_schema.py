"""
Bayesian Optimization Schema Definitions

Pydantic models for every configuration object in the engine: kernels and
their hyperpriors, surrogate fitting, acquisition settings, the inner
optimizer, GP-sample objectives, and BO runs with their traces.
"""

import math
from enum import Enum
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class KernelFamily(str, Enum):
    """Covariance families supported by the surrogates."""
    MATERN52 = "matern52"
    RBF = "rbf"


class AcquisitionKind(str, Enum):
    """
    Query selection strategies.

    - EI_GN: expected improvement on f - alpha * ||grad f||^2 (mean-field form)
    - EI: closed-form expected improvement
    - LOG_EI: log of EI, computed stably
    - TS: Thompson sampling over a Sobol candidate set
    - SOBOL: continued scrambled Sobol stream, no model
    """
    EI_GN = "ei_gn"
    EI = "ei"
    LOG_EI = "log_ei"
    TS = "ts"
    SOBOL = "sobol"


class RescaleMode(str, Enum):
    """How EI-GN combines its two components."""
    NONE = "none"
    POOL_ZSCORE = "pool_zscore"


class IncumbentRule(str, Enum):
    """Which observation anchors the improvement terms."""
    G_INCUMBENT = "g_incumbent"
    F_INCUMBENT = "f_incumbent"


class ProblemMode(str, Enum):
    """GP-sample objective comparison mode."""
    WITHIN = "within"
    OUT = "out"


class Provenance(str, Enum):
    """Where a problem's known_best value comes from."""
    ANALYTIC = "analytic"
    DERIVED = "derived"


class KernelSpec(BaseModel):
    """
    Kernel family with its hyperparameters.

    A single lengthscale means an isotropic kernel; otherwise one
    lengthscale per input dimension (ARD).
    """
    model_config = ConfigDict(frozen=True)

    family: KernelFamily = Field(KernelFamily.MATERN52, description="Covariance family")
    lengthscales: List[float] = Field(..., min_length=1, description="Positive lengthscales (1 or d entries)")
    outputscale: float = Field(1.0, description="Positive signal variance")
    mean_constant: float = Field(0.0, description="Constant prior mean m(x)")

    @field_validator("lengthscales")
    @classmethod
    def _positive_lengthscales(cls, v: List[float]) -> List[float]:
        if any(not (ls > 0.0) or not math.isfinite(ls) for ls in v):
            raise ValueError(f"lengthscales must be positive and finite, got {v}")
        return v

    @field_validator("outputscale")
    @classmethod
    def _positive_outputscale(cls, v: float) -> float:
        if not (v > 0.0) or not math.isfinite(v):
            raise ValueError(f"outputscale must be positive and finite, got {v}")
        return v

    @property
    def ard(self) -> bool:
        return len(self.lengthscales) > 1


class HyperpriorSpec(BaseModel):
    """
    Hyperpriors for MAP fitting.

    Lengthscales ~ LogNormal(loc, scale); outputscale ~ Gamma(shape, rate).
    """
    model_config = ConfigDict(frozen=True)

    lengthscale_loc: float = Field(math.log(0.4), description="Log-normal location (log of median)")
    lengthscale_scale: float = Field(0.7, gt=0.0, description="Log-normal scale")
    outputscale_shape: float = Field(2.0, gt=0.0, description="Gamma shape k")
    outputscale_rate: float = Field(0.5, gt=0.0, description="Gamma rate (density ~ x^(k-1) exp(-rate x))")


class FitConfig(BaseModel):
    """Settings for fitting one GP surrogate."""
    model_config = ConfigDict(frozen=True)

    hyperpriors: HyperpriorSpec = Field(default_factory=HyperpriorSpec, description="MAP hyperpriors")
    family: KernelFamily = Field(KernelFamily.MATERN52, description="Kernel family when fitting")
    ard: bool = Field(True, description="One lengthscale per dimension")
    restarts: int = Field(5, ge=1, description="Multi-start count for hyperparameter search")
    max_iters: int = Field(200, ge=1, description="Quasi-Newton iterations per restart")
    base_jitter: float = Field(1e-9, gt=0.0, description="First nonzero jitter on the ladder")
    max_jitter: float = Field(1e-2, gt=0.0, description="Largest jitter tried before giving up")
    noise: float = Field(1e-6, ge=0.0, description="Fixed observation noise (standardized units)")
    standardize_outputs: bool = Field(True, description="Center and scale targets before fitting")
    fd_step: float = Field(1e-6, gt=0.0, description="Finite-difference step in log-hyperparameter space")
    log_bounds: List[float] = Field(default_factory=lambda: [-6.0, 4.0], min_length=2, max_length=2,
                                    description="Box for log hyperparameters")
    fixed_hyperparams: Optional[KernelSpec] = Field(None, description="Skip fitting and use this kernel")

    @model_validator(mode="after")
    def _jitter_order(self) -> "FitConfig":
        if self.base_jitter > self.max_jitter:
            raise ValueError(f"base_jitter {self.base_jitter} exceeds max_jitter {self.max_jitter}")
        return self

    def jitter_ladder(self) -> List[float]:
        """0 followed by decades from base_jitter up to max_jitter."""
        ladder = [0.0]
        level = self.base_jitter
        while level <= self.max_jitter * (1.0 + 1e-9):
            ladder.append(level)
            level *= 10.0
        return ladder


class AcquisitionConfig(BaseModel):
    """EI-GN settings."""
    model_config = ConfigDict(frozen=True)

    alpha: float = Field(0.6, ge=0.0, description="Weight of the gradient-norm penalty")
    rescale: RescaleMode = Field(RescaleMode.POOL_ZSCORE, description="Component rescaling")
    incumbent_rule: IncumbentRule = Field(IncumbentRule.G_INCUMBENT, description="Incumbent selection rule")
    variance_floor: float = Field(1e-12, gt=0.0, description="Floor on gradient variances before whitening")


class EventSpec(BaseModel):
    """Improvement-event parameters: margin delta and tolerated fraction c."""
    model_config = ConfigDict(frozen=True)

    delta: float = Field(..., gt=0.0, description="Stationarity margin")
    c: float = Field(..., gt=0.0, lt=1.0, description="Tolerated fraction of the penalized drop")


class OptSpec(BaseModel):
    """Inner acquisition optimizer settings over a box."""
    model_config = ConfigDict(frozen=True)

    raw_samples: int = Field(..., ge=1, description="Sobol pool size")
    num_restarts: int = Field(..., ge=1, description="Refined starting points")
    lower: List[float] = Field(..., min_length=1, description="Lower box bounds")
    upper: List[float] = Field(..., min_length=1, description="Upper box bounds")
    max_refine_iters: int = Field(100, ge=1, description="Quasi-Newton iterations per restart")
    fd_step: float = Field(1e-6, gt=0.0, description="Finite-difference step in normalized units")
    ftol: float = Field(1e-8, gt=0.0, description="Relative step tolerance")
    gtol: float = Field(1e-6, gt=0.0, description="Projected gradient tolerance")
    temperature_mode: str = Field("zscore", pattern="^zscore$", description="Boltzmann temperature rule")

    @model_validator(mode="after")
    def _check_box(self) -> "OptSpec":
        if self.num_restarts > self.raw_samples:
            raise ValueError(f"num_restarts ({self.num_restarts}) exceeds raw_samples ({self.raw_samples})")
        if len(self.lower) != len(self.upper):
            raise ValueError("lower and upper bounds differ in length")
        if any(lo >= hi for lo, hi in zip(self.lower, self.upper)):
            raise ValueError("lower bounds must be strictly below upper bounds")
        return self

    @property
    def dim(self) -> int:
        return len(self.lower)

    @classmethod
    def unit_cube(cls, dim: int, raw_samples: int, num_restarts: int, **kwargs: Any) -> "OptSpec":
        return cls(raw_samples=raw_samples, num_restarts=num_restarts,
                   lower=[0.0] * dim, upper=[1.0] * dim, **kwargs)


class GPSampleSpec(BaseModel):
    """A GP-prior sample used as a black-box objective."""
    model_config = ConfigDict(frozen=True)

    dim: int = Field(..., ge=1, description="Input dimension")
    seed: int = Field(0, ge=0, description="Sample seed")
    mode: ProblemMode = Field(ProblemMode.WITHIN, description="Surrogate matches the prior (within) or not (out)")
    prior_lengthscale: Optional[float] = Field(None, gt=0.0, description="Defaults to 0.4/sqrt(dim)")
    n_anchor: Optional[int] = Field(None, ge=1, description="Defaults to 200*dim Sobol anchors")

    @property
    def lengthscale(self) -> float:
        return self.prior_lengthscale if self.prior_lengthscale is not None else 0.4 / math.sqrt(self.dim)

    @property
    def anchors(self) -> int:
        return self.n_anchor if self.n_anchor is not None else 200 * self.dim

    def prior_kernel(self) -> KernelSpec:
        return KernelSpec(family=KernelFamily.RBF, lengthscales=[self.lengthscale], outputscale=1.0)


class RunConfig(BaseModel):
    """
    One BO run: a problem, a method and a seed.

    Unset counts (budget, n_init, raw_samples, num_restarts) are filled from
    the problem's defaults by the harness.
    """
    model_config = ConfigDict(frozen=True)

    problem: str = Field(..., min_length=1, description="Registry name, e.g. hartmann6 or gp-within-7")
    acquisition: AcquisitionKind = Field(AcquisitionKind.EI_GN, description="Query strategy")
    alpha: float = Field(0.6, ge=0.0, description="EI-GN penalty weight")
    budget: Optional[int] = Field(None, ge=1, description="BO iterations after the initial design")
    n_init: Optional[int] = Field(None, ge=1, description="Initial Sobol points (default 3d)")
    seed: int = Field(0, ge=0, description="Master seed")
    raw_samples: Optional[int] = Field(None, ge=1, description="Acquisition raw pool size")
    num_restarts: Optional[int] = Field(None, ge=1, description="Acquisition restarts")
    max_refine_iters: int = Field(100, ge=1, description="Refinement iterations per restart")
    literal_counts: bool = Field(False, description="Use table columns as printed (raw < restarts)")
    incumbent_rule: IncumbentRule = Field(IncumbentRule.G_INCUMBENT, description="Incumbent rule")
    rescale: RescaleMode = Field(RescaleMode.POOL_ZSCORE, description="EI-GN component rescaling")
    fit_restarts: int = Field(5, ge=1, description="Hyperparameter multi-starts per fit")
    output_dir: str = Field("output", description="Directory for emitted files")
    label: Optional[str] = Field(None, description="Method label override for summaries")

    @property
    def method(self) -> str:
        if self.label:
            return self.label
        return self.acquisition.value

    def acquisition_config(self) -> AcquisitionConfig:
        return AcquisitionConfig(alpha=self.alpha, rescale=self.rescale, incumbent_rule=self.incumbent_rule)


class TraceRecord(BaseModel):
    """One objective evaluation inside a run."""
    iteration: int = Field(..., ge=1, description="1-based evaluation index, initial design included")
    phase: str = Field("bo", description="'init' or 'bo'")
    x: List[float] = Field(..., description="Queried point (original units)")
    y: float = Field(..., description="Observed objective")
    grad_y: List[float] = Field(..., description="Observed gradient")
    best_f: float = Field(..., description="Best y observed so far")
    acq_value: float = Field(float("nan"), description="Acquisition value at the query (NaN when none)")
    wall_ms: float = Field(0.0, ge=0.0, description="Wall-clock time for this step")
    fallback: bool = Field(False, description="Numerical failure replaced by a Sobol query")


class Trace(BaseModel):
    """Full record of a BO run."""
    config: RunConfig
    dim: int
    records: List[TraceRecord] = Field(default_factory=list)
    errors: List[Dict[str, Any]] = Field(default_factory=list, description="Per-iteration error records")
    aborted: bool = Field(False, description="Run stopped early on a non-numerical error")

    @property
    def best_curve(self) -> List[float]:
        return [r.best_f for r in self.records]

    def recommendation(self) -> Optional[TraceRecord]:
        """argmax of observed y, lowest index on ties."""
        best: Optional[TraceRecord] = None
        for record in self.records:
            if best is None or record.y > best.y:
                best = record
        return best
