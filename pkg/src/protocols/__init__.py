# Protocols Package
from .bo_schema import (
    AcquisitionConfig,
    AcquisitionKind,
    EventSpec,
    FitConfig,
    GPSampleSpec,
    HyperpriorSpec,
    IncumbentRule,
    KernelFamily,
    KernelSpec,
    OptSpec,
    ProblemMode,
    Provenance,
    RescaleMode,
    RunConfig,
    Trace,
    TraceRecord,
)
from .errors import (
    DegenerateVariance,
    DimensionMismatch,
    EIGNError,
    FactorizationFailed,
    InvalidHyperparameter,
    NonFiniteAcquisition,
    NonpositiveVariance,
    UnknownProblem,
)

__all__ = [
    "AcquisitionConfig", "AcquisitionKind", "EventSpec", "FitConfig", "GPSampleSpec",
    "HyperpriorSpec", "IncumbentRule", "KernelFamily", "KernelSpec", "OptSpec", "ProblemMode",
    "Provenance", "RescaleMode", "RunConfig", "Trace", "TraceRecord",
    "DegenerateVariance", "DimensionMismatch", "EIGNError", "FactorizationFailed",
    "InvalidHyperparameter", "NonFiniteAcquisition", "NonpositiveVariance", "UnknownProblem",
]
