"""
Engine Error Definitions

Exception tree shared by the surrogates, acquisition engine, optimizer,
objective suite and BO harness. Numerical failures derive from
EIGNError so the BO loop can catch them and fall back for one iteration.
"""

from typing import Optional, Sequence


class EIGNError(Exception):
    """Base exception for engine errors."""
    pass


class FactorizationFailed(EIGNError):
    """Raised when Cholesky fails even at the largest jitter on the ladder."""

    def __init__(self, max_jitter: float, dimension: Optional[int] = None, detail: str = ""):
        self.max_jitter = max_jitter
        self.dimension = dimension
        where = f" (gradient dimension {dimension})" if dimension is not None else ""
        msg = f"Cholesky factorization failed at jitter {max_jitter:g}{where}"
        if detail:
            msg = f"{msg}: {detail}"
        super().__init__(msg)


class NonpositiveVariance(EIGNError):
    """Raised when whitening receives a variance at or below zero."""
    pass


class DegenerateVariance(EIGNError):
    """Raised when a log-space acquisition gets sigma == 0."""
    pass


class NonFiniteAcquisition(EIGNError):
    """Raised when an acquisition returns NaN/inf at an optimizer start point."""

    def __init__(self, start: Sequence[float], value: float):
        self.start = list(start)
        self.value = value
        super().__init__(f"Acquisition value {value} is not finite at start point {self.start}")


class InvalidHyperparameter(EIGNError, ValueError):
    """Raised for nonpositive kernel hyperparameters."""
    pass


class DimensionMismatch(EIGNError, ValueError):
    """Raised when point dimensions disagree."""
    pass


class UnknownProblem(EIGNError, KeyError):
    """Raised when a problem name is not in the registry."""

    def __init__(self, name: str):
        self.name = name
        super().__init__(f"Unknown problem: '{name}'")

    def __str__(self) -> str:
        return self.args[0]
