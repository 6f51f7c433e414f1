"""Exception hierarchy shared by the sensing, classifier and harness layers."""

from __future__ import annotations
from typing import Any, Optional


class SensingError(Exception):
    """Base class for every error raised by this package."""


class DimensionError(SensingError):
    pass


class SymmetryError(SensingError):
    pass


class DomainError(SensingError):
    """An argument lies outside the domain where the quantity is defined."""


class UnsupportedRegimeError(SensingError):
    """The analytic formula does not apply at these (M, N)."""


class InsufficientTrialsError(SensingError):
    pass


class TrainingError(SensingError):
    pass


class ConvergenceError(SensingError):
    """Solver hit its iteration cap; `best` holds the last iterate."""

    def __init__(self, message: str, best: Optional[Any] = None):
        super().__init__(message)
        self.best = best


class ConfigError(SensingError):
    pass
