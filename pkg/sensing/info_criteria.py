"""
Information-Criterion Source Enumeration
========================================
AIC and MDL over the sample-covariance spectrum. The likelihood term
"-2 log L_m^((M-m)N)" is read as -2 (M - m) N log L_m.
"""

from __future__ import annotations
from dataclasses import dataclass
from enum import Enum

import numpy as np

from config.settings import SETTINGS
from sensing.errors import DomainError
from sensing.schemas import EigenSpectrum

FLOOR = SETTINGS["numerics"]["log_floor"]


class Criterion(str, Enum):
    AIC = "aic"
    MDL = "mdl"


@dataclass(frozen=True)
class CriterionCurve:
    values: np.ndarray
    argmin: int

    @classmethod
    def from_values(cls, values: np.ndarray) -> "CriterionCurve":
        values = np.asarray(values, dtype=float)
        return cls(values=values, argmin=int(np.argmin(values)))


def likelihood_ratio_L(s: EigenSpectrum, m: int) -> float:
    """log L_m: log geometric mean minus log arithmetic mean of the trailing M - m eigenvalues."""
    M = s.M
    if not 0 <= m <= M - 1:
        raise DomainError(f"m={m} outside [0, {M - 1}]")
    tail = np.maximum(np.asarray(s.values[m:], dtype=float), FLOOR)
    return float(np.mean(np.log(tail)) - np.log(np.mean(tail)))


def _log_L_all(s: EigenSpectrum) -> np.ndarray:
    return np.array([likelihood_ratio_L(s, m) for m in range(s.M)])


def _curve(s: EigenSpectrum, N: int, penalty_per_m) -> CriterionCurve:
    if N < 1:
        raise DomainError(f"N must be >= 1, got {N}")
    M = s.M
    m = np.arange(M)
    likelihood = -2.0 * (M - m) * N * _log_L_all(s)
    return CriterionCurve.from_values(likelihood + penalty_per_m(m, M))


def aic(s: EigenSpectrum, N: int) -> CriterionCurve:
    return _curve(s, N, lambda m, M: 2.0 * m * (2 * M - m))


def mdl(s: EigenSpectrum, N: int) -> CriterionCurve:
    return _curve(s, N, lambda m, M: 0.5 * m * (2 * M - m) * np.log(N))


def estimate_sources(s: EigenSpectrum, N: int, criterion: Criterion = Criterion.MDL) -> int:
    curve = aic(s, N) if Criterion(criterion) is Criterion.AIC else mdl(s, N)
    return curve.argmin
