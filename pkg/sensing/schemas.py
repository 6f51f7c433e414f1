from __future__ import annotations
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator


# ============================================================
# ARRAY / SCENARIO SCHEMAS
# ============================================================

class ArrayConfig(BaseModel):
    """Uniform linear array geometry."""
    model_config = ConfigDict(frozen=True)

    M: int = Field(..., ge=2, description="antenna count")
    spacing_over_wavelength: float = Field(0.5, gt=0.0, description="d / lambda")


class Scenario(BaseModel):
    """One draw of the received-signal model. K = 0 means noise only."""
    model_config = ConfigDict(frozen=True)

    K: int = Field(..., ge=0)
    angles: List[float] = []
    snr_db: float = 0.0
    N: int = Field(..., ge=1)
    seed: int = 0

    @model_validator(mode="after")
    def _check_angles(self) -> "Scenario":
        if len(self.angles) != self.K:
            raise ValueError(f"expected {self.K} angles, got {len(self.angles)}")
        for a in self.angles:
            if not -90.0 < a < 90.0:
                raise ValueError(f"angle {a} outside (-90, 90)")
        ordered = sorted(self.angles)
        for lo, hi in zip(ordered, ordered[1:]):
            if hi - lo < 0.5:
                raise ValueError("angles must be at least 0.5 degrees apart")
        return self

    @property
    def signal_power(self) -> float:
        return 10.0 ** (self.snr_db / 10.0)


# ============================================================
# NUMERIC CONTAINERS
# ============================================================

@dataclass(frozen=True)
class EigenSpectrum:
    """Real eigenvalues sorted in non-increasing order."""
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1 or v.size == 0:
            raise ValueError("spectrum must be a non-empty 1-D array")
        if np.any(np.diff(v) > 0):
            raise ValueError("spectrum must be sorted descending")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_unsorted(cls, values) -> "EigenSpectrum":
        return cls(np.sort(np.asarray(values, dtype=float))[::-1].copy())

    @property
    def M(self) -> int:
        return int(self.values.size)

    @property
    def max(self) -> float:
        return float(self.values[0])

    @property
    def min(self) -> float:
        return float(self.values[-1])

    def scaled(self, c: float) -> "EigenSpectrum":
        return EigenSpectrum(self.values * c)

    def __len__(self) -> int:
        return self.M


@dataclass(frozen=True)
class Determinant:
    """Determinant kept in log domain; `value` is None when exp(log_abs) overflows."""
    sign: int
    log_abs: float
    value: Optional[float]
    degenerate: bool = False


@dataclass
class Snapshot:
    Y: np.ndarray
    truth: int
    signal_rho: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @property
    def M(self) -> int:
        return int(self.Y.shape[0])

    @property
    def N(self) -> int:
        return int(self.Y.shape[1])


@dataclass(frozen=True)
class WishartParams:
    mu: float
    nu: float


# ============================================================
# DETECTOR SCHEMAS
# ============================================================

class DetectorId(str, Enum):
    SR_MME = "sr_mme"
    GM = "gm"
    MME = "mme"
    M_MME = "m_mme"


class Hypothesis(str, Enum):
    H0 = "H0"
    H1 = "H1"


class GmCalibration(str, Enum):
    """How det(Q_H0) in the GM threshold is obtained."""
    SELF = "self"
    FIXED = "fixed"


@dataclass(frozen=True)
class DetectorVerdict:
    detector_id: DetectorId
    statistic: float
    threshold: float
    decision: Hypothesis
    degenerate: bool = False

    @classmethod
    def decide(cls, detector_id: DetectorId, statistic: float, threshold: float,
               degenerate: bool = False) -> "DetectorVerdict":
        decision = Hypothesis.H1 if statistic > threshold else Hypothesis.H0
        return cls(detector_id, float(statistic), float(threshold), decision, degenerate)

    @property
    def signal_present(self) -> bool:
        return self.decision is Hypothesis.H1


@dataclass(frozen=True)
class TheoreticalCurves:
    p_fa: float
    p_d: Optional[float] = None

    def __post_init__(self):
        for p in (self.p_fa, self.p_d):
            if p is not None and not 0.0 <= p <= 1.0:
                raise ValueError(f"probability {p} outside [0, 1]")
