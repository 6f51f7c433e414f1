from __future__ import annotations
import hashlib
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional

import orjson
import pandas as pd
from dotenv import dotenv_values
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from config.settings import SETTINGS
from sensing.errors import ConfigError
from sensing.schemas import DetectorId, GmCalibration


# ============================================================
# EXPERIMENT SPEC
# ============================================================

class ExperimentKind(str, Enum):
    PD_VS_SNR = "pd_vs_snr"
    PD_VS_N = "pd_vs_N"
    ROC = "roc"
    ACC_VS_SNR = "acc_vs_snr"
    ACC_VS_M = "acc_vs_M"
    CRITERIA_VS_M = "criteria_vs_M"
    CRITERIA_VS_SNR = "criteria_vs_snr"
    PIPELINE = "pipeline"
    TRAINING_TIME = "training_time"


GRID_AXIS: Dict[ExperimentKind, str] = {
    ExperimentKind.PD_VS_SNR: "snr_db",
    ExperimentKind.PD_VS_N: "N",
    ExperimentKind.ROC: "p_fa",
    ExperimentKind.ACC_VS_SNR: "snr_db",
    ExperimentKind.ACC_VS_M: "M",
    ExperimentKind.CRITERIA_VS_M: "M",
    ExperimentKind.CRITERIA_VS_SNR: "snr_db",
    ExperimentKind.PIPELINE: "snr_db",
    ExperimentKind.TRAINING_TIME: "train_per_class",
}

CLASSIFIER_NAMES = ("nn3", "nn4", "svm", "nbc")


def _split_list(v):
    if isinstance(v, str):
        return [item.strip() for item in v.split(",") if item.strip()]
    return v


class ExperimentSpec(BaseModel):
    """One Monte Carlo experiment: a kind, a grid over its axis, and the fixed parameters."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: ExperimentKind
    grid: List[float] = Field(..., min_length=1)
    name: Optional[str] = None

    M: int = Field(64, ge=2)
    N: int = Field(200, ge=1)
    K: int = Field(3, ge=0)
    snr_db: float = -20.0
    p_fa: float = Field(1e-4, gt=0.0, lt=1.0)
    K_max: int = Field(3, ge=2)

    trials: int = Field(2000, ge=1)
    seed: int = SETTINGS["defaults"]["seed"]
    workers: int = Field(SETTINGS["defaults"]["workers"], ge=1)
    calibration_trials: int = Field(SETTINGS["defaults"]["calibration_trials"], ge=1)
    gm_mode: GmCalibration = GmCalibration.SELF
    gate_detector: DetectorId = DetectorId.SR_MME

    train_per_class: int = Field(10, ge=1)
    test_per_class: int = Field(200, ge=1)
    repetitions: int = Field(1, ge=1)
    classifiers: List[str] = list(CLASSIFIER_NAMES)
    epochs: int = Field(400, ge=0)
    learning_rate: float = Field(0.01, ge=0.0)
    svm_C: float = Field(1.0, gt=0.0)
    nbc_covariance: str = "full"
    shuffle_labels: bool = False

    @field_validator("grid", "classifiers", mode="before")
    @classmethod
    def _comma_list(cls, v):
        return _split_list(v)

    @field_validator("classifiers")
    @classmethod
    def _known_classifiers(cls, v: List[str]) -> List[str]:
        unknown = [c for c in v if c not in CLASSIFIER_NAMES]
        if unknown:
            raise ValueError(f"unknown classifiers {unknown}; choose from {list(CLASSIFIER_NAMES)}")
        return v

    @field_validator("nbc_covariance")
    @classmethod
    def _covariance_kind(cls, v: str) -> str:
        if v not in ("full", "diag"):
            raise ValueError("nbc_covariance must be 'full' or 'diag'")
        return v

    @model_validator(mode="after")
    def _check_grid(self) -> "ExperimentSpec":
        axis = self.axis
        for g in self.grid:
            if axis in ("N", "M", "train_per_class") and (g != int(g) or g < (2 if axis == "M" else 1)):
                raise ValueError(f"grid value {g} is not a valid {axis}")
            if axis == "p_fa" and not 0.0 < g < 1.0:
                raise ValueError(f"p_fa grid value {g} outside (0, 1)")
        if len(set(self.grid)) != len(self.grid):
            raise ValueError("grid values must be distinct")
        return self

    @property
    def axis(self) -> str:
        return GRID_AXIS[self.kind]

    @property
    def stem(self) -> str:
        return self.name or self.kind.value

    def sorted_grid(self) -> List[float]:
        return sorted(self.grid)

    def at(self, **changes) -> "ExperimentSpec":
        return ExperimentSpec.build({**self.model_dump(), **changes})

    def spec_hash(self) -> str:
        payload = orjson.dumps(self.model_dump(mode="json"), option=orjson.OPT_SORT_KEYS)
        return hashlib.sha256(payload).hexdigest()

    # ---- config files ---------------------------------------

    @classmethod
    def build(cls, data: Dict[str, Any]) -> "ExperimentSpec":
        try:
            return cls(**data)
        except ValidationError as e:
            first = e.errors()[0]
            where = ".".join(str(p) for p in first["loc"]) or "spec"
            raise ConfigError(f"{where}: {first['msg']}") from e

    @classmethod
    def from_file(cls, path: Path, **overrides) -> "ExperimentSpec":
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"config file not found: {path}")
        raw = {k: v for k, v in dotenv_values(path).items() if v is not None and v != ""}
        raw.update({k: v for k, v in overrides.items() if v is not None})
        return cls.build(raw)

    def to_config_text(self) -> str:
        lines = []
        for key, value in self.model_dump(mode="json", exclude_none=True).items():
            if isinstance(value, list):
                value = ",".join(str(v) for v in value)
            lines.append(f"{key}={value}")
        return "\n".join(lines) + "\n"


class DatasetSpec(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    K_max: int = Field(3, ge=2)
    per_class: int = Field(10, ge=1)
    snr_db: float = -20.0
    M: int = Field(64, ge=2)
    N: int = Field(200, ge=1)
    seed: int = SETTINGS["defaults"]["seed"]
    workers: int = Field(SETTINGS["defaults"]["workers"], ge=1)
    name: str = "dataset"

    @classmethod
    def from_file(cls, path: Optional[Path], **overrides) -> "DatasetSpec":
        raw: Dict[str, Any] = {}
        if path is not None:
            path = Path(path)
            if not path.exists():
                raise ConfigError(f"config file not found: {path}")
            raw = {k: v for k, v in dotenv_values(path).items() if v is not None and v != ""}
        raw.update({k: v for k, v in overrides.items() if v is not None})
        try:
            return cls(**raw)
        except ValidationError as e:
            first = e.errors()[0]
            raise ConfigError(f"{'.'.join(str(p) for p in first['loc']) or 'spec'}: {first['msg']}") from e


# ============================================================
# RESULTS
# ============================================================

WALL_CLOCK_SUFFIX = "_seconds"


@dataclass
class ResultTable:
    """Rows keyed by the grid axis; each method column comes with a `<method>_ci` half-width."""
    experiment: str
    axis: str
    columns: List[str]
    rows: List[Dict[str, Any]] = field(default_factory=list)
    metadata: Dict[str, Any] = field(default_factory=dict)

    def add_row(self, row: Dict[str, Any]) -> None:
        missing = [c for c in self.columns if c not in row]
        if missing:
            raise KeyError(f"row is missing columns {missing}")
        self.rows.append(row)

    def to_frame(self) -> pd.DataFrame:
        df = pd.DataFrame(self.rows, columns=self.columns)
        return df.sort_values(self.axis, kind="stable").reset_index(drop=True)

    def column(self, name: str) -> List[Any]:
        return self.to_frame()[name].tolist()

    @property
    def wall_clock_columns(self) -> List[str]:
        return [c for c in self.columns if c.endswith(WALL_CLOCK_SUFFIX)]

    def to_csv_text(self, include_wall_clock: bool = True) -> str:
        df = self.to_frame()
        if not include_wall_clock:
            df = df.drop(columns=self.wall_clock_columns)
        return df.to_csv(index=False, float_format="%.10g", lineterminator="\n")

    def determinism_hash(self) -> str:
        return hashlib.sha256(self.to_csv_text(include_wall_clock=False).encode()).hexdigest()
