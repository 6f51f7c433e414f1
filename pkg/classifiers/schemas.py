from __future__ import annotations
from dataclasses import dataclass
from pathlib import Path
from typing import List, Literal, Optional

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, field_validator

from sensing.errors import TrainingError
from sensing.features import FEATURE_COLUMNS


# ============================================================
# DATASETS
# ============================================================

@dataclass
class LabeledDataset:
    """Feature rows with class labels in {1..K}."""
    features: np.ndarray
    labels: np.ndarray
    K: int

    def __post_init__(self):
        self.features = np.atleast_2d(np.asarray(self.features, dtype=float))
        self.labels = np.asarray(self.labels, dtype=int).reshape(-1)
        if self.features.shape[0] != self.labels.size:
            raise ValueError("features and labels disagree in length")
        if self.labels.size and (self.labels.min() < 1 or self.labels.max() > self.K):
            raise ValueError(f"labels must lie in 1..{self.K}")
        if not np.all(np.isfinite(self.features)):
            raise ValueError("features must be finite")

    def __len__(self) -> int:
        return int(self.labels.size)

    @property
    def dim(self) -> int:
        return int(self.features.shape[1])

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.K + 1)[1:]

    def require_all_classes(self, minimum: int = 1) -> None:
        counts = self.class_counts()
        short = [k + 1 for k, c in enumerate(counts) if c < minimum]
        if short:
            raise TrainingError(f"classes {short} have fewer than {minimum} training samples")

    def one_hot(self) -> np.ndarray:
        g = np.zeros((len(self), self.K))
        g[np.arange(len(self)), self.labels - 1] = 1.0
        return g

    def with_labels(self, labels: np.ndarray) -> "LabeledDataset":
        return LabeledDataset(self.features.copy(), np.asarray(labels), self.K)

    @classmethod
    def concat(cls, parts: List["LabeledDataset"]) -> "LabeledDataset":
        K = max(p.K for p in parts)
        return cls(np.vstack([p.features for p in parts]),
                   np.concatenate([p.labels for p in parts]), K)

    # ---- CSV -----------------------------------------------

    def to_frame(self) -> pd.DataFrame:
        columns = [f"f{i + 1}" for i in range(self.dim)]
        df = pd.DataFrame(self.features, columns=columns)
        df["label"] = self.labels
        return df

    def to_csv(self, path: Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        self.to_frame().to_csv(path, index=False, float_format="%.17g", lineterminator="\n")
        return path

    @classmethod
    def from_frame(cls, df: pd.DataFrame, K: Optional[int] = None) -> "LabeledDataset":
        columns = [c for c in df.columns if c != "label"]
        labels = df["label"].to_numpy(dtype=int)
        return cls(df[columns].to_numpy(dtype=float), labels, K or int(labels.max()))

    @classmethod
    def from_csv(cls, path: Path, K: Optional[int] = None) -> "LabeledDataset":
        return cls.from_frame(pd.read_csv(path), K)


# ============================================================
# MODEL SPECS
# ============================================================

class NnArchitecture(BaseModel):
    """Fully-connected sigmoid network; hidden_sizes [10] is the 3-layer net, [7, 5] the 4-layer."""
    model_config = ConfigDict(frozen=True)

    input_size: int = Field(len(FEATURE_COLUMNS), ge=1)
    hidden_sizes: List[int] = [10]
    output_size: int = Field(3, ge=1)
    learning_rate: float = Field(0.01, ge=0.0)
    epochs: int = Field(400, ge=0)
    tol: float = 1e-8
    init_scale: float = 0.5
    standardize: bool = True

    @field_validator("hidden_sizes")
    @classmethod
    def _non_empty(cls, v: List[int]) -> List[int]:
        if not v or any(h < 1 for h in v):
            raise ValueError("hidden_sizes must be non-empty with every size >= 1")
        return v

    @property
    def layer_sizes(self) -> List[int]:
        return [self.input_size, *self.hidden_sizes, self.output_size]


class KernelSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: Literal["linear", "rbf"] = "rbf"
    rbf_gamma: Optional[float] = Field(None, gt=0.0)

    def matrix(self, X: np.ndarray, Z: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(X)
        Z = np.atleast_2d(Z)
        if self.kind == "linear":
            return X @ Z.T
        sq = (np.sum(X * X, axis=1)[:, None] + np.sum(Z * Z, axis=1)[None, :] - 2.0 * X @ Z.T)
        return np.exp(-self.rbf_gamma * np.maximum(sq, 0.0))
