"""Five log-domain eigenvalue statistics used as classifier input."""

from __future__ import annotations
from typing import Iterable

import numpy as np

from config.settings import SETTINGS
from sensing.errors import DimensionError
from sensing.schemas import EigenSpectrum

FLOOR = SETTINGS["numerics"]["log_floor"]

# natural log throughout
FEATURE_COLUMNS = ("f1", "f2", "f3", "f4", "f5")
FEATURE_NAMES = ("log_max", "log_min", "log_mean", "log_geomean", "log_std")


def extract_features(s: EigenSpectrum) -> np.ndarray:
    """(log max, log min, log mean, log geometric mean, log population std)."""
    if s.M < 2:
        raise DimensionError("feature extraction needs at least two eigenvalues")
    lam = np.maximum(np.asarray(s.values, dtype=float), FLOOR)
    mean = float(np.mean(lam))
    log_geomean = float(np.mean(np.log(lam)))
    std = float(np.std(lam))  # divisor M
    return np.array([
        np.log(lam[0]),
        np.log(lam[-1]),
        np.log(max(mean, FLOOR)),
        log_geomean,
        np.log(max(std, FLOOR)),
    ])


def extract_features_batch(spectra: Iterable[EigenSpectrum]) -> np.ndarray:
    rows = [extract_features(s) for s in spectra]
    return np.vstack(rows) if rows else np.zeros((0, len(FEATURE_COLUMNS)))
