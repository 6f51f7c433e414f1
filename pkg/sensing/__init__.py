# sensing/__init__.py
"""
Eigenvalue Sensing Layer
========================
Signal model, spectra, TW2 thresholds, detectors, features and AIC/MDL.
"""

from sensing.schemas import (
    ArrayConfig, Scenario, Snapshot, EigenSpectrum, DetectorId, DetectorVerdict,
    GmCalibration, Hypothesis,
)
from sensing.linalg import hermitian_eigenvalues, gram, det_from_spectrum
from sensing.signal_model import array_manifold, synthesize, sample_covariance
from sensing.features import extract_features

__all__ = [
    "ArrayConfig",
    "Scenario",
    "Snapshot",
    "EigenSpectrum",
    "DetectorId",
    "DetectorVerdict",
    "GmCalibration",
    "Hypothesis",
    "hermitian_eigenvalues",
    "gram",
    "det_from_spectrum",
    "array_manifold",
    "synthesize",
    "sample_covariance",
    "extract_features",
]
