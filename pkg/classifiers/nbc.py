"""
Gaussian Bayes Classifier
=========================
Per-class prior, mean and covariance estimated from the training features;
classification picks the class with the largest log posterior

    log pi_k - 1/2 log|Sigma_k| - 1/2 (x - mu_k)^T Sigma_k^-1 (x - mu_k)

A full covariance keeps the feature correlations; covariance="diag" is the
naive variant with independent features.
"""

from __future__ import annotations
from dataclasses import dataclass
from pathlib import Path
from typing import Literal

import numpy as np
from scipy.linalg import cho_factor, cho_solve
from scipy.special import logsumexp

from classifiers.model_io import as_array, read_model, write_model
from classifiers.schemas import LabeledDataset
from sensing.errors import TrainingError
from sensing.linalg import det_from_spectrum, hermitian_eigenvalues

RIDGE = 1e-6

CovarianceKind = Literal["full", "diag"]


@dataclass
class NbcModel:
    K: int
    priors: np.ndarray        # (K,)
    means: np.ndarray         # (K, d)
    covariances: np.ndarray   # (K, d, d)
    log_dets: np.ndarray      # (K,)
    covariance: CovarianceKind = "full"

    def __post_init__(self):
        self._factors = [cho_factor(S, lower=True) for S in self.covariances]

    @property
    def dim(self) -> int:
        return int(self.means.shape[1])


def _class_covariance(X: np.ndarray, covariance: CovarianceKind) -> np.ndarray:
    centered = X - X.mean(axis=0)
    S = centered.T @ centered / X.shape[0]
    if covariance == "diag":
        S = np.diag(np.diag(S))
    d = S.shape[0]
    level = np.trace(S) / d
    return S + RIDGE * (level if level > 0 else 1.0) * np.eye(d)


def nbc_train(data: LabeledDataset, covariance: CovarianceKind = "full") -> NbcModel:
    if covariance not in ("full", "diag"):
        raise TrainingError(f"unknown covariance kind {covariance!r}")
    data.require_all_classes(minimum=2)

    priors = data.class_counts() / len(data)
    means, covs, log_dets = [], [], []
    for k in range(1, data.K + 1):
        X = data.features[data.labels == k]
        S = _class_covariance(X, covariance)
        det = det_from_spectrum(hermitian_eigenvalues(S))
        if det.degenerate or det.sign <= 0:
            raise TrainingError(f"class {k} covariance is singular")
        means.append(X.mean(axis=0))
        covs.append(S)
        log_dets.append(det.log_abs)
    return NbcModel(K=data.K, priors=priors, means=np.array(means),
                    covariances=np.array(covs), log_dets=np.array(log_dets),
                    covariance=covariance)


def _log_joint(model: NbcModel, X: np.ndarray) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    d = model.dim
    out = np.empty((X.shape[0], model.K))
    for k in range(model.K):
        diff = X - model.means[k]
        quad = np.sum(diff * cho_solve(model._factors[k], diff.T).T, axis=1)
        out[:, k] = (np.log(model.priors[k]) - 0.5 * model.log_dets[k] - 0.5 * quad
                     - 0.5 * d * np.log(2.0 * np.pi))
    return out


def nbc_log_posteriors(model: NbcModel, x: np.ndarray) -> np.ndarray:
    """Normalized log P(class k | x); one row per input row."""
    joint = _log_joint(model, x)
    return joint - logsumexp(joint, axis=1, keepdims=True)


def nbc_classify(model: NbcModel, x: np.ndarray) -> int:
    return int(np.argmax(_log_joint(model, x)[0])) + 1


def nbc_classify_batch(model: NbcModel, X: np.ndarray) -> np.ndarray:
    return np.argmax(_log_joint(model, X), axis=1) + 1


def save_nbc(model: NbcModel, path: Path) -> Path:
    return write_model(path, "nbc", {
        "K": model.K,
        "covariance": model.covariance,
        "priors": model.priors.tolist(),
        "means": model.means.tolist(),
        "covariances": model.covariances.tolist(),
        "log_dets": model.log_dets.tolist(),
    })


def load_nbc(path: Path) -> NbcModel:
    doc = read_model(path, "nbc")
    return NbcModel(
        K=int(doc["K"]),
        priors=as_array(doc["priors"]),
        means=as_array(doc["means"]),
        covariances=as_array(doc["covariances"]),
        log_dets=as_array(doc["log_dets"]),
        covariance=doc["covariance"],
    )
