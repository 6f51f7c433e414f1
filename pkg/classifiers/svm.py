"""
Support Vector Machine Classifier
=================================
Soft-margin kernel SVM trained by sequential minimal optimization on the dual

    min_a  1/2 a^T Q a - e^T a,   Q_ij = y_i y_j k(x_i, x_j)
    s.t.   y^T a = 0,  0 <= a_t <= C

Each step picks the maximal violating pair and solves the two-variable
subproblem in closed form. K > 2 classes are handled one-vs-one.
"""

from __future__ import annotations
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np

from classifiers.model_io import as_array, read_model, write_model
from classifiers.schemas import KernelSpec, LabeledDataset
from sensing.errors import ConvergenceError, TrainingError

TAU = 1e-12


@dataclass
class SvmModel:
    """Binary model; decision(x) = sum_t a_t y_t k(x_t, x) + b, positive means class +1."""
    train_X: np.ndarray
    train_y: np.ndarray
    alpha: np.ndarray
    b: float
    C: float
    kernel: KernelSpec
    feature_mean: Optional[np.ndarray] = None
    feature_scale: Optional[np.ndarray] = None
    objective_trace: List[float] = field(default_factory=list)
    iterations: int = 0

    @classmethod
    def constant(cls, b: float, dim: int = 5) -> "SvmModel":
        """A model with no support vectors whose decision is always b."""
        return cls(np.zeros((0, dim)), np.zeros(0), np.zeros(0), float(b), 1.0,
                   KernelSpec(kind="linear"))

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.alpha > 0)

    def _scaled(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if self.feature_mean is None:
            return X
        return (X - self.feature_mean) / self.feature_scale


def _dual_objective(alpha: np.ndarray, grad: np.ndarray) -> float:
    # grad = Q a - e, so e^T a - 1/2 a^T Q a = -1/2 a^T (grad - e)
    return float(-0.5 * alpha @ (grad - 1.0))


def _violating_pair(alpha, grad, y, C):
    minus_yg = -y * grad
    up = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
    low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < C))
    up_vals = np.where(up, minus_yg, -np.inf)
    low_vals = np.where(low, minus_yg, np.inf)
    i = int(np.argmax(up_vals))
    j = int(np.argmin(low_vals))
    return i, j, up_vals[i], low_vals[j]


def _two_variable_step(alpha, grad, Q, y, C, i, j):
    old_i, old_j = alpha[i], alpha[j]
    if y[i] != y[j]:
        quad = max(Q[i, i] + Q[j, j] + 2.0 * Q[i, j], TAU)
        delta = (-grad[i] - grad[j]) / quad
        diff = old_i - old_j
        ai, aj = old_i + delta, old_j + delta
        if diff > 0:
            if aj < 0:
                aj, ai = 0.0, diff
        elif ai < 0:
            ai, aj = 0.0, -diff
        if diff > 0:
            if ai > C:
                ai, aj = C, C - diff
        elif aj > C:
            aj, ai = C, C + diff
    else:
        quad = max(Q[i, i] + Q[j, j] - 2.0 * Q[i, j], TAU)
        delta = (grad[i] - grad[j]) / quad
        total = old_i + old_j
        ai, aj = old_i - delta, old_j + delta
        if total > C:
            if ai > C:
                ai, aj = C, total - C
        elif aj < 0:
            aj, ai = 0.0, total
        if total > C:
            if aj > C:
                aj, ai = C, total - C
        elif ai < 0:
            ai, aj = 0.0, total
    alpha[i], alpha[j] = ai, aj
    grad += Q[:, i] * (ai - old_i) + Q[:, j] * (aj - old_j)


def _bias(alpha, grad, y, C, up_max, low_min) -> float:
    free = (alpha > 0) & (alpha < C)
    if np.any(free):
        return float(np.mean(-y[free] * grad[free]))
    return float(0.5 * (up_max + low_min))


def svm_train_binary(X: np.ndarray, y: np.ndarray, C: float = 1.0,
                     kernel: Optional[KernelSpec] = None, tol: float = 1e-3,
                     standardize: bool = True, max_iter: Optional[int] = None) -> SvmModel:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float).reshape(-1)
    if X.shape[0] != y.size:
        raise TrainingError("X and y disagree in length")
    if not set(np.unique(y)) <= {-1.0, 1.0}:
        raise TrainingError("labels must be +1 or -1")
    if not (np.any(y > 0) and np.any(y < 0)):
        raise TrainingError("both classes need at least one training sample")
    if C <= 0:
        raise TrainingError(f"C must be positive, got {C}")

    mean = scale = None
    if standardize:
        mean = X.mean(axis=0)
        scale = X.std(axis=0)
        scale = np.where(scale > 0, scale, 1.0)
        X = (X - mean) / scale
    if kernel is None:
        kernel = KernelSpec(kind="rbf")
    if kernel.kind == "rbf" and kernel.rbf_gamma is None:
        var = float(X.var())
        kernel = KernelSpec(kind="rbf", rbf_gamma=1.0 / (X.shape[1] * var) if var > 0 else 1.0)

    n = y.size
    Q = np.outer(y, y) * kernel.matrix(X, X)
    alpha = np.zeros(n)
    grad = -np.ones(n)
    cap = max_iter if max_iter is not None else 10_000 * n
    model = SvmModel(X, y, alpha, 0.0, float(C), kernel, mean, scale)

    for it in range(cap + 1):
        i, j, up_max, low_min = _violating_pair(alpha, grad, y, C)
        if up_max - low_min <= tol:
            break
        if it == cap:
            model.b = _bias(alpha, grad, y, C, up_max, low_min)
            model.iterations = it
            raise ConvergenceError(f"SMO did not converge in {cap} iterations "
                                   f"(gap {up_max - low_min:.3g})", best=model)
        _two_variable_step(alpha, grad, Q, y, C, i, j)
        model.objective_trace.append(_dual_objective(alpha, grad))

    model.b = _bias(alpha, grad, y, C, up_max, low_min)
    model.iterations = len(model.objective_trace)
    return model


def _decision_scaled(model: SvmModel, Xs: np.ndarray) -> np.ndarray:
    sv = model.support
    Kx = model.kernel.matrix(Xs, model.train_X[sv])
    return Kx @ (model.alpha[sv] * model.train_y[sv]) + model.b


def svm_decision(model: SvmModel, x: np.ndarray) -> np.ndarray:
    return _decision_scaled(model, model._scaled(x))


def kkt_violations(model: SvmModel, tol: float = 1e-2) -> np.ndarray:
    """Indices of training points whose margin y f(x) breaks the KKT conditions by more than tol."""
    margin = model.train_y * _decision_scaled(model, model.train_X)
    a, C = model.alpha, model.C
    at_zero = (a <= 0) & (margin < 1.0 - tol)
    free = (a > 0) & (a < C) & (np.abs(margin - 1.0) > tol)
    at_c = (a >= C) & (margin > 1.0 + tol)
    return np.flatnonzero(at_zero | free | at_c)


# ============================================================
# ONE-VS-ONE
# ============================================================

@dataclass
class MultiClassSvm:
    K: int
    models: Dict[Tuple[int, int], SvmModel]

    @property
    def pairs(self) -> List[Tuple[int, int]]:
        return sorted(self.models)


def svm_train_multiclass(data: LabeledDataset, C: float = 1.0,
                         kernel: Optional[KernelSpec] = None, tol: float = 1e-3,
                         standardize: bool = True, workers: int = 1) -> MultiClassSvm:
    """One binary model per class pair (i, j), i < j; class i is the +1 side."""
    data.require_all_classes()
    pairs = list(combinations(range(1, data.K + 1), 2))

    def fit(pair):
        i, j = pair
        mask = (data.labels == i) | (data.labels == j)
        y = np.where(data.labels[mask] == i, 1.0, -1.0)
        return svm_train_binary(data.features[mask], y, C=C, kernel=kernel,
                                tol=tol, standardize=standardize)

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        fitted = list(pool.map(fit, pairs))
    return MultiClassSvm(K=data.K, models=dict(zip(pairs, fitted)))


def svm_classify_multiclass(model: MultiClassSvm, x: np.ndarray) -> int:
    """Majority vote; ties go to the larger summed |decision| of the wins, then the smaller class."""
    votes = np.zeros(model.K + 1, dtype=int)
    strength = np.zeros(model.K + 1)
    for (i, j), m in model.models.items():
        f = float(svm_decision(m, x)[0])
        winner = i if f >= 0 else j
        votes[winner] += 1
        strength[winner] += abs(f)
    best = max(range(1, model.K + 1), key=lambda k: (votes[k], strength[k], -k))
    return int(best)


def svm_classify_batch(model: MultiClassSvm, X: np.ndarray) -> np.ndarray:
    return np.array([svm_classify_multiclass(model, x) for x in np.atleast_2d(X)], dtype=int)


# ============================================================
# PERSISTENCE
# ============================================================

def _dump_binary(m: SvmModel) -> dict:
    return {
        "dim": int(m.train_X.shape[1]),
        "train_X": m.train_X.tolist(),
        "train_y": m.train_y.tolist(),
        "alpha": m.alpha.tolist(),
        "b": m.b,
        "C": m.C,
        "kernel": m.kernel.model_dump(),
        "feature_mean": None if m.feature_mean is None else m.feature_mean.tolist(),
        "feature_scale": None if m.feature_scale is None else m.feature_scale.tolist(),
    }


def _load_binary(d: dict) -> SvmModel:
    train_y = as_array(d["train_y"])
    return SvmModel(
        train_X=as_array(d["train_X"]).reshape(train_y.size, int(d["dim"])),
        train_y=train_y,
        alpha=as_array(d["alpha"]),
        b=float(d["b"]),
        C=float(d["C"]),
        kernel=KernelSpec(**d["kernel"]),
        feature_mean=None if d["feature_mean"] is None else as_array(d["feature_mean"]),
        feature_scale=None if d["feature_scale"] is None else as_array(d["feature_scale"]),
    )


def save_svm(model: MultiClassSvm, path: Path) -> Path:
    return write_model(path, "svm", {
        "K": model.K,
        "pairs": [{"classes": list(p), **_dump_binary(model.models[p])} for p in model.pairs],
    })


def load_svm(path: Path) -> MultiClassSvm:
    doc = read_model(path, "svm")
    models = {tuple(entry["classes"]): _load_binary(entry) for entry in doc["pairs"]}
    return MultiClassSvm(K=int(doc["K"]), models=models)
