"""
Multi-Layer Neural Network Classifier
=====================================
Fully-connected sigmoid network trained by per-sample gradient descent on

    E_i = (1/K) sum_k (g_hat_ik - g_ik)^2

Every neuron computes f(alpha - threshold). Layer 0 weights are v
(input -> hidden 1), middle weights u (hidden -> hidden), last weights w
(hidden s -> output); thresholds are delta for hidden layers and epsilon for
the output layer.
"""

from __future__ import annotations
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np
from scipy.special import expit

from classifiers.model_io import as_array, read_model, write_model
from classifiers.schemas import LabeledDataset, NnArchitecture
from sensing.errors import TrainingError
from sensing.rng import make_rng

sigmoid = expit


@dataclass
class NnParameters:
    weights: List[np.ndarray]
    thresholds: List[np.ndarray]
    feature_mean: Optional[np.ndarray] = None
    feature_scale: Optional[np.ndarray] = None
    loss_trace: List[float] = field(default_factory=list)
    epochs_run: int = 0

    @property
    def v(self) -> np.ndarray:
        return self.weights[0]

    @property
    def u(self) -> List[np.ndarray]:
        return self.weights[1:-1]

    @property
    def w(self) -> np.ndarray:
        return self.weights[-1]

    @property
    def delta(self) -> List[np.ndarray]:
        return self.thresholds[:-1]

    @property
    def epsilon(self) -> np.ndarray:
        return self.thresholds[-1]

    @property
    def K(self) -> int:
        return int(self.weights[-1].shape[1])

    def copy(self) -> "NnParameters":
        return NnParameters(
            weights=[W.copy() for W in self.weights],
            thresholds=[t.copy() for t in self.thresholds],
            feature_mean=None if self.feature_mean is None else self.feature_mean.copy(),
            feature_scale=None if self.feature_scale is None else self.feature_scale.copy(),
            loss_trace=list(self.loss_trace),
            epochs_run=self.epochs_run,
        )

    def flat(self) -> np.ndarray:
        return np.concatenate([a.ravel() for a in (*self.weights, *self.thresholds)])

    def counts(self) -> Tuple[int, int]:
        return (sum(W.size for W in self.weights), sum(t.size for t in self.thresholds))


def parameter_count(arch: NnArchitecture) -> Tuple[int, int]:
    """(connection coefficients, thresholds) = (5 q1 + sum q_t q_t+1 + q_s K, sum q_t + K)."""
    sizes = arch.layer_sizes
    n_weights = sum(a * b for a, b in zip(sizes[:-1], sizes[1:]))
    return n_weights, sum(sizes[1:])


def init_parameters(arch: NnArchitecture, rng: np.random.Generator) -> NnParameters:
    sizes = arch.layer_sizes
    scale = arch.init_scale
    weights = [rng.uniform(-scale, scale, size=(a, b)) for a, b in zip(sizes[:-1], sizes[1:])]
    thresholds = [rng.uniform(-scale, scale, size=b) for b in sizes[1:]]
    return NnParameters(weights=weights, thresholds=thresholds)


# ============================================================
# FORWARD / BACKWARD
# ============================================================

def _standardized(params: NnParameters, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if params.feature_mean is None:
        return x
    return (x - params.feature_mean) / params.feature_scale


def _activations(params: NnParameters, x: np.ndarray) -> List[np.ndarray]:
    """Outputs of every layer, input included, for already-standardized x."""
    outs = [x]
    for W, theta in zip(params.weights, params.thresholds):
        outs.append(sigmoid(outs[-1] @ W - theta))
    return outs


def nn_forward(params: NnParameters, x: np.ndarray) -> np.ndarray:
    """Network outputs in (0, 1); x may be one feature vector or a batch of rows."""
    return _activations(params, _standardized(params, x))[-1]


def nn_loss(params: NnParameters, x: np.ndarray, g: np.ndarray) -> float:
    out = nn_forward(params, x)
    return float(np.mean((out - g) ** 2))


def _backprop(params: NnParameters, x: np.ndarray, g: np.ndarray):
    outs = _activations(params, x)
    K = outs[-1].size
    g_hat = outs[-1]
    # G = g_hat (1 - g_hat)(g_hat - g), scaled by dE/dg_hat's 2/K
    delta = (2.0 / K) * g_hat * (1.0 - g_hat) * (g_hat - g)
    grad_w: List[np.ndarray] = [None] * len(params.weights)
    grad_t: List[np.ndarray] = [None] * len(params.thresholds)
    for layer in range(len(params.weights) - 1, -1, -1):
        grad_w[layer] = np.outer(outs[layer], delta)
        grad_t[layer] = -delta
        if layer:
            z = outs[layer]
            delta = (params.weights[layer] @ delta) * z * (1.0 - z)
    return grad_w, grad_t, g_hat


def nn_gradients(params: NnParameters, x: np.ndarray, g: np.ndarray):
    """dE/dweights and dE/dthresholds for one sample, on the standardized input."""
    grad_w, grad_t, _ = _backprop(params, _standardized(params, x), np.asarray(g, dtype=float))
    return grad_w, grad_t


# ============================================================
# TRAINING
# ============================================================

def nn_train(data: LabeledDataset, arch: NnArchitecture, seed: int) -> NnParameters:
    data.require_all_classes()
    if data.K != arch.output_size:
        raise TrainingError(f"dataset has K={data.K} classes, network outputs {arch.output_size}")
    if data.dim != arch.input_size:
        raise TrainingError(f"dataset has {data.dim} features, network expects {arch.input_size}")

    rng = make_rng(seed)
    params = init_parameters(arch, rng)
    X = data.features
    if arch.standardize:
        params.feature_mean = X.mean(axis=0)
        scale = X.std(axis=0)
        params.feature_scale = np.where(scale > 0, scale, 1.0)
        X = (X - params.feature_mean) / params.feature_scale
    G = data.one_hot()
    eta = arch.learning_rate

    for epoch in range(arch.epochs):
        before = params.flat()
        for i in rng.permutation(len(data)):
            grad_w, grad_t, _ = _backprop(params, X[i], G[i])
            for layer in range(len(params.weights)):
                params.weights[layer] -= eta * grad_w[layer]
                params.thresholds[layer] -= eta * grad_t[layer]
        out = _activations(params, X)[-1]
        params.loss_trace.append(float(np.mean((out - G) ** 2)))
        params.epochs_run = epoch + 1
        if np.max(np.abs(params.flat() - before)) < arch.tol:
            break
    return params


def nn_classify(params: NnParameters, x: np.ndarray) -> int:
    """arg max over outputs, ties to the smaller class; labels are 1-based."""
    return int(np.argmax(nn_forward(params, x))) + 1


def nn_classify_batch(params: NnParameters, X: np.ndarray) -> np.ndarray:
    return np.argmax(nn_forward(params, np.atleast_2d(X)), axis=1) + 1


# ============================================================
# PERSISTENCE
# ============================================================

def save_nn(params: NnParameters, arch: NnArchitecture, path: Path) -> Path:
    return write_model(path, "nn", {
        "architecture": arch.model_dump(),
        "parameters": [a.ravel().tolist() for a in (*params.weights, *params.thresholds)],
        "feature_mean": None if params.feature_mean is None else params.feature_mean.tolist(),
        "feature_scale": None if params.feature_scale is None else params.feature_scale.tolist(),
    })


def load_nn(path: Path) -> Tuple[NnParameters, NnArchitecture]:
    doc = read_model(path, "nn")
    arch = NnArchitecture(**doc["architecture"])
    sizes = arch.layer_sizes
    flat = doc["parameters"]
    n_layers = len(sizes) - 1
    weights = [as_array(flat[i]).reshape(a, b)
               for i, (a, b) in enumerate(zip(sizes[:-1], sizes[1:]))]
    thresholds = [as_array(flat[n_layers + i]) for i in range(n_layers)]
    params = NnParameters(
        weights=weights,
        thresholds=thresholds,
        feature_mean=None if doc["feature_mean"] is None else as_array(doc["feature_mean"]),
        feature_scale=None if doc["feature_scale"] is None else as_array(doc["feature_scale"]),
    )
    return params, arch
