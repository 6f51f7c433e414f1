"""
Complex Linear Algebra Backbone
===============================
Hermitian eigenvalues, Gram products and determinants from spectra.

Matrices are numpy complex arrays. Only eigenvalues are computed; no
consumer needs eigenvectors.
"""

from __future__ import annotations
import math
from typing import Optional

import numpy as np

from config.settings import SETTINGS
from sensing.errors import DimensionError, SymmetryError
from sensing.schemas import Determinant, EigenSpectrum

_NUM = SETTINGS["numerics"]
_LOG_MAX = math.log(np.finfo(float).max)
_LOG_MIN = math.log(np.finfo(float).tiny)


def _check_square(A: np.ndarray) -> np.ndarray:
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise DimensionError("matrix has non-finite entries")
    return A


def _check_hermitian(A: np.ndarray) -> None:
    scale = float(np.max(np.abs(A))) if A.size else 0.0
    deviation = float(np.max(np.abs(A - A.conj().T))) if A.size else 0.0
    if deviation > _NUM["hermitian_tol_rel"] * scale:
        raise SymmetryError(f"matrix is not Hermitian (max deviation {deviation:.3e})")


def _clamp(values: np.ndarray) -> np.ndarray:
    top = float(np.max(np.abs(values))) if values.size else 0.0
    roundoff = (values < 0.0) & (values >= -_NUM["eig_clamp_rel"] * top)
    values = values.copy()
    values[roundoff] = 0.0
    return values


def jacobi_eigenvalues(A: np.ndarray, eps: float = 1e-12, max_sweeps: int = 100) -> np.ndarray:
    """Cyclic Jacobi rotations on a complex Hermitian matrix.

    Each rotation first removes the phase of A[p, q] with a diagonal unitary,
    then applies the real rotation that zeroes it.
    """
    A = np.array(A, dtype=complex)
    n = A.shape[0]
    norm = float(np.linalg.norm(A))
    if norm == 0.0:
        return np.zeros(n)
    for _ in range(max_sweeps):
        off = float(np.linalg.norm(A - np.diag(np.diag(A))))
        if off <= eps * norm:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                mag = abs(apq)
                if mag <= eps * norm * 1e-3:
                    continue
                phase = apq / mag
                tau = (A[q, q].real - A[p, p].real) / (2.0 * mag)
                t = math.copysign(1.0, tau) / (abs(tau) + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                U = np.array([[c, s], [-s * np.conj(phase), c * np.conj(phase)]])
                idx = [p, q]
                A[:, idx] = A[:, idx] @ U
                A[idx, :] = U.conj().T @ A[idx, :]
                A[p, q] = A[q, p] = 0.0
    return np.diag(A).real.copy()


def hermitian_eigenvalues(A: np.ndarray, method: Optional[str] = None) -> EigenSpectrum:
    """All eigenvalues of a Hermitian matrix, descending, tiny negative roundoff clamped to 0."""
    A = _check_square(A)
    _check_hermitian(A)
    method = method or SETTINGS["defaults"]["eig_method"]
    if method == "jacobi":
        values = jacobi_eigenvalues(A)
    elif method == "lapack":
        values = np.linalg.eigvalsh(A)
    else:
        raise ValueError(f"unknown eigenvalue method {method!r}")
    return EigenSpectrum.from_unsorted(_clamp(np.asarray(values, dtype=float)))


def gram(Y: np.ndarray) -> np.ndarray:
    """Y @ Y^H."""
    Y = np.asarray(Y)
    if Y.ndim != 2 or Y.shape[1] < 1:
        raise DimensionError(f"expected an M x N matrix with N >= 1, got shape {Y.shape}")
    G = Y @ Y.conj().T
    # symmetrize away matmul roundoff so the Hermitian check never trips
    return 0.5 * (G + G.conj().T)


def det_from_spectrum(s: EigenSpectrum) -> Determinant:
    """Product of eigenvalues, computed as a sum of logs."""
    values = np.asarray(s.values, dtype=float)
    if not np.all(np.isfinite(values)):
        raise DimensionError("spectrum has non-finite values")
    if np.any(values == 0.0):
        return Determinant(sign=0, log_abs=-math.inf, value=0.0, degenerate=True)
    sign = -1 if int(np.sum(values < 0)) % 2 else 1
    log_abs = float(np.sum(np.log(np.abs(values))))
    value = sign * math.exp(log_abs) if _LOG_MIN < log_abs < _LOG_MAX else None
    return Determinant(sign=sign, log_abs=log_abs, value=value)
