"""
Received Signal Model
=====================
Baseband ULA snapshots under H0 (noise only) and H1 (K emitters + noise).

    y(n) = sum_k a(theta_k) s_k(n) + v(n)

Noise power is fixed to 1, every emitter has power 10^(snr_db/10).
"""

from __future__ import annotations
from typing import List

import numpy as np

from sensing.errors import DomainError
from sensing.linalg import gram, hermitian_eigenvalues
from sensing.rng import complex_gaussian, make_rng
from sensing.schemas import ArrayConfig, Scenario, Snapshot


def array_manifold(theta_deg: float, cfg: ArrayConfig) -> np.ndarray:
    """Phase-ramp response a(theta); element m is exp(-j 2 pi m (d/lambda) sin theta)."""
    if not -90.0 < theta_deg < 90.0:
        raise DomainError(f"angle {theta_deg} outside (-90, 90)")
    m = np.arange(cfg.M)
    phase = 2.0 * np.pi * cfg.spacing_over_wavelength * np.sin(np.deg2rad(theta_deg))
    return np.exp(-1j * phase * m)


def steering_matrix(angles_deg: List[float], cfg: ArrayConfig) -> np.ndarray:
    if not angles_deg:
        return np.zeros((cfg.M, 0), dtype=complex)
    return np.column_stack([array_manifold(a, cfg) for a in angles_deg])


def signal_eigenvalues(angles_deg: List[float], power: float, cfg: ArrayConfig) -> np.ndarray:
    """Descending eigenvalues of A diag(power) A^H; entries past K are exactly zero."""
    K = len(angles_deg)
    if K == 0:
        return np.zeros(0)
    A = steering_matrix(angles_deg, cfg)
    rho = np.array(hermitian_eigenvalues(power * (A @ A.conj().T)).values)
    rho[K:] = 0.0
    return rho


def synthesize(scenario: Scenario, cfg: ArrayConfig) -> Snapshot:
    rng = make_rng(scenario.seed)
    V = complex_gaussian(rng, (cfg.M, scenario.N))
    if scenario.K == 0:
        return Snapshot(Y=V, truth=0, signal_rho=np.zeros(0))

    power = scenario.signal_power
    A = steering_matrix(list(scenario.angles), cfg)
    S = complex_gaussian(rng, (scenario.K, scenario.N), variance=power)
    return Snapshot(
        Y=A @ S + V,
        truth=scenario.K,
        signal_rho=signal_eigenvalues(list(scenario.angles), power, cfg),
    )


def sample_covariance(Y: np.ndarray) -> np.ndarray:
    """(1/N) Y Y^H."""
    Y = np.asarray(Y)
    return gram(Y) / Y.shape[1]


def draw_angles(K: int, rng: np.random.Generator, half_range_deg: float = 60.0,
                min_separation_deg: float = 2.0, max_attempts: int = 1000) -> List[float]:
    """K angles uniform in (-half_range, half_range), pairwise at least min_separation apart."""
    if K == 0:
        return []
    if (K - 1) * min_separation_deg >= 2.0 * half_range_deg:
        raise DomainError(f"cannot place {K} angles {min_separation_deg} deg apart")
    for _ in range(max_attempts):
        angles = np.sort(rng.uniform(-half_range_deg, half_range_deg, size=K))
        if K == 1 or np.min(np.diff(angles)) >= min_separation_deg:
            return [float(a) for a in angles]
    raise DomainError(f"no valid placement of {K} angles after {max_attempts} attempts")
