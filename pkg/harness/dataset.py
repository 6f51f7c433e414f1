"""Labeled feature datasets built from independent H1 snapshots."""

from __future__ import annotations

from classifiers.schemas import LabeledDataset
from harness.parallel import map_ordered
from sensing.errors import DomainError
from sensing.features import extract_features
from sensing.linalg import hermitian_eigenvalues
from sensing.rng import derive_seed, make_rng
from sensing.schemas import ArrayConfig, EigenSpectrum, Scenario, Snapshot
from sensing.signal_model import draw_angles, sample_covariance, synthesize


def draw_snapshot(K: int, snr_db: float, M: int, N: int, seed: int) -> Snapshot:
    """K emitters at freshly drawn angles (K = 0 is noise only)."""
    angles = draw_angles(K, make_rng(derive_seed(seed, 0)))
    scenario = Scenario(K=K, angles=angles, snr_db=snr_db, N=N, seed=derive_seed(seed, 1))
    return synthesize(scenario, ArrayConfig(M=M))


def spectrum_of(snap: Snapshot) -> EigenSpectrum:
    return hermitian_eigenvalues(sample_covariance(snap.Y))


def build_dataset(K_max: int, per_class: int, snr_db: float, M: int, N: int, seed: int,
                  workers: int = 1) -> LabeledDataset:
    if K_max < 2:
        raise DomainError(f"K_max must be >= 2, got {K_max}")
    if per_class < 1:
        raise DomainError(f"per_class must be >= 1, got {per_class}")

    jobs = [(k, i) for k in range(1, K_max + 1) for i in range(per_class)]

    def one(job):
        k, i = job
        return extract_features(spectrum_of(draw_snapshot(k, snr_db, M, N, derive_seed(seed, k, i))))

    rows = map_ordered(one, jobs, workers)
    return LabeledDataset(rows, [k for k, _ in jobs], K_max)
