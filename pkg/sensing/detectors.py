"""
Eigenvalue Threshold Detectors
==============================
SR-MME and GM (with analytic TW2 thresholds) plus the MME and M-MME baselines.

All statistics take the spectrum of the sample covariance Q = Y Y^H / N. The
analytic thresholds assume unit noise power and use the TW2 law of the largest
eigenvalue of R = N Q.
"""

from __future__ import annotations
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional

import numpy as np

from config.settings import SETTINGS
from sensing.errors import DomainError, InsufficientTrialsError, UnsupportedRegimeError
from sensing.linalg import det_from_spectrum, hermitian_eigenvalues
from sensing.rng import derive_seed
from sensing.schemas import (
    ArrayConfig, DetectorId, DetectorVerdict, EigenSpectrum, GmCalibration, Scenario,
)
from sensing.signal_model import sample_covariance, synthesize
from sensing.tracy_widom import tw2_cdf, tw2_quantile, wishart_params


# ============================================================
# STATISTICS
# ============================================================

def sr_mme_statistic(s: EigenSpectrum) -> float:
    if s.min < 0:
        raise DomainError("SR-MME needs a non-negative spectrum")
    return math.sqrt(s.max * s.min)


def gm_statistic(s: EigenSpectrum) -> float:
    """Geometric mean of all eigenvalues; 0 for a degenerate spectrum."""
    det = det_from_spectrum(s)
    if det.degenerate or det.sign <= 0:
        return 0.0
    return math.exp(det.log_abs / s.M)


def mme_statistic(s: EigenSpectrum) -> float:
    if s.min <= 0:
        raise DomainError("MME undefined: minimum eigenvalue is zero")
    return s.max / s.min


def m_mme_statistic(s: EigenSpectrum) -> float:
    return 0.5 * (s.max + s.min)


STATISTICS: Dict[DetectorId, Callable[[EigenSpectrum], float]] = {
    DetectorId.SR_MME: sr_mme_statistic,
    DetectorId.GM: gm_statistic,
    DetectorId.MME: mme_statistic,
    DetectorId.M_MME: m_mme_statistic,
}


def is_degenerate(detector_id: DetectorId, s: EigenSpectrum) -> bool:
    return detector_id in (DetectorId.GM, DetectorId.MME) and s.min <= 0


# ============================================================
# SR-MME THRESHOLD AND THEORY
# ============================================================

def _check_pfa(p_fa: float) -> None:
    if not 0.0 < p_fa < 1.0:
        raise DomainError(f"p_fa {p_fa} outside (0, 1)")


def sr_mme_threshold(M: int, N: int, p_fa: float) -> float:
    """gamma1 = ((sqrt N - sqrt M) / N) * sqrt(nu F2^-1(1 - p_fa) + mu)."""
    _check_pfa(p_fa)
    if N <= M:
        raise UnsupportedRegimeError(f"analytic SR-MME threshold needs N > M (M={M}, N={N})")
    w = wishart_params(M, N)
    inner = w.nu * tw2_quantile(1.0 - p_fa) + w.mu
    if inner <= 0:
        raise DomainError("threshold radicand is not positive")
    return (math.sqrt(N) - math.sqrt(M)) / N * math.sqrt(inner)


def sr_mme_theoretical_pfa(M: int, N: int, gamma1: float) -> float:
    if N <= M:
        raise UnsupportedRegimeError(f"SR-MME false-alarm law needs N > M (M={M}, N={N})")
    w = wishart_params(M, N)
    arg = ((N * gamma1 / (math.sqrt(N) - math.sqrt(M))) ** 2 - w.mu) / w.nu
    return 1.0 - tw2_cdf(arg)


def sr_mme_theoretical_pd(M: int, N: int, gamma1: float, rho1: float, rhoM: float) -> float:
    """Detection probability from signal eigenvalues rho_1 >= ... >= rho_M.

    rho_1 enters unscaled while rho_M is multiplied by N.
    """
    w = wishart_params(M, N)
    denom = N * rhoM + N - math.sqrt(M * N)
    if denom <= 0:
        raise DomainError(f"non-positive denominator {denom:.4g} in SR-MME detection law")
    arg = ((N * gamma1) ** 2 / denom - rho1 - w.mu) / w.nu
    return min(max(1.0 - tw2_cdf(arg), 0.0), 1.0)


# ============================================================
# GM THRESHOLD AND THEORY
# ============================================================

def gm_threshold(M: int, N: int, p_fa: float, log_det_h0: float) -> float:
    """gamma2 = ((nu F2^-1(1 - p_fa) + mu) det(Q_H0) / (sqrt N + sqrt M)^2)^(1/M).

    `log_det_h0` is log det(Q_H0).
    """
    _check_pfa(p_fa)
    if not math.isfinite(log_det_h0):
        raise DomainError("log det(Q_H0) must be finite")
    w = wishart_params(M, N)
    inner = w.nu * tw2_quantile(1.0 - p_fa) + w.mu
    if inner <= 0:
        raise DomainError("threshold bracket is not positive")
    edge = (math.sqrt(N) + math.sqrt(M)) ** 2
    return math.exp((math.log(inner) + log_det_h0 - math.log(edge)) / M)


def gm_self_calibrated_threshold(M: int, N: int, p_fa: float, s: EigenSpectrum) -> float:
    """Per-decision GM threshold using the observed covariance as det(Q_H0).

    gamma2 from `gm_threshold`, scaled by ((sqrt N + sqrt M)^2 / lambda_max(R))^(1/M)
    so that GM > threshold exactly when lambda_max(R) > nu F2^-1(1 - p_fa) + mu.
    """
    det = det_from_spectrum(s)
    if det.degenerate or det.sign <= 0 or s.max <= 0:
        return math.inf
    gamma2 = gm_threshold(M, N, p_fa, det.log_abs)
    edge = (math.sqrt(N) + math.sqrt(M)) ** 2
    return gamma2 * math.exp((math.log(edge) - math.log(N * s.max)) / M)


def _gm_tail(M: int, N: int, gamma2: float, log_det: float) -> float:
    w = wishart_params(M, N)
    edge = (math.sqrt(N) + math.sqrt(M)) ** 2
    log_term = M * math.log(gamma2) + math.log(edge) - log_det if gamma2 > 0 else -math.inf
    term = math.exp(log_term) if log_term < 700 else math.inf
    return min(max(1.0 - tw2_cdf((term - w.mu) / w.nu), 0.0), 1.0)


def gm_theoretical_pfa(M: int, N: int, gamma2: float, log_det_h0: float) -> float:
    return _gm_tail(M, N, gamma2, log_det_h0)


def gm_theoretical_pd(M: int, N: int, gamma2: float, log_det_h1: float) -> float:
    """`log_det_h1` is log det(Q_H1); +inf gives the limit 1 - F2(-mu/nu)."""
    return _gm_tail(M, N, gamma2, log_det_h1)


# ============================================================
# EMPIRICAL CALIBRATION
# ============================================================

MIN_CALIBRATION_TRIALS = 100


def h0_spectrum(M: int, N: int, seed: int) -> EigenSpectrum:
    snap = synthesize(Scenario(K=0, N=N, seed=seed), ArrayConfig(M=M))
    return hermitian_eigenvalues(sample_covariance(snap.Y))


def safe_statistic(detector_id: DetectorId, s: EigenSpectrum) -> float:
    """Statistic with degenerate spectra mapped to their limits (MME -> inf, GM -> 0)."""
    if detector_id is DetectorId.MME and s.min <= 0:
        return math.inf
    return STATISTICS[detector_id](s)


def h0_statistics_all(M: int, N: int, trials: int, seed: int,
                      workers: Optional[int] = None) -> Dict[DetectorId, np.ndarray]:
    """Every detector statistic over the same `trials` noise-only draws, in trial order."""
    seeds = [derive_seed(seed, M, N, t) for t in range(trials)]
    workers = workers or SETTINGS["defaults"]["workers"]

    def one(sd: int) -> list:
        s = h0_spectrum(M, N, sd)
        return [safe_statistic(d, s) for d in DetectorId]

    with ThreadPoolExecutor(max_workers=workers) as pool:
        rows = np.array(list(pool.map(one, seeds)), dtype=float).reshape(trials, len(DetectorId))
    return {d: rows[:, i] for i, d in enumerate(DetectorId)}


def h0_statistics(detector_id: DetectorId, M: int, N: int, trials: int, seed: int,
                  workers: Optional[int] = None) -> np.ndarray:
    return h0_statistics_all(M, N, trials, seed, workers)[DetectorId(detector_id)]


def empirical_threshold(statistics: np.ndarray, p_fa: float) -> float:
    """(1 - p_fa) quantile taken as an order statistic, so the in-sample FA rate is <= p_fa.

    Needs at least ceil(1/p_fa) statistics; fewer cannot resolve the tail.
    """
    _check_pfa(p_fa)
    statistics = np.asarray(statistics, dtype=float)
    needed = math.ceil(1.0 / p_fa - 1e-9)
    if statistics.size < needed:
        raise InsufficientTrialsError(
            f"{statistics.size} H0 statistics cannot resolve p_fa={p_fa:g}; at least {needed} required")
    return float(np.quantile(statistics, 1.0 - p_fa, method="higher"))


def calibrate_empirical_threshold(detector_id: DetectorId, M: int, N: int, p_fa: float,
                                  trials: int, seed: int,
                                  workers: Optional[int] = None) -> float:
    if trials < MIN_CALIBRATION_TRIALS:
        raise InsufficientTrialsError(
            f"{trials} calibration trials; at least {MIN_CALIBRATION_TRIALS} required")
    _check_pfa(p_fa)
    return empirical_threshold(h0_statistics(detector_id, M, N, trials, seed, workers), p_fa)


# ============================================================
# DETECTOR BANK
# ============================================================

@dataclass
class DetectorBank:
    """Thresholds for all four detectors at one (M, N, p_fa) setting.

    SR-MME uses the analytic threshold when N > M and falls back to empirical
    calibration otherwise. MME and M-MME are always calibrated. GM is either
    self-calibrated per decision or fixed from the mean log-determinant of the
    calibration bank.
    """
    M: int
    N: int
    p_fa: float
    thresholds: Dict[DetectorId, float] = field(default_factory=dict)
    gm_mode: GmCalibration = GmCalibration.SELF
    gm_log_det_h0: Optional[float] = None
    sources: Dict[DetectorId, str] = field(default_factory=dict)

    @classmethod
    def build(cls, M: int, N: int, p_fa: float, seed: int, calibration_trials: int,
              gm_mode: GmCalibration = GmCalibration.SELF,
              h0_bank: Optional[Dict[DetectorId, np.ndarray]] = None,
              log_dets_h0: Optional[np.ndarray] = None,
              workers: Optional[int] = None) -> "DetectorBank":
        """`h0_bank` lets callers reuse precomputed calibration statistics."""
        bank = cls(M=M, N=N, p_fa=p_fa, gm_mode=GmCalibration(gm_mode))
        h0_bank = dict(h0_bank or {})

        def calibrated(det_id: DetectorId) -> float:
            if det_id not in h0_bank:
                if calibration_trials < MIN_CALIBRATION_TRIALS:
                    raise InsufficientTrialsError(
                        f"{calibration_trials} calibration trials; at least "
                        f"{MIN_CALIBRATION_TRIALS} required")
                h0_bank.update(h0_statistics_all(M, N, calibration_trials, seed, workers))
            bank.sources[det_id] = "empirical"
            return empirical_threshold(h0_bank[det_id], p_fa)

        if N > M:
            bank.thresholds[DetectorId.SR_MME] = sr_mme_threshold(M, N, p_fa)
            bank.sources[DetectorId.SR_MME] = "analytic"
        else:
            bank.thresholds[DetectorId.SR_MME] = calibrated(DetectorId.SR_MME)
        bank.thresholds[DetectorId.MME] = calibrated(DetectorId.MME)
        bank.thresholds[DetectorId.M_MME] = calibrated(DetectorId.M_MME)

        if bank.gm_mode is GmCalibration.FIXED:
            if log_dets_h0 is None:
                if DetectorId.GM not in h0_bank:
                    h0_bank.update(h0_statistics_all(M, N, calibration_trials, seed, workers))
                # log det = M * log GM
                log_dets_h0 = M * np.log(h0_bank[DetectorId.GM])
            bank.gm_log_det_h0 = float(np.mean(log_dets_h0))
            bank.thresholds[DetectorId.GM] = gm_threshold(M, N, p_fa, bank.gm_log_det_h0)
            bank.sources[DetectorId.GM] = "fixed-calibration"
        else:
            bank.sources[DetectorId.GM] = "self-calibrated"
        return bank

    def threshold_for(self, detector_id: DetectorId, s: EigenSpectrum) -> float:
        if detector_id is DetectorId.GM and self.gm_mode is GmCalibration.SELF:
            return gm_self_calibrated_threshold(self.M, self.N, self.p_fa, s)
        return self.thresholds[detector_id]

    def decide(self, detector_id: DetectorId, s: EigenSpectrum) -> DetectorVerdict:
        detector_id = DetectorId(detector_id)
        return evaluate(detector_id, s, self.threshold_for(detector_id, s))

    def decide_all(self, s: EigenSpectrum) -> Dict[DetectorId, DetectorVerdict]:
        return {d: self.decide(d, s) for d in DetectorId}


def evaluate(detector_id: DetectorId, s: EigenSpectrum, threshold: float) -> DetectorVerdict:
    detector_id = DetectorId(detector_id)
    return DetectorVerdict.decide(detector_id, safe_statistic(detector_id, s), threshold,
                                  degenerate=is_degenerate(detector_id, s))
