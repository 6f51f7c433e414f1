"""
Monte Carlo Experiments
=======================
Every runner takes an ExperimentSpec and returns a ResultTable. Randomness
flows from spec.seed through derive_seed(seed, stream, grid_index, trial), so
a rerun reproduces every row regardless of worker count. Metrics are built
from integer counts.
"""

from __future__ import annotations
import math
import time
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd
import pydantic
import scipy

from classifiers.nbc import nbc_classify_batch, nbc_train
from classifiers.nn import nn_classify_batch, nn_train
from classifiers.schemas import LabeledDataset, NnArchitecture
from classifiers.svm import svm_classify_batch, svm_train_multiclass
from harness.dataset import build_dataset, draw_snapshot, spectrum_of
from harness.parallel import map_ordered, trial_seeds
from harness.schemas import WALL_CLOCK_SUFFIX, ExperimentKind, ExperimentSpec, ResultTable
from harness.stats import proportion, roc_auc
from repos.calibration_cache import CalibrationCache
from sensing.detectors import (
    MIN_CALIBRATION_TRIALS, DetectorBank, gm_theoretical_pd, gm_threshold, h0_statistics_all,
    sr_mme_theoretical_pd,
)
from sensing.errors import (
    ConfigError, ConvergenceError, DomainError, InsufficientTrialsError, TrainingError,
    UnsupportedRegimeError,
)
from sensing.features import extract_features
from sensing.info_criteria import Criterion, estimate_sources
from sensing.rng import derive_seed, make_rng
from sensing.schemas import DetectorId, GmCalibration
from sensing.tracy_widom import default_table

__version__ = "1.0.0"

# stream ids keep the random draws of different uses apart
H1_STREAM, H0_STREAM, CALIBRATION_STREAM = 1, 2, 3
TRAIN_STREAM, TEST_STREAM, SHUFFLE_STREAM, MODEL_STREAM = 4, 5, 6, 7

ProgressHook = Optional[Callable[[int], None]]


# ============================================================
# SHARED PLUMBING
# ============================================================

def _require_kind(spec: ExperimentSpec, *kinds: ExperimentKind) -> None:
    if spec.kind not in kinds:
        allowed = ", ".join(k.value for k in kinds)
        raise ConfigError(f"experiment kind {spec.kind.value!r} not handled here (expected {allowed})")


def _point(spec: ExperimentSpec, g: float) -> Dict[str, float]:
    """Fixed parameters with the grid axis set to g."""
    params = {"M": spec.M, "N": spec.N, "snr_db": spec.snr_db, "p_fa": spec.p_fa,
              "train_per_class": spec.train_per_class}
    params[spec.axis] = int(g) if spec.axis in ("M", "N", "train_per_class") else float(g)
    return params


def _metadata(spec: ExperimentSpec, **extra) -> Dict:
    meta = {
        "experiment": spec.stem,
        "kind": spec.kind.value,
        "seed": spec.seed,
        "spec_hash": spec.spec_hash(),
        "spec": spec.model_dump(mode="json"),
        "versions": {
            "package": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "pandas": pd.__version__,
            "pydantic": pydantic.VERSION,
        },
        "tw2": default_table().describe(),
        "log_base": "e",
        "wall_clock_suffix": WALL_CLOCK_SUFFIX,
    }
    meta.update(extra)
    return meta


def _finish(table: ResultTable) -> ResultTable:
    table.metadata["determinism_hash"] = table.determinism_hash()
    return table


def _h0_bank(spec: ExperimentSpec, M: int, N: int,
             cache: Optional[CalibrationCache]) -> Dict[DetectorId, np.ndarray]:
    if spec.calibration_trials < MIN_CALIBRATION_TRIALS:
        raise InsufficientTrialsError(
            f"{spec.calibration_trials} calibration trials; at least {MIN_CALIBRATION_TRIALS} required")
    seed = derive_seed(spec.seed, CALIBRATION_STREAM)
    if cache is not None:
        return cache.statistics(M, N, spec.calibration_trials, seed, spec.workers)
    return h0_statistics_all(M, N, spec.calibration_trials, seed, spec.workers)


def _bank(spec: ExperimentSpec, M: int, N: int, p_fa: float,
          h0_bank: Dict[DetectorId, np.ndarray]) -> DetectorBank:
    return DetectorBank.build(M, N, p_fa, seed=derive_seed(spec.seed, CALIBRATION_STREAM),
                              calibration_trials=spec.calibration_trials, gm_mode=spec.gm_mode,
                              h0_bank=h0_bank, workers=spec.workers)


def _rate_cells(prefix: str, successes: int, trials: int) -> Dict[str, float]:
    p = proportion(successes, trials)
    return {prefix: p.value, f"{prefix}_ci": p.half_width}


def _h1_truth(spec: ExperimentSpec, trial: int) -> int:
    """criteria_vs_snr and pipeline cycle the true count through 1..K_max."""
    if spec.kind in (ExperimentKind.CRITERIA_VS_SNR, ExperimentKind.PIPELINE):
        return 1 + trial % spec.K_max
    return spec.K


# ============================================================
# DETECTION
# ============================================================

def _theory_pd(bank: DetectorBank, snap) -> Tuple[float, float]:
    M, N, p_fa = bank.M, bank.N, bank.p_fa
    rho = np.zeros(M)
    rho[:len(snap.signal_rho)] = snap.signal_rho
    try:
        sr = sr_mme_theoretical_pd(M, N, bank.thresholds[DetectorId.SR_MME], rho[0], rho[-1]) \
            if bank.sources[DetectorId.SR_MME] == "analytic" else math.nan
    except (DomainError, UnsupportedRegimeError):
        sr = math.nan
    # the true noise covariance is I, so log det(Q_H0) = 0 outside fixed calibration
    log_det_h0 = bank.gm_log_det_h0 if bank.gm_mode is GmCalibration.FIXED else 0.0
    try:
        gamma2 = gm_threshold(M, N, p_fa, log_det_h0)
        gm = gm_theoretical_pd(M, N, gamma2, float(np.sum(np.log1p(rho))))
    except DomainError:
        gm = math.nan
    return sr, gm


def _h0_false_alarms(spec: ExperimentSpec, bank: DetectorBank, detectors: List[DetectorId]) -> np.ndarray:
    """False alarms per detector over `trials` fresh noise-only draws at the bank's (M, N)."""
    M, N = bank.M, bank.N
    seeds = trial_seeds(derive_seed(spec.seed, M, N), 0, spec.trials, H0_STREAM)

    def one(sd: int):
        verdicts = bank.decide_all(spectrum_of(draw_snapshot(0, 0.0, M, N, sd)))
        return [verdicts[d].signal_present for d in detectors]

    return np.array(map_ordered(one, seeds, spec.workers), dtype=bool).sum(axis=0)


def run_detection_sweep(spec: ExperimentSpec, cache: Optional[CalibrationCache] = None,
                        on_point: ProgressHook = None) -> ResultTable:
    """P_D per detector along the grid, plus the observed false-alarm rate of each threshold.

    The H0 pool depends only on (M, N), so SNR sweeps score it once.
    """
    _require_kind(spec, ExperimentKind.PD_VS_SNR, ExperimentKind.PD_VS_N)
    detectors = list(DetectorId)
    columns = [spec.axis]
    for d in detectors:
        columns += [d.value, f"{d.value}_ci"]
    for d in detectors:
        columns += [f"{d.value}_pfa", f"{d.value}_pfa_ci"]
    columns += ["sr_mme_pd_theory", "gm_pd_theory", "trials"]
    table = ResultTable(spec.stem, spec.axis, columns)
    counts = {}
    false_alarms: Dict[Tuple[int, int], np.ndarray] = {}

    for gi, g in enumerate(spec.sorted_grid()):
        p = _point(spec, g)
        M, N = p["M"], p["N"]
        bank = _bank(spec, M, N, spec.p_fa, _h0_bank(spec, M, N, cache))

        def one(sd: int):
            snap = draw_snapshot(spec.K, p["snr_db"], M, N, sd)
            verdicts = bank.decide_all(spectrum_of(snap))
            return [verdicts[d].signal_present for d in detectors], _theory_pd(bank, snap)

        results = map_ordered(one, trial_seeds(spec.seed, gi, spec.trials, H1_STREAM), spec.workers)
        hits = np.array([r[0] for r in results], dtype=bool).sum(axis=0)
        theory = np.array([r[1] for r in results], dtype=float)

        row = {spec.axis: p[spec.axis], "trials": spec.trials}
        for d, h in zip(detectors, hits):
            row.update(_rate_cells(d.value, int(h), spec.trials))
        if (M, N) not in false_alarms:
            false_alarms[(M, N)] = _h0_false_alarms(spec, bank, detectors)
        for d, fa in zip(detectors, false_alarms[(M, N)]):
            row.update(_rate_cells(f"{d.value}_pfa", int(fa), spec.trials))
        row["sr_mme_pd_theory"] = float(np.mean(theory[:, 0]))
        row["gm_pd_theory"] = float(np.mean(theory[:, 1]))
        table.add_row(row)
        counts[str(p[spec.axis])] = {d.value: {"detections": int(h), "misses": spec.trials - int(h),
                                               "false_alarms": int(fa)}
                                     for d, h, fa in zip(detectors, hits, false_alarms[(M, N)])}
        table.metadata.setdefault("threshold_sources", {})[str(p[spec.axis])] = \
            {d.value: src for d, src in bank.sources.items()}
        if on_point:
            on_point(gi)

    table.metadata = _metadata(spec, counts=counts, **table.metadata)
    return _finish(table)


def run_roc(spec: ExperimentSpec, cache: Optional[CalibrationCache] = None,
            on_point: ProgressHook = None) -> ResultTable:
    """(P_FA, P_D) per detector and target p_fa, all targets scored on one shared H0/H1 pool."""
    _require_kind(spec, ExperimentKind.ROC)
    detectors = list(DetectorId)
    M, N = spec.M, spec.N
    h0_bank = _h0_bank(spec, M, N, cache)

    h1 = map_ordered(lambda sd: spectrum_of(draw_snapshot(spec.K, spec.snr_db, M, N, sd)),
                     trial_seeds(spec.seed, 0, spec.trials, H1_STREAM), spec.workers)
    h0 = map_ordered(lambda sd: spectrum_of(draw_snapshot(0, spec.snr_db, M, N, sd)),
                     trial_seeds(spec.seed, 0, spec.trials, H0_STREAM), spec.workers)

    columns = [spec.axis]
    for d in detectors:
        columns += [f"{d.value}_pfa", f"{d.value}_pfa_ci", d.value, f"{d.value}_ci"]
    columns.append("trials")
    table = ResultTable(spec.stem, spec.axis, columns)
    counts = {}

    for gi, p_fa in enumerate(spec.sorted_grid()):
        bank = _bank(spec, M, N, p_fa, h0_bank)
        row = {spec.axis: p_fa, "trials": spec.trials}
        point_counts = {}
        for d in detectors:
            fa = sum(bank.decide(d, s).signal_present for s in h0)
            det = sum(bank.decide(d, s).signal_present for s in h1)
            row.update(_rate_cells(f"{d.value}_pfa", fa, spec.trials))
            row.update(_rate_cells(d.value, det, spec.trials))
            point_counts[d.value] = {"false_alarms": fa, "correct_rejections": spec.trials - fa,
                                     "detections": det, "misses": spec.trials - det}
        table.add_row(row)
        counts[str(p_fa)] = point_counts
        if on_point:
            on_point(gi)

    df = table.to_frame()
    auc = {d.value: roc_auc(df[f"{d.value}_pfa"], df[d.value]) for d in detectors}
    table.metadata = _metadata(spec, counts=counts, auc=auc)
    return _finish(table)


# ============================================================
# CLASSIFIERS
# ============================================================

Predictor = Callable[[np.ndarray], np.ndarray]


def _fit_nn(hidden: List[int]):
    def fit(train: LabeledDataset, spec: ExperimentSpec, seed: int) -> Predictor:
        arch = NnArchitecture(input_size=train.dim, hidden_sizes=hidden, output_size=train.K,
                              learning_rate=spec.learning_rate, epochs=spec.epochs)
        params = nn_train(train, arch, seed)
        return lambda X: nn_classify_batch(params, X)
    return fit


def _fit_svm(train: LabeledDataset, spec: ExperimentSpec, seed: int) -> Predictor:
    model = svm_train_multiclass(train, C=spec.svm_C)
    return lambda X: svm_classify_batch(model, X)


def _fit_nbc(train: LabeledDataset, spec: ExperimentSpec, seed: int) -> Predictor:
    model = nbc_train(train, covariance=spec.nbc_covariance)
    return lambda X: nbc_classify_batch(model, X)


CLASSIFIERS: Dict[str, Callable[[LabeledDataset, ExperimentSpec, int], Predictor]] = {
    "nn3": _fit_nn([10]),
    "nn4": _fit_nn([7, 5]),
    "svm": _fit_svm,
    "nbc": _fit_nbc,
}


@dataclass
class FitOutcome:
    name: str
    predictor: Optional[Predictor]
    seconds: float
    error: Optional[str] = None


def fit_classifier(name: str, train: LabeledDataset, spec: ExperimentSpec, seed: int) -> FitOutcome:
    start = time.perf_counter()
    try:
        predictor = CLASSIFIERS[name](train, spec, seed)
    except (TrainingError, ConvergenceError) as e:
        return FitOutcome(name, None, time.perf_counter() - start, f"{type(e).__name__}: {e}")
    return FitOutcome(name, predictor, time.perf_counter() - start)


def _training_set(spec: ExperimentSpec, gi: int, rep: int, snr_db: float, M: int, N: int,
                  per_class: int) -> LabeledDataset:
    train = build_dataset(spec.K_max, per_class, snr_db, M, N,
                          derive_seed(spec.seed, TRAIN_STREAM, gi, rep))
    if spec.shuffle_labels:
        rng = make_rng(derive_seed(spec.seed, SHUFFLE_STREAM, gi, rep))
        train = train.with_labels(rng.permutation(train.labels))
    return train


def _classifier_columns(names: List[str], with_time: bool) -> List[str]:
    cols = []
    for c in names:
        cols += [c, f"{c}_ci"]
        if with_time:
            cols.append(f"{c}_train{WALL_CLOCK_SUFFIX}")
    return cols


def run_classification_sweep(spec: ExperimentSpec, cache: Optional[CalibrationCache] = None,
                             on_point: ProgressHook = None) -> ResultTable:
    """Accuracy of every classifier on an independent test set, summed over repetitions.

    A classifier that fails to train in a repetition is left out of that
    repetition; a cell with no successful repetition is NaN. Both cases are
    listed in the `failed` column.
    """
    _require_kind(spec, ExperimentKind.ACC_VS_SNR, ExperimentKind.ACC_VS_M,
                  ExperimentKind.TRAINING_TIME)
    names = list(spec.classifiers)
    columns = [spec.axis] + _classifier_columns(names, with_time=True) + ["trials", "failed"]
    table = ResultTable(spec.stem, spec.axis, columns)
    failures: Dict[str, List[str]] = {}

    for gi, g in enumerate(spec.sorted_grid()):
        p = _point(spec, g)

        def repetition(rep: int):
            train = _training_set(spec, gi, rep, p["snr_db"], p["M"], spec.N, p["train_per_class"])
            test = build_dataset(spec.K_max, spec.test_per_class, p["snr_db"], p["M"], spec.N,
                                 derive_seed(spec.seed, TEST_STREAM, gi, rep))
            out = {}
            for name in names:
                fit = fit_classifier(name, train, spec, derive_seed(spec.seed, MODEL_STREAM, gi, rep))
                correct = None if fit.predictor is None else \
                    int(np.sum(fit.predictor(test.features) == test.labels))
                out[name] = (correct, len(test), fit.seconds, fit.error)
            return out

        reps = map_ordered(repetition, range(spec.repetitions), spec.workers)
        total = spec.repetitions * spec.K_max * spec.test_per_class
        row = {spec.axis: p[spec.axis], "trials": total}
        failed = []
        for name in names:
            ok = [r[name] for r in reps if r[name][0] is not None]
            errors = [r[name][3] for r in reps if r[name][0] is None]
            if ok:
                row.update(_rate_cells(name, sum(o[0] for o in ok), sum(o[1] for o in ok)))
            else:
                row.update({name: math.nan, f"{name}_ci": math.nan})
            row[f"{name}_train{WALL_CLOCK_SUFFIX}"] = float(np.mean([r[name][2] for r in reps]))
            if errors:
                failed.append(f"{name}({len(errors)}/{spec.repetitions})")
                failures.setdefault(str(p[spec.axis]), []).extend(f"{name}: {e}" for e in errors)
        row["failed"] = ";".join(failed)
        table.add_row(row)
        if on_point:
            on_point(gi)

    table.metadata = _metadata(spec, failures=failures)
    return _finish(table)


def run_training_time(spec: ExperimentSpec, cache: Optional[CalibrationCache] = None,
                      on_point: ProgressHook = None) -> ResultTable:
    _require_kind(spec, ExperimentKind.TRAINING_TIME)
    return run_classification_sweep(spec, cache, on_point)


# ============================================================
# INFORMATION CRITERIA
# ============================================================

def run_criteria_sweep(spec: ExperimentSpec, cache: Optional[CalibrationCache] = None,
                       on_point: ProgressHook = None) -> ResultTable:
    """Fraction of trials where the AIC/MDL argmin equals the true count.

    criteria_vs_M holds K fixed; criteria_vs_snr cycles the true count through
    1..K_max and also scores the ML classifiers on the same snapshots.
    """
    _require_kind(spec, ExperimentKind.CRITERIA_VS_M, ExperimentKind.CRITERIA_VS_SNR)
    with_ml = spec.kind is ExperimentKind.CRITERIA_VS_SNR
    names = list(spec.classifiers) if with_ml else []
    columns = [spec.axis, "aic", "aic_ci", "mdl", "mdl_ci"]
    columns += _classifier_columns(names, with_time=False) + ["trials", "failed"]
    table = ResultTable(spec.stem, spec.axis, columns)
    failures: Dict[str, List[str]] = {}

    for gi, g in enumerate(spec.sorted_grid()):
        p = _point(spec, g)
        M, N, snr = p["M"], p["N"], p["snr_db"]

        def one(job):
            t, sd = job
            truth = _h1_truth(spec, t)
            s = spectrum_of(draw_snapshot(truth, snr, M, N, sd))
            return (truth,
                    estimate_sources(s, N, Criterion.AIC) == truth,
                    estimate_sources(s, N, Criterion.MDL) == truth,
                    extract_features(s))

        results = map_ordered(one, enumerate(trial_seeds(spec.seed, gi, spec.trials, H1_STREAM)),
                              spec.workers)
        row = {spec.axis: p[spec.axis], "trials": spec.trials}
        row.update(_rate_cells("aic", sum(r[1] for r in results), spec.trials))
        row.update(_rate_cells("mdl", sum(r[2] for r in results), spec.trials))

        failed = []
        if names:
            truths = np.array([r[0] for r in results])
            X = np.vstack([r[3] for r in results])
            train = _training_set(spec, gi, 0, snr, M, N, spec.train_per_class)
            for name in names:
                fit = fit_classifier(name, train, spec, derive_seed(spec.seed, MODEL_STREAM, gi))
                if fit.predictor is None:
                    row.update({name: math.nan, f"{name}_ci": math.nan})
                    failed.append(name)
                    failures.setdefault(str(p[spec.axis]), []).append(f"{name}: {fit.error}")
                    continue
                row.update(_rate_cells(name, int(np.sum(fit.predictor(X) == truths)), spec.trials))
        row["failed"] = ";".join(failed)
        table.add_row(row)
        if on_point:
            on_point(gi)

    table.metadata = _metadata(spec, failures=failures)
    return _finish(table)


# ============================================================
# DETECT-THEN-CLASSIFY PIPELINE
# ============================================================

def run_pipeline(spec: ExperimentSpec, cache: Optional[CalibrationCache] = None,
                 on_point: ProgressHook = None) -> ResultTable:
    """Detector gate, then the 3-layer NN on inputs the gate passes.

    Half of the trials are noise only (truth 0). `end_to_end` counts the
    trials whose final estimate equals the truth; `classifier_only` feeds every
    input straight to the NN, so noise inputs can never be right.
    """
    _require_kind(spec, ExperimentKind.PIPELINE)
    gate = spec.gate_detector
    columns = [spec.axis, "end_to_end", "end_to_end_ci", "classifier_only", "classifier_only_ci",
               "gate_pfa", "gate_pfa_ci", "gate_pd", "gate_pd_ci",
               f"detect_time{WALL_CLOCK_SUFFIX}", "trials", "failed"]
    table = ResultTable(spec.stem, spec.axis, columns)
    failures: Dict[str, List[str]] = {}
    n_h0 = spec.trials // 2
    n_h1 = spec.trials - n_h0

    for gi, g in enumerate(spec.sorted_grid()):
        p = _point(spec, g)
        M, N, snr = p["M"], p["N"], p["snr_db"]
        bank = _bank(spec, M, N, spec.p_fa, _h0_bank(spec, M, N, cache))
        train = _training_set(spec, gi, 0, snr, M, N, spec.train_per_class)
        fit = fit_classifier("nn3", train, spec, derive_seed(spec.seed, MODEL_STREAM, gi))

        jobs = [(0, sd) for sd in trial_seeds(spec.seed, gi, n_h0, H0_STREAM)]
        jobs += [(_h1_truth(spec, t), sd)
                 for t, sd in enumerate(trial_seeds(spec.seed, gi, n_h1, H1_STREAM))]

        def one(job):
            truth, sd = job
            s = spectrum_of(draw_snapshot(truth, snr, M, N, sd))
            start = time.perf_counter()
            present = bank.decide(gate, s).signal_present
            elapsed = time.perf_counter() - start
            return truth, present, extract_features(s), elapsed

        results = map_ordered(one, jobs, spec.workers)
        truths = np.array([r[0] for r in results])
        present = np.array([r[1] for r in results], dtype=bool)

        row = {spec.axis: p[spec.axis], "trials": spec.trials,
               f"detect_time{WALL_CLOCK_SUFFIX}": float(np.mean([r[3] for r in results]))}
        row.update(_rate_cells("gate_pfa", int(np.sum(present[truths == 0])), n_h0) if n_h0
                   else {"gate_pfa": math.nan, "gate_pfa_ci": math.nan})
        row.update(_rate_cells("gate_pd", int(np.sum(present[truths > 0])), n_h1))
        if fit.predictor is None:
            row.update({"end_to_end": math.nan, "end_to_end_ci": math.nan,
                        "classifier_only": math.nan, "classifier_only_ci": math.nan})
            row["failed"] = "nn3"
            failures[str(p[spec.axis])] = [f"nn3: {fit.error}"]
        else:
            labels = fit.predictor(np.vstack([r[2] for r in results]))
            estimate = np.where(present, labels, 0)
            row.update(_rate_cells("end_to_end", int(np.sum(estimate == truths)), spec.trials))
            row.update(_rate_cells("classifier_only", int(np.sum(labels == truths)), spec.trials))
            row["failed"] = ""
        table.add_row(row)
        if on_point:
            on_point(gi)

    table.metadata = _metadata(spec, failures=failures, gate_detector=gate.value)
    return _finish(table)


# ============================================================
# DISPATCH
# ============================================================

RUNNERS = {
    ExperimentKind.PD_VS_SNR: run_detection_sweep,
    ExperimentKind.PD_VS_N: run_detection_sweep,
    ExperimentKind.ROC: run_roc,
    ExperimentKind.ACC_VS_SNR: run_classification_sweep,
    ExperimentKind.ACC_VS_M: run_classification_sweep,
    ExperimentKind.TRAINING_TIME: run_training_time,
    ExperimentKind.CRITERIA_VS_M: run_criteria_sweep,
    ExperimentKind.CRITERIA_VS_SNR: run_criteria_sweep,
    ExperimentKind.PIPELINE: run_pipeline,
}


def run_experiment(spec: ExperimentSpec, cache: Optional[CalibrationCache] = None,
                   on_point: ProgressHook = None) -> ResultTable:
    return RUNNERS[spec.kind](spec, cache, on_point)
