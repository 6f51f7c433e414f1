# harness/__init__.py
"""
Monte Carlo Experiment Harness
==============================
Seeded sweeps over detection, ROC, classification, information-criterion and
detect-then-classify settings, written as CSV plus JSON metadata.
"""

from harness.schemas import ExperimentKind, ExperimentSpec, DatasetSpec, ResultTable
from harness.dataset import build_dataset
from harness.experiments import (
    run_detection_sweep, run_roc, run_classification_sweep, run_criteria_sweep,
    run_pipeline, run_training_time, run_experiment,
)

__all__ = [
    "ExperimentKind",
    "ExperimentSpec",
    "DatasetSpec",
    "ResultTable",
    "build_dataset",
    "run_detection_sweep",
    "run_roc",
    "run_classification_sweep",
    "run_criteria_sweep",
    "run_pipeline",
    "run_training_time",
    "run_experiment",
]
