"""Ready-made experiment configs, one per standard sweep."""

from __future__ import annotations
from pathlib import Path
from typing import Dict, List

import numpy as np

from harness.schemas import ExperimentKind, ExperimentSpec


def _arange(start: float, stop: float, step: float) -> List[float]:
    return [float(round(v, 6)) for v in np.arange(start, stop + step / 2, step)]


# eta=0.01 does not converge in 400 epochs at 10 samples per class
NN_LEARNING_RATE = 0.5


PRESETS: Dict[str, Dict] = {
    "pd_vs_snr": dict(kind=ExperimentKind.PD_VS_SNR, grid=_arange(-25.0, 0.0, 2.5),
                           M=64, N=200, K=3, p_fa=1e-4, trials=2000),
    "pd_vs_N": dict(kind=ExperimentKind.PD_VS_N, grid=_arange(100, 300, 25),
                         M=64, K=3, snr_db=-20.0, p_fa=1e-4, trials=2000),
    "roc": dict(kind=ExperimentKind.ROC, grid=[float(v) for v in np.logspace(-4, -1, 7)],
                     M=64, N=200, K=3, snr_db=-20.0, trials=2000),
    "acc_vs_snr": dict(kind=ExperimentKind.ACC_VS_SNR, grid=_arange(-20.0, 0.0, 5.0),
                            M=64, N=200, K_max=3, train_per_class=10, test_per_class=200,
                            repetitions=20, learning_rate=NN_LEARNING_RATE),
    "acc_vs_M": dict(kind=ExperimentKind.ACC_VS_M, grid=_arange(16, 128, 16),
                     N=200, snr_db=-15.0, K_max=3, train_per_class=10, test_per_class=200,
                     repetitions=5, learning_rate=NN_LEARNING_RATE),
    "criteria_vs_M": dict(kind=ExperimentKind.CRITERIA_VS_M, grid=_arange(8, 64, 4),
                               N=200, K=3, snr_db=0.0, trials=500),
    "criteria_vs_snr": dict(kind=ExperimentKind.CRITERIA_VS_SNR, grid=_arange(-20.0, 0.0, 5.0),
                                 M=32, N=200, K_max=3, train_per_class=10, trials=600,
                                 learning_rate=NN_LEARNING_RATE),
    "pipeline": dict(kind=ExperimentKind.PIPELINE, grid=_arange(-25.0, -10.0, 5.0),
                     M=64, N=200, K_max=3, p_fa=1e-4, train_per_class=10, trials=1200,
                     learning_rate=NN_LEARNING_RATE),
    "training_time": dict(kind=ExperimentKind.TRAINING_TIME, grid=[10, 20, 30, 40, 50, 100],
                                 M=64, N=200, snr_db=-20.0, K_max=3, test_per_class=200,
                                 repetitions=5, learning_rate=NN_LEARNING_RATE),
}


def preset_spec(name: str, **overrides) -> ExperimentSpec:
    if name not in PRESETS:
        raise KeyError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    return ExperimentSpec.build({"name": name, **PRESETS[name], **overrides})


def emit_presets(out_dir: Path) -> List[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for name in PRESETS:
        path = out_dir / f"{name}.env"
        path.write_text(preset_spec(name).to_config_text(), encoding="utf-8")
        written.append(path)
    return written
