import os
from dotenv import load_dotenv
from pathlib import Path

load_dotenv()

BASE_DIR = Path(__file__).resolve().parents[1]
RESULTS_DIR = Path(os.getenv("RESULTS_DIR", BASE_DIR / "results"))

_tw2_override = os.getenv("TW2_TABLE_FILE", "")

SETTINGS = {
    "env": os.getenv("ENV", "dev"),
    "paths": {
        "results_dir": RESULTS_DIR,
        "calibration_cache": Path(os.getenv("CALIBRATION_CACHE_DIR", BASE_DIR / ".calibration_cache")),
        "run_ledger": Path(os.getenv("RUN_LEDGER_FILE", RESULTS_DIR / "runs.json")),
        "tw2_table": Path(_tw2_override) if _tw2_override else None,
    },
    "defaults": {
        "seed": int(os.getenv("DEFAULT_SEED", "2024")),
        "workers": int(os.getenv("WORKERS", "4")),
        "calibration_trials": int(os.getenv("CALIBRATION_TRIALS", "20000")),
        "eig_method": os.getenv("EIG_METHOD", "lapack"),
    },
    "numerics": {
        # negative eigenvalues with |value| <= clamp*max are roundoff and become 0
        "eig_clamp_rel": 1e-10,
        "hermitian_tol_rel": 1e-8,
        "log_floor": 1e-300,
        "tw2_tail_eps": 1e-12,
    },
}
