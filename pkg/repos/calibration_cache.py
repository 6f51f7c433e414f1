from __future__ import annotations
import hashlib
from datetime import datetime, timezone
from pathlib import Path
from typing import Dict, Optional

import numpy as np
import orjson

from config.settings import SETTINGS
from sensing.detectors import h0_statistics_all
from sensing.schemas import DetectorId


class CalibrationCache:
    """Disk cache of noise-only detector statistics, one JSON file per calibration request."""

    def __init__(self, cache_dir: Optional[Path] = None):
        self.cache_dir = Path(cache_dir or SETTINGS["paths"]["calibration_cache"])
        self.cache_dir.mkdir(parents=True, exist_ok=True)
        self.hits = 0
        self.misses = 0

    @staticmethod
    def key(M: int, N: int, trials: int, seed: int) -> str:
        raw = f"{M}|{N}|{trials}|{seed}|{SETTINGS['defaults']['eig_method']}"
        return hashlib.sha256(raw.encode()).hexdigest()[:16]

    def _file(self, M: int, N: int, trials: int, seed: int) -> Path:
        return self.cache_dir / f"{self.key(M, N, trials, seed)}.json"

    def get(self, M: int, N: int, trials: int, seed: int) -> Optional[Dict[DetectorId, np.ndarray]]:
        path = self._file(M, N, trials, seed)
        if not path.exists():
            return None
        try:
            data = orjson.loads(path.read_bytes())
            stats = {DetectorId(k): np.array([np.inf if x is None else x for x in v], dtype=float)
                     for k, v in data["statistics"].items()}
        except (orjson.JSONDecodeError, KeyError, ValueError):
            # corrupt entry; recompute
            path.unlink(missing_ok=True)
            return None
        if any(v.size != trials for v in stats.values()):
            return None
        return stats

    def set(self, M: int, N: int, trials: int, seed: int,
            stats: Dict[DetectorId, np.ndarray]) -> Path:
        path = self._file(M, N, trials, seed)
        entry = {
            "M": M, "N": N, "trials": trials, "seed": seed,
            "created_utc": datetime.now(timezone.utc).replace(microsecond=0).isoformat(),
            # inf marks degenerate MME draws; JSON has no inf so store as null
            "statistics": {d.value: [x if np.isfinite(x) else None for x in v.tolist()]
                           for d, v in stats.items()},
        }
        path.write_bytes(orjson.dumps(entry))
        return path

    def statistics(self, M: int, N: int, trials: int, seed: int,
                   workers: Optional[int] = None) -> Dict[DetectorId, np.ndarray]:
        cached = self.get(M, N, trials, seed)
        if cached is not None:
            self.hits += 1
            return cached
        self.misses += 1
        stats = h0_statistics_all(M, N, trials, seed, workers)
        self.set(M, N, trials, seed, stats)
        return stats
