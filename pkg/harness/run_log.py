from __future__ import annotations
import uuid
import datetime as dt
from pathlib import Path
from typing import List, Optional

import orjson

from config.settings import SETTINGS


def _ledger_path(path: Optional[Path]) -> Path:
    return Path(path or SETTINGS["paths"]["run_ledger"])


def read_runs(path: Optional[Path] = None) -> list:
    path = _ledger_path(path)
    if not path.exists():
        return []
    try:
        return orjson.loads(path.read_bytes())
    except orjson.JSONDecodeError:
        return []


def _write_runs(path: Path, data: list):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(orjson.dumps(data, option=orjson.OPT_INDENT_2))


def write_run(command: str, experiment: str, spec_hash: Optional[str], status: str,
              duration_s: float, outputs: List[str], seed: Optional[int] = None,
              notes: Optional[str] = None, path: Optional[Path] = None) -> dict:
    rec = {
        "run_id": f"run_{uuid.uuid4().hex[:8]}",
        "timestamp_utc": dt.datetime.now(dt.timezone.utc).replace(microsecond=0).isoformat(),
        "command": command,
        "experiment": experiment,
        "seed": seed,
        "spec_hash": spec_hash,
        "status": status,
        "duration_s": round(duration_s, 3),
        "outputs": outputs,
        "notes": notes,
    }
    path = _ledger_path(path)
    data = read_runs(path)
    data.append(rec)
    _write_runs(path, data)
    return rec
