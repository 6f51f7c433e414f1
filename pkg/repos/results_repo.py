from __future__ import annotations
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

import orjson
import pandas as pd

from classifiers.schemas import LabeledDataset
from config.settings import SETTINGS
from harness.schemas import ResultTable


def _save_json(path: Path, data: Any) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(orjson.dumps(data, option=orjson.OPT_INDENT_2 | orjson.OPT_SORT_KEYS
                                  | orjson.OPT_SERIALIZE_NUMPY))


def _load_json(path: Path) -> Any:
    try:
        return orjson.loads(path.read_bytes())
    except (OSError, orjson.JSONDecodeError) as e:
        raise RuntimeError(f"Failed to load {path}: {e}")


class ResultsRepo:
    """Result tables as `<stem>.csv` plus a `<stem>.meta.json` sidecar under one directory."""

    def __init__(self, out_dir: Optional[Path] = None):
        self.out_dir = Path(out_dir or SETTINGS["paths"]["results_dir"])

    def paths(self, stem: str) -> Tuple[Path, Path]:
        return self.out_dir / f"{stem}.csv", self.out_dir / f"{stem}.meta.json"

    # Result tables
    def save_table(self, table: ResultTable) -> Tuple[Path, Path]:
        csv_path, meta_path = self.paths(table.experiment)
        csv_path.parent.mkdir(parents=True, exist_ok=True)
        csv_path.write_text(table.to_csv_text(), encoding="utf-8", newline="")
        _save_json(meta_path, {"columns": table.columns, "axis": table.axis, **table.metadata})
        return csv_path, meta_path

    def load_frame(self, stem: str) -> pd.DataFrame:
        return pd.read_csv(self.paths(stem)[0], keep_default_na=False, na_values=["", "nan"])

    def load_metadata(self, stem: str) -> Dict[str, Any]:
        return _load_json(self.paths(stem)[1])

    # Feature datasets
    def save_dataset(self, data: LabeledDataset, stem: str = "dataset") -> Path:
        return data.to_csv(self.out_dir / f"{stem}.csv")

    def load_dataset(self, stem: str = "dataset", K: Optional[int] = None) -> LabeledDataset:
        return LabeledDataset.from_csv(self.out_dir / f"{stem}.csv", K)

    def save_metadata(self, stem: str, meta: Dict[str, Any]) -> Path:
        path = self.out_dir / f"{stem}.meta.json"
        _save_json(path, meta)
        return path
