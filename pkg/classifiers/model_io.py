"""Structured-text model files: a JSON document tagged with model kind and format version."""

from __future__ import annotations
from pathlib import Path
from typing import Any, Dict

import numpy as np
import orjson

FORMAT_VERSION = 1


def write_model(path: Path, kind: str, payload: Dict[str, Any]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    doc = {"format_version": FORMAT_VERSION, "model": kind, **payload}
    path.write_bytes(orjson.dumps(doc, option=orjson.OPT_INDENT_2 | orjson.OPT_SERIALIZE_NUMPY
                                  | orjson.OPT_SORT_KEYS))
    return path


def read_model(path: Path, kind: str) -> Dict[str, Any]:
    doc = orjson.loads(Path(path).read_bytes())
    if doc.get("model") != kind:
        raise ValueError(f"{path}: expected a {kind} model, found {doc.get('model')!r}")
    if doc.get("format_version") != FORMAT_VERSION:
        raise ValueError(f"{path}: unsupported format version {doc.get('format_version')!r}")
    return doc


def as_array(value) -> np.ndarray:
    return np.asarray(value, dtype=float)
