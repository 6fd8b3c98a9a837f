"""CSV and JSON emission with full provenance sidecars."""
from __future__ import annotations

import csv
import json
import platform
from pathlib import Path

import numpy as np

from .noise import RNG_ID

TOOL_VERSION = "triclock 0.1.0"


def write_csv(path, header, rows):
    """RFC-4180-style CSV: comma separated, CRLF, header row, '.' decimals."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(x) for x in row])


def _fmt(x):
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    if isinstance(x, (np.integer,)):
        return int(x)
    return x


def _jsonify(obj):
    if isinstance(obj, dict):
        return {k: _jsonify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonify(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonify(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, float) and (obj != obj or obj in (float("inf"), float("-inf"))):
        return repr(obj)
    return obj


def write_json(path, payload: dict):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_jsonify(payload), fh, indent=2, sort_keys=True)
        fh.write("\n")


def sidecar(config_values: dict, seed: int, extra: dict | None = None) -> dict:
    """Provenance block embedded next to every output file."""
    payload = {
        "tool": TOOL_VERSION,
        "rng": RNG_ID,
        "numpy": np.__version__,
        "python": platform.python_version(),
        "seed": seed,
        "config": _jsonify(config_values),
    }
    if extra:
        payload.update(_jsonify(extra))
    return payload
