"""Fixed-schema CSV and JSON writers; every file is written atomically."""

from __future__ import annotations

import hashlib
import json
import math
import os
import tempfile
from pathlib import Path

TRAJECTORY_COLUMNS = ("t", "x", "y", "vx", "vy", "E", "r_local")
SWEEP_COLUMNS = (
    "q1",
    "a2",
    "mb",
    "epsilon",
    "phi",
    "bounded",
    "t_escape",
    "max_displacement",
    "energy_drift",
    "termination",
    "error",
)


def fmt(value) -> str:
    """17 significant digits in scientific notation; blank for missing."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    value = float(value)
    if math.isnan(value):
        return "nan"
    return f"{value:.16e}"


def atomic_write(path, data: str | bytes) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    mode = "wb" if isinstance(data, bytes) else "w"
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, mode, **({} if mode == "wb" else {"encoding": "utf-8", "newline": "\n"})) as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def _csv_field(text: str) -> str:
    if any(ch in text for ch in ',"\n'):
        return '"' + text.replace('"', '""') + '"'
    return text


def trajectory_csv(traj) -> str:
    cols = traj.columns()
    lines = [",".join(TRAJECTORY_COLUMNS)]
    arrays = [cols[c] for c in TRAJECTORY_COLUMNS]
    for row in zip(*arrays):
        lines.append(",".join(fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def sweep_csv(table) -> str:
    lines = [",".join(SWEEP_COLUMNS)]
    for row in table:
        v = row.verdict
        fields = [fmt(row.coords[k]) for k in ("q1", "a2", "mb", "epsilon", "phi")]
        fields += [
            fmt(v.bounded),
            fmt(v.t_escape),
            fmt(v.max_displacement),
            fmt(v.energy_drift),
            v.termination.value if v.termination else "failed",
            _csv_field(v.error or ""),
        ]
        lines.append(",".join(fields))
    return "\n".join(lines) + "\n"


def _jsonable(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if hasattr(obj, "item"):  # numpy scalar
        return _jsonable(obj.item())
    return obj


def dumps(obj) -> str:
    # repr-based floats are the shortest string that round-trips exactly.
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_json(path, obj) -> Path:
    return atomic_write(path, dumps(obj))


def input_hash(resolved: dict, raw_config: bytes = b"") -> str:
    h = hashlib.sha256()
    h.update(dumps(resolved).encode())
    h.update(raw_config)
    return h.hexdigest()
