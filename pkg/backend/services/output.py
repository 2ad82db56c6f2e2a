"""
CSV / JSON / binary writers shared by the CLI and scripts
"""
import csv
import io
import json
import logging
import os
from fractions import Fraction
from typing import Any, Iterable, Optional, Sequence

import numpy as np

logger = logging.getLogger(__name__)

RESOLVED_CONFIG = "resolved-config.json"


def format_real(value: Any) -> str:
    """17 significant digits so every float round-trips"""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def _jsonable(value: Any) -> Any:
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, (set, tuple)):
        return list(value)
    raise TypeError(f"{type(value).__name__} is not JSON serialisable")


def dumps(payload: Any) -> str:
    return json.dumps(payload, indent=2, sort_keys=True, default=_jsonable)


def csv_text(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_real(v) for v in row])
    return buffer.getvalue()


def ensure_dir(path: str) -> str:
    os.makedirs(path, exist_ok=True)
    return path


def write_csv(path: str, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    ensure_dir(os.path.dirname(path) or ".")
    with open(path, "w", newline="", encoding="utf-8") as f:
        f.write(csv_text(header, rows))
    logger.info("wrote %s", path)
    return path


def write_json(path: str, payload: Any) -> str:
    ensure_dir(os.path.dirname(path) or ".")
    with open(path, "w", encoding="utf-8") as f:
        f.write(dumps(payload))
        f.write("\n")
    logger.info("wrote %s", path)
    return path


def write_resolved_config(out_dir: str, config: dict) -> str:
    return write_json(os.path.join(ensure_dir(out_dir), RESOLVED_CONFIG), config)


def write_snapshot(path: str, fields: dict, spacing: Sequence[float], time: float,
                   extra: Optional[dict] = None) -> str:
    """
    Flat little-endian float64 payload (fields in header order, C order)
    next to a JSON header with dims, spacing, time and field names.
    """
    names = list(fields)
    arrays = [np.ascontiguousarray(fields[name], dtype="<f8") for name in names]
    dims = list(arrays[0].shape)
    if any(list(a.shape) != dims for a in arrays):
        raise ValueError("snapshot fields must share one shape")
    ensure_dir(os.path.dirname(path) or ".")
    with open(path + ".bin", "wb") as f:
        for a in arrays:
            f.write(a.tobytes(order="C"))
    header = {"dims": dims, "spacing": list(spacing), "time": time, "fields": names,
              "dtype": "float64", "endianness": "little"}
    header.update(extra or {})
    write_json(path + ".json", header)
    return path


def read_snapshot(path: str) -> dict:
    with open(path + ".json", encoding="utf-8") as f:
        header = json.load(f)
    data = np.fromfile(path + ".bin", dtype="<f8")
    size = int(np.prod(header["dims"]))
    return {name: data[i * size:(i + 1) * size].reshape(header["dims"]) for i, name in enumerate(header["fields"])}


def read_table(path: str) -> np.ndarray:
    """Numeric rows of a CSV file as a 2D array; a leading header row is skipped"""
    rows = []
    with open(path, newline="", encoding="utf-8") as f:
        for line, row in enumerate(csv.reader(f), start=1):
            if not row or not any(cell.strip() for cell in row):
                continue
            try:
                rows.append([float(cell) for cell in row])
            except ValueError:
                if rows or line > 1:
                    raise ValueError(f"{path}:{line}: non-numeric row {row!r}")
    if not rows:
        raise ValueError(f"{path}: no numeric rows")
    if len({len(r) for r in rows}) != 1:
        raise ValueError(f"{path}: rows have different column counts")
    return np.asarray(rows)
