"""CSV and JSON helpers: headers mandatory, UTF-8, LF line endings."""
from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .errors import InvalidParameterError


def read_pm1_csv(path) -> np.ndarray:
    """Read a +1/-1 matrix; the first line is a header and is skipped."""
    path = Path(path)
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise InvalidParameterError(f"cannot read {path}: {exc}") from exc
    if len(rows) < 2:
        raise InvalidParameterError(f"{path}: need a header line and at least one data row")
    header, body = rows[0], [r for r in rows[1:] if r]
    if all(v.strip().lstrip("+-").isdigit() for v in header):
        raise InvalidParameterError(f"{path}:1: header line missing (first line is numeric)")
    out = []
    for i, r in enumerate(body, start=2):
        if len(r) != len(header):
            raise InvalidParameterError(f"{path}:{i}: expected {len(header)} fields, got {len(r)}")
        try:
            vals = [int(v.strip()) for v in r]
        except ValueError:
            raise InvalidParameterError(f"{path}:{i}: entries must be integers +1/-1") from None
        if any(v not in (1, -1) for v in vals):
            raise InvalidParameterError(f"{path}:{i}: entries must be +1/-1")
        out.append(vals)
    return np.array(out, dtype=np.int8)


def read_vector_csv(path) -> np.ndarray:
    """A +1/-1 vector stored as one column or one row."""
    m = read_pm1_csv(path)
    if m.shape[1] == 1:
        return m[:, 0]
    if m.shape[0] == 1:
        return m[0]
    raise InvalidParameterError(f"{path}: expected a single row or column, got {m.shape}")


def write_pm1_csv(path, matrix, prefix: str = "c"):
    m = np.atleast_2d(np.asarray(matrix))
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"{prefix}{j}" for j in range(m.shape[1])])
        w.writerows(m.astype(int).tolist())


def write_rows(path, rows: list, fields=None):
    fields = list(fields or (rows[0].keys() if rows else []))
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=fields, extrasaction="ignore", lineterminator="\n")
        w.writeheader()
        w.writerows(rows)


def write_json(path, obj):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, default=_default)
        fh.write("\n")


def _default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not serializable: {type(o).__name__}")
