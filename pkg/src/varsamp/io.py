"""CSV/JSON helpers for vectors, matrices and result tables.

Matrices are written row-major.  A complex matrix with M columns is written
with 2M columns: the real and imaginary part of each entry side by side.
"""
from __future__ import annotations

import csv
import io
import json
from pathlib import Path

import numpy as np


def _fmt(v: float) -> str:
    return repr(float(v))


def matrix_to_csv_text(A) -> str:
    A = np.atleast_2d(np.asarray(A))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    for row in A:
        if np.iscomplexobj(A):
            w.writerow([s for z in row for s in (_fmt(z.real), _fmt(z.imag))])
        else:
            w.writerow([_fmt(z) for z in row])
    return buf.getvalue()


def write_matrix_csv(path, A) -> None:
    Path(path).write_text(matrix_to_csv_text(A))


def read_matrix_csv(path, complex_entries: bool = False) -> np.ndarray:
    rows = []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].lstrip().startswith("#"):
                continue
            rows.append([float(v) for v in row])
    A = np.asarray(rows, dtype=float)
    if A.ndim != 2 or A.size == 0:
        raise ValueError(f"{path}: expected a non-empty numeric matrix")
    if complex_entries:
        if A.shape[1] % 2:
            raise ValueError(f"{path}: complex CSV needs an even number of columns")
        A = A[:, 0::2] + 1j * A[:, 1::2]
    return A


def read_vector_csv(path, complex_entries: bool = False) -> np.ndarray:
    A = read_matrix_csv(path, complex_entries)
    if A.shape[1] == 1:
        return A[:, 0]
    if A.shape[0] == 1:
        return A[0]
    raise ValueError(f"{path}: expected a single row or column")


def array_to_json(A):
    A = np.asarray(A)
    if np.iscomplexobj(A):
        return {"re": A.real.tolist(), "im": A.imag.tolist()}
    return A.tolist()


def array_from_json(obj, base_dir=None) -> np.ndarray:
    """Inline nested list, {"re", "im"} pair, or {"csv": path[, "complex"]} reference."""
    if isinstance(obj, dict):
        if "csv" in obj:
            p = Path(obj["csv"])
            if base_dir is not None and not p.is_absolute():
                p = Path(base_dir) / p
            return read_matrix_csv(p, bool(obj.get("complex", False)))
        return np.asarray(obj["re"], dtype=float) + 1j * np.asarray(obj["im"], dtype=float)
    return np.asarray(obj, dtype=float)


def write_rows_csv(path, rows: list[dict], columns: list[str]) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(rows_to_csv_text(rows, columns))


def rows_to_csv_text(rows: list[dict], columns: list[str]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_cell(r.get(c, "")) for c in columns])
    return buf.getvalue()


def _cell(v):
    if isinstance(v, (bool, np.bool_)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return _fmt(v)
    if v is None:
        return ""
    return v


def dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n"


def _json_default(o):
    if isinstance(o, np.ndarray):
        return array_to_json(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.bool_,)):
        return bool(o)
    raise TypeError(f"not JSON serializable: {type(o).__name__}")
