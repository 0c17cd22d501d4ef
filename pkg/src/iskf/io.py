"""Flat-file formats: CSV tables, columnar trajectories, JSON documents.

Floats are written with ``repr`` so that parsing a file recovers the exact
values.  Infinite thresholds are spelled ``inf`` in every format.
"""

import csv
import json
import math
from pathlib import Path

import numpy as np

from .sim import Trajectory

__all__ = [
    "write_table",
    "read_table",
    "write_trajectory",
    "read_trajectory",
    "write_json",
    "read_json",
    "to_jsonable",
]


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return repr(v)
    if v is None:
        return ""
    return str(v)


def _parse(s):
    if s == "":
        return None
    try:
        return int(s)
    except ValueError:
        pass
    try:
        return float(s)
    except ValueError:
        return s


def to_jsonable(obj):
    """Recursively convert numpy types and non-finite floats for JSON output."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    return obj


def write_json(path, obj, sort_keys=True):
    path = Path(path)
    with path.open("w") as f:
        json.dump(to_jsonable(obj), f, indent=2, sort_keys=sort_keys)
        f.write("\n")
    return path


def read_json(path):
    with Path(path).open() as f:
        return json.load(f)


def write_table(path, columns, rows, fmt="csv"):
    """Write ``rows`` (sequences aligned with ``columns``).

    ``fmt="csv"`` writes a header row plus one line per row to ``path.csv``;
    ``fmt="structured"`` writes a JSON list of records to ``path.json``.
    Returns the path written.
    """
    path = Path(path)
    if fmt == "csv":
        path = path.with_suffix(".csv")
        with path.open("w", newline="") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(columns)
            for row in rows:
                w.writerow([_fmt(v) for v in row])
    elif fmt == "structured":
        path = path.with_suffix(".json")
        # records keep column order
        write_json(path, [dict(zip(columns, row)) for row in rows], sort_keys=False)
    else:
        raise ValueError(f"unknown format {fmt!r}")
    return path


def read_table(path):
    """Read a table written by :func:`write_table`; returns ``(columns, rows)``."""
    path = Path(path)
    if path.suffix == ".json":
        records = read_json(path)
        columns = list(records[0]) if records else []
        rows = [[_parse(r[c]) if isinstance(r[c], str) else r[c] for c in columns] for r in records]
        return columns, rows
    with path.open(newline="") as f:
        reader = csv.reader(f)
        columns = next(reader)
        rows = [[_parse(v) for v in row] for row in reader]
    return columns, rows


def write_trajectory(path, traj, fmt="csv"):
    """One row per time ``t = 0..T``: ``t, x_*, y_*, process_outlier, meas_outlier``.

    Row 0 carries the initial state with empty measurement and zero flags.
    ``process_outlier`` on row ``t`` flags the noise that produced ``x[t]``.
    """
    n = traj.states.shape[1]
    p = traj.measurements.shape[1]
    columns = ["t"] + [f"x{i}" for i in range(n)] + [f"y{i}" for i in range(p)]
    columns += ["process_outlier", "meas_outlier"]
    rows = [[0, *traj.states[0], *([None] * p), 0, 0]]
    for t in range(1, traj.T + 1):
        rows.append([
            t,
            *traj.states[t],
            *traj.measurements[t - 1],
            int(traj.process_outlier_flags[t - 1]),
            int(traj.meas_outlier_flags[t - 1]),
        ])
    return write_table(path, columns, rows, fmt)


def read_trajectory(path, seed=-1):
    columns, rows = read_table(path)
    xi = [i for i, c in enumerate(columns) if c.startswith("x")]
    yi = [i for i, c in enumerate(columns) if c.startswith("y")]
    pi, mi = columns.index("process_outlier"), columns.index("meas_outlier")
    states = np.array([[r[i] for i in xi] for r in rows], dtype=float)
    ys = np.array([[r[i] for i in yi] for r in rows[1:]], dtype=float).reshape(len(rows) - 1, len(yi))
    fw = np.array([bool(r[pi]) for r in rows[1:]], dtype=bool)
    fv = np.array([bool(r[mi]) for r in rows[1:]], dtype=bool)
    return Trajectory(states, ys, fw, fv, seed)
