"""CSV and JSON files written and read by the command line tool."""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .errors import InvalidData
from .evolution import Trajectory
from .grid import GridFunction, make_grid

TRAJECTORY_HEADER = ["t", "l2", "d3_l2", "energy", "c0", "c1", "c2", "c3", "holder"]


def _fmt(v: float) -> str:
    return f"{v:.17g}"


def write_grid_csv(path, g: GridFunction) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "g"])
        for x, v in zip(g.spec.x, g.values):
            w.writerow([_fmt(x), _fmt(v)])


def read_grid_csv(path) -> GridFunction:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or [c.strip() for c in rows[0]] != ["x", "g"]:
        raise InvalidData(f"{path}: expected header 'x,g'")
    try:
        data = np.array([[float(a), float(b)] for a, b in rows[1:]], dtype=float)
    except ValueError as e:
        raise InvalidData(f"{path}: {e}") from None
    if data.shape[0] < 9:
        raise InvalidData(f"{path}: need at least 9 rows, got {data.shape[0]}")
    x = data[:, 0]
    n = x.shape[0]
    dx = (x[-1] - x[0]) / (n - 1)
    if not dx > 0 or np.abs(np.diff(x) - dx).max() > 1e-9 * dx:
        raise InvalidData(f"{path}: x column is not an arithmetic progression")
    if abs(x[0] + x[-1]) > 1e-9 * dx * n:
        raise InvalidData(f"{path}: grid is not centred on x = 0")
    try:
        spec = make_grid(float(x[-1]), n)
    except ValueError as e:
        raise InvalidData(f"{path}: {e}") from None
    return GridFunction(spec, data[:, 1])


def snapshot_name(t: float) -> str:
    return f"g_t{t:.6f}.csv"


def write_trajectory(out_dir, traj: Trajectory) -> list[Path]:
    """trajectory.csv plus one snapshot file per stored state."""
    out = Path(out_dir)
    written = [out / "trajectory.csv"]
    with open(written[0], "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRAJECTORY_HEADER)
        for t, r in zip(traj.times, traj.reports):
            w.writerow([_fmt(t), *(_fmt(v) for v in r.as_row())])
    for t, g in traj.snapshots:
        p = out / snapshot_name(t)
        write_grid_csv(p, g)
        written.append(p)
    return written


def _clean(obj):
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        # JSON has no infinities; keep them readable as strings
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def write_json(path, obj) -> None:
    with open(path, "w") as fh:
        json.dump(_clean(obj), fh, indent=2)
        fh.write("\n")
