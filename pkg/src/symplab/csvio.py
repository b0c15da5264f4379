"""CSV import/export for trajectories, surfaces and result tables.

Floats are written with 17 significant digits so a read-back is exact;
files use ',' separators, a header row and LF line endings.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .flow import Trajectory
from .surfaces import Surface


def _fmt(value):
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def _windings(row):
    return ";".join(str(int(w)) for w in row)


def _parse_windings(text, dim):
    parts = [int(v) for v in text.split(";")] if text else []
    if len(parts) != dim:
        raise ValueError(f"windings field {text!r} does not have {dim} entries")
    return parts


def write_table(path, header, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])
    return path


def read_table(path):
    """Header and rows as strings; callers convert columns as needed."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        return header, [row for row in reader]


def coordinate_header(dim):
    return [f"x{i + 1}" for i in range(dim)]


def write_trajectory(traj, path):
    """Columns ``t, x1..x{2n}, windings, H``; windings are ';'-joined per coordinate."""
    H = traj.energies()
    rows = ([t, *x, _windings(w), h]
            for t, x, w, h in zip(traj.times, traj.points, traj.windings, H))
    return write_table(path, ["t", *coordinate_header(traj.system.dim), "windings", "H"], rows)


def read_trajectory(path, system):
    header, rows = read_table(path)
    dim = system.dim
    if header != ["t", *coordinate_header(dim), "windings", "H"]:
        raise ValueError(f"unexpected trajectory header {header}")
    times = np.array([float(r[0]) for r in rows])
    points = np.array([[float(v) for v in r[1:1 + dim]] for r in rows]).reshape(-1, dim)
    windings = np.array([_parse_windings(r[1 + dim], dim) for r in rows]).reshape(-1, dim)
    return Trajectory(system, times, points, windings)


def write_surface(surf, path):
    """Columns ``eps_index, t_index, eps, t, x1..x{2n}, windings``."""
    def rows():
        for i, e in enumerate(surf.eps):
            for k, t in enumerate(surf.times):
                yield [i, k, e, t, *surf.points[i, k], _windings(surf.windings[i, k])]
    header = ["eps_index", "t_index", "eps", "t", *coordinate_header(surf.system.dim), "windings"]
    return write_table(path, header, rows())


def read_surface(path, system):
    header, rows = read_table(path)
    dim = system.dim
    if header != ["eps_index", "t_index", "eps", "t", *coordinate_header(dim), "windings"]:
        raise ValueError(f"unexpected surface header {header}")
    ii = np.array([int(r[0]) for r in rows])
    kk = np.array([int(r[1]) for r in rows])
    M1, N1 = ii.max() + 1, kk.max() + 1
    if len(rows) != M1 * N1:
        raise ValueError("surface CSV does not fill its index grid")
    eps = np.empty(M1)
    times = np.empty(N1)
    points = np.empty((M1, N1, dim))
    windings = np.empty((M1, N1, dim), dtype=int)
    for i, k, r in zip(ii, kk, rows):
        eps[i] = float(r[2])
        times[k] = float(r[3])
        points[i, k] = [float(v) for v in r[4:4 + dim]]
        windings[i, k] = _parse_windings(r[4 + dim], dim)
    return Surface(system, eps, times, points, windings)
