"""Field snapshots (legacy VTK structured points, ASCII), CSV time series, JSON summaries."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

NUMBER_FORMAT = "{:.9e}"


def _fmt(values) -> str:
    return "\n".join(NUMBER_FORMAT.format(float(v)) for v in values)


def vtk_text(fields, rho0: float = 1.0, title: str = "tslbm fields") -> str:
    """Legacy VTK STRUCTURED_POINTS document with rho, velocity and (two fluids) phi.

    Numbers use a fixed scientific format, so equal fields give equal bytes.
    Velocity always has three components (zero z in 2D).
    """
    nx, ny, nz = fields.dims
    n = nx * ny * nz
    rho = np.asarray(fields.rho, dtype=np.float64)
    u = fields.velocity(rho0)
    vel = np.zeros((n, 3))
    vel[:, : fields.D] = u.T
    out = [
        "# vtk DataFile Version 3.0",
        title,
        "ASCII",
        "DATASET STRUCTURED_POINTS",
        f"DIMENSIONS {nx} {ny} {nz}",
        "ORIGIN 0 0 0",
        "SPACING 1 1 1",
        f"POINT_DATA {n}",
        "SCALARS rho double 1",
        "LOOKUP_TABLE default",
        _fmt(rho),
        "VECTORS velocity double",
        "\n".join(" ".join(NUMBER_FORMAT.format(x) for x in row) for row in vel),
    ]
    if fields.two_fluid:
        out += ["SCALARS phi double 1", "LOOKUP_TABLE default", _fmt(fields.phi)]
    return "\n".join(out) + "\n"


def write_fields(fields, path, format: str = "vtk", rho0: float = 1.0) -> Path:
    """Write a snapshot; only the legacy ASCII ``vtk`` format is supported."""
    if format != "vtk":
        raise ValueError(f"unsupported field format {format!r}")
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(vtk_text(fields, rho0))
    except OSError as exc:
        raise OSError(f"cannot write field file {path}: {exc}") from exc
    return path


def read_vtk_scalars(path) -> dict[str, np.ndarray]:
    """Point arrays of a file written by :func:`write_fields` (for checks and round trips)."""
    lines = Path(path).read_text().splitlines()
    n = int(next(l for l in lines if l.startswith("POINT_DATA")).split()[1])
    out = {}
    k = 0
    while k < len(lines):
        parts = lines[k].split()
        if parts and parts[0] == "SCALARS":
            out[parts[1]] = np.array([float(x) for x in lines[k + 2 : k + 2 + n]])
            k += 2 + n
        elif parts and parts[0] == "VECTORS":
            out[parts[1]] = np.array([[float(x) for x in l.split()] for l in lines[k + 1 : k + 1 + n]])
            k += 1 + n
        else:
            k += 1
    return out


class SeriesWriter:
    """CSV time series with a fixed column set taken from the first row."""

    def __init__(self, path):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._fh = None
        self._writer = None
        self.columns = None

    def write(self, row: dict) -> None:
        if self._writer is None:
            self.columns = list(row)
            self._fh = open(self.path, "w", newline="")
            self._writer = csv.DictWriter(self._fh, fieldnames=self.columns)
            self._writer.writeheader()
        self._writer.writerow({k: _csv_value(row.get(k)) for k in self.columns})
        self._fh.flush()

    def close(self) -> None:
        if self._fh is not None:
            self._fh.close()
            self._fh = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def _csv_value(v):
    if isinstance(v, float):
        return repr(v)
    return "" if v is None else v


def read_series(path) -> dict[str, np.ndarray]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        return {}
    return {k: np.array([float(r[k]) if r[k] != "" else math.nan for r in rows]) for k in rows[0]}


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else None
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def write_summary(summary: dict, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_jsonable(summary), indent=2, sort_keys=True) + "\n")
    return path
