"""Plain-text run configuration: ``key = value`` lines, ``#`` comments.

Example::

    lattice = d2q9
    dims = 128,128
    tau = 0.884
    case = cavity
    u_lid = 0.1

Every problem in a file is reported at once, each with its line number.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np

from .boundary import BoundarySpec, load_mask
from .lattice import LatticeKind
from .solver import omega_from_tau_or_nu

CASES = ("cavity", "droplet-oscillation", "head-on-impact", "custom")
BOUNDARIES = ("periodic", "closed", "cavity", "channel")
INITS = ("rest", "taylor-green")
DTYPES = ("float64", "float32")
PERTURBATIONS = ("squared", "linear")


class ConfigError(ValueError):
    """All problems found in a configuration, one message per entry."""

    def __init__(self, errors: list[str]):
        self.errors = list(errors)
        super().__init__("invalid configuration:\n  " + "\n  ".join(self.errors))


@dataclass(frozen=True)
class SimulationConfig:
    lattice: str = "D2Q9"
    dims: tuple = (64, 64)
    omega: float | None = None
    tau: float | None = None
    nu: float | None = None
    rho0: float = 1.0
    case: str = "custom"
    steps: int = 1000
    dtype: str = "float64"
    workers: int | None = None
    output_every: int = 0
    series_every: int = 10
    output_dir: str = "output"
    seed: int = 0
    boundary: str | None = None
    mask: str | None = None
    # cavity
    u_lid: float = 0.1
    steady_tol: float = 1e-7
    check_every: int = 1000
    # single-phase custom runs
    init: str = "rest"
    amplitude: float = 0.01
    force: tuple | None = None
    # two fluids
    sigma: float = 0.0
    beta: float = 0.7
    nci_strength: float = 0.0
    eps_bulk: float = 0.02
    nci_reach: int = 3
    perturbation: str = "squared"
    radius: float = 16.0
    aspect: float = 1.2
    width: float = 3.0
    velocity: float = 0.0
    gap: float = 6.0

    @property
    def relaxation(self) -> float:
        """omega from whichever of omega, tau, nu is set."""
        return omega_from_tau_or_nu(self.omega, self.tau, self.nu)

    @property
    def viscosity(self) -> float:
        return (1.0 / self.relaxation - 0.5) / 3.0

    @property
    def D(self) -> int:
        return 2 if self.lattice == "D2Q9" else 3

    @property
    def two_fluid(self) -> bool:
        return self.case in ("droplet-oscillation", "head-on-impact")

    @property
    def reynolds(self) -> float:
        """u_lid L / nu with L the number of fluid nodes across the cavity."""
        return self.u_lid * self.dims[0] / self.viscosity

    @property
    def numpy_dtype(self):
        return np.dtype(self.dtype)

    def boundary_spec(self) -> BoundarySpec:
        kind = self.boundary or {"cavity": "cavity"}.get(self.case, "periodic")
        D = len(self.dims)
        if kind == "periodic":
            spec = BoundarySpec.periodic()
        elif kind == "closed":
            spec = BoundarySpec.closed_box(D)
        elif kind == "cavity":
            spec = BoundarySpec.lid_cavity(self.u_lid, D)
        else:
            spec = BoundarySpec.channel(D, wall_axis=1)
        if self.mask:
            spec = spec.with_mask(load_mask(self.mask))
        return spec


# value parsers per key
def _int(s):
    return int(s)


def _float(s):
    return float(s)


def _dims(s):
    """``128,128`` or ``64x64x64``."""
    parts = [p.strip() for p in re.split(r"[,x]", s.strip())]
    if any(not p for p in parts):
        raise ValueError("empty extent")
    return tuple(int(p) for p in parts)


def _vector(s):
    return tuple(float(p) for p in s.split(",") if p.strip())


def _choice(options):
    def parse(s):
        v = s.strip().lower()
        if v not in options:
            raise ValueError(f"expected one of {', '.join(options)}")
        return v

    return parse


def _lattice(s):
    return LatticeKind.parse(s).value


def _text(s):
    return s.strip()


def _opt_int(s):
    return None if s.strip().lower() in ("", "auto", "none") else int(s)


PARSERS = {
    "lattice": _lattice,
    "dims": _dims,
    "omega": _float,
    "tau": _float,
    "nu": _float,
    "rho0": _float,
    "case": _choice(CASES),
    "steps": _int,
    "dtype": _choice(DTYPES),
    "workers": _opt_int,
    "output_every": _int,
    "series_every": _int,
    "output_dir": _text,
    "seed": _int,
    "boundary": _choice(BOUNDARIES),
    "mask": _text,
    "u_lid": _float,
    "steady_tol": _float,
    "check_every": _int,
    "init": _choice(INITS),
    "amplitude": _float,
    "force": _vector,
    "sigma": _float,
    "beta": _float,
    "nci_strength": _float,
    "eps_bulk": _float,
    "nci_reach": _int,
    "perturbation": _choice(PERTURBATIONS),
    "radius": _float,
    "aspect": _float,
    "width": _float,
    "velocity": _float,
    "gap": _float,
}
REQUIRED = ("lattice", "dims", "case")
RELAXATION_KEYS = ("omega", "tau", "nu")


def parse_config(text: str, base_dir: str | Path | None = None) -> SimulationConfig:
    """Parse and validate; raises :class:`ConfigError` listing every problem.

    ``base_dir`` resolves a relative ``mask`` path.
    """
    errors: list[str] = []
    values: dict = {}
    where: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            errors.append(f"line {lineno}: expected key = value, got {raw.strip()!r}")
            continue
        key, value = (p.strip() for p in line.split("=", 1))
        key = key.lower()
        if key not in PARSERS:
            errors.append(f"line {lineno}: unknown key {key!r}")
            continue
        if key in where:
            errors.append(f"line {lineno}: {key!r} already set on line {where[key]}")
            continue
        try:
            values[key] = PARSERS[key](value)
        except (ValueError, TypeError) as exc:
            errors.append(f"line {lineno}: malformed value for {key!r}: {value!r} ({exc})")
            continue
        where[key] = lineno

    missing = [k for k in REQUIRED if k not in values and not _failed(errors, k)]
    if missing:
        errors.append("missing required key(s): " + ", ".join(missing))
    given = [k for k in RELAXATION_KEYS if k in where]
    if len(given) > 1:
        errors.append("conflicting relaxation settings: " + ", ".join(f"{k} (line {where[k]})" for k in given))
    elif not given and not any(f"{k!r}" in e for e in errors for k in RELAXATION_KEYS):
        errors.append("missing relaxation: give exactly one of omega, tau, nu")

    if base_dir is not None and values.get("mask"):
        m = Path(values["mask"])
        values["mask"] = str(m if m.is_absolute() else Path(base_dir) / m)

    if not errors:
        errors.extend(_semantic_errors(values, where))
    if errors:
        raise ConfigError(errors)
    return SimulationConfig(**values)


def _failed(errors, key):
    return [e for e in errors if f"{key!r}" in e]


def _semantic_errors(values: dict, where: dict) -> list[str]:
    errors = []

    def at(key):
        return f"line {where[key]}: " if key in where else ""

    lattice = values["lattice"]
    D = 2 if lattice == "D2Q9" else 3
    dims = values["dims"]
    if len(dims) != D:
        errors.append(f"{at('dims')}{lattice} needs {D} extents, got {len(dims)}")
    if any(d < 4 for d in dims):
        errors.append(f"{at('dims')}every extent must be >= 4, got {dims}")
    try:
        omega_from_tau_or_nu(values.get("omega"), values.get("tau"), values.get("nu"))
    except ValueError as exc:
        key = next(k for k in RELAXATION_KEYS if k in values)
        errors.append(f"{at(key)}{exc}")
    for key in ("steps", "series_every", "check_every"):
        if key in values and values[key] < 1:
            errors.append(f"{at(key)}{key} must be >= 1")
    if values.get("output_every", 0) < 0:
        errors.append(f"{at('output_every')}output_every must be >= 0 (0 disables snapshots)")
    if values.get("workers") is not None and values["workers"] < 1:
        errors.append(f"{at('workers')}workers must be >= 1")
    if values.get("rho0", 1.0) <= 0:
        errors.append(f"{at('rho0')}rho0 must be positive")
    if "force" in values and len(values["force"]) != D:
        errors.append(f"{at('force')}force needs {D} components")
    if "beta" in values and not 0 < values["beta"] <= 1:
        errors.append(f"{at('beta')}beta must lie in (0, 1]")
    if "eps_bulk" in values and not 0 < values["eps_bulk"] <= 0.2:
        errors.append(f"{at('eps_bulk')}eps_bulk must lie in (0, 0.2]")
    for key in ("sigma", "nci_strength"):
        if values.get(key, 0.0) < 0:
            errors.append(f"{at(key)}{key} must be >= 0")
    if values.get("case") in ("droplet-oscillation", "head-on-impact") and values.get("sigma", 0.0) <= 0:
        errors.append(f"{values['case']} needs sigma > 0")
    if "u_lid" in values and abs(values["u_lid"]) >= (1 / 3) ** 0.5:
        errors.append(f"{at('u_lid')}lid speed must be below cs = 0.577")
    if "mask" in values and not Path(values["mask"]).is_file():
        errors.append(f"{at('mask')}mask file {values['mask']!r} not found")
    return errors


def serialize_config(config: SimulationConfig) -> str:
    """``key = value`` text that :func:`parse_config` maps back to the same config."""
    lines = []
    for f in fields(config):
        v = getattr(config, f.name)
        if v is None:
            continue
        if isinstance(v, tuple):
            v = ",".join(repr(x) if isinstance(x, float) else str(x) for x in v)
        elif isinstance(v, float):
            v = repr(v)
        lines.append(f"{f.name} = {v}")
    return "\n".join(lines) + "\n"


def load_config(path) -> SimulationConfig:
    path = Path(path)
    return parse_config(path.read_text(), base_dir=path.parent)


def with_overrides(config: SimulationConfig, **changes) -> SimulationConfig:
    return replace(config, **changes)
