"""Simulation drivers: lid cavity, droplet oscillation, head-on impact and custom runs."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import analysis as A
from .config import SimulationConfig
from .fields import FieldSet, TwoFluidFieldSet, unravel
from .io import SeriesWriter, write_fields, write_summary
from .lattice import make_descriptor
from .multicomponent import ColorParams, TwoFluidSimulation, droplet_phase
from .solver import CollisionParams, Simulation, apply_body_force

STATUS_OK = 0
STATUS_NAN = 2


class NumericalBlowup(RuntimeError):
    def __init__(self, step: int, node: tuple, field_name: str):
        self.step = step
        self.node = node
        self.field_name = field_name
        super().__init__(f"non-finite {field_name} at step {step}, node {node}")


def color_params(config: SimulationConfig) -> ColorParams:
    return ColorParams(
        sigma=config.sigma,
        beta=config.beta,
        nci_strength=config.nci_strength,
        eps_bulk=config.eps_bulk,
        nci_reach=config.nci_reach,
        perturbation_form=config.perturbation,
    )


def oblate_axes(radius: float, aspect: float, D: int) -> tuple:
    """Semi-axes of an oblate droplet with the volume of a sphere of ``radius``; the last axis is the short one."""
    if D == 2:
        c = radius / math.sqrt(aspect)
        return (aspect * c, c)
    c = radius / aspect ** (2.0 / 3.0)
    return (aspect * c, aspect * c, c)


def grid_center(dims) -> tuple:
    return tuple(float(n // 2) for n in dims)


def impact_layout(config: SimulationConfig):
    """Centers of two droplets facing each other along x, ``gap`` apart surface to surface."""
    cx, *rest = grid_center(config.dims)
    off = config.radius + 0.5 * config.gap
    return [(cx - off, *rest), (cx + off, *rest)]


def build_simulation(config: SimulationConfig, workers: int | None = None):
    """Allocate fields, set the initial state and return a ready simulation."""
    desc = make_descriptor(config.lattice)
    params = CollisionParams(config.relaxation, config.rho0)
    boundary = config.boundary_spec()
    workers = workers if workers is not None else config.workers
    dims = tuple(config.dims)
    D = desc.D
    if config.two_fluid:
        fields = TwoFluidFieldSet(desc, dims, config.numpy_dtype)
        sim = TwoFluidSimulation(fields, params, color_params(config), boundary, workers=workers)
        if config.case == "droplet-oscillation":
            axes = oblate_axes(config.radius, config.aspect, D)
            phi = droplet_phase(dims, [grid_center(dims)], [axes], config.width)
            sim.init_phase(phi)
        else:
            centers = impact_layout(config)
            parts = [droplet_phase(dims, [c], [config.radius], config.width) for c in centers]
            phi = np.maximum(parts[0], parts[1])
            u = np.zeros((D,) + phi.shape)
            u[0] = 0.5 * config.velocity * ((1 + parts[0]) / 2 - (1 + parts[1]) / 2)
            sim.init_phase(phi, 1.0, u.reshape(D, -1))
        if config.force is not None:
            sim.set_body_force(config.force)
        return sim

    fields = FieldSet(desc, dims, config.numpy_dtype)
    sim = Simulation(fields, params, boundary, workers=workers)
    if config.init == "taylor-green":
        sim.init_equilibrium(1.0, taylor_green_velocity(dims, config.amplitude))
    else:
        sim.init_equilibrium(1.0)
    if config.force is not None:
        apply_body_force(fields, np.asarray(config.force))
    return sim


def taylor_green_velocity(dims, amplitude: float) -> np.ndarray:
    """Taylor-Green vortex (D, N) with one wavelength across the first two axes."""
    nx, ny = dims[0], dims[1]
    nz = dims[2] if len(dims) > 2 else 1
    kx, ky = 2 * math.pi / nx, 2 * math.pi / ny
    k, j, i = np.meshgrid(np.arange(nz), np.arange(ny), np.arange(nx), indexing="ij")
    u = np.zeros((len(dims), nz, ny, nx))
    u[0] = -amplitude * np.cos(kx * i) * np.sin(ky * j)
    u[1] = amplitude * (kx / ky) * np.sin(kx * i) * np.cos(ky * j)
    return u.reshape(len(dims), -1)


def check_finite(fields, step: int) -> None:
    """Raise :class:`NumericalBlowup` with the first bad node's coordinates."""
    arrays = [("density", fields.rho if not fields.two_fluid else fields.rhoR + fields.rhoB), ("momentum", fields.mom)]
    for name, arr in arrays:
        bad = ~np.isfinite(arr)
        if bad.any():
            n = int(np.flatnonzero(bad.reshape(-1, fields.n_nodes).any(axis=0))[0]) if arr.ndim > 1 else int(np.flatnonzero(bad)[0])
            i, j, k = unravel(n, fields.dims)
            node = (int(i), int(j)) if fields.D == 2 else (int(i), int(j), int(k))
            raise NumericalBlowup(step, node, name)


@dataclass
class RunResult:
    status: int
    summary: dict
    artifacts: list = field(default_factory=list)
    series: dict = field(default_factory=dict)


def _vertical_line(sim) -> np.ndarray:
    phi = sim.phi_grid()
    c = [n // 2 for n in sim.fields.dims[: sim.fields.D]]
    if sim.fields.D == 2:
        return phi[:, c[0]]
    return phi[:, c[1], c[0]]


def _observe(config, sim, state) -> dict:
    row = {}
    if config.case == "droplet-oscillation":
        line = _vertical_line(sim)
        start = sim.fields.dims[sim.fields.D - 1] // 2
        row["interface"] = A.interface_position(line, start)
    elif config.case == "head-on-impact":
        row["components"] = A.count_components(sim.phi_grid(), 0.0, periodic=sim.boundary.periodic_axes[: sim.fields.D][::-1])
        row["nci_flags"] = int(sim.fields.nci.sum())
    elif config.case == "cavity":
        row["residual"] = state.get("residual")
    return row


def _cavity_summary(config, sim, summary) -> None:
    if sim.fields.D != 2:
        return
    u = sim.velocity()
    ux, uy = sim.fields.grid(u[0]), sim.fields.grid(u[1])
    y, um, x, vm = A.centerline_profiles(ux, uy, config.u_lid)
    summary["reynolds"] = config.reynolds
    centers = A.vortex_center(ux, uy)
    nx, ny = config.dims
    if centers:
        cx, cy = centers[0]
        summary["vortex_center_nodes"] = [cx, cy]
        summary["vortex_center"] = [(cx + 0.5) / nx, (cy + 0.5) / ny]
    if abs(config.reynolds - 100) <= 10:
        ref = A.ghia_re100()
        eu = np.abs(A.sample_profile(y, um, ref["y"]) - ref["u"])
        ev = np.abs(A.sample_profile(x, vm, ref["x"]) - ref["v"])
        summary["ghia_u_max_error"] = float(eu.max())
        summary["ghia_v_max_error"] = float(ev.max())
        if centers:
            rx, ry = ref["vortex"]
            summary["ghia_vortex_distance_nodes"] = math.hypot((cx + 0.5) - rx * nx, (cy + 0.5) - ry * ny)


def _droplet_summary(config, sim, series, summary) -> None:
    pos = np.array([np.nan if v is None else v for v in series.get("interface", [])], dtype=float)
    steps = np.array(series.get("step", []), dtype=float)
    R_e = A.equivalent_radius(sim.phi_grid(), sim.fields.D)
    summary["equivalent_radius"] = R_e
    theory = A.period_variants(config.sigma, R_e, config.viscosity)
    summary["theory_period"] = theory
    ok = np.isfinite(pos)
    if ok.sum() > 5:
        try:
            est = A.detect_period(pos[ok], dt=float(config.series_every))
            summary["measured_period"] = est.period
            summary["peak_steps"] = (est.peaks + steps[ok][0]).tolist()
            for k in ("reduced", "lamb"):
                summary[f"period_error_{k}"] = abs(theory[k] - est.period) / theory[k]
        except ValueError as exc:
            summary["measured_period"] = None
            summary["period_note"] = str(exc)


def run_case(config: SimulationConfig, output_dir: str | Path | None = None, write: bool = True, progress=None) -> RunResult:
    """Run the configured case; returns the exit status, summary and written files.

    A non-finite density or momentum aborts the run with status 2; the
    summary then names the step and node.
    """
    out = Path(output_dir or config.output_dir)
    sim = build_simulation(config)
    fields = sim.fields
    mass0 = fields.total_mass()
    mom0 = fields.total_momentum()
    series: dict = {}
    artifacts = []
    writer = SeriesWriter(out / "series.csv") if write else None
    state = {"residual": None}
    prev_u = sim.velocity().copy() if config.case == "cavity" else None
    status = STATUS_OK
    summary = {"case": config.case, "lattice": config.lattice, "dims": list(config.dims), "omega": config.relaxation}
    converged = None
    t0 = time.perf_counter()
    step = 0

    def record(step):
        row = {"step": step, "mass": fields.total_mass()}
        p = fields.total_momentum()
        for d, name in enumerate("xyz"[: fields.D]):
            row[f"momentum_{name}"] = float(p[d])
        row.update(_observe(config, sim, state))
        for k, v in row.items():
            series.setdefault(k, []).append(v)
        if writer:
            writer.write(row)

    def snapshot(step):
        if write and config.output_every and step % config.output_every == 0:
            artifacts.append(write_fields(fields, out / f"fields_{step:07d}.vtk", rho0=config.rho0))

    try:
        check_finite(fields, 0)
        record(0)
        snapshot(0)
        while step < config.steps:
            n = min(config.series_every, config.steps - step)
            if config.output_every:
                n = min(n, config.output_every - step % config.output_every)
            if config.case == "cavity":
                n = min(n, config.check_every - step % config.check_every)
            sim.step(n)
            step += n
            check_finite(fields, step)
            if config.case == "cavity" and step % config.check_every == 0:
                u = sim.velocity()
                state["residual"] = A.steady_residual(u, prev_u, abs(config.u_lid))
                prev_u = u.copy()
                converged = state["residual"] <= config.steady_tol
            if step % config.series_every == 0 or step == config.steps or converged:
                record(step)
            snapshot(step)
            if progress:
                progress(step, sim)
            if converged:
                break
    except NumericalBlowup as exc:
        status = STATUS_NAN
        summary["error"] = str(exc)
        summary["blowup_step"] = exc.step
        summary["blowup_node"] = list(exc.node)
    finally:
        if writer:
            writer.close()
    seconds = time.perf_counter() - t0

    summary["steps"] = step
    summary["seconds"] = seconds
    nx, ny, nz = fields.dims
    summary["glups"] = nx * ny * nz * step / (1e9 * seconds) if seconds > 0 and step else None
    if status == STATUS_OK:
        summary["mass_drift"] = abs(fields.total_mass() - mass0) / mass0
        summary["momentum_change"] = (fields.total_momentum() - mom0).tolist()
        if fields.two_fluid:
            summary["color_masses"] = list(fields.color_masses())
        if config.case == "cavity":
            summary["converged"] = bool(converged)
            summary["residual"] = state["residual"]
            _cavity_summary(config, sim, summary)
        elif config.case == "droplet-oscillation":
            _droplet_summary(config, sim, series, summary)
        elif config.case == "head-on-impact":
            summary["final_components"] = series["components"][-1]
            summary["min_components"] = min(series["components"])
    if write:
        artifacts.append(write_summary(summary, out / "summary.json"))
        if writer:
            artifacts.append(writer.path)
    sim.close()
    return RunResult(status, summary, artifacts, series)
