"""Desk-scale validation checks, shared by the test suite and ``tslbm validate``.

Each check returns a :class:`CheckResult` with the measured value, the
tolerance it was held to and a one-line verdict.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field

import numpy as np

from . import analysis as A
from .bench import V100, count_kernel_cost, roofline, scaling_run
from .boundary import BoundarySpec
from .cases import build_simulation, oblate_axes, run_case, taylor_green_velocity
from .config import SimulationConfig
from .fields import FieldSet, TwoFluidFieldSet, flipflop_arrays, single_component_arrays
from .lattice import make_descriptor
from .multicomponent import ColorParams, TwoFluidSimulation, droplet_phase
from .reference import ReferenceSolver
from .solver import CollisionParams, Simulation, equilibrium


@dataclass
class CheckResult:
    name: str
    passed: bool
    measured: object
    target: str
    details: dict = field(default_factory=dict)

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.name}: {self.measured} (target {self.target})"


def _random_state(desc, n, rng, u_mean=0.0, rho_amp=0.01, u_amp=0.02, noise=1e-3):
    rho = 1.0 + rho_amp * rng.standard_normal(n)
    u = u_mean + u_amp * rng.standard_normal((desc.D, n))
    f = equilibrium(rho, u, desc)
    f += noise * desc.t[:, None] * rng.standard_normal(f.shape)
    return f


def _oracle_boundary(kind: int, dims):
    if kind == 0:
        return BoundarySpec.periodic()
    if kind == 1:
        return BoundarySpec.lid_cavity(0.05)
    spec = BoundarySpec.channel(2)
    mask = np.zeros(dims[::-1], dtype=bool)
    mask[10:14, 12:20] = True
    return spec.with_mask(mask)


def oracle_equivalence(n_states: int = 100, steps: int = 10, size: int = 32, seed: int = 7) -> CheckResult:
    """Fused thread-safe step vs two-buffer numpy step on random 2D states, bit for bit."""
    rng = np.random.default_rng(seed)
    desc = make_descriptor("D2Q9")
    dims = (size, size)
    mismatched = []
    max_diff = 0.0
    for s in range(n_states):
        omega = float(rng.uniform(0.6, 1.9))
        boundary = _oracle_boundary(s % 3, dims)
        dtype = np.float32 if s % 10 == 9 else np.float64
        fields = FieldSet(desc, dims, dtype)
        sim = Simulation(fields, CollisionParams(omega), boundary, workers=1 + s % 3)
        ref = ReferenceSolver(desc, dims, omega, boundary, dtype=dtype, solid=fields.flags & 1 != 0)
        f0 = _random_state(desc, fields.n_nodes, rng).astype(dtype)
        f0[:, ~fields.fluid] = 0
        fields.f[:] = f0
        ref.fA[:] = f0
        sim.update_moments()
        sim.step(steps)
        ref.step(steps)
        if not np.array_equal(fields.f, ref.f):
            mismatched.append(s)
            max_diff = max(max_diff, float(np.max(np.abs(fields.f.astype(float) - ref.f))))
        sim.close()
    return CheckResult(
        "oracle equivalence",
        not mismatched,
        f"{n_states - len(mismatched)}/{n_states} states bit-identical",
        "all bit-identical",
        {"mismatched": mismatched, "max_abs_diff": max_diff},
    )


def _digest(arr) -> str:
    return hashlib.sha256(np.ascontiguousarray(arr).tobytes()).hexdigest()


def parallel_determinism(size: int = 128, steps: int = 100, workers=(1, 2, 8), seed: int = 3) -> CheckResult:
    """Same 3D cavity run with several worker counts: identical bytes."""
    desc = make_descriptor("D3Q19")
    dims = (size, size, size)
    boundary = BoundarySpec.lid_cavity(0.05, 3)
    fields = FieldSet(desc, dims, np.float64)
    rng = np.random.default_rng(seed)
    f0 = _random_state(desc, fields.n_nodes, rng)
    digests = {}
    for w in workers:
        fields.f[:] = f0
        fields.flags[:] = 0
        sim = Simulation(fields, CollisionParams(1.2), boundary, workers=w)
        sim.update_moments()
        sim.step(steps)
        digests[w] = _digest(fields.f)
        sim.close()
    same = len(set(digests.values())) == 1
    return CheckResult(
        "parallel determinism",
        same,
        "identical" if same else "differs",
        f"identical fields for workers {tuple(workers)}",
        {"digests": digests},
    )


def conservation(size: int = 64, steps: int = 1000, seed: int = 5) -> list[CheckResult]:
    """Mass and momentum drift on a periodic 3D box in double and single precision."""
    desc = make_descriptor("D3Q19")
    dims = (size, size, size)
    out = []
    for dtype, tol in ((np.float64, 1e-12), (np.float32, 1e-5)):
        rng = np.random.default_rng(seed)
        fields = FieldSet(desc, dims, dtype)
        fields.f[:] = _random_state(desc, fields.n_nodes, rng, u_mean=0.02)
        sim = Simulation(fields, CollisionParams(1.1), workers=None)
        sim.update_moments()
        m0, p0 = fields.total_mass(), fields.total_momentum()
        sim.step(steps)
        m1, p1 = fields.total_mass(), fields.total_momentum()
        dm = abs(m1 - m0) / abs(m0)
        dp = float(np.linalg.norm(p1 - p0) / np.linalg.norm(p0))
        sim.close()
        name = np.dtype(dtype).name
        out.append(CheckResult(f"conservation ({name})", dm <= tol and dp <= tol, f"mass {dm:.2e}, momentum {dp:.2e}", f"<= {tol:g}"))
    return out


def taylor_green_viscosity(omega: float, size: int = 64, amplitude: float = 1e-3, decay: float = 2.0) -> tuple[float, float]:
    """Measured and expected kinematic viscosity from the kinetic-energy decay of a 2D Taylor-Green vortex."""
    desc = make_descriptor("D2Q9")
    dims = (size, size)
    fields = FieldSet(desc, dims, np.float64)
    sim = Simulation(fields, CollisionParams(omega), workers=1)
    u0 = taylor_green_velocity(dims, amplitude)
    k2 = 2 * (2 * math.pi / size) ** 2
    # pressure of the vortex, so the start is free of acoustic transients
    nx = size
    i = np.arange(fields.n_nodes) % nx
    j = np.arange(fields.n_nodes) // nx
    kx = 2 * math.pi / nx
    p = -0.25 * amplitude**2 * (np.cos(2 * kx * i) + np.cos(2 * kx * j))
    sim.init_equilibrium(1.0 + 3.0 * p, u0)
    nu = sim.params.nu
    total = int(math.ceil(decay / (2 * nu * k2)))
    every = max(total // 40, 1)
    ts, es = [], []
    for t in range(0, total + 1, every):
        if t:
            sim.step(every)
        u = sim.velocity()
        ts.append(sim.time)
        es.append(float((u**2).sum()))
    ts = np.array(ts, dtype=float)
    es = np.array(es)
    keep = ts >= 0.1 * ts[-1]
    slope = np.polyfit(ts[keep], np.log(es[keep]), 1)[0]
    sim.close()
    return -slope / (2 * k2), nu


def viscosity_certification(omegas=(0.8, 1.0, 1.5), tol: float = 0.01) -> list[CheckResult]:
    out = []
    for w in omegas:
        measured, expected = taylor_green_viscosity(w)
        err = abs(measured - expected) / expected
        out.append(CheckResult(f"viscosity omega={w}", err <= tol, f"nu {measured:.6f} vs {expected:.6f} ({err:.2%})", f"<= {tol:.0%}"))
    return out


def cavity_config(size: int = 128, u_lid: float = 0.1, re: float = 100.0, steps: int = 200_000, workers=None) -> SimulationConfig:
    nu = u_lid * size / re
    return SimulationConfig(
        lattice="D2Q9", dims=(size, size), nu=nu, case="cavity", u_lid=u_lid,
        steps=steps, check_every=1000, series_every=1000, steady_tol=1e-7, workers=workers,
    )


def lid_cavity(size: int = 128, profile_tol: float = 0.05, center_tol: float = 2.0, output_dir=None) -> list[CheckResult]:
    cfg = cavity_config(size)
    res = run_case(cfg, output_dir=output_dir, write=output_dir is not None)
    s = res.summary
    conv = {"converged": s.get("converged"), "steps": s.get("steps"), "residual": s.get("residual")}
    eu, ev = s["ghia_u_max_error"], s["ghia_v_max_error"]
    dist = s.get("ghia_vortex_distance_nodes", float("inf"))
    return [
        CheckResult("cavity u profile", eu <= profile_tol, f"max |u - u_Ghia| = {eu:.4f} u_lid", f"<= {profile_tol} u_lid", conv),
        CheckResult("cavity v profile", ev <= profile_tol, f"max |v - v_Ghia| = {ev:.4f} u_lid", f"<= {profile_tol} u_lid", conv),
        CheckResult("cavity vortex center", dist <= center_tol, f"{dist:.2f} nodes from reference, center {s.get('vortex_center')}", f"<= {center_tol} nodes", conv),
    ]


def droplet_config(size: int = 96, radius: float = 16.0, sigma: float = 0.03, tau: float = 0.55, steps: int = 3000) -> SimulationConfig:
    return SimulationConfig(
        lattice="D3Q19", dims=(size, size, size), tau=tau, case="droplet-oscillation",
        sigma=sigma, beta=0.7, radius=radius, aspect=1.2, width=3.0, steps=steps,
        series_every=5, dtype="float32",
    )


def droplet_oscillation(tol: float = 0.10, variant: str = "reduced", config: SimulationConfig | None = None, output_dir=None) -> CheckResult:
    cfg = config or droplet_config()
    res = run_case(cfg, output_dir=output_dir, write=output_dir is not None)
    s = res.summary
    T = s.get("measured_period")
    theory = s["theory_period"][variant]
    err = abs(T - theory) / theory if T else float("inf")
    return CheckResult(
        "droplet oscillation period",
        err <= tol,
        f"T_LB = {T if T is None else round(T, 1)}, theory ({variant}) {theory:.1f}, error {err:.2%}",
        f"<= {tol:.0%}",
        {k: s.get(k) for k in ("theory_period", "equivalent_radius", "peak_steps", "period_error_reduced", "period_error_lamb")},
    )


def laplace_pressure(radius: float, sigma: float = 0.03, steps: int = 12000, tau: float = 1.0) -> tuple[float, float]:
    """(pressure jump, measured radius) of a static 2D droplet."""
    desc = make_descriptor("D2Q9")
    n = int(4 * radius)
    dims = (n, n)
    fields = TwoFluidFieldSet(desc, dims, np.float64)
    sim = TwoFluidSimulation(fields, CollisionParams(1 / tau), ColorParams(sigma=sigma, beta=0.7), workers=1)
    sim.init_phase(droplet_phase(dims, [(n / 2, n / 2)], [radius]))
    sim.step(steps)
    phi = sim.phi_grid()
    rho = fields.grid(fields.rhoR + fields.rhoB)
    R = A.equivalent_radius(phi, 2)
    yy, xx = np.mgrid[0:n, 0:n]
    r = np.hypot(xx - n / 2, yy - n / 2)
    inside = rho[r < R - 6].mean()
    outside = rho[r > R + 6].mean()
    sim.close()
    return (inside - outside) / 3.0, R


def laplace_law(radii=(20, 30, 40), sigma: float = 0.03, tol: float = 0.05) -> CheckResult:
    dps, Rs = zip(*(laplace_pressure(R, sigma) for R in radii))
    x = sigma / np.array(Rs)
    slope, intercept = np.polyfit(x, np.array(dps), 1)
    err = abs(slope - 1.0)
    return CheckResult(
        "Laplace law",
        err <= tol,
        f"slope of dp vs sigma/R = {slope:.4f} (error {err:.2%})",
        f"|slope - 1| <= {tol:.0%}",
        {"radii": list(Rs), "dp": list(dps), "intercept": intercept},
    )


def impact_config(
    nci_strength: float, size=(96, 48, 48), radius: float = 10.0, velocity: float = 0.1, we: float = 9.5,
    steps: int = 3000, gap: float = 16.0, width: float = 3.0,
) -> SimulationConfig:
    """Two droplets approaching head-on at Weber number ``we``.

    We = rho U^2 (2R) / sigma with U the relative speed, so sigma follows
    from the other three. The gap is wide enough for the interfaces to
    sharpen before the films meet; a narrower start never holds a bulk node
    between the droplets and the near-contact scan has nothing to flag.
    """
    sigma = velocity**2 * 2 * radius / we
    return SimulationConfig(
        lattice="D3Q19", dims=tuple(size), tau=0.55, case="head-on-impact", sigma=sigma, beta=0.7,
        nci_strength=nci_strength, radius=radius, velocity=velocity, gap=gap, width=width,
        steps=steps, series_every=50, dtype="float32",
    )


def weber(config: SimulationConfig) -> float:
    return config.velocity**2 * 2 * config.radius / config.sigma


def nci_non_coalescence(strength: float = 0.01, **kw) -> CheckResult:
    counts = {}
    for A_nci in (strength, 0.0):
        cfg = impact_config(A_nci, **kw)
        res = run_case(cfg, write=False)
        counts[A_nci] = res.summary["final_components"]
    ok = counts[strength] == 2 and counts[0.0] == 1
    cfg = impact_config(strength, **kw)
    return CheckResult(
        "NCI non-coalescence",
        ok,
        f"components: A>0 -> {counts[strength]}, A=0 -> {counts[0.0]} (We = {weber(cfg):.2f})",
        "2 with A>0, 1 with A=0",
    )


def memory_accounting() -> list[CheckResult]:
    out = []
    expected = {"D2Q9": (15, 21, 24), "D3Q19": (29, 42, 52)}
    for kind, (ts, ff, save) in expected.items():
        desc = make_descriptor(kind)
        a, b = single_component_arrays(desc), flipflop_arrays(desc)
        got = (a, b, (b - a) * 4)
        out.append(CheckResult(f"memory {kind}", got == (ts, ff, save), f"{a} vs {b} arrays, saving {(b - a) * 4} B/node", f"{ts} vs {ff}, {save} B/node"))
    return out


def roofline_intensity() -> list[CheckResult]:
    cost = count_kernel_cost(lattice="D3Q19", element_size=4)
    p, kind = roofline(V100, 2.31)
    return [
        CheckResult("intensity D3Q19 fp32", 1.0 <= cost.intensity <= 5.0, f"I = {cost.intensity:.3f} ({cost.flops_per_update} flop / {cost.bytes_per_update} B)", "1 <= I <= 5", {"census": cost.breakdown}),
        CheckResult("roofline example", math.isclose(p, 2.079e12, rel_tol=1e-12) and kind == "memory", f"P = {p:.4e} FLOP/s, {kind}-bound", "2.079e12, memory-bound"),
    ]


def throughput(size: int = 64, steps: int = 20, workers=(1, 2, 4)) -> CheckResult:
    cfg = SimulationConfig(lattice="D3Q19", dims=(size, size, size), omega=1.0, case="custom", init="taylor-green", steps=steps)
    res = scaling_run(cfg, workers, steps=steps)
    best = max(r.mlups for r in res.rows)
    return CheckResult("throughput", res.identical, f"{best:.2f} MLUPS locally, bit-identical={res.identical}", "report MLUPS, identical results", {"table": res.table()})


CHECKS = {
    "oracle": oracle_equivalence,
    "determinism": parallel_determinism,
    "conservation": conservation,
    "viscosity": viscosity_certification,
    "cavity": lid_cavity,
    "droplet": droplet_oscillation,
    "laplace": laplace_law,
    "nci": nci_non_coalescence,
    "memory": memory_accounting,
    "roofline": roofline_intensity,
    "throughput": throughput,
}


def run_check(name: str) -> list[CheckResult]:
    if name not in CHECKS:
        raise KeyError(f"unknown validation case {name!r}; choose from {', '.join(CHECKS)}")
    res = CHECKS[name]()
    return res if isinstance(res, list) else [res]
