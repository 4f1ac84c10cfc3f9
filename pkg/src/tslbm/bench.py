"""Throughput, operation census and roofline bound of the fused kernel."""

from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass
from fractions import Fraction

import numpy as np

from .fields import single_component_arrays
from .lattice import LatticeDescriptor, make_descriptor


def _exact(x) -> Fraction:
    """Rational value of a number as written: 5.41 -> 541/100."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    return Fraction(repr(float(x)))


def glups(nx: int, ny: int, nz: int, n_steps: int, wall_seconds) -> Fraction:
    """Giga lattice updates per second, exact: nx ny nz steps / (1e9 seconds)."""
    seconds = _exact(wall_seconds)
    if seconds <= 0:
        raise ValueError(f"elapsed time must be positive, got {wall_seconds}")
    return Fraction(int(nx) * int(ny) * int(nz) * int(n_steps)) / (Fraction(10**9) * seconds)


@dataclass(frozen=True)
class MachineModel:
    """Peak compute ``pi`` (FLOP/s) and memory bandwidth ``beta_bw`` (byte/s)."""

    pi: float
    beta_bw: float

    def __post_init__(self):
        if self.pi <= 0 or self.beta_bw <= 0:
            raise ValueError("peak compute and bandwidth must be positive")

    @property
    def ridge(self) -> float:
        return self.pi / self.beta_bw


V100 = MachineModel(pi=15e12, beta_bw=900e9)


def roofline(machine: MachineModel, intensity: float) -> tuple[float, str]:
    """Attainable performance min(pi, beta I) and whether the kernel is memory- or compute-bound."""
    if intensity == float("inf"):
        return machine.pi, "compute"
    p = min(machine.pi, machine.beta_bw * intensity)
    return p, "memory" if intensity <= machine.ridge else "compute"


@dataclass(frozen=True)
class KernelCostModel:
    """Per-node-update operation census."""

    flops_per_update: int
    bytes_per_update: int
    breakdown: dict

    def __post_init__(self):
        if self.flops_per_update <= 0 or self.bytes_per_update <= 0:
            raise ValueError("operation and byte counts must be positive")

    @property
    def intensity(self) -> float:
        return self.flops_per_update / self.bytes_per_update


def _nontrivial(x) -> bool:
    return x != 0 and abs(x) != 1


def _sum_cost(coeffs) -> int:
    """Flops of sum_k coeff_k * v_k: one multiply per coefficient other than 0/+-1, one add per extra term."""
    nz = [x for x in coeffs if x != 0]
    if not nz:
        return 0
    return sum(1 for x in nz if _nontrivial(x)) + len(nz) - 1


def collide_census(desc: LatticeDescriptor) -> dict[str, int]:
    """Flops of one node in the fused stream-collide kernel.

    Counts arithmetic on floating values only; multiplications by 0 or +-1
    are free (skipped or a sign), index arithmetic and the bounce-back
    correction on wall links are excluded.
    """
    D = desc.D
    out = {}
    out["velocity"] = D  # u = rho*u / rho0
    out["u.u"] = D + (D - 1) + 1  # squares, adds, times 3/2
    hc = desc.hermite_coefficients()
    cu = qp = feq = relax = 0
    for a in range(desc.q):
        moving = np.any(desc.c[a] != 0)
        if moving:
            cu += _sum_cost(desc.c[a]) + 1  # dot product, times 3
            feq += 7  # cu^2, *0.5, +cu, -uu, *rho0, +rho, *t
        else:
            feq += 3  # -uu, *rho0, +rho, *t with cu = 0
        qp += _sum_cost(hc[a])
        relax += 3  # hw*qp, *(1-omega), +feq
    out["c.u"] = cu
    out["Q:Pi"] = qp
    out["equilibrium"] = feq
    out["relaxation"] = relax
    return out


def moments_census(desc: LatticeDescriptor) -> dict[str, int]:
    """Flops of one node in the moments kernel (sums over directions plus Pi^neq)."""
    D = desc.D
    c = desc.c
    out = {"rho": desc.q - 1}
    out["momentum"] = sum(max(int(np.count_nonzero(c[:, d])) - 1, 0) for d in range(D))
    second = 0
    for x, y in desc.tensor_pairs:
        prod = c[:, x] * c[:, y]
        second += max(int(np.count_nonzero(prod)) - 1, 0)
    out["second moments"] = second
    # u = m/rho0, then diagonal: - cs2 rho - rho0 u u (4 flops), off-diagonal: - rho0 u u (3 flops)
    out["Pi^neq"] = D + D * 5 + (desc.n_pineq - D) * 3
    return out


def count_kernel_cost(config=None, lattice=None, element_size: int | None = None, scope: str = "collide") -> KernelCostModel:
    """Operation census and streaming byte count per node update.

    ``scope="collide"`` counts the fused kernel alone: it reads rho, rho*u
    and Pi^neq and writes q populations. ``scope="step"`` adds the moments
    kernel (reads q populations, writes the 1 + D + D(D+1)/2 moments).
    Bytes assume no cache reuse.
    """
    if config is not None:
        lattice = lattice or config.lattice
        if element_size is None:
            element_size = np.dtype(getattr(config, "dtype", np.float64)).itemsize
    desc = make_descriptor(lattice or "D3Q19")
    element_size = element_size or 4
    moments_arrays = single_component_arrays(desc) - desc.q
    breakdown = {f"collide: {k}": v for k, v in collide_census(desc).items()}
    words = moments_arrays + desc.q
    if scope == "step":
        breakdown.update({f"moments: {k}": v for k, v in moments_census(desc).items()})
        words *= 2
    elif scope != "collide":
        raise ValueError(f"scope must be 'collide' or 'step', got {scope!r}")
    return KernelCostModel(
        flops_per_update=sum(breakdown.values()),
        bytes_per_update=words * element_size,
        breakdown=breakdown,
    )


@dataclass
class ScalingRow:
    workers: int
    seconds: float
    mlups: float
    efficiency: float


@dataclass
class ScalingResult:
    rows: list
    identical: bool

    def table(self) -> str:
        lines = ["workers  seconds    MLUPS  efficiency"]
        for r in self.rows:
            lines.append(f"{r.workers:7d}  {r.seconds:7.3f}  {r.mlups:7.2f}  {r.efficiency:10.3f}")
        lines.append(f"bit-identical across worker counts: {self.identical}")
        return "\n".join(lines)


def scaling_run(config, worker_counts=(1, 2), steps: int | None = None, warmup: int = 2) -> ScalingResult:
    """Time the same run for each worker count and check that all final fields agree bit for bit."""
    from .cases import build_simulation

    steps = steps or config.steps
    rows, states = [], []
    base = None
    for w in worker_counts:
        sim = build_simulation(config, workers=w)
        sim.step(warmup)
        t0 = time.perf_counter()
        sim.step(steps)
        dt = time.perf_counter() - t0
        n = sim.fields.n_nodes
        mlups = n * steps / dt / 1e6
        if base is None:
            base = mlups
        rows.append(ScalingRow(w, dt, mlups, mlups / (w * base)))
        states.append(_state_bytes(sim.fields))
        sim.close()
    identical = all(s == states[0] for s in states[1:])
    return ScalingResult(rows, identical)


def _state_bytes(fields) -> bytes:
    if fields.two_fluid:
        return fields.fR.tobytes() + fields.fB.tobytes()
    return fields.f.tobytes()


def bench_report(config, seconds: float, steps: int, machine: MachineModel | None = None) -> dict:
    """JSON-ready report of one timed run."""
    cost = count_kernel_cost(config)
    dims = list(config.dims) + [1] * (3 - len(config.dims))
    g = glups(dims[0], dims[1], dims[2], steps, seconds)
    report = {
        "lattice": str(config.lattice).upper(),
        "dims": list(config.dims),
        "steps": int(steps),
        "seconds": float(seconds),
        "glups": float(g),
        "flops_per_update": cost.flops_per_update,
        "bytes_per_update": cost.bytes_per_update,
        "intensity": cost.intensity,
        "roofline_bound": None,
    }
    if machine is not None:
        p, kind = roofline(machine, cost.intensity)
        report["roofline_bound"] = {"flops": p, "kind": kind}
    return report


def dump_report(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True)


def machine_from_dict(d: dict) -> MachineModel:
    return MachineModel(**{k: float(v) for k, v in d.items() if k in asdict(V100)})
