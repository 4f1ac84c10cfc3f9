"""Color-gradient two-fluid model with near-contact repulsion.

Red and blue populations relax together as g = fR + fB (regularized BGK), a
perturbation aligned with the phase-field gradient produces surface tension,
and a Latva-Kokko recoloring splits g back into the two colors while
sharpening the interface. Films of blue squeezed between two red interfaces
are detected by a local scan and a short-range repulsive force keeps the
interfaces apart.

The numpy functions here operate on whole arrays and serve as the readable
definition of each operator; :class:`TwoFluidSimulation` runs the same
physics through the compiled, row-parallel kernels.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from . import _kernels as K
from .boundary import BoundarySpec, classify_nodes
from .fields import SOLID, TwoFluidFieldSet
from .lattice import LatticeDescriptor
from .parallel import WorkerPool
from .solver import CollisionParams, equilibrium, fast_rows, kernel_constants, n_rows

PERTURBATION_FORMS = ("squared", "linear")


@dataclass(frozen=True)
class ColorParams:
    """Surface tension ``sigma``, recoloring sharpness ``beta``, NCI strength and scan settings."""

    sigma: float
    beta: float = 0.7
    nci_strength: float = 0.0
    eps_bulk: float = 0.02
    nci_reach: int = 3
    perturbation_form: str = "squared"
    grad_min: float = 1e-6
    phi_max: float = 0.99

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError(f"sigma must be >= 0, got {self.sigma}")
        if not 0.0 < self.beta <= 1.0:
            raise ValueError(f"beta must lie in (0, 1], got {self.beta}")
        if not 0.0 < self.eps_bulk <= 0.2:
            raise ValueError(f"eps_bulk must lie in (0, 0.2], got {self.eps_bulk}")
        if self.nci_strength < 0:
            raise ValueError(f"nci_strength must be >= 0, got {self.nci_strength}")
        if self.nci_reach < 1:
            raise ValueError(f"nci_reach must be >= 1, got {self.nci_reach}")
        if self.perturbation_form not in PERTURBATION_FORMS:
            raise ValueError(f"perturbation_form must be one of {PERTURBATION_FORMS}")

    @property
    def bulk_threshold(self) -> float:
        """phi below this marks the continuous (blue) bulk: -1 + eps."""
        return -1.0 + self.eps_bulk


# ------------------------------------------------------------------ array operators


def phase_field(rhoR, rhoB) -> np.ndarray:
    """phi = (rhoR - rhoB) / (rhoR + rhoB); nodes with zero total density get 0."""
    rhoR = np.asarray(rhoR, dtype=float)
    rhoB = np.asarray(rhoB, dtype=float)
    rho = rhoR + rhoB
    empty = rho <= 0
    if np.any(empty):
        warnings.warn(f"{int(empty.sum())} node(s) with zero total density excluded from the phase field")
    with np.errstate(invalid="ignore", divide="ignore"):
        phi = np.where(empty, 0.0, (rhoR - rhoB) / np.where(empty, 1.0, rho))
    return np.clip(phi, -1.0, 1.0)


def _shift(arr, offset, periodic):
    """Value at x + offset for a grid array indexed [.., y, x]; None where it leaves a closed face.

    Returns (values, inside) with ``inside`` False where a closed face was crossed.
    """
    D = len(offset)
    out = arr
    inside = np.ones(arr.shape, dtype=bool)
    for ax in range(D):
        s = int(offset[ax])
        if s == 0:
            continue
        axis = arr.ndim - 1 - ax
        out = np.roll(out, -s, axis=axis)
        if not periodic[ax]:
            n = arr.shape[axis]
            idx = np.arange(n) + s
            ok = (idx >= 0) & (idx < n)
            shape = [1] * arr.ndim
            shape[axis] = n
            inside &= ok.reshape(shape)
    return out, inside


def isotropic_gradient(phi, desc: LatticeDescriptor, periodic=(True, True, True), solid=None) -> np.ndarray:
    """(1/cs2) sum_a t_a c_a phi(x + c_a) on a grid array ([z,] y, x).

    Neighbors across a closed face or on a solid node take the value at x.
    Returns (D, *phi.shape).
    """
    phi = np.asarray(phi, dtype=float)
    solid = np.zeros(phi.shape, dtype=bool) if solid is None else np.asarray(solid, dtype=bool)
    grad = np.zeros((desc.D,) + phi.shape)
    for a in range(1, desc.q):
        v, inside = _shift(phi, desc.c[a], periodic)
        s_solid, _ = _shift(solid, desc.c[a], periodic)
        v = np.where(inside & ~s_solid, v, phi)
        for d in range(desc.D):
            grad[d] += desc.c[a, d] * desc.t[a] * v
    return grad / desc.cs2


def interface_mask(gradphi, phi, params: ColorParams) -> np.ndarray:
    gn = np.sqrt((np.asarray(gradphi) ** 2).sum(axis=0))
    return (gn > params.grad_min) & (np.abs(phi) < params.phi_max)


def perturbation_term(gradphi, params: ColorParams, desc: LatticeDescriptor, omega: float) -> np.ndarray:
    """Capillary term (q, N) added to the relaxed populations (no interface gating)."""
    g = np.asarray(gradphi, dtype=float)
    gn = np.sqrt((g**2).sum(axis=0))
    safe = np.where(gn > 0, gn, 1.0)
    cg = np.tensordot(desc.c.astype(float), g, axes=(1, 0))
    t = desc.t[:, None]
    B = desc.B[:, None]
    if params.perturbation_form == "squared":
        shape = t * cg**2 / safe**2
    else:
        shape = t * cg / safe**2
    term = 2.25 * params.sigma * omega * gn * (shape - B)
    return np.where(gn > 0, term, 0.0)


def perturbation(g, gradphi, params: ColorParams, desc: LatticeDescriptor, omega: float, phi=None) -> np.ndarray:
    """g plus the capillary term on interface nodes; other nodes are returned unchanged."""
    g = np.asarray(g, dtype=float)
    gradphi = np.asarray(gradphi, dtype=float)
    if phi is None:
        mask = np.sqrt((gradphi**2).sum(axis=0)) > params.grad_min
    else:
        mask = interface_mask(gradphi, phi, params)
    return g + np.where(mask, perturbation_term(gradphi, params, desc, omega), 0.0)


def cos_angles(gradphi, desc: LatticeDescriptor) -> np.ndarray:
    """cos of the angle between c_a and grad phi, (q, N); 0 for the rest direction and where grad phi = 0."""
    g = np.asarray(gradphi, dtype=float)
    gn = np.sqrt((g**2).sum(axis=0))
    cnorm = np.sqrt((desc.c.astype(float) ** 2).sum(axis=1))
    cg = np.tensordot(desc.c.astype(float), g, axes=(1, 0))
    denom = cnorm[:, None] * gn[None, :]
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(denom > 0, cg / np.where(denom > 0, denom, 1.0), 0.0)


def recolor(g, rhoR, rhoB, gradphi, params: ColorParams, desc: LatticeDescriptor, mask=None):
    """Latva-Kokko split of g into (fR, fB); ``mask`` limits the sharpening term to interface nodes."""
    g = np.asarray(g, dtype=float)
    rhoR = np.asarray(rhoR, dtype=float)
    rhoB = np.asarray(rhoB, dtype=float)
    rho = rhoR + rhoB
    pos = rho > 0
    safe = np.where(pos, rho, 1.0)
    share = np.where(pos, rhoR / safe, 0.5)
    kb = np.where(pos, params.beta * rhoR * rhoB / safe, 0.0)
    sharpen = kb * desc.t[:, None] * cos_angles(gradphi, desc)
    if mask is not None:
        sharpen = np.where(mask, sharpen, 0.0)
    fR = share * g + sharpen
    return fR, g - fR


def nci_scan(phi, params: ColorParams, desc: LatticeDescriptor, periodic=(True, True, True), solid=None) -> np.ndarray:
    """Boolean flags ([z,] y, x) of interface points facing each other across a bulk node."""
    phi = np.asarray(phi, dtype=float)
    thr = params.bulk_threshold
    solid = np.zeros(phi.shape, dtype=bool) if solid is None else np.asarray(solid, dtype=bool)
    bulk = (phi < thr) & ~solid
    flags = np.zeros(phi.shape, dtype=bool)
    for a in desc.half_directions:
        c = desc.c[a]
        walk = bulk.copy()
        for s in range(1, params.nci_reach + 1):
            vp, ip = _shift(phi, s * c, periodic)
            vm, im = _shift(phi, -s * c, periodic)
            sp, _ = _shift(solid, s * c, periodic)
            sm, _ = _shift(solid, -s * c, periodic)
            walk &= ip & im & ~sp & ~sm
            hit = walk & (vp > thr) & (vm > thr)
            if hit.any():
                flags |= _shift(hit, -s * c, periodic)[0]
                flags |= _shift(hit, s * c, periodic)[0]
    return flags


def nci_force(flags, rho_dispersed, gradphi, params: ColorParams) -> np.ndarray:
    """Repulsive force (D, ...) = A rho_dispersed grad(phi)/|grad(phi)| on flagged nodes.

    grad phi points into the dispersed (red) phase, so the force pushes each
    flagged interface back into its own droplet, away from the film.
    """
    flags = np.asarray(flags, dtype=bool)
    g = np.asarray(gradphi, dtype=float)
    gn = np.sqrt((g**2).sum(axis=0))
    degenerate = flags & (gn <= 1e-12)
    if degenerate.any():
        warnings.warn(f"{int(degenerate.sum())} flagged node(s) with zero phase gradient get no NCI force")
    ok = flags & ~degenerate
    scale = np.where(ok, params.nci_strength * np.asarray(rho_dispersed) / np.where(ok, gn, 1.0), 0.0)
    return scale * g


# ------------------------------------------------------------------ initial conditions


def tanh_phase(distance, width: float = 3.0) -> np.ndarray:
    """phi from the signed distance to the interface (positive inside red)."""
    return np.tanh(2.0 * np.asarray(distance, dtype=float) / width)


def ellipsoid_distance(dims, center, semi_axes) -> np.ndarray:
    """Approximate signed distance (positive inside) to an axis-aligned ellipsoid, grid-shaped.

    Uses the scaled radial distance, exact for spheres and accurate to first
    order for mildly deformed shapes.
    """
    D = len(dims)
    axes = [np.arange(n, dtype=float) for n in dims]
    grids = np.meshgrid(*axes[::-1], indexing="ij")[::-1]  # x, y[, z] each shaped ([z,] y, x)
    rel = [(grids[d] - center[d]) / semi_axes[d] for d in range(D)]
    rho = np.sqrt(sum(r**2 for r in rel))
    mean_axis = float(np.exp(np.mean(np.log(semi_axes))))
    return (1.0 - rho) * mean_axis


def droplet_phase(dims, centers, semi_axes, width: float = 3.0, periodic: bool = True) -> np.ndarray:
    """phi for one or more droplets (red) in blue; overlapping profiles take the maximum."""
    phi = -np.ones(tuple(dims)[::-1])
    for center, axes in zip(centers, semi_axes):
        if np.isscalar(axes):
            axes = [float(axes)] * len(dims)
        dist = ellipsoid_distance(dims, center, axes)
        if periodic:
            for shift in np.ndindex(*([3] * len(dims))):
                off = [(s - 1) * n for s, n in zip(shift, dims)]
                if any(off):
                    moved = [c + o for c, o in zip(center, off)]
                    dist = np.maximum(dist, ellipsoid_distance(dims, moved, axes))
        phi = np.maximum(phi, tanh_phase(dist, width))
    return phi


# ------------------------------------------------------------------ solver


class TwoFluidSimulation:
    """Two-fluid solver. One step runs these barrier-separated phases:

    moments -> gradient -> [NCI clear/scan/force] -> collide+recolor+push -> moments.
    """

    def __init__(
        self,
        fields: TwoFluidFieldSet,
        params: CollisionParams,
        color: ColorParams,
        boundary: BoundarySpec | None = None,
        workers: int | None = None,
        pool: WorkerPool | None = None,
    ):
        if not fields.two_fluid:
            raise TypeError("TwoFluidSimulation needs a TwoFluidFieldSet")
        self.fields = fields
        self.params = params
        self.color = color
        self.boundary = boundary or BoundarySpec.periodic()
        self.pool = pool or WorkerPool(workers)
        self.consts = kernel_constants(fields.desc)
        self.cnorm = np.sqrt((fields.desc.c.astype(float) ** 2).sum(axis=1))
        self.time = 0
        self.external_force = None
        closed = not all(self.boundary.periodic_axes[: fields.D])
        if (closed or self.boundary.mask is not None) and not np.any(fields.flags):
            fields.flags[:] = classify_nodes(fields.desc, fields.dims[: fields.D], self.boundary)
        self.rows = fast_rows(fields, self.boundary)
        self._fresh = False

    @property
    def desc(self) -> LatticeDescriptor:
        return self.fields.desc

    def init_phase(self, phi, rho=1.0, u=None) -> None:
        """Equilibrium populations of total density rho split by phi: fR = (1+phi)/2 feq."""
        fl = self.fields
        phi = np.asarray(phi, dtype=float).reshape(-1)
        rho = np.broadcast_to(np.asarray(rho, dtype=float), (fl.n_nodes,))
        u = np.zeros((fl.D, fl.n_nodes)) if u is None else np.broadcast_to(np.asarray(u, dtype=float).reshape(fl.D, -1), (fl.D, fl.n_nodes))
        feq = equilibrium(rho, u, fl.desc, rho0=self.params.rho0)
        fl.fR[:] = 0.5 * (1.0 + phi) * feq
        fl.fB[:] = 0.5 * (1.0 - phi) * feq
        fl.fR[:, ~fl.fluid] = 0.0
        fl.fB[:, ~fl.fluid] = 0.0
        self.update_moments()

    def set_body_force(self, force) -> None:
        """Constant external force (D,) or (D, N) added to the NCI force every step."""
        force = np.asarray(force, dtype=float)
        self.external_force = None if not np.any(force) else np.broadcast_to(force.reshape(self.fields.D, -1), (self.fields.D, self.fields.n_nodes)).copy()

    def update_moments(self) -> None:
        fl = self.fields
        self.pool.run(
            K.moments_two_fluid, n_rows(fl),
            fl.fR, fl.fB, fl.rhoR, fl.rhoB, fl.mom, fl.pineq, fl.phi, fl.flags,
            self.consts["c"], self.params.rho0, fl.dims[0],
        )
        self._fresh = True

    def update_gradient(self) -> None:
        fl = self.fields
        periodic, _, _ = self.boundary.kernel_args()
        nx, ny, nz = fl.dims
        self.pool.run(
            K.gradient, n_rows(fl), fl.phi, fl.grad, fl.flags, self.rows,
            self.consts["c"], self.consts["t"], nx, ny, nz, periodic,
        )

    def update_nci(self) -> None:
        """Clear, scan and turn the NCI flags into a force; no-op when the strength is zero."""
        fl = self.fields
        col = self.color
        if col.nci_strength <= 0:
            fl.nci[:] = 0
            return
        periodic, _, _ = self.boundary.kernel_args()
        nx, ny, nz = fl.dims
        thr = col.bulk_threshold
        fl.nci[:] = 0
        outside = fl.grid(fl.phi >= thr).astype(np.uint8)
        near = ndimage.maximum_filter(outside, size=2 * col.nci_reach + 1, mode="wrap").reshape(-1)
        half = np.asarray(self.desc.half_directions, dtype=np.int64)
        self.pool.run(
            K.nci_scan, fl.n_nodes, fl.phi, fl.nci, fl.flags, near, self.consts["c"], half,
            col.nci_reach, thr, nx, ny, nz, periodic,
        )
        force = fl.ensure_force()
        self.pool.run(K.nci_force, fl.n_nodes, fl.nci, fl.rhoR, fl.grad, force, col.nci_strength)

    def _collide(self) -> None:
        fl = self.fields
        k = self.consts
        col = self.color
        periodic, face_u, moving = self.boundary.kernel_args()
        nx, ny, nz = fl.dims
        force = fl.force if fl.force is not None else np.zeros((fl.D, 0), dtype=fl.dtype)
        self.pool.run(
            K.stream_collide_two_fluid, n_rows(fl),
            fl.fR, fl.fB, fl.rhoR, fl.rhoB, fl.mom, fl.pineq, fl.phi, fl.grad, force, fl.flags, self.rows,
            k["c"], self.cnorm, k["t"], self.desc.B, k["hc"], k["hw"], k["opp"],
            self.params.omega, self.params.rho0, col.sigma, col.beta, col.perturbation_form == "squared",
            col.grad_min, col.phi_max, nx, ny, nz, periodic, face_u, moving,
        )

    def step(self, n: int = 1) -> None:
        fl = self.fields
        if not self._fresh:
            self.update_moments()
        for _ in range(n):
            self.update_gradient()
            self.update_nci()
            if self.external_force is not None:
                f = fl.ensure_force()
                if self.color.nci_strength > 0:
                    f += self.external_force
                else:
                    f[:] = self.external_force
                f[:, fl.flags & SOLID != 0] = 0.0
            elif self.color.nci_strength <= 0:
                fl.force = None
            self._collide()
            self.update_moments()
            self.time += 1

    def velocity(self) -> np.ndarray:
        return self.fields.velocity(self.params.rho0)

    def phi_grid(self) -> np.ndarray:
        return self.fields.grid(self.fields.phi)

    def raw_phase_excursion(self) -> float:
        """Largest |phi| - 1 before clamping (positive when a color density went negative)."""
        fl = self.fields
        rho = fl.rhoR.astype(float) + fl.rhoB
        ok = fl.fluid & (rho > 0)
        raw = (fl.rhoR[ok] - fl.rhoB[ok]) / rho[ok]
        return float(np.max(np.abs(raw)) - 1.0) if raw.size else 0.0

    def close(self) -> None:
        self.pool.close()
