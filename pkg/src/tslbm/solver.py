"""Single-component regularized lattice Boltzmann with fused, race-free push.

One time step is a sequence of barrier-separated phases:

1. moments: rho, rho*u and Pi^neq from the local populations of each node;
2. stream-collide: every node rebuilds its post-collision populations from
   its own moments (equilibrium + (1 - omega) times the Hermite-projected
   non-equilibrium part) and pushes them to its neighbors; links ending on
   walls are reflected in the same pass.

Phase 2 reads no population at all, and for a fixed direction the push
x -> x + c_a is injective, so each slot has exactly one writer. That makes the
update independent of how nodes are split across workers.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .boundary import BoundarySpec, classify_nodes
from .fields import SOLID, FieldSet
from .lattice import LatticeDescriptor
from .parallel import WorkerPool

STABILITY_FRACTION = 0.3


class ParameterError(ValueError):
    pass


def viscosity(omega: float, cs2: float = 1.0 / 3.0) -> float:
    """Kinematic viscosity nu = cs2 (1/omega - 1/2)."""
    return cs2 * (1.0 / omega - 0.5)


def omega_from_tau_or_nu(omega=None, tau=None, nu=None, cs2: float = 1.0 / 3.0) -> float:
    """Relaxation rate from exactly one of omega, tau (= 1/omega) or nu."""
    given = [name for name, v in (("omega", omega), ("tau", tau), ("nu", nu)) if v is not None]
    if len(given) != 1:
        raise ParameterError(f"give exactly one of omega, tau, nu (got {given or 'none'})")
    if tau is not None:
        if tau <= 0:
            raise ParameterError(f"tau must be positive, got {tau}")
        omega = 1.0 / tau
    elif nu is not None:
        if nu <= 0:
            raise ParameterError(f"viscosity must be positive, got {nu}")
        omega = 1.0 / (nu / cs2 + 0.5)
    if not 0.0 < omega < 2.0:
        raise ParameterError(f"omega = {omega} gives non-positive viscosity; need 0 < omega < 2")
    return float(omega)


@dataclass(frozen=True)
class CollisionParams:
    omega: float
    rho0: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.omega < 2.0:
            raise ParameterError(f"omega must lie in (0, 2), got {self.omega}")
        if self.rho0 <= 0:
            raise ParameterError(f"rho0 must be positive, got {self.rho0}")

    @property
    def tau(self) -> float:
        return 1.0 / self.omega

    @property
    def nu(self) -> float:
        return viscosity(self.omega)


def equilibrium(rho, u, desc: LatticeDescriptor, a=None, rho0: float = 1.0):
    """Incompressible second-order equilibrium.

    ``rho`` is scalar or (N,), ``u`` is (D,) or (D, N). Returns all q
    populations (q, ...) or only direction ``a``.
    """
    rho = np.asarray(rho, dtype=float)
    u = np.asarray(u, dtype=float)
    speed = np.sqrt((u**2).sum(axis=0))
    if np.any(speed > STABILITY_FRACTION * np.sqrt(desc.cs2)):
        warnings.warn(f"velocity {np.max(speed):.3g} exceeds {STABILITY_FRACTION} cs; second-order equilibrium is inaccurate")
    cs2 = desc.cs2
    c = desc.c.astype(float)
    cu = np.tensordot(c, u, axes=(1, 0)) / cs2
    uu = (u**2).sum(axis=0) / (2 * cs2)
    t = desc.t.reshape((-1,) + (1,) * rho.ndim)
    feq = t * (rho + rho0 * (cu + 0.5 * cu**2 - uu))
    return feq if a is None else feq[a]


def hermite_projection(fneq, desc: LatticeDescriptor):
    """Project non-equilibrium populations (q, ...) onto the second-order Hermite subspace."""
    fneq = np.asarray(fneq, dtype=float)
    pi = np.einsum("ai,aj,a...->ij...", desc.c, desc.c, fneq)
    qpi = np.einsum("aij,ij...->a...", desc.Q, pi)
    return (desc.t / (2 * desc.cs2**2)).reshape((-1,) + (1,) * (fneq.ndim - 1)) * qpi


def kernel_constants(desc: LatticeDescriptor) -> dict:
    return dict(
        c=desc.c3(),
        t=desc.t.copy(),
        hc=desc.hermite_coefficients(),
        hw=desc.t / (2.0 * desc.cs2**2),
        opp=desc.opp.copy(),
    )


def _force_arg(fields: FieldSet):
    if fields.force is None:
        return np.zeros((fields.D, 0), dtype=fields.dtype)
    return fields.force


def n_rows(fields: FieldSet) -> int:
    nx, ny, nz = fields.dims
    return ny * nz


def fast_rows(fields: FieldSet, boundary: BoundarySpec) -> np.ndarray:
    """uint8 per x-row: 1 where neither the row nor any neighbor row holds a solid node.

    Such rows are pushed row-wise: every interior node of the row lands in
    the same target row or bounces on the same face.
    """
    nx, ny, nz = fields.dims
    solid = (fields.flags & SOLID != 0).reshape(nz, ny, nx).any(axis=2)
    near = solid.copy()
    for dk in ((-1, 0, 1) if fields.D == 3 else (0,)):
        for dj in (-1, 0, 1):
            near |= np.roll(solid, (dk, dj), axis=(0, 1))
    return (~near).reshape(-1).astype(np.uint8)


def compute_moments(fields: FieldSet, params: CollisionParams, pool: WorkerPool | None = None) -> None:
    """Fill rho, rho*u and Pi^neq on every fluid node from the local populations."""
    pool = pool or WorkerPool(1)
    c = fields.desc.c3()
    pool.run(K.moments, n_rows(fields), fields.f, fields.rho, fields.mom, fields.pineq, fields.flags, c, params.rho0, fields.dims[0])


def stream_collide_fused(
    fields: FieldSet,
    params: CollisionParams,
    boundary: BoundarySpec,
    pool: WorkerPool | None = None,
    consts: dict | None = None,
    rows: np.ndarray | None = None,
) -> None:
    """Rebuild post-collision populations from the moments and push them.

    Must run after :func:`compute_moments` has finished on the whole grid.
    ``rows`` is the :func:`fast_rows` table, recomputed when omitted.
    """
    pool = pool or WorkerPool(1)
    k = consts or kernel_constants(fields.desc)
    periodic, face_u, moving = boundary.kernel_args()
    nx, ny, nz = fields.dims
    if rows is None:
        rows = fast_rows(fields, boundary)
    pool.run(
        K.stream_collide, n_rows(fields),
        fields.f, fields.rho, fields.mom, fields.pineq, _force_arg(fields), fields.flags, rows,
        k["c"], k["t"], k["hc"], k["hw"], k["opp"],
        1.0 - params.omega, params.rho0, nx, ny, nz, periodic, face_u, moving,
    )


def apply_body_force(fields: FieldSet, force) -> None:
    """Attach a body force (D,) uniform or (D, N) per node.

    The stream-collide pass then evaluates the equilibrium at
    u + F/rho0 (exact-difference forcing), which adds exactly F to the
    momentum of every node per step. ``force = 0`` detaches it.
    """
    force = np.asarray(force, dtype=float)
    if not np.any(force):
        fields.force = None
        return
    f = fields.ensure_force()
    if force.ndim == 1:
        f[:] = force[:, None]
    else:
        f[:] = force
    f[:, fields.flags & SOLID != 0] = 0.0


def writer_counts(fields: FieldSet, boundary: BoundarySpec) -> np.ndarray:
    """Number of writes each (direction, node) slot receives in one push (debug mode)."""
    counts = np.zeros((fields.desc.q, fields.n_nodes), dtype=np.int64)
    periodic, _, moving = boundary.kernel_args()
    nx, ny, nz = fields.dims
    K.count_writers(0, fields.n_nodes, counts, fields.flags, fields.desc.c3(), fields.desc.opp, nx, ny, nz, periodic, moving)
    return counts


def stability_check(fields: FieldSet, rho0: float = 1.0, fraction: float = STABILITY_FRACTION) -> int:
    """Warn with node coordinates where |u| > fraction * cs; returns the count."""
    u = fields.mom.astype(np.float64) / rho0
    speed = np.sqrt((u**2).sum(axis=0))
    bad = np.flatnonzero((speed > fraction * np.sqrt(fields.desc.cs2)) & fields.fluid)
    if bad.size:
        i, j, k = np.unravel_index(bad[0], fields.dims, order="F")
        warnings.warn(f"|u| = {speed[bad[0]]:.3g} > {fraction} cs at {bad.size} node(s), first at ({i}, {j}, {k})")
    return int(bad.size)


class Simulation:
    """Single-component solver driving the phased kernels on a worker pool."""

    def __init__(
        self,
        fields: FieldSet,
        params: CollisionParams,
        boundary: BoundarySpec | None = None,
        workers: int | None = None,
        pool: WorkerPool | None = None,
    ):
        self.fields = fields
        self.params = params
        self.boundary = boundary or BoundarySpec.periodic()
        self.pool = pool or WorkerPool(workers)
        self.consts = kernel_constants(fields.desc)
        self.time = 0
        self._fresh = False
        closed = not all(self.boundary.periodic_axes[: fields.D])
        if (closed or self.boundary.mask is not None) and not np.any(fields.flags):
            fields.flags[:] = classify_nodes(fields.desc, fields.dims[: fields.D], self.boundary)
        self.rows = fast_rows(fields, self.boundary)

    @property
    def desc(self) -> LatticeDescriptor:
        return self.fields.desc

    def init_equilibrium(self, rho=1.0, u=None) -> None:
        """Set populations to the equilibrium of (rho, u) on fluid nodes."""
        fl = self.fields
        rho = np.broadcast_to(np.asarray(rho, dtype=float), (fl.n_nodes,))
        u = np.zeros((fl.D, fl.n_nodes)) if u is None else np.broadcast_to(np.asarray(u, dtype=float).reshape(fl.D, -1), (fl.D, fl.n_nodes))
        fl.f[:] = equilibrium(rho, u, fl.desc, rho0=self.params.rho0)
        fl.f[:, ~fl.fluid] = 0.0
        self.update_moments()

    def update_moments(self) -> None:
        """Recompute the moment arrays; call after editing populations directly."""
        compute_moments(self.fields, self.params, self.pool)
        self._fresh = True

    def step(self, n: int = 1) -> None:
        """Advance ``n`` steps. Moments are kept current between steps."""
        if not self._fresh:
            self.update_moments()
        for _ in range(n):
            stream_collide_fused(self.fields, self.params, self.boundary, self.pool, self.consts, self.rows)
            compute_moments(self.fields, self.params, self.pool)
            self.time += 1

    def velocity(self) -> np.ndarray:
        """Physical velocity (D, N) of the current state."""
        return self.fields.velocity(self.params.rho0)

    def close(self) -> None:
        self.pool.close()
