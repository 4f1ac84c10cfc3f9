"""Two-buffer (A-B) reference step in plain numpy.

This is the conventional layout: populations are read from one buffer and the
streamed post-collision values are written to another, so no write can race
with a read. It shares no code with the compiled kernels except the link
geometry, and evaluates every per-node expression in the same order, term by
term, so the fused update can be compared against it bit for bit.

Sums over directions are accumulated sequentially (a = 0, 1, ...), never with
``np.sum`` whose pairwise reduction changes the rounding.
"""

from __future__ import annotations

import numpy as np

from .boundary import SOLID_WALL, BoundarySpec, link_map
from .fields import normalize_dims
from .lattice import LatticeDescriptor

CS2 = 1.0 / 3.0


def reference_moments(f, desc: LatticeDescriptor, rho0: float = 1.0):
    """rho, rho*u, Pi^neq of populations (q, N), accumulated in double."""
    f = np.asarray(f)
    c = desc.c3()
    D = desc.D
    zero = np.zeros(f.shape[1])
    r, mx, my, mz = zero, zero, zero, zero
    sxx, syy, szz, sxy, sxz, syz = zero, zero, zero, zero, zero, zero
    for a in range(desc.q):
        fa = f[a].astype(np.float64)
        cx, cy, cz = c[a]
        r = r + fa
        mx = mx + cx * fa
        my = my + cy * fa
        sxx = sxx + cx * cx * fa
        syy = syy + cy * cy * fa
        sxy = sxy + cx * cy * fa
        if D == 3:
            mz = mz + cz * fa
            szz = szz + cz * cz * fa
            sxz = sxz + cx * cz * fa
            syz = syz + cy * cz * fa
    ux = mx / rho0
    uy = my / rho0
    if D == 2:
        mom = np.stack([mx, my])
        pineq = np.stack([
            sxx - CS2 * r - rho0 * ux * ux,
            syy - CS2 * r - rho0 * uy * uy,
            sxy - rho0 * ux * uy,
        ])
    else:
        uz = mz / rho0
        mom = np.stack([mx, my, mz])
        pineq = np.stack([
            sxx - CS2 * r - rho0 * ux * ux,
            syy - CS2 * r - rho0 * uy * uy,
            szz - CS2 * r - rho0 * uz * uz,
            sxy - rho0 * ux * uy,
            sxz - rho0 * ux * uz,
            syz - rho0 * uy * uz,
        ])
    return r, mom, pineq


def reference_step(
    f_src,
    f_dst,
    desc: LatticeDescriptor,
    dims,
    omega: float,
    boundary: BoundarySpec | None = None,
    rho0: float = 1.0,
    force=None,
    solid=None,
    links=None,
) -> None:
    """One regularized collide + stream from ``f_src`` into ``f_dst``.

    ``links`` may hold a precomputed :func:`~tslbm.boundary.link_map` result.
    Moments are rounded to the storage type before the collision, as the
    fused path stores them between its phases.
    """
    boundary = boundary or BoundarySpec.periodic()
    nx, ny, nz = normalize_dims(dims, desc.D)
    N = nx * ny * nz
    dtype = f_src.dtype
    if solid is None:
        solid = np.zeros(N, dtype=bool)
    if links is None:
        links = link_map(desc, dims, boundary, solid)
    target, wall = links
    fluid = ~solid

    r, mom, pineq = reference_moments(f_src, desc, rho0)
    r = r.astype(dtype).astype(np.float64)
    mom = mom.astype(dtype).astype(np.float64)
    pineq = pineq.astype(dtype).astype(np.float64)

    c = desc.c3()
    t = desc.t
    hc = desc.hermite_coefficients()
    hw = desc.t / (2.0 * desc.cs2**2)
    opp = desc.opp
    omc = 1.0 - omega
    _, face_u, _ = boundary.kernel_args()

    ux = mom[0] / rho0
    uy = mom[1] / rho0
    uz = mom[2] / rho0 if desc.D == 3 else None
    if force is not None:
        force = np.asarray(force, dtype=dtype).astype(np.float64)
        ux = ux + force[0] / rho0
        uy = uy + force[1] / rho0
        if desc.D == 3:
            uz = uz + force[2] / rho0
    if desc.D == 3:
        uu = 1.5 * (ux * ux + uy * uy + uz * uz)
    else:
        uu = 1.5 * (ux * ux + uy * uy)

    f_dst[:, solid] = f_src[:, solid]
    for a in range(desc.q):
        cx, cy, cz = c[a]
        if desc.D == 3:
            cu = 3.0 * (cx * ux + cy * uy + cz * uz)
            qp = hc[a, 0] * pineq[0] + hc[a, 1] * pineq[1] + hc[a, 2] * pineq[2] + hc[a, 3] * pineq[3] + hc[a, 4] * pineq[4] + hc[a, 5] * pineq[5]
        else:
            cu = 3.0 * (cx * ux + cy * uy)
            qp = hc[a, 0] * pineq[0] + hc[a, 1] * pineq[1] + hc[a, 2] * pineq[2]
        feq = t[a] * (r + rho0 * (cu + 0.5 * cu * cu - uu))
        fout = feq + omc * (hw[a] * qp)

        w = wall[a]
        push = fluid & (w < 0)
        f_dst[a, target[a, push]] = fout[push]
        hit = fluid & (w == SOLID_WALL)
        f_dst[opp[a], hit] = fout[hit]
        for code in range(6):
            sel = fluid & (w == code)
            if not sel.any():
                continue
            cuw = cx * face_u[code, 0] + cy * face_u[code, 1] + cz * face_u[code, 2]
            f_dst[opp[a], sel] = fout[sel] - 6.0 * t[a] * rho0 * cuw


class ReferenceSolver:
    """A-B buffer driver around :func:`reference_step`."""

    def __init__(self, desc, dims, omega, boundary=None, rho0=1.0, dtype=np.float64, solid=None):
        self.desc = desc
        self.dims = tuple(dims)
        self.omega = omega
        self.boundary = boundary or BoundarySpec.periodic()
        self.rho0 = rho0
        nx, ny, nz = normalize_dims(dims, desc.D)
        n = nx * ny * nz
        self.solid = np.zeros(n, dtype=bool) if solid is None else np.asarray(solid, dtype=bool).reshape(-1)
        self.links = link_map(desc, dims, self.boundary, self.solid)
        self.fA = np.zeros((desc.q, n), dtype=dtype)
        self.fB = np.zeros_like(self.fA)
        self.force = None

    @property
    def f(self) -> np.ndarray:
        return self.fA

    def step(self, n: int = 1) -> None:
        for _ in range(n):
            reference_step(
                self.fA, self.fB, self.desc, self.dims, self.omega, self.boundary,
                self.rho0, self.force, self.solid, self.links,
            )
            self.fA, self.fB = self.fB, self.fA
