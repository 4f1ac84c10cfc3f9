"""Structure-of-arrays storage, linear indexing, node flags and memory accounting."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .lattice import LatticeDescriptor, LatticeKind, make_descriptor

# node flag bits (uint8, one byte per node)
FLUID = 0
SOLID = 1
MOVING_WALL = 2
WALL_ADJACENT = 4
NCI_FLAGGED = 8

MIN_EXTENT = 4


class ConfigurationError(ValueError):
    """Invalid grid or allocation request."""


def normalize_dims(dims, D: int) -> tuple[int, int, int]:
    """Return (nx, ny, nz) with nz = 1 in 2D; checks the minimum extent."""
    dims = tuple(int(d) for d in dims)
    if len(dims) != D:
        raise ConfigurationError(f"expected {D} grid extents, got {dims}")
    if any(d < MIN_EXTENT for d in dims):
        raise ConfigurationError(f"every grid extent must be >= {MIN_EXTENT}, got {dims}")
    if D == 2:
        return dims[0], dims[1], 1
    return dims


def index(i: int, j: int, k: int, dims, checked: bool = True) -> int:
    """Linear offset of node (i, j, k), x fastest: i + nx*(j + ny*k)."""
    nx, ny = dims[0], dims[1]
    nz = dims[2] if len(dims) > 2 else 1
    if checked and not (0 <= i < nx and 0 <= j < ny and 0 <= k < nz):
        raise IndexError(f"node ({i}, {j}, {k}) outside grid {tuple(dims)}")
    return i + nx * (j + ny * k)


def unravel(n, dims):
    """Inverse of :func:`index`; works on arrays."""
    nx, ny = dims[0], dims[1]
    n = np.asarray(n)
    k = n // (nx * ny)
    rem = n - k * nx * ny
    j = rem // nx
    i = rem - j * nx
    return i, j, k


def single_component_arrays(desc: LatticeDescriptor) -> int:
    """Floating arrays per node of the fused layout: q + 1 + D + D(D+1)/2."""
    return desc.q + 1 + desc.D + desc.n_pineq


def flipflop_arrays(desc: LatticeDescriptor) -> int:
    """Floating arrays per node of the A-B reference: two populations + rho + u."""
    return 2 * desc.q + 1 + desc.D


def two_fluid_arrays(desc: LatticeDescriptor) -> int:
    """Two populations, two color densities, rho*u, Pi^neq, phi and grad phi."""
    return 2 * desc.q + 2 + desc.D + desc.n_pineq + 1 + desc.D


@dataclass
class MemoryLedger:
    layout: str
    arrays: dict[str, int]
    bytes_per_element: int
    n_nodes: int
    extra_arrays: dict[str, int] = field(default_factory=dict)

    @property
    def arrays_per_node(self) -> int:
        return sum(self.arrays.values())

    @property
    def bytes_per_node(self) -> int:
        return self.arrays_per_node * self.bytes_per_element

    @property
    def total_bytes(self) -> int:
        return self.bytes_per_node * self.n_nodes

    def __str__(self) -> str:
        parts = ", ".join(f"{k}={v}" for k, v in self.arrays.items())
        s = (
            f"{self.layout}: {self.arrays_per_node} arrays/node ({parts}), "
            f"{self.bytes_per_node} B/node, {self.total_bytes / 1e9:.3f} GB total"
        )
        if self.extra_arrays:
            s += f"; outside the count: {self.extra_arrays}"
        return s


class FieldSet:
    """Per-node arrays of the single-component solver, SoA, x-fastest.

    ``f`` has shape (q, N): one contiguous row per direction. ``mom`` holds
    rho*u (D rows) and ``pineq`` the independent components of Pi^neq in
    :attr:`LatticeDescriptor.tensor_pairs` order. ``force`` is optional and
    only allocated when a body force is applied.
    """

    two_fluid = False

    def __init__(self, desc: LatticeDescriptor, dims, dtype=np.float64):
        self.desc = desc
        self.dims = normalize_dims(dims, desc.D)
        self.dtype = np.dtype(dtype)
        if self.dtype not in (np.dtype(np.float32), np.dtype(np.float64)):
            raise ConfigurationError(f"unsupported element type {self.dtype}")
        n = self.n_nodes
        try:
            self._allocate(n)
            self.flags = np.zeros(n, dtype=np.uint8)
        except MemoryError as exc:
            raise ConfigurationError(f"cannot allocate fields for grid {self.dims}: {exc}") from exc
        self.force = None

    def _allocate(self, n):
        d = self.desc
        self.f = np.zeros((d.q, n), dtype=self.dtype)
        self.rho = np.zeros(n, dtype=self.dtype)
        self.mom = np.zeros((d.D, n), dtype=self.dtype)
        self.pineq = np.zeros((d.n_pineq, n), dtype=self.dtype)

    @property
    def D(self) -> int:
        return self.desc.D

    @property
    def n_nodes(self) -> int:
        nx, ny, nz = self.dims
        return nx * ny * nz

    @property
    def grid_shape(self) -> tuple[int, ...]:
        """numpy shape of a node array viewed as a grid: (nz, ny, nx) or (ny, nx)."""
        nx, ny, nz = self.dims
        return (ny, nx) if self.D == 2 else (nz, ny, nx)

    def grid(self, arr: np.ndarray) -> np.ndarray:
        """View a node array (N,) as a grid indexed [k, j, i] (3D) or [j, i] (2D)."""
        return arr.reshape(self.grid_shape)

    def arrays(self) -> dict[str, int]:
        d = self.desc
        return {"f": d.q, "rho": 1, "mom": d.D, "pineq": d.n_pineq}

    @property
    def ledger(self) -> MemoryLedger:
        extra = {"flags(uint8)": 1}
        if self.force is not None:
            extra["force"] = self.D
        return MemoryLedger(
            layout="thread-safe" if not self.two_fluid else "thread-safe two-fluid",
            arrays=self.arrays(),
            bytes_per_element=self.dtype.itemsize,
            n_nodes=self.n_nodes,
            extra_arrays=extra,
        )

    def ensure_force(self) -> np.ndarray:
        if self.force is None:
            self.force = np.zeros((self.D, self.n_nodes), dtype=self.dtype)
        return self.force

    @property
    def fluid(self) -> np.ndarray:
        return (self.flags & SOLID) == 0

    def velocity(self, rho0: float = 1.0) -> np.ndarray:
        """Physical velocity (D, N): (rho*u + F/2)/rho0."""
        u = self.mom.astype(np.float64)
        if self.force is not None:
            u = u + 0.5 * self.force
        return u / rho0

    def total_mass(self) -> float:
        return float(self.f[:, self.fluid].sum(dtype=np.float64))

    def total_momentum(self) -> np.ndarray:
        c = self.desc.c.astype(np.float64)
        f = self.f[:, self.fluid].astype(np.float64)
        return c.T @ f.sum(axis=1)


class TwoFluidFieldSet(FieldSet):
    """Two colored populations plus color densities, phase field and its gradient.

    ``rho`` is not stored: the total density is rhoR + rhoB.
    """

    two_fluid = True

    def _allocate(self, n):
        d = self.desc
        self.fR = np.zeros((d.q, n), dtype=self.dtype)
        self.fB = np.zeros((d.q, n), dtype=self.dtype)
        self.rhoR = np.zeros(n, dtype=self.dtype)
        self.rhoB = np.zeros(n, dtype=self.dtype)
        self.mom = np.zeros((d.D, n), dtype=self.dtype)
        self.pineq = np.zeros((d.n_pineq, n), dtype=self.dtype)
        self.phi = np.zeros(n, dtype=self.dtype)
        self.grad = np.zeros((d.D, n), dtype=self.dtype)
        self.nci = np.zeros(n, dtype=np.uint8)

    def arrays(self) -> dict[str, int]:
        d = self.desc
        return {
            "fR": d.q,
            "fB": d.q,
            "rhoR": 1,
            "rhoB": 1,
            "mom": d.D,
            "pineq": d.n_pineq,
            "phi": 1,
            "grad": d.D,
        }

    @property
    def rho(self) -> np.ndarray:
        return self.rhoR + self.rhoB

    @property
    def f(self) -> np.ndarray:
        return self.fR + self.fB

    @property
    def node_flags(self) -> np.ndarray:
        """Flags with the NciFlagged bit merged in."""
        return self.flags | (self.nci * np.uint8(NCI_FLAGGED))

    def total_mass(self) -> float:
        fl = self.fluid
        return float(self.fR[:, fl].sum(dtype=np.float64) + self.fB[:, fl].sum(dtype=np.float64))

    def color_masses(self) -> tuple[float, float]:
        fl = self.fluid
        return float(self.fR[:, fl].sum(dtype=np.float64)), float(self.fB[:, fl].sum(dtype=np.float64))

    def total_momentum(self) -> np.ndarray:
        c = self.desc.c.astype(np.float64)
        fl = self.fluid
        g = self.fR[:, fl].astype(np.float64) + self.fB[:, fl]
        return c.T @ g.sum(axis=1)


def allocate(config) -> FieldSet:
    """Allocate zeroed fields for a :class:`~tslbm.config.SimulationConfig`.

    Any object with ``lattice``, ``dims``, ``dtype`` and ``two_fluid``
    attributes is accepted.
    """
    desc = make_descriptor(config.lattice)
    cls = TwoFluidFieldSet if getattr(config, "two_fluid", False) else FieldSet
    return cls(desc, config.dims, dtype=getattr(config, "dtype", np.float64))


@dataclass
class MemoryReport:
    lattice: LatticeKind
    n_nodes: int
    bytes_per_element: int
    arrays_per_node: int
    flipflop_arrays_per_node: int

    @property
    def bytes_per_node(self) -> int:
        return self.arrays_per_node * self.bytes_per_element

    @property
    def total_bytes(self) -> int:
        return self.bytes_per_node * self.n_nodes

    @property
    def flipflop_bytes_per_node(self) -> int:
        return self.flipflop_arrays_per_node * self.bytes_per_element

    @property
    def saving_bytes_per_node(self) -> int:
        return self.flipflop_bytes_per_node - self.bytes_per_node

    @property
    def total_saving_bytes(self) -> int:
        return self.saving_bytes_per_node * self.n_nodes

    def __str__(self) -> str:
        return (
            f"{self.lattice.value}: {self.arrays_per_node} arrays/node "
            f"({self.bytes_per_node} B) vs flip-flop {self.flipflop_arrays_per_node} "
            f"({self.flipflop_bytes_per_node} B); saving {self.saving_bytes_per_node} B/node, "
            f"{self.total_saving_bytes / 1e9:.2f} GB over {self.n_nodes:.3g} nodes"
        )


def memory_report(config) -> MemoryReport:
    """Arrays and bytes per node of the single-component fused layout vs flip-flop.

    Computed analytically; nothing is allocated, so grids of 1e9 nodes are fine.
    """
    desc = make_descriptor(config.lattice)
    dims = tuple(int(d) for d in config.dims)
    n = int(np.prod(dims, dtype=np.int64))
    return MemoryReport(
        lattice=desc.kind,
        n_nodes=n,
        bytes_per_element=np.dtype(getattr(config, "dtype", np.float64)).itemsize,
        arrays_per_node=single_component_arrays(desc),
        flipflop_arrays_per_node=flipflop_arrays(desc),
    )
