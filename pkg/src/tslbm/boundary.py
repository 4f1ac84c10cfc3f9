"""Wall, moving-lid and periodic closures.

Boundaries are applied inside the push: a link whose destination lies beyond
a wall face or on a solid node is reflected into the opposite slot of the
sending node (half-way bounce-back). A moving wall subtracts
2 t_a rho0 (c_a . u_wall) / cs2 from the reflected population. The slot
(x, opp(a)) has no other writer because its regular writer, x + c_a, is
not a fluid node.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path

import numpy as np

from .fields import MOVING_WALL, SOLID, WALL_ADJACENT, normalize_dims
from .lattice import LatticeDescriptor

FACE_NAMES = ("x-", "x+", "y-", "y+", "z-", "z+")
SOLID_WALL = 6


class FaceKind(str, Enum):
    PERIODIC = "periodic"
    WALL = "wall"
    MOVING = "moving"


@dataclass(frozen=True)
class Face:
    kind: FaceKind = FaceKind.PERIODIC
    velocity: tuple = (0.0, 0.0, 0.0)


class BoundaryError(ValueError):
    pass


@dataclass(frozen=True)
class BoundarySpec:
    """Per-face closure plus an optional solid mask (True = solid)."""

    faces: dict = field(default_factory=lambda: {name: Face() for name in FACE_NAMES})
    mask: np.ndarray | None = None

    def __post_init__(self):
        faces = {name: Face() for name in FACE_NAMES}
        faces.update(self.faces)
        object.__setattr__(self, "faces", faces)
        for ax, (lo, hi) in enumerate(zip(FACE_NAMES[::2], FACE_NAMES[1::2])):
            plo = faces[lo].kind is FaceKind.PERIODIC
            phi = faces[hi].kind is FaceKind.PERIODIC
            if plo != phi:
                raise BoundaryError(f"periodic faces must pair: {lo} is {faces[lo].kind.value}, {hi} is {faces[hi].kind.value}")
        cs = np.sqrt(1.0 / 3.0)
        for name, face in faces.items():
            u = np.asarray(face.velocity, dtype=float)
            if face.kind is FaceKind.MOVING and np.linalg.norm(u) >= cs:
                raise BoundaryError(f"wall speed {np.linalg.norm(u):.3f} on {name} is not below cs = {cs:.3f}")

    @classmethod
    def periodic(cls) -> "BoundarySpec":
        return cls()

    @classmethod
    def closed_box(cls, D: int = 2) -> "BoundarySpec":
        faces = {name: Face(FaceKind.WALL) for name in FACE_NAMES[: 2 * D]}
        return cls(faces)

    @classmethod
    def lid_cavity(cls, u_lid: float, D: int = 2) -> "BoundarySpec":
        """Closed box whose top face (y+ in 2D, z+ in 3D) slides along +x."""
        faces = {name: Face(FaceKind.WALL) for name in FACE_NAMES[: 2 * D]}
        top = "y+" if D == 2 else "z+"
        faces[top] = Face(FaceKind.MOVING, (float(u_lid), 0.0, 0.0))
        return cls(faces)

    @classmethod
    def channel(cls, D: int = 2, wall_axis: int = 1) -> "BoundarySpec":
        faces = {FACE_NAMES[2 * wall_axis]: Face(FaceKind.WALL), FACE_NAMES[2 * wall_axis + 1]: Face(FaceKind.WALL)}
        return cls(faces)

    def with_mask(self, mask) -> "BoundarySpec":
        return replace(self, mask=None if mask is None else np.asarray(mask, dtype=bool))

    @property
    def periodic_axes(self) -> tuple[bool, bool, bool]:
        return tuple(self.faces[FACE_NAMES[2 * ax]].kind is FaceKind.PERIODIC for ax in range(3))

    def kernel_args(self):
        """(periodic uint8[3], face_u float64[6,3], face_moving bool[6]) for the kernels."""
        periodic = np.array(self.periodic_axes, dtype=np.uint8)
        face_u = np.zeros((6, 3))
        moving = np.zeros(6, dtype=np.bool_)
        for f, name in enumerate(FACE_NAMES):
            face = self.faces[name]
            if face.kind is FaceKind.MOVING:
                face_u[f] = face.velocity
                moving[f] = True
        return periodic, face_u, moving

    def describe(self) -> str:
        parts = []
        for name in FACE_NAMES:
            face = self.faces[name]
            s = f"{name}={face.kind.value}"
            if face.kind is FaceKind.MOVING:
                s += "(" + ",".join(f"{v:g}" for v in face.velocity) + ")"
            parts.append(s)
        return " ".join(parts)


def apply_periodic(spec: BoundarySpec, axis: int) -> BoundarySpec:
    """Declare both faces normal to ``axis`` periodic: pushes wrap modulo the extent."""
    faces = dict(spec.faces)
    faces[FACE_NAMES[2 * axis]] = Face(FaceKind.PERIODIC)
    faces[FACE_NAMES[2 * axis + 1]] = Face(FaceKind.PERIODIC)
    return replace(spec, faces=faces)


def iter_links(desc: LatticeDescriptor, dims, spec: BoundarySpec, solid=None):
    """Yield ``(a, target, wall)`` per direction; see :func:`link_map`."""
    nx, ny, nz = normalize_dims(dims, desc.D)
    N = nx * ny * nz
    n = np.arange(N)
    k, rem = np.divmod(n, nx * ny)
    j, i = np.divmod(rem, nx)
    coords = (i, j, k)
    extents = (nx, ny, nz)
    periodic, _, moving = spec.kernel_args()
    c3 = desc.c3()
    if solid is None:
        solid = np.zeros(N, dtype=bool)
    for a in range(desc.q):
        moved = []
        w = np.full(N, -1, dtype=np.int64)
        for ax in range(3):
            x = coords[ax] + c3[a, ax]
            lo, hi = x < 0, x >= extents[ax]
            if periodic[ax]:
                x = np.mod(x, extents[ax])
            else:
                for out, code in ((lo, 2 * ax), (hi, 2 * ax + 1)):
                    take = out & ((w < 0) | (moving[code] & ~moving[np.maximum(w, 0)]))
                    w = np.where(take, code, w)
                x = np.clip(x, 0, extents[ax] - 1)
            moved.append(x)
        t = moved[0] + nx * (moved[1] + ny * moved[2])
        w = np.where((w < 0) & solid[t], SOLID_WALL, w)
        yield a, np.where(w < 0, t, -1), w


def link_map(desc: LatticeDescriptor, dims, spec: BoundarySpec, solid=None):
    """Destination of every (direction, node) link, vectorized.

    Returns ``(target, wall)`` of shape (q, N): ``target`` is the linear
    destination index or -1 when the link bounces, ``wall`` is -1 or the
    face code 0..5 (moving faces win at corners) or 6 for a solid node.
    """
    targets, walls = [], []
    for _, t, w in iter_links(desc, dims, spec, solid):
        targets.append(t)
        walls.append(w)
    return np.stack(targets), np.stack(walls)


def classify_nodes(desc: LatticeDescriptor, dims, spec: BoundarySpec) -> np.ndarray:
    """Build the uint8 flag array: SOLID from the mask, WALL_ADJACENT for fluid
    nodes with at least one bounced link, MOVING_WALL for fluid nodes linked
    to a moving face. Isolated fluid nodes (no fluid neighbor) are reported
    with a warning.
    """
    nx, ny, nz = normalize_dims(dims, desc.D)
    N = nx * ny * nz
    flags = np.zeros(N, dtype=np.uint8)
    solid = np.zeros(N, dtype=bool)
    if spec.mask is not None:
        mask = np.asarray(spec.mask, dtype=bool)
        shape = (ny, nx) if desc.D == 2 else (nz, ny, nx)
        if mask.shape != shape:
            raise BoundaryError(f"mask shape {mask.shape} does not match grid {shape} ([z,] y, x)")
        solid = mask.reshape(-1)
    flags[solid] |= SOLID

    _, _, moving = spec.kernel_args()
    moving_codes = np.flatnonzero(moving)
    any_bounce = np.zeros(N, dtype=bool)
    all_bounce = np.ones(N, dtype=bool)
    on_moving = np.zeros(N, dtype=bool)
    for a, _, wall in iter_links(desc, dims, spec, solid):
        if a == 0:
            continue
        any_bounce |= wall >= 0
        all_bounce &= wall >= 0
        on_moving |= np.isin(wall, moving_codes)
    flags[any_bounce & ~solid] |= WALL_ADJACENT
    flags[on_moving & ~solid] |= MOVING_WALL

    isolated = np.flatnonzero(all_bounce & ~solid)
    if isolated.size:
        warnings.warn(f"{isolated.size} isolated fluid node(s) without fluid neighbors, first at linear index {isolated[0]}")
    return flags


def load_mask(path) -> np.ndarray:
    """Read a text geometry mask: one row per line, ``#`` solid, ``.`` fluid.

    The first line is the highest y (top row), so the file reads like a
    picture; the returned array is indexed [j, i] with j = 0 at the bottom.
    Blank lines separate z-slices of a 3D mask, lowest z first.
    """
    text = Path(path).read_text()
    return parse_mask(text)


def parse_mask(text: str) -> np.ndarray:
    slices, rows = [], []
    for line in text.splitlines():
        line = line.rstrip()
        if not line:
            if rows:
                slices.append(rows)
                rows = []
            continue
        bad = set(line) - {"#", "."}
        if bad:
            raise BoundaryError(f"mask row {line!r} contains characters other than '#' and '.'")
        rows.append([ch == "#" for ch in line])
    if rows:
        slices.append(rows)
    if not slices:
        raise BoundaryError("empty geometry mask")
    arrays = []
    for rows in slices:
        widths = {len(r) for r in rows}
        if len(widths) != 1:
            raise BoundaryError(f"mask rows have unequal widths {sorted(widths)}")
        arrays.append(np.array(rows[::-1], dtype=bool))
    if len(arrays) == 1:
        return arrays[0]
    return np.stack(arrays)


def format_mask(mask: np.ndarray) -> str:
    """Inverse of :func:`parse_mask`."""
    mask = np.asarray(mask, dtype=bool)
    slices = [mask] if mask.ndim == 2 else list(mask)
    blocks = ["\n".join("".join("#" if v else "." for v in row) for row in s[::-1]) for s in slices]
    return "\n\n".join(blocks) + "\n"
