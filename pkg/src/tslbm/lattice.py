"""Velocity sets, quadrature weights and Hermite tensors for D2Q9 and D3Q19.

Direction ordering (shared by every kernel and test):

* index 0 is the rest vector;
* then axis vectors in +/- pairs: +x, -x, +y, -y[, +z, -z];
* then diagonals in +/- pairs. D2Q9: (1,1), (-1,-1), (1,-1), (-1,1).
  D3Q19: xy-plane (1,1,0), (-1,-1,0), (1,-1,0), (-1,1,0), then the xz-plane
  and yz-plane in the same pattern.

Because opposite directions are adjacent, ``opp[a] == a + 1`` for odd ``a``
and ``a - 1`` for even ``a > 0``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from enum import Enum

import numpy as np

CS2 = Fraction(1, 3)


class LatticeKind(str, Enum):
    D2Q9 = "D2Q9"
    D3Q19 = "D3Q19"

    @classmethod
    def parse(cls, value: "str | LatticeKind") -> "LatticeKind":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().upper())
        except ValueError:
            raise ValueError(f"unknown lattice kind {value!r}; expected D2Q9 or D3Q19") from None


def _pairs(vectors):
    out = []
    for v in vectors:
        out.append(v)
        out.append(tuple(-x for x in v))
    return out


_D2Q9_VEL = [(0, 0)] + _pairs([(1, 0), (0, 1)]) + _pairs([(1, 1), (1, -1)])
_D3Q19_VEL = (
    [(0, 0, 0)]
    + _pairs([(1, 0, 0), (0, 1, 0), (0, 0, 1)])
    + _pairs([(1, 1, 0), (1, -1, 0), (1, 0, 1), (1, 0, -1), (0, 1, 1), (0, 1, -1)])
)

# weight per |c|^2 class: rest, axis, diagonal
_WEIGHTS = {
    LatticeKind.D2Q9: (Fraction(4, 9), Fraction(1, 9), Fraction(1, 36)),
    LatticeKind.D3Q19: (Fraction(1, 3), Fraction(1, 18), Fraction(1, 36)),
}
# color-gradient perturbation weights, same class structure
_B_WEIGHTS = {
    LatticeKind.D2Q9: (Fraction(-4, 27), Fraction(2, 27), Fraction(5, 108)),
    LatticeKind.D3Q19: (Fraction(-1, 3), Fraction(1, 18), Fraction(1, 36)),
}


@dataclass(frozen=True)
class LatticeDescriptor:
    """Immutable description of a DdQq velocity set.

    ``t_exact`` and ``B_exact`` keep the rational values; ``t`` and ``B`` are
    the float64 conversions used by kernels.
    """

    kind: LatticeKind
    c: np.ndarray
    t_exact: tuple
    B_exact: tuple
    t: np.ndarray = field(repr=False)
    B: np.ndarray = field(repr=False)
    opp: np.ndarray = field(repr=False)
    Q: np.ndarray = field(repr=False)
    cs2: float = 1.0 / 3.0

    @property
    def q(self) -> int:
        return self.c.shape[0]

    @property
    def D(self) -> int:
        return self.c.shape[1]

    @property
    def n_pineq(self) -> int:
        """Number of independent components of a symmetric DxD tensor."""
        return self.D * (self.D + 1) // 2

    @property
    def tensor_pairs(self) -> list[tuple[int, int]]:
        """(alpha, beta) index pairs in the storage order of Pi^neq arrays.

        2D: xx, yy, xy. 3D: xx, yy, zz, xy, xz, yz.
        """
        if self.D == 2:
            return [(0, 0), (1, 1), (0, 1)]
        return [(0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (1, 2)]

    @property
    def half_directions(self) -> list[int]:
        """One representative of every +/- pair of moving directions."""
        return list(range(1, self.q, 2))

    def c3(self) -> np.ndarray:
        """Velocities padded to three components (z = 0 in 2D)."""
        out = np.zeros((self.q, 3), dtype=np.int64)
        out[:, : self.D] = self.c
        return out

    def hermite_coefficients(self) -> np.ndarray:
        """Q_a contracted against Pi^neq storage order.

        Row ``a`` holds the multipliers such that
        ``Q_a : Pi = sum_k coef[a, k] * pineq[k]``; off-diagonal entries are
        doubled because each off-diagonal component is stored once.
        """
        pairs = self.tensor_pairs
        out = np.zeros((self.q, len(pairs)))
        for k, (al, be) in enumerate(pairs):
            mult = 1.0 if al == be else 2.0
            out[:, k] = mult * self.Q[:, al, be]
        return out


def make_descriptor(kind: "str | LatticeKind") -> LatticeDescriptor:
    kind = LatticeKind.parse(kind)
    vel = _D2Q9_VEL if kind is LatticeKind.D2Q9 else _D3Q19_VEL
    c = np.array(vel, dtype=np.int64)
    w_rest, w_axis, w_diag = _WEIGHTS[kind]
    b_rest, b_axis, b_diag = _B_WEIGHTS[kind]
    cls_of = [int(np.abs(v).sum()) for v in vel]  # 0 rest, 1 axis, 2 diagonal
    t_exact = tuple((w_rest, w_axis, w_diag)[k] for k in cls_of)
    B_exact = tuple((b_rest, b_axis, b_diag)[k] for k in cls_of)

    q, D = c.shape
    opp = np.empty(q, dtype=np.int64)
    for a in range(q):
        opp[a] = next(b for b in range(q) if np.all(c[b] == -c[a]))

    cs2 = float(CS2)
    Q = np.einsum("ai,aj->aij", c, c).astype(float) - cs2 * np.eye(D)[None]
    return LatticeDescriptor(
        kind=kind,
        c=c,
        t_exact=t_exact,
        B_exact=B_exact,
        t=np.array([float(x) for x in t_exact]),
        B=np.array([float(x) for x in B_exact]),
        opp=opp,
        Q=Q,
        cs2=cs2,
    )


@dataclass
class MomentCheck:
    name: str
    violation: float
    tol: float

    @property
    def passed(self) -> bool:
        return self.violation <= self.tol


@dataclass
class ValidationReport:
    kind: LatticeKind
    checks: list[MomentCheck]

    @property
    def passed(self) -> bool:
        return all(ch.passed for ch in self.checks)

    def __getitem__(self, name: str) -> MomentCheck:
        for ch in self.checks:
            if ch.name == name:
                return ch
        raise KeyError(name)

    def __str__(self) -> str:
        lines = [f"{self.kind.value} moment checks:"]
        for ch in self.checks:
            status = "ok " if ch.passed else "FAIL"
            lines.append(f"  [{status}] {ch.name:<24s} max violation {ch.violation:.3e}")
        return "\n".join(lines)


def validate_moments(desc: LatticeDescriptor, tol: float = 1e-14) -> ValidationReport:
    """Check the discrete moment and isotropy conditions of ``desc``.

    Uses the float arrays ``desc.t``/``desc.B`` so that defects injected into
    them are reported. Failures are listed, never raised.
    """
    c = desc.c.astype(float)
    t = np.asarray(desc.t, dtype=float)
    B = np.asarray(desc.B, dtype=float)
    D = desc.D
    cs2 = desc.cs2
    eye = np.eye(D)
    checks = []

    def add(name, value):
        checks.append(MomentCheck(name, float(np.max(np.abs(value))), tol))

    add("sum t = 1", t.sum() - 1.0)
    add("sum t c = 0", t @ c)
    add("sum t c c = cs2 I", np.einsum("a,ai,aj->ij", t, c, c) - cs2 * eye)
    add("sum t c c c = 0", np.einsum("a,ai,aj,ak->ijk", t, c, c, c))
    iso4 = np.einsum("a,ai,aj,ak,al->ijkl", t, c, c, c, c)
    target = cs2**2 * (
        np.einsum("ij,kl->ijkl", eye, eye)
        + np.einsum("ik,jl->ijkl", eye, eye)
        + np.einsum("il,jk->ijkl", eye, eye)
    )
    add("4th-order isotropy", iso4 - target)
    opp = desc.opp
    add("opp involution", opp[opp] - np.arange(desc.q))
    add("c[opp] = -c", c[opp] + c)
    add("sum B = cs2", B.sum() - cs2)
    add("sum B c = 0", B @ c)
    return ValidationReport(desc.kind, checks)


def with_weights(desc: LatticeDescriptor, t=None, B=None) -> LatticeDescriptor:
    """Copy of ``desc`` with replaced float weights (used to inject defects)."""
    from dataclasses import replace

    return replace(
        desc,
        t=np.array(desc.t if t is None else t, dtype=float),
        B=np.array(desc.B if B is None else B, dtype=float),
    )


def direction_classes(desc: LatticeDescriptor) -> dict[int, list[int]]:
    """Directions grouped by |c|^2."""
    out: dict[int, list[int]] = {}
    for a, v in enumerate(desc.c):
        out.setdefault(int(v @ v), []).append(a)
    return out


__all__ = [
    "CS2",
    "LatticeKind",
    "LatticeDescriptor",
    "make_descriptor",
    "validate_moments",
    "ValidationReport",
    "MomentCheck",
    "with_weights",
    "direction_classes",
]
