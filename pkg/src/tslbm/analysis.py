"""Observables and reference data for the validation cases.

Cavity: centerline profiles, streamfunction and vortex center. Droplet:
interface tracking along a line, period extraction, oscillation theory.
Impact: connected components of the dispersed phase.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from importlib import resources

import numpy as np
from scipy import ndimage
from scipy.integrate import cumulative_trapezoid
from scipy.signal import find_peaks

STEADY_TOLERANCE = 1e-7


# ------------------------------------------------------------------ oscillation theory


@dataclass(frozen=True)
class OscillationTheory:
    """Small-amplitude oscillation of a droplet immersed in another fluid.

    ``variant`` selects the mode-dependent factors: ``"reduced"`` uses
    m(m+1)(m-1)(m+1) in the inviscid frequency and the ratio parameter ``n``
    in the damping term; ``"lamb"`` uses the classical (m-1)m(m+1)(m+2) and
    the mode number m in place of ``n``.
    """

    m: int
    sigma: float
    R_e: float
    mu1: float
    mu2: float
    rho1: float = 1.0
    rho2: float = 1.0
    n: float = 1.0
    variant: str = "reduced"

    def __post_init__(self):
        if self.m < 1:
            raise ValueError(f"mode number must be >= 1, got {self.m}")
        for name in ("sigma", "R_e", "mu1", "mu2", "rho1", "rho2", "n"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.variant not in ("reduced", "lamb"):
            raise ValueError(f"unknown variant {self.variant!r}")

    @property
    def omega_star(self) -> float:
        """Inviscid frequency; zero for m = 1."""
        m = self.m
        if self.variant == "reduced":
            factor = m * (m + 1) * (m - 1) * (m + 1)
            return math.sqrt(factor * self.sigma / (self.R_e**3 * (2 * m + 1)))
        factor = (m - 1) * m * (m + 1) * (m + 2)
        return math.sqrt(factor * self.sigma / (self.R_e**3 * ((m + 1) * self.rho1 + m * self.rho2)))

    @property
    def chi(self) -> float:
        n = self.n if self.variant == "reduced" else self.m
        num = (2 * n + 1) ** 2 * math.sqrt(self.mu1 * self.mu2 * self.rho1 * self.rho2)
        den = 2 * self.R_e * (n * self.rho2 + (n + 1) * self.rho1) * (math.sqrt(self.mu1 * self.rho1) + math.sqrt(self.mu2 * self.rho2))
        return num / den

    @property
    def omega(self) -> float:
        w = self.omega_star
        chi = self.chi
        return w - 0.5 * chi * math.sqrt(w) + 0.25 * chi**2


def miller_scriven_period(theory: OscillationTheory) -> float:
    """T = 2 pi / omega_m with the viscous correction."""
    w = theory.omega
    if theory.omega_star <= 0 or w <= 0:
        raise ValueError(f"no oscillation: omega_m = {w:.4g} (mode {theory.m}, over-damped or translation)")
    return 2 * math.pi / w


def period_variants(sigma: float, R_e: float, nu: float, rho: float = 1.0, m: int = 2, n: float | None = None) -> dict[str, float]:
    """Periods of both readings side by side, equal viscosities and densities.

    ``n`` defaults to the mode number for the reduced reading.
    """
    base = OscillationTheory(m=m, sigma=sigma, R_e=R_e, mu1=nu * rho, mu2=nu * rho, rho1=rho, rho2=rho, n=float(m if n is None else n))
    out = {}
    for variant in ("reduced", "lamb"):
        th = replace(base, variant=variant)
        out[variant] = miller_scriven_period(th)
        out[variant + "_inviscid"] = 2 * math.pi / th.omega_star
    return out


# ------------------------------------------------------------------ cavity


def steady_residual(u_new, u_old, u_ref: float) -> float:
    """max |u_new - u_old| / u_ref."""
    return float(np.max(np.abs(np.asarray(u_new) - np.asarray(u_old))) / u_ref)


def node_coordinates(n: int) -> np.ndarray:
    """Unit-square coordinates of n nodes whose walls sit half a spacing outside."""
    return (np.arange(n) + 0.5) / n


def centerline_profiles(u, v, u_lid: float, steady: bool | None = None):
    """Velocity profiles along the cavity mid-axes, normalized by u_lid.

    ``u`` and ``v`` are grid arrays [j, i]. Returns ``(y, u_mid, x, v_mid)``
    where ``u_mid`` is u on the vertical line x = 0.5 and ``v_mid`` is v on
    the horizontal line y = 0.5; both include the wall values (0, and u_lid
    at the lid) at the ends. A line between two node columns is obtained by
    linear interpolation.
    """
    u = np.asarray(u, dtype=float) / u_lid
    v = np.asarray(v, dtype=float) / u_lid
    if steady is False:
        warnings.warn("profiles taken from a state that has not reached the steady criterion")
    ny, nx = u.shape
    x = node_coordinates(nx)
    y = node_coordinates(ny)
    u_mid = np.array([np.interp(0.5, x, row) for row in u])
    v_mid = np.array([np.interp(0.5, y, col) for col in v.T])
    y_full = np.concatenate([[0.0], y, [1.0]])
    x_full = np.concatenate([[0.0], x, [1.0]])
    u_full = np.concatenate([[0.0], u_mid, [1.0]])
    v_full = np.concatenate([[0.0], v_mid, [0.0]])
    return y_full, u_full, x_full, v_full


def sample_profile(coords, values, at) -> np.ndarray:
    """Linear interpolation of a profile at reference ordinates."""
    return np.interp(np.asarray(at, dtype=float), coords, values)


def streamfunction(u, v, spacing: float = 1.0) -> np.ndarray:
    """psi with u = d psi/dy, v = -d psi/dx, zero on the bottom-left walls.

    Two trapezoidal cumulations (along y from the bottom wall, along x from
    the left wall) are averaged. Walls are half a spacing outside the first
    node and contribute zero velocity.
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    ny, nx = u.shape
    y = np.concatenate([[0.0], (np.arange(ny) + 0.5) * spacing])
    x = np.concatenate([[0.0], (np.arange(nx) + 0.5) * spacing])
    uy = np.vstack([np.zeros((1, nx)), u])
    psi_y = cumulative_trapezoid(uy, y, axis=0)
    vx = np.hstack([np.zeros((ny, 1)), v])
    psi_x = -cumulative_trapezoid(vx, x, axis=1)
    return 0.5 * (psi_y + psi_x)


def _refine(psi, j, i):
    """Stationary point of a quadratic fitted over the 3x3 block around (j, i)."""
    ny, nx = psi.shape
    if not (0 < j < ny - 1 and 0 < i < nx - 1):
        return float(i), float(j)
    dy, dx = np.mgrid[-1:2, -1:2]
    block = psi[j - 1:j + 2, i - 1:i + 2].ravel()
    A = np.stack([np.ones(9), dx.ravel(), dy.ravel(), dx.ravel() ** 2, (dx * dy).ravel(), dy.ravel() ** 2], axis=1)
    a0, bx, by, cxx, cxy, cyy = np.linalg.lstsq(A, block, rcond=None)[0]
    H = np.array([[2 * cxx, cxy], [cxy, 2 * cyy]])
    try:
        sx, sy = np.linalg.solve(H, [-bx, -by])
    except np.linalg.LinAlgError:
        return float(i), float(j)
    if abs(sx) > 1 or abs(sy) > 1:
        return float(i), float(j)
    return i + float(sx), j + float(sy)


def vortex_center(u, v, spacing: float = 1.0, rtol: float = 1e-12) -> list[tuple[float, float]]:
    """Location(s) (x, y), in node index units, of the streamfunction extremum of largest magnitude.

    The grid extremum is refined by a quadratic sub-grid fit. Several nodes
    sharing the extremal value (within ``rtol``) are all reported.
    """
    psi = streamfunction(u, v, spacing)
    mag = np.abs(psi)
    peak = mag.max()
    if peak == 0:
        return []
    js, is_ = np.nonzero(mag >= peak * (1 - rtol))
    return [_refine(psi, int(j), int(i)) for j, i in zip(js, is_)]


def load_reference_table(name: str) -> np.ndarray:
    """Columns of a packaged reference file (``#`` comments), shape (rows, cols)."""
    text = resources.files("tslbm.data").joinpath(name).read_text()
    rows = [line.split() for line in text.splitlines() if line.strip() and not line.lstrip().startswith("#")]
    return np.array(rows, dtype=float)


def ghia_re100():
    """Ghia et al. Re = 100 tables: dict with y, u, x, v arrays and the vortex center."""
    u = load_reference_table("ghia_re100_u.txt")
    v = load_reference_table("ghia_re100_v.txt")
    c = load_reference_table("ghia_re100_vortex.txt")
    return {"y": u[:, 0], "u": u[:, 1], "x": v[:, 0], "v": v[:, 1], "vortex": tuple(c[0])}


# ------------------------------------------------------------------ droplets


def interface_position(line, start: int | None = None) -> float | None:
    """Sub-node position of the first phi = 0 crossing beyond ``start`` along a 1D line.

    ``start`` defaults to the middle of the line and must lie inside the
    droplet (phi > 0). Returns None with a warning when no crossing exists.
    """
    line = np.asarray(line, dtype=float)
    s = len(line) // 2 if start is None else int(start)
    if line[s] <= 0:
        warnings.warn(f"start node {s} is not inside the droplet (phi = {line[s]:.3g})")
        return None
    for k in range(s, len(line) - 1):
        a, b = line[k], line[k + 1]
        if a > 0 >= b:
            return k + a / (a - b)
    warnings.warn("no phi = 0 crossing found along the line")
    return None


@dataclass
class PeriodEstimate:
    period: float
    peaks: np.ndarray
    periods: np.ndarray


def detect_period(signal, dt: float = 1.0, kind: str = "max", prominence: float | None = None) -> PeriodEstimate:
    """Period from two subsequent peaks of a sampled signal.

    Peaks are located with :func:`scipy.signal.find_peaks` and refined by a
    parabola through the peak sample and its neighbors. ``kind="min"``
    uses troughs. ``period`` is the spacing of the first two peaks;
    ``periods`` lists every consecutive spacing.
    """
    x = np.asarray(signal, dtype=float)
    if kind == "min":
        x = -x
    if prominence is None:
        prominence = 0.1 * (np.max(x) - np.min(x))
    idx, _ = find_peaks(x, prominence=prominence)
    if len(idx) < 2:
        raise ValueError(f"need two peaks to measure a period, found {len(idx)}")
    refined = []
    for k in idx:
        a, b, c = x[k - 1], x[k], x[k + 1]
        den = a - 2 * b + c
        shift = 0.5 * (a - c) / den if den != 0 else 0.0
        refined.append((k + shift) * dt)
    refined = np.array(refined)
    gaps = np.diff(refined)
    return PeriodEstimate(period=float(gaps[0]), peaks=refined, periods=gaps)


def equivalent_radius(phi, D: int = 3) -> float:
    """Radius of the circle/sphere with the red volume sum((1 + phi)/2)."""
    vol = float(((1.0 + np.asarray(phi, dtype=float)) / 2).sum())
    if D == 2:
        return math.sqrt(vol / math.pi)
    return (3 * vol / (4 * math.pi)) ** (1.0 / 3.0)


def count_components(phi, threshold: float = 0.0, periodic=False) -> int:
    """Face-connected components of {phi > threshold}.

    ``periodic`` (bool or per-axis sequence in array-axis order) merges
    components that touch across opposite faces.
    """
    mask = np.asarray(phi) > threshold
    labels, count = ndimage.label(mask)
    if count == 0:
        return 0
    if np.isscalar(periodic):
        periodic = [bool(periodic)] * mask.ndim
    parent = list(range(count + 1))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for axis, per in enumerate(periodic):
        if not per:
            continue
        lo = np.take(labels, 0, axis=axis)
        hi = np.take(labels, -1, axis=axis)
        both = (lo > 0) & (hi > 0)
        for a, b in zip(lo[both], hi[both]):
            ra, rb = find(int(a)), find(int(b))
            if ra != rb:
                parent[ra] = rb
    return len({find(k) for k in range(1, count + 1)})
