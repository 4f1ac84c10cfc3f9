"""Node-range kernels compiled with numba.

Every kernel processes the linear node range [lo, hi) and releases the GIL,
so a pool of threads can split the grid into disjoint ranges. Within one
kernel, a node reads only arrays that no kernel of the same phase writes,
and every written slot has exactly one writer.

Per-node floating evaluation order is part of the contract: the numpy
two-buffer oracle in :mod:`tslbm.reference` repeats the same expressions
term by term so both paths agree bit for bit.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

from .fields import SOLID

CS2 = 1.0 / 3.0
SOLID_WALL = 6  # wall code of a link that ends on a solid node
JIT = dict(nogil=True, cache=True)


@njit(inline="always")
def _pick_wall(prev, new, face_moving):
    if prev < 0:
        return new
    if face_moving[new] and not face_moving[prev]:
        return new
    return prev


@njit(inline="always")
def _link(i, j, k, cx, cy, cz, nx, ny, nz, periodic, face_moving, flags):
    """Destination of the link leaving (i, j, k) along (cx, cy, cz).

    Returns (target, wall): ``wall == -1`` means an ordinary push to
    ``target``; otherwise the link is bounced and ``wall`` is the face code
    (0..5 for x-, x+, y-, y+, z-, z+) or SOLID_WALL.
    """
    wall = -1
    ti = i + cx
    if ti < 0:
        if periodic[0]:
            ti += nx
        else:
            wall = _pick_wall(wall, 0, face_moving)
    elif ti >= nx:
        if periodic[0]:
            ti -= nx
        else:
            wall = _pick_wall(wall, 1, face_moving)
    tj = j + cy
    if tj < 0:
        if periodic[1]:
            tj += ny
        else:
            wall = _pick_wall(wall, 2, face_moving)
    elif tj >= ny:
        if periodic[1]:
            tj -= ny
        else:
            wall = _pick_wall(wall, 3, face_moving)
    tk = k + cz
    if tk < 0:
        if periodic[2]:
            tk += nz
        else:
            wall = _pick_wall(wall, 4, face_moving)
    elif tk >= nz:
        if periodic[2]:
            tk -= nz
        else:
            wall = _pick_wall(wall, 5, face_moving)
    if wall >= 0:
        return -1, wall
    t = ti + nx * (tj + ny * tk)
    if flags[t] & SOLID:
        return -1, SOLID_WALL
    return t, -1


@njit(inline="always")
def _neighbor(i, j, k, dx, dy, dz, nx, ny, nz, periodic, flags):
    """Index of node (i+dx, j+dy, k+dz) or -1 if outside a closed face or solid."""
    ti = i + dx
    if ti < 0 or ti >= nx:
        if not periodic[0]:
            return -1
        ti = ti % nx
    tj = j + dy
    if tj < 0 or tj >= ny:
        if not periodic[1]:
            return -1
        tj = tj % ny
    tk = k + dz
    if tk < 0 or tk >= nz:
        if not periodic[2]:
            return -1
        tk = tk % nz
    t = ti + nx * (tj + ny * tk)
    if flags[t] & SOLID:
        return -1
    return t


# ---------------------------------------------------------------- single component


@njit(**JIT)
def moments(lo, hi, f, rho, mom, pineq, flags, c, rho0, nx):
    """Rows [lo, hi): rho, rho*u and Pi^neq with per-node sums in direction order."""
    q = f.shape[0]
    D = mom.shape[0]
    acc = np.empty((10, nx))
    for row in range(lo, hi):
        base = row * nx
        acc[:] = 0.0
        r = acc[0]
        mx = acc[1]
        my = acc[2]
        mz = acc[3]
        sxx = acc[4]
        syy = acc[5]
        szz = acc[6]
        sxy = acc[7]
        sxz = acc[8]
        syz = acc[9]
        for a in range(q):
            cx = c[a, 0]
            cy = c[a, 1]
            cz = c[a, 2]
            fa = f[a, base:base + nx]
            if D == 2:
                for i in range(nx):
                    v = np.float64(fa[i])
                    r[i] = r[i] + v
                    mx[i] = mx[i] + cx * v
                    my[i] = my[i] + cy * v
                    sxx[i] = sxx[i] + cx * cx * v
                    syy[i] = syy[i] + cy * cy * v
                    sxy[i] = sxy[i] + cx * cy * v
            else:
                for i in range(nx):
                    v = np.float64(fa[i])
                    r[i] = r[i] + v
                    mx[i] = mx[i] + cx * v
                    my[i] = my[i] + cy * v
                    sxx[i] = sxx[i] + cx * cx * v
                    syy[i] = syy[i] + cy * cy * v
                    sxy[i] = sxy[i] + cx * cy * v
                    mz[i] = mz[i] + cz * v
                    szz[i] = szz[i] + cz * cz * v
                    sxz[i] = sxz[i] + cx * cz * v
                    syz[i] = syz[i] + cy * cz * v
        for i in range(nx):
            n = base + i
            if flags[n] & SOLID:
                continue
            ux = mx[i] / rho0
            uy = my[i] / rho0
            rho[n] = r[i]
            mom[0, n] = mx[i]
            mom[1, n] = my[i]
            pineq[0, n] = sxx[i] - CS2 * r[i] - rho0 * ux * ux
            pineq[1, n] = syy[i] - CS2 * r[i] - rho0 * uy * uy
            if D == 2:
                pineq[2, n] = sxy[i] - rho0 * ux * uy
            else:
                uz = mz[i] / rho0
                mom[2, n] = mz[i]
                pineq[2, n] = szz[i] - CS2 * r[i] - rho0 * uz * uz
                pineq[3, n] = sxy[i] - rho0 * ux * uy
                pineq[4, n] = sxz[i] - rho0 * ux * uz
                pineq[5, n] = syz[i] - rho0 * uy * uz


@njit(**JIT)
def stream_collide(
    lo, hi, f, rho, mom, pineq, force, flags, row_fast, c, t, hc, hw, opp,
    omc, rho0, nx, ny, nz, periodic, face_u, face_moving,
):
    """Rows [lo, hi): fused regularized collision + push streaming (+ bounce-back).

    ``force`` is an empty (D, 0) array when no body force acts. ``hw[a]`` is
    t_a / (2 cs^4) and ``hc`` the Hermite coefficients of
    :meth:`LatticeDescriptor.hermite_coefficients`. Rows marked in
    ``row_fast`` have no solid node nearby and are pushed row-wise.
    """
    q = c.shape[0]
    D = mom.shape[0]
    has_force = force.shape[1] > 0
    r = np.empty(nx)
    ux = np.empty(nx)
    uy = np.empty(nx)
    uz = np.zeros(nx)
    uu = np.empty(nx)
    p = np.zeros((6, nx))
    fo = np.empty(nx)
    for row in range(lo, hi):
        k = row // ny
        j = row - k * ny
        base = row * nx
        for i in range(nx):
            n = base + i
            r[i] = rho[n]
            x = mom[0, n] / rho0
            y = mom[1, n] / rho0
            z = 0.0
            for m in range(pineq.shape[0]):
                p[m, i] = pineq[m, n]
            if D == 3:
                z = mom[2, n] / rho0
            if has_force:
                x = x + force[0, n] / rho0
                y = y + force[1, n] / rho0
                if D == 3:
                    z = z + force[2, n] / rho0
            ux[i] = x
            uy[i] = y
            if D == 3:
                uz[i] = z
                uu[i] = 1.5 * (x * x + y * y + z * z)
            else:
                uu[i] = 1.5 * (x * x + y * y)
        fast = row_fast[row] != 0
        for a in range(q):
            cx = c[a, 0]
            cy = c[a, 1]
            cz = c[a, 2]
            ta = t[a]
            hwa = hw[a]
            h0 = hc[a, 0]
            h1 = hc[a, 1]
            h2 = hc[a, 2]
            if D == 3:
                h3 = hc[a, 3]
                h4 = hc[a, 4]
                h5 = hc[a, 5]
                for i in range(nx):
                    cu = 3.0 * (cx * ux[i] + cy * uy[i] + cz * uz[i])
                    qp = h0 * p[0, i] + h1 * p[1, i] + h2 * p[2, i] + h3 * p[3, i] + h4 * p[4, i] + h5 * p[5, i]
                    feq = ta * (r[i] + rho0 * (cu + 0.5 * cu * cu - uu[i]))
                    fo[i] = feq + omc * (hwa * qp)
            else:
                for i in range(nx):
                    cu = 3.0 * (cx * ux[i] + cy * uy[i])
                    qp = h0 * p[0, i] + h1 * p[1, i] + h2 * p[2, i]
                    feq = ta * (r[i] + rho0 * (cu + 0.5 * cu * cu - uu[i]))
                    fo[i] = feq + omc * (hwa * qp)
            if fast:
                _push_row(f, fo, a, j, k, base, cx, cy, cz, ta, rho0, opp, nx, ny, nz, periodic, face_u, face_moving, flags)
            else:
                for i in range(nx):
                    n = base + i
                    if flags[n] & SOLID:
                        continue
                    _push_node(f, fo[i], a, i, j, k, n, cx, cy, cz, ta, rho0, opp, nx, ny, nz, periodic, face_u, face_moving, flags)


@njit(inline="always")
def _row_target(j, k, cy, cz, ny, nz, periodic, face_moving):
    """Target (j, k) of a row shifted by (cy, cz), or the face code it bounces on."""
    wall = -1
    tj = j + cy
    if tj < 0:
        if periodic[1]:
            tj += ny
        else:
            wall = _pick_wall(wall, 2, face_moving)
    elif tj >= ny:
        if periodic[1]:
            tj -= ny
        else:
            wall = _pick_wall(wall, 3, face_moving)
    tk = k + cz
    if tk < 0:
        if periodic[2]:
            tk += nz
        else:
            wall = _pick_wall(wall, 4, face_moving)
    elif tk >= nz:
        if periodic[2]:
            tk -= nz
        else:
            wall = _pick_wall(wall, 5, face_moving)
    return tj, tk, wall


@njit(inline="always")
def _push_row(f, fo, a, j, k, base, cx, cy, cz, ta, rho0, opp, nx, ny, nz, periodic, face_u, face_moving, flags):
    """Push a whole row along direction a; the row and its neighbors hold no solid node.

    Nodes 1..nx-2 (all nodes when cx = 0) share the fate of the row: a
    shifted copy into the target row or a bounce on the same face. The two
    end nodes go through the general per-link path so corners resolve
    exactly as there.
    """
    i0 = 0 if cx == 0 else 1
    i1 = nx if cx == 0 else nx - 1
    tj, tk, wall = _row_target(j, k, cy, cz, ny, nz, periodic, face_moving)
    if wall < 0:
        start = (tk * ny + tj) * nx + cx
        dst = f[a, start + i0:start + i1]
        for i in range(i0, i1):
            dst[i - i0] = fo[i]
    else:
        corr = 6.0 * ta * rho0 * (cx * face_u[wall, 0] + cy * face_u[wall, 1] + cz * face_u[wall, 2])
        dst = f[opp[a], base + i0:base + i1]
        for i in range(i0, i1):
            dst[i - i0] = fo[i] - corr
    if cx != 0:
        _push_node(f, fo[0], a, 0, j, k, base, cx, cy, cz, ta, rho0, opp, nx, ny, nz, periodic, face_u, face_moving, flags)
        _push_node(f, fo[nx - 1], a, nx - 1, j, k, base + nx - 1, cx, cy, cz, ta, rho0, opp, nx, ny, nz, periodic, face_u, face_moving, flags)


@njit(inline="always")
def _push_node(f, fout, a, i, j, k, n, cx, cy, cz, ta, rho0, opp, nx, ny, nz, periodic, face_u, face_moving, flags):
    tn, wall = _link(i, j, k, cx, cy, cz, nx, ny, nz, periodic, face_moving, flags)
    if wall < 0:
        f[a, tn] = fout
    elif wall == SOLID_WALL:
        f[opp[a], n] = fout
    else:
        cuw = cx * face_u[wall, 0] + cy * face_u[wall, 1] + cz * face_u[wall, 2]
        f[opp[a], n] = fout - 6.0 * ta * rho0 * cuw


@njit(**JIT)
def count_writers(lo, hi, counts, flags, c, opp, nx, ny, nz, periodic, face_moving):
    """Debug pass: increment ``counts[a, slot]`` for every write the push would do."""
    q = c.shape[0]
    nxy = nx * ny
    for n in range(lo, hi):
        if flags[n] & SOLID:
            continue
        k = n // nxy
        rem = n - k * nxy
        j = rem // nx
        i = rem - j * nx
        for a in range(q):
            tn, wall = _link(i, j, k, c[a, 0], c[a, 1], c[a, 2], nx, ny, nz, periodic, face_moving, flags)
            if wall < 0:
                counts[a, tn] += 1
            else:
                counts[opp[a], n] += 1


# ---------------------------------------------------------------- two fluids


@njit(**JIT)
def moments_two_fluid(lo, hi, fR, fB, rhoR, rhoB, mom, pineq, phi, flags, c, rho0, nx):
    """Rows [lo, hi): color densities, phase field, rho*u and Pi^neq of g = fR + fB."""
    q = fR.shape[0]
    D = mom.shape[0]
    acc = np.empty((11, nx))
    for row in range(lo, hi):
        base = row * nx
        acc[:] = 0.0
        rr = acc[0]
        rb = acc[1]
        mx = acc[2]
        my = acc[3]
        mz = acc[4]
        sxx = acc[5]
        syy = acc[6]
        szz = acc[7]
        sxy = acc[8]
        sxz = acc[9]
        syz = acc[10]
        for a in range(q):
            cx = c[a, 0]
            cy = c[a, 1]
            cz = c[a, 2]
            ra = fR[a, base:base + nx]
            ba = fB[a, base:base + nx]
            for i in range(nx):
                vr = np.float64(ra[i])
                vb = np.float64(ba[i])
                g = vr + vb
                rr[i] = rr[i] + vr
                rb[i] = rb[i] + vb
                mx[i] = mx[i] + cx * g
                my[i] = my[i] + cy * g
                sxx[i] = sxx[i] + cx * cx * g
                syy[i] = syy[i] + cy * cy * g
                sxy[i] = sxy[i] + cx * cy * g
            if D == 3:
                for i in range(nx):
                    g = np.float64(ra[i]) + np.float64(ba[i])
                    mz[i] = mz[i] + cz * g
                    szz[i] = szz[i] + cz * cz * g
                    sxz[i] = sxz[i] + cx * cz * g
                    syz[i] = syz[i] + cy * cz * g
        for i in range(nx):
            n = base + i
            if flags[n] & SOLID:
                continue
            r = rr[i] + rb[i]
            rhoR[n] = rr[i]
            rhoB[n] = rb[i]
            if r > 0.0:
                ph = (rr[i] - rb[i]) / r
                if ph > 1.0:
                    ph = 1.0
                elif ph < -1.0:
                    ph = -1.0
            else:
                ph = 0.0
            phi[n] = ph
            ux = mx[i] / rho0
            uy = my[i] / rho0
            mom[0, n] = mx[i]
            mom[1, n] = my[i]
            pineq[0, n] = sxx[i] - CS2 * r - rho0 * ux * ux
            pineq[1, n] = syy[i] - CS2 * r - rho0 * uy * uy
            if D == 2:
                pineq[2, n] = sxy[i] - rho0 * ux * uy
            else:
                uz = mz[i] / rho0
                mom[2, n] = mz[i]
                pineq[2, n] = szz[i] - CS2 * r - rho0 * uz * uz
                pineq[3, n] = sxy[i] - rho0 * ux * uy
                pineq[4, n] = sxz[i] - rho0 * ux * uz
                pineq[5, n] = syz[i] - rho0 * uy * uz


@njit(**JIT)
def gradient(lo, hi, phi, grad, flags, row_fast, c, t, nx, ny, nz, periodic):
    """Rows [lo, hi): grad phi = (1/cs2) sum_a t_a c_a phi(x + c_a).

    Neighbors beyond a closed face or on a solid node take the value at x.
    """
    q = c.shape[0]
    D = grad.shape[0]
    no_moving = np.zeros(6, dtype=np.bool_)
    gx = np.empty(nx)
    gy = np.empty(nx)
    gz = np.empty(nx)
    v = np.empty(nx)
    for row in range(lo, hi):
        k = row // ny
        j = row - k * ny
        base = row * nx
        gx[:] = 0.0
        gy[:] = 0.0
        gz[:] = 0.0
        fast = row_fast[row] != 0
        for a in range(1, q):
            cx = c[a, 0]
            cy = c[a, 1]
            cz = c[a, 2]
            if fast:
                tj, tk, wall = _row_target(j, k, cy, cz, ny, nz, periodic, no_moving)
                if wall >= 0:
                    for i in range(nx):
                        v[i] = phi[base + i]
                else:
                    tb = (tk * ny + tj) * nx
                    for i in range(1, nx - 1):
                        v[i] = phi[tb + i + cx]
                    for i in (0, nx - 1):
                        m = _neighbor(i, j, k, cx, cy, cz, nx, ny, nz, periodic, flags)
                        v[i] = phi[base + i] if m < 0 else phi[m]
            else:
                for i in range(nx):
                    m = _neighbor(i, j, k, cx, cy, cz, nx, ny, nz, periodic, flags)
                    v[i] = phi[base + i] if m < 0 else phi[m]
            ta = t[a]
            for i in range(nx):
                w = ta * v[i]
                gx[i] = gx[i] + cx * w
                gy[i] = gy[i] + cy * w
                gz[i] = gz[i] + cz * w
        for i in range(nx):
            n = base + i
            if flags[n] & SOLID:
                continue
            grad[0, n] = 3.0 * gx[i]
            grad[1, n] = 3.0 * gy[i]
            if D == 3:
                grad[2, n] = 3.0 * gz[i]


@njit(**JIT)
def nci_scan(lo, hi, phi, nci, flags, near, c, half, reach, threshold, nx, ny, nz, periodic):
    """Flag interface points facing each other across a bulk node.

    Sitting on a bulk node (phi < threshold), sample phi at equal distances
    s = 1..reach along each pair of opposite directions; where both samples
    exceed the threshold both points are flagged. A closed face or solid
    node ends the walk along that pair. Writes are idempotent stores of 1,
    so overlapping flags from different nodes never conflict. ``near`` is a
    conservative prefilter: nodes farther than ``reach`` from any non-bulk
    node cannot flag anything and are skipped.
    """
    nxy = nx * ny
    for n in range(lo, hi):
        if near[n] == 0 or flags[n] & SOLID or phi[n] >= threshold:
            continue
        k = n // nxy
        rem = n - k * nxy
        j = rem // nx
        i = rem - j * nx
        for h in range(half.shape[0]):
            a = half[h]
            cx = c[a, 0]
            cy = c[a, 1]
            cz = c[a, 2]
            for s in range(1, reach + 1):
                mp = _neighbor(i, j, k, s * cx, s * cy, s * cz, nx, ny, nz, periodic, flags)
                if mp < 0:
                    break
                mm = _neighbor(i, j, k, -s * cx, -s * cy, -s * cz, nx, ny, nz, periodic, flags)
                if mm < 0:
                    break
                if phi[mp] > threshold and phi[mm] > threshold:
                    nci[mp] = 1
                    nci[mm] = 1


@njit(**JIT)
def nci_force(lo, hi, nci, rho_disp, grad, force, strength):
    """F = A * rho_dispersed * grad(phi)/|grad(phi)| on flagged nodes, 0 elsewhere."""
    D = grad.shape[0]
    for n in range(lo, hi):
        for d in range(D):
            force[d, n] = 0.0
        if nci[n] == 0:
            continue
        g2 = 0.0
        for d in range(D):
            g2 += grad[d, n] * grad[d, n]
        if g2 <= 1e-24:
            continue
        scale = strength * rho_disp[n] / math.sqrt(g2)
        for d in range(D):
            force[d, n] = scale * grad[d, n]


@njit(**JIT)
def stream_collide_two_fluid(
    lo, hi, fR, fB, rhoR, rhoB, mom, pineq, phi, grad, force, flags, row_fast,
    c, cnorm, t, B, hc, hw, opp, omega, rho0, sigma, beta, squared,
    grad_min, phi_max, nx, ny, nz, periodic, face_u, face_moving,
):
    """Rows [lo, hi): regularized collision + perturbation on g = fR + fB,
    recoloring, and push of both colors."""
    q = c.shape[0]
    D = mom.shape[0]
    omc = 1.0 - omega
    has_force = force.shape[1] > 0
    r = np.empty(nx)
    ux = np.empty(nx)
    uy = np.empty(nx)
    uz = np.zeros(nx)
    uu = np.empty(nx)
    p = np.zeros((6, nx))
    gx = np.empty(nx)
    gy = np.empty(nx)
    gz = np.zeros(nx)
    g2 = np.empty(nx)
    gn = np.empty(nx)
    iface = np.zeros(nx, dtype=np.bool_)
    share = np.empty(nx)
    kb = np.empty(nx)
    go = np.empty(nx)
    fr = np.empty(nx)
    fb = np.empty(nx)
    for row in range(lo, hi):
        k = row // ny
        j = row - k * ny
        base = row * nx
        any_iface = False
        for i in range(nx):
            n = base + i
            rr = np.float64(rhoR[n])
            rb = np.float64(rhoB[n])
            rt = rr + rb
            r[i] = rt
            x = mom[0, n] / rho0
            y = mom[1, n] / rho0
            z = 0.0
            for m in range(pineq.shape[0]):
                p[m, i] = pineq[m, n]
            gx[i] = grad[0, n]
            gy[i] = grad[1, n]
            if D == 3:
                z = mom[2, n] / rho0
                gz[i] = grad[2, n]
            if has_force:
                x = x + force[0, n] / rho0
                y = y + force[1, n] / rho0
                if D == 3:
                    z = z + force[2, n] / rho0
            ux[i] = x
            uy[i] = y
            uz[i] = z
            uu[i] = 1.5 * (x * x + y * y + z * z)
            gg = gx[i] * gx[i] + gy[i] * gy[i] + gz[i] * gz[i]
            g2[i] = gg
            gn[i] = math.sqrt(gg)
            iface[i] = gn[i] > grad_min and abs(phi[n]) < phi_max and not (flags[n] & SOLID)
            any_iface = any_iface or iface[i]
            if rt > 0.0:
                share[i] = rr / rt
                kb[i] = beta * rr * rb / rt
            else:
                share[i] = 0.5
                kb[i] = 0.0
        fast = row_fast[row] != 0
        for a in range(q):
            cx = c[a, 0]
            cy = c[a, 1]
            cz = c[a, 2]
            ta = t[a]
            hwa = hw[a]
            h0 = hc[a, 0]
            h1 = hc[a, 1]
            h2 = hc[a, 2]
            h3 = hc[a, 3]
            h4 = hc[a, 4]
            h5 = hc[a, 5]
            for i in range(nx):
                cu = 3.0 * (cx * ux[i] + cy * uy[i] + cz * uz[i])
                qp = h0 * p[0, i] + h1 * p[1, i] + h2 * p[2, i] + h3 * p[3, i] + h4 * p[4, i] + h5 * p[5, i]
                feq = ta * (r[i] + rho0 * (cu + 0.5 * cu * cu - uu[i]))
                go[i] = feq + omc * (hwa * qp)
                fr[i] = share[i] * go[i]
            if any_iface:
                Ba = B[a]
                ca = cnorm[a]
                for i in range(nx):
                    if not iface[i]:
                        continue
                    cg = cx * gx[i] + cy * gy[i] + cz * gz[i]
                    kp = 2.25 * sigma * omega * gn[i]
                    if squared:
                        go[i] = go[i] + kp * (ta * cg * cg / g2[i] - Ba)
                    else:
                        go[i] = go[i] + kp * (ta * cg / g2[i] - Ba)
                    cos_t = cg / (ca * gn[i]) if ca > 0.0 else 0.0
                    fr[i] = share[i] * go[i] + kb[i] * ta * cos_t
            for i in range(nx):
                fb[i] = go[i] - fr[i]
            if fast:
                _push_row2(fR, fB, fr, fb, share, a, j, k, base, cx, cy, cz, ta, rho0, opp, nx, ny, nz, periodic, face_u, face_moving, flags)
            else:
                for i in range(nx):
                    n = base + i
                    if flags[n] & SOLID:
                        continue
                    _push_node2(fR, fB, fr[i], fb[i], share[i], a, i, j, k, n, cx, cy, cz, ta, rho0, opp, nx, ny, nz, periodic, face_u, face_moving, flags)


@njit(inline="always")
def _push_node2(fR, fB, fr, fb, sh, a, i, j, k, n, cx, cy, cz, ta, rho0, opp, nx, ny, nz, periodic, face_u, face_moving, flags):
    tn, wall = _link(i, j, k, cx, cy, cz, nx, ny, nz, periodic, face_moving, flags)
    if wall < 0:
        fR[a, tn] = fr
        fB[a, tn] = fb
    elif wall == SOLID_WALL:
        fR[opp[a], n] = fr
        fB[opp[a], n] = fb
    else:
        corr = 6.0 * ta * rho0 * (cx * face_u[wall, 0] + cy * face_u[wall, 1] + cz * face_u[wall, 2])
        fR[opp[a], n] = fr - sh * corr
        fB[opp[a], n] = fb - (corr - sh * corr)


@njit(inline="always")
def _push_row2(fR, fB, fr, fb, share, a, j, k, base, cx, cy, cz, ta, rho0, opp, nx, ny, nz, periodic, face_u, face_moving, flags):
    """Two-color version of :func:`_push_row`; a moving wall's correction is split by color share."""
    i0 = 0 if cx == 0 else 1
    i1 = nx if cx == 0 else nx - 1
    tj, tk, wall = _row_target(j, k, cy, cz, ny, nz, periodic, face_moving)
    if wall < 0:
        start = (tk * ny + tj) * nx + cx
        dr = fR[a, start + i0:start + i1]
        db = fB[a, start + i0:start + i1]
        for i in range(i0, i1):
            dr[i - i0] = fr[i]
            db[i - i0] = fb[i]
    else:
        corr = 6.0 * ta * rho0 * (cx * face_u[wall, 0] + cy * face_u[wall, 1] + cz * face_u[wall, 2])
        dr = fR[opp[a], base + i0:base + i1]
        db = fB[opp[a], base + i0:base + i1]
        for i in range(i0, i1):
            dr[i - i0] = fr[i] - share[i] * corr
            db[i - i0] = fb[i] - (corr - share[i] * corr)
    if cx != 0:
        for i in (0, nx - 1):
            _push_node2(fR, fB, fr[i], fb[i], share[i], a, i, j, k, base + i, cx, cy, cz, ta, rho0, opp, nx, ny, nz, periodic, face_u, face_moving, flags)
