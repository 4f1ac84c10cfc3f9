import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tslbm.boundary import BoundarySpec, link_map
from tslbm.fields import TwoFluidFieldSet
from tslbm.lattice import make_descriptor
from tslbm.multicomponent import (
    ColorParams, TwoFluidSimulation, cos_angles, droplet_phase, interface_mask, isotropic_gradient, nci_force,
    nci_scan, perturbation, perturbation_term, phase_field, recolor,
)
from tslbm.solver import CollisionParams, equilibrium, hermite_projection

D2 = make_descriptor("D2Q9")
D3 = make_descriptor("D3Q19")


def test_phase_field_examples():
    assert phase_field(1.0, 0.0) == 1.0
    assert phase_field(0.4, 0.4) == 0.0
    assert phase_field(0.75, 0.25) == 0.5
    with pytest.warns(UserWarning):
        assert phase_field(np.array([0.0]), np.array([0.0]))[0] == 0.0


@pytest.mark.parametrize("desc", [D2, D3], ids=["D2Q9", "D3Q19"])
def test_gradient_uniform_and_linear(desc):
    shape = (10,) * desc.D
    assert np.abs(isotropic_gradient(np.full(shape, 0.3), desc)).max() == 0
    x = np.broadcast_to(np.arange(10, dtype=float), shape)
    g = isotropic_gradient(x, desc)
    inner = (slice(1, -1),) * desc.D
    assert np.allclose(g[0][inner], 1.0, atol=1e-13)
    for d in range(1, desc.D):
        assert np.abs(g[d][inner]).max() <= 1e-13


def test_gradient_radial_on_axis():
    n = 33
    phi = droplet_phase((n, n), [(16, 16)], [8.0], periodic=False)
    g = isotropic_gradient(phi, D2)
    assert np.abs(g[1][16, :]).max() <= 1e-12  # along the x axis through the center
    assert np.abs(g[0][:, 16]).max() <= 1e-12
    assert g[0][16, 20] < 0 and g[0][16, 12] > 0  # points to the red center


@given(st.integers(0, 2**31), st.sampled_from(["D2Q9", "D3Q19"]))
def test_perturbation_conserves_mass_and_momentum(seed, kind):
    desc = make_descriptor(kind)
    rng = np.random.default_rng(seed)
    grad = rng.standard_normal((desc.D, 20))
    term = perturbation_term(grad, ColorParams(0.03), desc, 1.4)
    assert np.abs(term.sum(axis=0)).max() <= 1e-14
    assert np.abs(desc.c.T @ term).max() <= 1e-14


def test_linear_form_mass_deficit():
    # sum_a t_a c_a.g vanishes, so the linear shape leaves -kp * sum B = -kp cs2 per node
    rng = np.random.default_rng(5)
    grad = rng.standard_normal((2, 8))
    term = perturbation_term(grad, ColorParams(0.03, perturbation_form="linear"), D2, 1.4)
    kp = 2.25 * 0.03 * 1.4 * np.sqrt((grad**2).sum(axis=0))
    assert np.allclose(term.sum(axis=0), -kp / 3, atol=1e-15)


def test_perturbation_guard():
    g = np.random.default_rng(0).random((9, 5))
    out = perturbation(g, np.zeros((2, 5)), ColorParams(0.05), D2, 1.0)
    assert np.array_equal(out, g)


@given(st.integers(0, 2**31), st.floats(0.0, 1.0))
def test_recolor_identities(seed, beta):
    rng = np.random.default_rng(seed)
    g = rng.random((19, 12))
    rR, rB = rng.random(12), rng.random(12)
    grad = rng.standard_normal((3, 12))
    params = ColorParams(0.01, beta=max(beta, 1e-9))
    fR, fB = recolor(g, rR, rB, grad, params, D3)
    assert np.array_equal(fR + fB, g) or np.allclose(fR + fB, g, rtol=0, atol=1e-15)
    share = rR / (rR + rB)
    assert np.allclose(fR.sum(axis=0), share * g.sum(axis=0), atol=1e-14)  # sharpening moves no color mass
    assert np.abs((D3.t[:, None] * cos_angles(grad, D3)).sum(axis=0)).max() <= 1e-15


def test_recolor_proportional_at_zero_sharpening():
    rng = np.random.default_rng(1)
    g = rng.random((9, 4))
    rR, rB = rng.random(4), rng.random(4)
    fR, _ = recolor(g, rR, rB, np.zeros((2, 4)), ColorParams(0.01), D2)
    assert np.allclose(fR, rR / (rR + rB) * g)


def pair_phase(gap, width=0.5, R=10, n=64):
    return droplet_phase((n, n), [(32 - R - gap / 2, 32), (32 + R + gap / 2, 32)], [R, R], width=width)


PARAMS = ColorParams(0.01, nci_strength=0.01)


def test_nci_uniform_and_single_droplet():
    assert not nci_scan(-np.ones((16, 16)), PARAMS, D2).any()
    phi = droplet_phase((64, 64), [(32, 32)], [12.0])
    assert not nci_scan(phi, PARAMS, D2).any()


def test_nci_flags_facing_film():
    phi = pair_phase(4)
    flags = nci_scan(phi, PARAMS, D2)
    assert flags.any()
    ys, xs = np.nonzero(flags)
    assert xs.min() >= 32 - 2 - 4 and xs.max() <= 32 + 2 + 4  # within reach of the film
    assert np.array_equal(flags, np.roll(flags[:, ::-1], 1, axis=1))  # mirror about x = 32


def test_nci_force_sign_and_monotone():
    phi = pair_phase(4)
    flags = nci_scan(phi, PARAMS, D2)
    F = nci_force(flags, (1 + phi) / 2, isotropic_gradient(phi, D2), PARAMS)
    assert F[0][:, :32].sum() < 0 < F[0][:, 33:].sum()
    assert np.abs(nci_force(np.zeros_like(flags), (1 + phi) / 2, isotropic_gradient(phi, D2), PARAMS)).max() == 0
    total = []
    for gap in range(2, 9):
        p = pair_phase(gap)
        fl = nci_scan(p, PARAMS, D2)
        total.append(np.abs(nci_force(fl, (1 + p) / 2, isotropic_gradient(p, D2), PARAMS)).sum())
    assert all(a >= b for a, b in zip(total, total[1:]))
    assert total[0] > total[-1]


def numpy_two_fluid_step(fR, fB, desc, dims, omega, color, target):
    """Same physics from the array operators (periodic box, no force)."""
    g = fR + fB
    rR, rB = fR.sum(axis=0), fB.sum(axis=0)
    rho = rR + rB
    c = desc.c.astype(float)
    mom = c.T @ g
    u = mom
    pi = np.einsum("ai,aj,an->ijn", c, c, g) - (rho / 3) * np.eye(desc.D)[..., None] - np.einsum("in,jn->ijn", mom, mom)
    fneq_proj = (desc.t / (2 / 9))[:, None] * np.einsum("aij,ijn->an", desc.Q, pi)
    go = equilibrium(rho, u, desc) + (1 - omega) * fneq_proj
    phi = (rR - rB) / rho
    grid = tuple(dims)[::-1]
    grad = isotropic_gradient(phi.reshape(grid), desc).reshape(desc.D, -1)
    mask = interface_mask(grad, phi, color)
    go = perturbation(go, grad, color, desc, omega, phi)
    nR, nB = recolor(go, rR, rB, grad, color, desc, mask)
    oR, oB = np.empty_like(fR), np.empty_like(fB)
    for a in range(desc.q):
        oR[a, target[a]] = nR[a]
        oB[a, target[a]] = nB[a]
    return oR, oB


@pytest.mark.parametrize("desc,dims", [(D2, (24, 20)), (D3, (12, 10, 11))], ids=["D2Q9", "D3Q19"])
@pytest.mark.parametrize("form", ["squared", "linear"])
def test_compiled_step_matches_array_operators(desc, dims, form):
    color = ColorParams(0.02, beta=0.7, perturbation_form=form)
    fs = TwoFluidFieldSet(desc, dims)
    sim = TwoFluidSimulation(fs, CollisionParams(1.3), color, workers=3)
    center = tuple(n / 2 for n in dims)
    phi = droplet_phase(dims, [center], [4.5])
    rng = np.random.default_rng(0)
    u = 0.02 * rng.standard_normal((desc.D, fs.n_nodes))
    sim.init_phase(phi, 1.0, u)
    target, _ = link_map(desc, dims, BoundarySpec.periodic())
    fR, fB = fs.fR.copy(), fs.fB.copy()
    for _ in range(3):
        fR, fB = numpy_two_fluid_step(fR, fB, desc, dims, 1.3, color, target)
        sim.step(1)
        assert np.allclose(fs.fR, fR, rtol=0, atol=1e-13)
        assert np.allclose(fs.fB, fB, rtol=0, atol=1e-13)


def test_compiled_nci_matches_array_scan():
    dims = (64, 64)
    color = ColorParams(0.01, nci_strength=0.01)
    fs = TwoFluidFieldSet(D2, dims)
    sim = TwoFluidSimulation(fs, CollisionParams(1.0), color, workers=2)
    sim.init_phase(pair_phase(4))
    sim.update_gradient()
    sim.update_nci()
    phi = sim.phi_grid()
    want = nci_scan(phi, color, D2)
    assert np.array_equal(fs.grid(fs.nci) != 0, want)
    F = nci_force(want, fs.grid(fs.rhoR), fs.grad.reshape(2, 64, 64), color)
    assert np.allclose(fs.force.reshape(2, 64, 64), F, atol=1e-15)


def test_compiled_gradient_matches_array_gradient():
    dims = (10, 9, 8)
    fs = TwoFluidFieldSet(D3, dims)
    mask = np.zeros(dims[::-1], dtype=bool)
    mask[3:5, 2:4, 4:7] = True
    spec = BoundarySpec.channel(3, wall_axis=2).with_mask(mask)
    sim = TwoFluidSimulation(fs, CollisionParams(1.0), ColorParams(0.01), spec, workers=2)
    sim.init_phase(droplet_phase(dims, [(5, 4, 4)], [3.0]))
    sim.update_gradient()
    want = isotropic_gradient(sim.phi_grid(), D3, spec.periodic_axes, mask)
    fluid = ~mask
    assert np.allclose(fs.grad.reshape((3,) + mask.shape)[:, fluid], want[:, fluid], atol=1e-14)


def test_color_mass_and_phase_bounds():
    dims = (32, 32)
    fs = TwoFluidFieldSet(D2, dims)
    sim = TwoFluidSimulation(fs, CollisionParams(1.0), ColorParams(0.03, nci_strength=0.005), workers=2)
    sim.init_phase(droplet_phase(dims, [(16, 16)], [(9.0, 6.0)]))
    m0 = fs.color_masses()
    for _ in range(10):
        sim.step(20)
        assert np.abs(fs.phi).max() <= 1.0
        assert sim.raw_phase_excursion() <= 1e-9
    m1 = fs.color_masses()
    assert abs(m1[0] - m0[0]) / m0[0] <= 1e-12
    assert abs(m1[1] - m0[1]) / m0[1] <= 1e-12


def test_droplet_relaxes_to_circle():
    dims = (48, 48)
    fs = TwoFluidFieldSet(D2, dims)
    sim = TwoFluidSimulation(fs, CollisionParams(1.0), ColorParams(0.03), workers=1)
    sim.init_phase(droplet_phase(dims, [(24, 24)], [(12.0, 8.0)]))
    sim.step(3000)
    phi = sim.phi_grid()
    wx = (phi[24] > 0).sum()
    wy = (phi[:, 24] > 0).sum()
    assert abs(wx - wy) <= 1


def test_color_params_validation():
    for kw in ({"sigma": -1}, {"sigma": 0.1, "beta": 0}, {"sigma": 0.1, "perturbation_form": "cubic"}, {"sigma": 0.1, "nci_reach": 0}):
        with pytest.raises(ValueError):
            ColorParams(**kw)
    assert ColorParams(0.1).bulk_threshold == pytest.approx(-0.98)
