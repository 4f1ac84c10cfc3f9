from fractions import Fraction
from itertools import product

import numpy as np
import pytest
from hypothesis import given, strategies as st

from tslbm.lattice import LatticeKind, direction_classes, make_descriptor, validate_moments, with_weights

KINDS = ["D2Q9", "D3Q19"]


def solve_class_weights(desc):
    """Weights per |c|^2 class from sum t = 1, sum t cx^2 = 1/3, sum t cx^2 cy^2 = 1/9 (exact rationals)."""
    classes = sorted(direction_classes(desc).items())
    c = desc.c
    rows = []
    rhs = [Fraction(1), Fraction(1, 3), Fraction(1, 9)]
    for f in (lambda v: 1, lambda v: v[0] ** 2, lambda v: v[0] ** 2 * v[1] ** 2):
        rows.append([Fraction(sum(f(c[a]) for a in members)) for _, members in classes])
    # Gaussian elimination in rationals
    n = len(rows)
    m = [r + [b] for r, b in zip(rows, rhs)]
    for i in range(n):
        p = next(k for k in range(i, n) if m[k][i] != 0)
        m[i], m[p] = m[p], m[i]
        m[i] = [x / m[i][i] for x in m[i]]
        for k in range(n):
            if k != i:
                m[k] = [a - m[k][i] * b for a, b in zip(m[k], m[i])]
    return {norm: m[i][-1] for i, (norm, _) in enumerate(classes)}


@pytest.mark.parametrize("kind", KINDS)
def test_weights_match_moment_solve(kind):
    desc = make_descriptor(kind)
    w = solve_class_weights(desc)
    for a, v in enumerate(desc.c):
        assert desc.t_exact[a] == w[int(v @ v)]


def test_known_weights():
    d2 = make_descriptor("d2q9")
    assert (d2.t_exact[0], max(d2.t_exact[1:]), min(d2.t_exact[1:])) == (Fraction(4, 9), Fraction(1, 9), Fraction(1, 36))
    d3 = make_descriptor("D3Q19")
    assert (d3.t_exact[0], max(d3.t_exact[1:]), min(d3.t_exact[1:])) == (Fraction(1, 3), Fraction(1, 18), Fraction(1, 36))


@pytest.mark.parametrize("kind", KINDS)
def test_validate_passes(kind):
    rep = validate_moments(make_descriptor(kind))
    assert rep.passed, str(rep)
    assert rep["4th-order isotropy"].violation <= 1e-15


def test_injected_defect_reported():
    desc = make_descriptor("D2Q9")
    t = desc.t.copy()
    t[0] += 1e-3
    rep = validate_moments(with_weights(desc, t=t))
    assert not rep.passed
    assert rep["sum t = 1"].violation == pytest.approx(1e-3, rel=1e-9)


@pytest.mark.parametrize("kind", KINDS)
def test_opposites_and_symmetry(kind):
    desc = make_descriptor(kind)
    assert np.array_equal(desc.opp[desc.opp], np.arange(desc.q))
    assert np.array_equal(desc.c[desc.opp], -desc.c)
    assert np.abs(desc.t @ desc.c).max() == 0
    assert all(desc.opp[a] == a + 1 for a in desc.half_directions)


@pytest.mark.parametrize("kind", KINDS)
def test_perturbation_weights_conserve(kind):
    desc = make_descriptor(kind)
    assert sum(desc.B_exact) == Fraction(1, 3)
    assert np.abs(desc.B @ desc.c).max() == 0


@pytest.mark.parametrize("kind", KINDS)
def test_hermite_tensor_trace(kind):
    desc = make_descriptor(kind)
    for a in range(desc.q):
        Q = desc.Q[a]
        assert np.array_equal(Q, Q.T)
        assert np.trace(Q) == pytest.approx(desc.c[a] @ desc.c[a] - desc.D / 3, abs=1e-15)


def test_parse_kind():
    assert LatticeKind.parse(" d3q19 ") is LatticeKind.D3Q19
    with pytest.raises(ValueError):
        LatticeKind.parse("D3Q27")


@given(st.sampled_from(KINDS), st.integers(0, 18), st.floats(-1e-2, 1e-2).filter(lambda x: abs(x) > 1e-12))
def test_any_weight_defect_fails(kind, a, eps):
    desc = make_descriptor(kind)
    a %= desc.q
    t = desc.t.copy()
    t[a] += eps
    assert not validate_moments(with_weights(desc, t=t)).passed


@pytest.mark.parametrize("kind", KINDS)
def test_brute_force_fourth_moment(kind):
    desc = make_descriptor(kind)
    D = desc.D
    for i, j, k, l in product(range(D), repeat=4):
        s = sum(desc.t_exact[a] * int(desc.c[a, i] * desc.c[a, j] * desc.c[a, k] * desc.c[a, l]) for a in range(desc.q))
        target = Fraction(1, 9) * ((i == j) * (k == l) + (i == k) * (j == l) + (i == l) * (j == k))
        assert s == target
