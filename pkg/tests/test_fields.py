from types import SimpleNamespace

import numpy as np
import pytest
from hypothesis import given, strategies as st

from tslbm.fields import (
    ConfigurationError, FieldSet, TwoFluidFieldSet, allocate, flipflop_arrays, index, memory_report,
    single_component_arrays, unravel,
)
from tslbm.lattice import make_descriptor


def cfg(lattice, dims, dtype="float32", two_fluid=False):
    return SimpleNamespace(lattice=lattice, dims=dims, dtype=dtype, two_fluid=two_fluid)


def test_index_examples():
    assert index(0, 0, 0, (16, 16)) == 0
    assert index(1, 0, 0, (16, 16)) == 1
    assert index(0, 1, 2, (4, 3, 5)) == 28
    with pytest.raises(IndexError):
        index(4, 0, 0, (4, 3, 2))


def test_index_bijection():
    dims = (4, 3, 2)
    seen = set()
    for k in range(2):
        for j in range(3):
            for i in range(4):
                n = index(i, j, k, dims)
                assert tuple(int(x) for x in unravel(n, dims)) == (i, j, k)
                seen.add(n)
    assert seen == set(range(24))


@given(st.integers(4, 20), st.integers(4, 20), st.integers(4, 20), st.data())
def test_unravel_inverts_index(nx, ny, nz, data):
    dims = (nx, ny, nz)
    n = data.draw(st.integers(0, nx * ny * nz - 1))
    assert index(*(int(v) for v in unravel(n, dims)), dims) == n


@pytest.mark.parametrize("kind,ts,ff", [("D2Q9", 15, 21), ("D3Q19", 29, 42)])
def test_array_counts(kind, ts, ff):
    desc = make_descriptor(kind)
    assert single_component_arrays(desc) == ts == desc.q + 1 + desc.D + desc.D * (desc.D + 1) // 2
    assert flipflop_arrays(desc) == ff
    dims = (8,) * desc.D
    fs = allocate(cfg(kind, dims))
    assert sum(fs.arrays().values()) == ts
    assert fs.ledger.arrays_per_node == ts
    for name in ("f", "rho", "mom", "pineq"):
        arr = getattr(fs, name)
        assert arr.shape[-1] == 8**desc.D


@pytest.mark.parametrize("kind,saving", [("D2Q9", 24), ("D3Q19", 52)])
def test_memory_saving(kind, saving):
    rep = memory_report(cfg(kind, (16,) * (2 if kind == "D2Q9" else 3)))
    assert rep.saving_bytes_per_node == saving


def test_memory_billion_nodes():
    rep = memory_report(cfg("D3Q19", (1000, 1000, 1000)))
    assert rep.total_saving_bytes == 52 * 10**9
    assert "52.00 GB" in str(rep)


def test_two_fluid_allocation():
    fs = allocate(cfg("D3Q19", (6, 6, 6), two_fluid=True))
    assert isinstance(fs, TwoFluidFieldSet)
    assert fs.fR.shape == fs.fB.shape == (19, 216)
    assert fs.phi.shape == (216,)


def test_rejects_bad_dims():
    desc = make_descriptor("D2Q9")
    with pytest.raises(ConfigurationError):
        FieldSet(desc, (3, 8))
    with pytest.raises(ConfigurationError):
        FieldSet(desc, (8, 8, 8))
    with pytest.raises(ConfigurationError):
        FieldSet(desc, (8, 8), dtype=np.int32)


def test_grid_view_is_x_fastest():
    fs = FieldSet(make_descriptor("D3Q19"), (5, 4, 6))
    fs.rho[index(3, 2, 1, fs.dims)] = 7.0
    assert fs.grid(fs.rho)[1, 2, 3] == 7.0
