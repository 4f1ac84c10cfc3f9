from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from tslbm.bench import (
    V100, MachineModel, bench_report, count_kernel_cost, glups, roofline, scaling_run,
)
from tslbm.config import SimulationConfig


def test_glups_examples():
    assert glups(100, 100, 100, 100, 1.0) == Fraction(1, 10)
    assert round(float(glups(256, 256, 256, 1000, 5.41)), 1) == 3.1
    assert round(float(glups(2048, 2048, 1, 1000, 0.677)), 1) == 6.2
    assert glups(256, 256, 256, 1000, 5.41) == Fraction(256**3 * 1000 * 100, 10**9 * 541)
    with pytest.raises(ValueError):
        glups(10, 10, 10, 10, 0.0)


def test_roofline_examples():
    p, kind = roofline(V100, 2.31)
    assert p == pytest.approx(2.079e12, rel=1e-12) and kind == "memory"
    assert roofline(V100, V100.ridge) == (V100.pi, "memory")
    assert roofline(V100, float("inf")) == (V100.pi, "compute")
    with pytest.raises(ValueError):
        MachineModel(0, 1)


@given(st.floats(0.01, 100), st.floats(0.01, 100))
def test_roofline_monotone_and_capped(a, b):
    lo, hi = sorted((a, b))
    assert roofline(V100, lo)[0] <= roofline(V100, hi)[0] <= V100.pi


def test_census_d3q19():
    cost = count_kernel_cost(lattice="D3Q19", element_size=4)
    assert (cost.flops_per_update, cost.bytes_per_update) == (344, 116)
    assert 1 <= cost.intensity <= 5
    step = count_kernel_cost(lattice="D3Q19", element_size=4, scope="step")
    assert (step.flops_per_update, step.bytes_per_update) == (452, 232)
    assert 1.9 <= step.intensity <= 2.0
    assert sum(cost.breakdown.values()) == cost.flops_per_update


@pytest.mark.parametrize("kind", ["D2Q9", "D3Q19"])
@pytest.mark.parametrize("scope", ["collide", "step"])
def test_census_band_and_element_scaling(kind, scope):
    c4 = count_kernel_cost(lattice=kind, element_size=4, scope=scope)
    c8 = count_kernel_cost(lattice=kind, element_size=8, scope=scope)
    assert 1 <= c4.intensity <= 5
    assert c8.intensity == c4.intensity / 2


def test_scaling_table_identical():
    cfg = SimulationConfig(lattice="D2Q9", dims=(48, 40), omega=1.2, init="taylor-green", steps=5)
    res = scaling_run(cfg, (1, 2, 3), steps=5)
    assert res.identical
    assert res.rows[0].efficiency == 1.0
    assert "bit-identical across worker counts: True" in res.table()


def test_bench_report_keys():
    cfg = SimulationConfig(lattice="D3Q19", dims=(16, 16, 16), omega=1.0, dtype="float32")
    rep = bench_report(cfg, 2.0, 100, V100)
    assert rep["glups"] == pytest.approx(16**3 * 100 / 2e9)
    assert rep["flops_per_update"] == 344 and rep["bytes_per_update"] == 116
    assert rep["roofline_bound"]["kind"] == "memory"
