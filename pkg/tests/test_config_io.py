from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tslbm import cases
from tslbm.config import ConfigError, SimulationConfig, load_config, parse_config, serialize_config, with_overrides
from tslbm.fields import FieldSet, TwoFluidFieldSet, index
from tslbm.io import read_series, read_vtk_scalars, vtk_text, write_fields, write_summary
from tslbm.lattice import make_descriptor

DATA = Path(__file__).parent / "data"


def test_cavity_example():
    cfg = parse_config("lattice=d2q9\ndims=256,256\ntau=0.7\ncase=cavity\nu_lid=0.025")
    assert cfg.lattice == "D2Q9" and cfg.dims == (256, 256) and cfg.case == "cavity"
    assert cfg.viscosity == pytest.approx(0.2 / 3)
    assert cfg.reynolds == pytest.approx(96, abs=0.5)


def test_conflicting_relaxation_names_both_lines():
    with pytest.raises(ConfigError) as err:
        parse_config("lattice = D2Q9\nomega = 1.2\ndims = 8,8\nnu = 0.1\ncase = custom\n")
    msg = str(err.value)
    assert "omega (line 2)" in msg and "nu (line 4)" in msg


def test_empty_file_lists_required_keys():
    with pytest.raises(ConfigError) as err:
        parse_config("")
    msg = str(err.value)
    for key in ("lattice", "dims", "case", "omega, tau, nu"):
        assert key in msg


def test_all_errors_reported_with_lines():
    text = "lattice = D2Q9\ndims = 8,x\ncase = cavity\ntau = abc\ncolour = red\nsteps = 10\nsteps = 20\n"
    with pytest.raises(ConfigError) as err:
        parse_config(text)
    errs = err.value.errors
    assert any(e.startswith("line 2:") and "dims" in e for e in errs)
    assert any(e.startswith("line 4:") and "tau" in e for e in errs)
    assert any(e.startswith("line 5:") and "unknown key" in e for e in errs)
    assert any(e.startswith("line 7:") and "already set on line 6" in e for e in errs)


def test_semantic_errors():
    with pytest.raises(ConfigError, match="needs 3 extents"):
        parse_config("lattice=D3Q19\ndims=8,8\nomega=1\ncase=custom")
    with pytest.raises(ConfigError, match="needs sigma"):
        parse_config("lattice=D3Q19\ndims=8,8,8\nomega=1\ncase=droplet-oscillation")
    with pytest.raises(ConfigError, match="omega"):
        parse_config("lattice=D2Q9\ndims=8,8\nomega=2.5\ncase=custom")


configs = st.builds(
    SimulationConfig,
    lattice=st.just("D3Q19"),
    dims=st.tuples(st.integers(4, 64), st.integers(4, 64), st.integers(4, 64)),
    tau=st.floats(0.51, 3.0),
    case=st.sampled_from(["droplet-oscillation", "head-on-impact"]),
    steps=st.integers(1, 10**6),
    sigma=st.floats(1e-4, 0.1),
    beta=st.floats(0.05, 1.0),
    radius=st.floats(2.0, 30.0),
    force=st.none() | st.tuples(*[st.floats(-1e-4, 1e-4)] * 3),
    workers=st.none() | st.integers(1, 16),
)


@settings(max_examples=50)
@given(configs)
def test_round_trip(cfg):
    assert parse_config(serialize_config(cfg)) == cfg


def test_load_resolves_mask(tmp_path):
    (tmp_path / "geo.txt").write_text("....\n.##.\n....\n....\n")
    (tmp_path / "run.cfg").write_text("lattice=D2Q9\ndims=4,4\nomega=1\ncase=custom\nmask=geo.txt\nboundary=channel\n")
    cfg = load_config(tmp_path / "run.cfg")
    assert Path(cfg.mask).parent == tmp_path
    assert cfg.boundary_spec().mask.sum() == 2


def uniform_4cube():
    fs = FieldSet(make_descriptor("D3Q19"), (4, 4, 4))
    fs.rho[:] = 1.0
    fs.mom[0] = 0.01
    return fs


def test_vtk_golden_file(tmp_path):
    path = write_fields(uniform_4cube(), tmp_path / "u.vtk")
    assert path.read_bytes() == (DATA / "uniform_4x4x4.vtk").read_bytes()


def test_vtk_deterministic_and_readable(tmp_path):
    fs = FieldSet(make_descriptor("D2Q9"), (6, 5))
    rng = np.random.default_rng(0)
    fs.rho[:] = rng.random(30)
    fs.mom[:] = rng.random((2, 30))
    a = write_fields(fs, tmp_path / "a.vtk")
    b = write_fields(fs, tmp_path / "b.vtk")
    assert a.read_bytes() == b.read_bytes()
    back = read_vtk_scalars(a)
    assert np.allclose(back["rho"], fs.rho, rtol=1e-9)
    assert np.allclose(back["velocity"][:, :2], fs.mom.T, rtol=1e-9)
    assert np.all(back["velocity"][:, 2] == 0)
    assert "phi" not in back
    with pytest.raises(ValueError):
        write_fields(fs, tmp_path / "c.h5", format="hdf5")


def test_two_fluid_snapshot_has_phi(tmp_path):
    fs = TwoFluidFieldSet(make_descriptor("D2Q9"), (4, 4))
    fs.rhoR[:] = 0.75
    fs.rhoB[:] = 0.25
    fs.phi[:] = 0.5
    back = read_vtk_scalars(write_fields(fs, tmp_path / "p.vtk"))
    assert np.allclose(back["phi"], 0.5) and np.allclose(back["rho"], 1.0)


def test_summary_json_handles_numpy(tmp_path):
    p = write_summary({"a": np.float32(1.5), "b": np.arange(3), "c": float("nan"), "d": np.bool_(True)}, tmp_path / "s.json")
    assert p.read_text() == '{\n  "a": 1.5,\n  "b": [\n    0,\n    1,\n    2\n  ],\n  "c": null,\n  "d": true\n}\n'


def test_run_case_outputs_identical_across_workers(tmp_path):
    base = SimulationConfig(lattice="D2Q9", dims=(24, 20), omega=1.1, case="cavity", u_lid=0.05, steps=60,
                            output_every=30, series_every=10, check_every=20)
    outs = []
    for w in (1, 3):
        res = cases.run_case(with_overrides(base, workers=w), output_dir=tmp_path / f"w{w}")
        assert res.status == 0
        outs.append(res)
    names = sorted(p.name for p in (tmp_path / "w1").iterdir())
    assert names == ["fields_0000000.vtk", "fields_0000030.vtk", "fields_0000060.vtk", "series.csv", "summary.json"]
    for name in names[:-1]:
        assert (tmp_path / "w1" / name).read_bytes() == (tmp_path / "w3" / name).read_bytes()
    series = read_series(tmp_path / "w1" / "series.csv")
    assert list(series["step"]) == [0, 10, 20, 30, 40, 50, 60]
    assert np.allclose(series["mass"], series["mass"][0], rtol=1e-12)


def test_nan_aborts_with_step_and_node(tmp_path, monkeypatch):
    build = cases.build_simulation

    def poisoned(config, workers=None):
        sim = build(config, workers)
        step = sim.step

        def step_then_poison(n=1):
            step(n)
            if sim.time >= 5:
                sim.fields.rho[index(5, 3, 0, sim.fields.dims)] = np.nan

        sim.step = step_then_poison
        return sim

    monkeypatch.setattr(cases, "build_simulation", poisoned)
    cfg = SimulationConfig(lattice="D2Q9", dims=(16, 8), omega=1.0, steps=20, series_every=5)
    res = cases.run_case(cfg, output_dir=tmp_path)
    assert res.status == cases.STATUS_NAN
    assert res.summary["blowup_step"] == 5
    assert res.summary["blowup_node"] == [5, 3]
    assert "non-finite" in res.summary["error"]


def test_droplet_builder_volume():
    cfg = SimulationConfig(lattice="D3Q19", dims=(48, 48, 48), tau=0.55, case="droplet-oscillation", sigma=0.03, radius=12.0, aspect=1.2)
    sim = cases.build_simulation(cfg, workers=1)
    from tslbm.analysis import equivalent_radius

    assert equivalent_radius(sim.phi_grid()) == pytest.approx(12.0, rel=0.02)
    phi = sim.phi_grid()
    assert (phi[24, 24] > 0).sum() > (phi[:, 24, 24] > 0).sum()  # short axis along z
    sim.close()


def test_impact_builder_two_droplets_approach():
    cfg = SimulationConfig(lattice="D3Q19", dims=(48, 24, 24), tau=0.55, case="head-on-impact", sigma=0.02, radius=6.0, velocity=0.1, gap=4.0)
    sim = cases.build_simulation(cfg, workers=1)
    from tslbm.analysis import count_components

    assert count_components(sim.phi_grid()) == 2
    ux = sim.fields.grid(sim.velocity()[0])[12, 12]
    assert ux[14] == pytest.approx(0.05, abs=2e-3) and ux[34] == pytest.approx(-0.05, abs=2e-3)
    sim.close()
