"""Acceptance criteria at their stated tolerances. Each test records one or more
verdict lines, printed together at the end of the pytest run."""

import pytest

from tslbm import validation as V

pytestmark = pytest.mark.slow


def check(results):
    failed = [r.line() for r in results if not r.passed]
    assert not failed, "\n".join(failed)


def test_01_oracle_equivalence(record):
    check(record(V.oracle_equivalence(n_states=100, steps=10, size=32)))


def test_02_parallel_determinism(record):
    check(record(V.parallel_determinism(size=128, steps=100, workers=(1, 2, 8))))


def test_03_conservation(record):
    check(record(V.conservation(size=64, steps=1000)))


def test_04_viscosity(record):
    check(record(V.viscosity_certification((0.8, 1.0, 1.5), tol=0.01)))


def test_05_lid_cavity(record):
    check(record(V.lid_cavity(128, profile_tol=0.05, center_tol=2.0)))


def test_06_droplet_oscillation(record):
    check(record(V.droplet_oscillation(tol=0.10)))


def test_07_laplace_law(record):
    check(record(V.laplace_law((20, 30, 40), sigma=0.03, tol=0.05)))


def test_08_nci_non_coalescence(record):
    check(record(V.nci_non_coalescence()))


def test_09_memory_accounting(record):
    check(record(V.memory_accounting()))


def test_10_roofline_intensity(record):
    check(record(V.roofline_intensity()))


def test_11_throughput(record):
    check(record(V.throughput()))
