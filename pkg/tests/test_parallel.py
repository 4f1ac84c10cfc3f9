import numpy as np
import pytest
from hypothesis import given, strategies as st

from tslbm.parallel import WorkerPool, default_workers, partition


@given(st.integers(0, 10_000), st.integers(1, 64))
def test_partition_covers_range_once(n, parts):
    chunks = partition(n, parts)
    covered = [i for lo, hi in chunks for i in range(lo, hi)]
    assert covered == list(range(n))
    assert len(chunks) <= parts


def test_env_override(monkeypatch):
    monkeypatch.setenv("TSLBM_WORKERS", "3")
    assert default_workers() == 3
    assert WorkerPool().workers == 3
    monkeypatch.setenv("TSLBM_WORKERS", "0")
    with pytest.raises(ValueError):
        default_workers()


def fill(lo, hi, out):
    out[lo:hi] += np.arange(lo, hi)


def test_run_waits_for_all_chunks():
    out = np.zeros(1000)
    with WorkerPool(7) as pool:
        pool.run(fill, 1000, out)
    assert np.array_equal(out, np.arange(1000))


def test_kernel_errors_propagate():
    def bad(lo, hi):
        raise RuntimeError("boom")

    with WorkerPool(2) as pool, pytest.raises(RuntimeError, match="boom"):
        pool.run(bad, 10)
