"""Shared-memory worker pool with barrier semantics.

A phase is one kernel applied to the whole grid: the node range is split
into contiguous chunks, one per worker, and :meth:`WorkerPool.run` returns
only when every chunk is done. Kernels release the GIL, so threads run
concurrently on separate cores.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

WORKERS_ENV = "TSLBM_WORKERS"


def default_workers() -> int:
    value = os.environ.get(WORKERS_ENV)
    if value:
        n = int(value)
        if n < 1:
            raise ValueError(f"{WORKERS_ENV} must be >= 1, got {value}")
        return n
    return os.cpu_count() or 1


def partition(n: int, parts: int) -> list[tuple[int, int]]:
    bounds = np.linspace(0, n, parts + 1).round().astype(np.int64)
    return [(int(lo), int(hi)) for lo, hi in zip(bounds[:-1], bounds[1:]) if hi > lo]


class WorkerPool:
    def __init__(self, workers: int | None = None):
        self.workers = default_workers() if workers is None else int(workers)
        if self.workers < 1:
            raise ValueError("worker count must be >= 1")
        self._executor = ThreadPoolExecutor(self.workers) if self.workers > 1 else None

    def run(self, kernel, n: int, *args) -> None:
        """Apply ``kernel(lo, hi, *args)`` over [0, n) and wait for all chunks."""
        if self._executor is None:
            kernel(0, n, *args)
            return
        futures = [self._executor.submit(kernel, lo, hi, *args) for lo, hi in partition(n, self.workers)]
        for fut in futures:
            fut.result()

    def close(self) -> None:
        if self._executor is not None:
            self._executor.shutdown()
            self._executor = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def __repr__(self) -> str:
        return f"WorkerPool(workers={self.workers})"
