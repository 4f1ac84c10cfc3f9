"""
Throughput and the roofline
===========================

Measures lattice updates per second for a periodic Taylor-Green box at a few
worker counts, checks the fields agree bit for bit, and places the kernel on
a roofline using its flop/byte census.
"""

import os

from tslbm.bench import V100, count_kernel_cost, roofline, scaling_run
from tslbm.config import SimulationConfig

cfg = SimulationConfig(lattice="D3Q19", dims=(64, 64, 64), omega=1.0, case="custom", init="taylor-green", dtype="float32")

workers = sorted({1, 2, os.cpu_count() or 1})
res = scaling_run(cfg, workers, steps=20)
print(res.table())

# Flops and bytes per node update, counted from the kernel expressions.
for scope in ("collide", "step"):
    cost = count_kernel_cost(lattice="D3Q19", element_size=4, scope=scope)
    perf, bound = roofline(V100, cost.intensity)
    print(f"{scope}: {cost.flops_per_update} flop / {cost.bytes_per_update} B, I = {cost.intensity:.2f}")
    print(f"    V100 attainable {perf / 1e12:.2f} TFLOP/s ({bound}-bound)")
