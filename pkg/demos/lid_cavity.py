"""
Lid-driven cavity at Re = 100
=============================

A square box with a sliding top wall. The steady centerline profiles are
compared against the Ghia, Ghia & Shin (1982) table and the primary vortex
is located from the streamfunction.
"""

import sys

import numpy as np

from tslbm import analysis as A
from tslbm.cases import run_case
from tslbm.validation import cavity_config

# A 64 x 64 grid converges in under a minute; pass 128 for the full-size case.
size = int(sys.argv[1]) if len(sys.argv) > 1 else 64
cfg = cavity_config(size=size)
print(f"grid {size}^2, Re = {cfg.reynolds:.1f}, tau = {1 / cfg.relaxation:.4f}")

res = run_case(cfg, output_dir=f"output/cavity_{size}")
s = res.summary
print(f"steady after {s['steps']} steps (residual {s['residual']:.2e})")

# Largest deviation from the reference centerlines, in units of the lid speed.
print(f"max |u - u_Ghia| = {s['ghia_u_max_error']:.4f}")
print(f"max |v - v_Ghia| = {s['ghia_v_max_error']:.4f}")

# Vortex centre on the unit square; the reference sits at (0.6172, 0.7344).
cx, cy = s["vortex_center"]
print(f"vortex centre ({cx:.4f}, {cy:.4f}), {s['ghia_vortex_distance_nodes']:.2f} nodes off")

# The reference table itself, for side-by-side inspection.
ref = A.ghia_re100()
print(np.column_stack([ref["y"], ref["u"]])[::4])
