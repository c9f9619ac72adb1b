"""
Manufactured-solution convergence
=================================

Smooth fields v*, u*, theta* that satisfy the boundary conditions are pushed
through the equations symbolically to get source terms. With the sources
switched on the scheme should reproduce the fields up to discretisation
error, which shrinks like 1/M^2. dt is scaled like 1/M^2 so the spatial
error dominates.
"""

from __future__ import annotations

from radialnsf.harness.config import MMSConfig
from radialnsf.harness.mms import format_table, run_mms

rows = run_mms(MMSConfig(sizes=(32, 64, 128, 256), end_time=0.05, dt_coarse=1e-3))
print(format_table(rows))

# halving dt at the finest size barely moves the error
half = run_mms(MMSConfig(sizes=(32, 64, 128, 256), end_time=0.05, dt_coarse=1e-3), dt_scale=0.5)
print(f"\nerror at M=256: {rows[-1].error:.4e} (dt), {half[-1].error:.4e} (dt/2)")
