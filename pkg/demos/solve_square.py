"""Scatter a plane wave off the unit square and compare against an independent solver."""
import numpy as np

from polyscat.helmholtz import ScatterConfig, mfs_solve, optical_theorem_defect, relative_far_field_error, solve
from polyscat.scene import Scatterer2D

square = Scatterer2D([[(-0.5, -0.5), (0.5, -0.5), (0.5, 0.5), (-0.5, 0.5)]])

# boundary integral solve, refined twice
for n in (256, 512, 1024):
    u = solve(square, ScatterConfig(quad_order=n), 0)
    print(f"nodes={n:5d}  bc residual={u.bc_residual():.2e}  optical defect={optical_theorem_defect(u).value:.2e}")

# the method of fundamental solutions gives a second opinion on the far field
cfg = ScatterConfig(quad_order=512)
far = solve(square, cfg, 0).far_field()
ref = mfs_solve(square, cfg, 0).far_field()
print(f"relative far-field difference to MFS: {relative_far_field_error(far, ref):.2e}")

# backscatter and forward amplitudes
i_back = far.n // 2
print(f"|u_inf(0)|={abs(far.values[0]):.4f}  |u_inf(pi)|={abs(far.values[i_back]):.4f}")
print("total field at (2, 0):", np.round(solve(square, cfg, 0)((2.0, 0.0)), 6))
