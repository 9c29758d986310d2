"""Build regular chains of balls toward a point near an obstacle and watch their length grow like log(1/d)."""
import math

import numpy as np

from polyscat.propagation import build_chain, chain_is_regular, ledger, propagate_smallness
from polyscat.scene import Scatterer2D

# an L-shaped obstacle; the target sits above the inner corner's long edge
ell = Scatterer2D([[(-1, -1), (1, -1), (1, 0), (0, 0), (0, 1), (-1, 1)]])
x0 = np.array([6.0, 4.0])

print("    d      balls  regular  kappa")
for d in (1e-1, 1e-2, 1e-3, 1e-4):
    c = build_chain(ell, x0, (0.5, d), d=d)
    print(f"{d:8.0e}  {len(c):5d}  {bool(chain_is_regular(c, ell))!s:7}  {c.info['kappa']:.2f}")

# smallness carried along the last chain with a constant three-spheres exponent
betas = np.full(len(c) - 1, 0.5)
L = ledger(betas)
bounds, logs = propagate_smallness(c, 1e-12, 1.0, 1.0, betas)
print(f"Gamma at the end: exp({L.log_gamma[-1]:.1f});  final bound: {bounds[-1]:.3f}")
print(f"eps needed for a final bound of 0.1: exp({math.log(0.1) / L.gamma[-1]:.3g})")
