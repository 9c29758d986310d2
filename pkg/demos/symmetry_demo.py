"""A single incident direction can hide a perturbation on a symmetry line; a second direction reveals it."""
from polyscat.helmholtz import ScatterConfig
from polyscat.lab import symmetry_experiment
from polyscat.scene import Scatterer2D, symmetry_lines

square = Scatterer2D([[(-0.5, -0.5), (0.5, -0.5), (0.5, 0.5), (-0.5, 0.5)]])
print("symmetry lines parallel to (1,0):", len(symmetry_lines(square, (1.0, 0.0))))

rep = symmetry_experiment(square, ScatterConfig())
print(f"antisymmetric part on y=0, direction (1,0):   {rep.A_sym:.2e}")
print(f"same on a line rotated by {rep.rotation_deg:g} degrees:      {rep.A_rotated:.2e}")
print(f"antisymmetric part on y=0, direction {tuple(rep.v2)}: {rep.A2_sym:.3f}")
