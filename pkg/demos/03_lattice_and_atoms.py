"""An r-lattice of the disc and the atomic decomposition it supports.

Builds a lattice, checks covering and separation by Monte Carlo, then
expands a kernel power into atoms by conjugate-gradient least squares and
prints how the residual falls.
"""

import numpy as np

from bergmankit import lattice as L
from bergmankit.measure import SpaceParams

lat = L.generate_lattice(1, 0.2, 0.9)
rep = L.verify_lattice(lat, 50_000, seed=0)
print(f"{len(lat)} points, covering gap {rep.covering_gap:.4f} < r = 0.2")
print(f"min separation {rep.min_separation:.4f} >= r/2, overlap N = {rep.overlap_N}")

spec = L.AtomSpec(lat, 3.5, SpaceParams(2, 0.0, 1))
f = lambda z: (1 - 0.6 * z[:, 0]) ** -3.0
lam = L.analyze(f, spec, iterations=20)
print("\nrelative residual by iteration:")
for k, r in enumerate(lam.residual_history):
    if k % 4 == 0 or k == len(lam.residual_history) - 1:
        print(f"  {k:2d}  {r:.3e}")
print(f"||lambda||_2 / ||f|| = {lam.meta['lambda_ratio']:.4f}")

big = np.argsort(-np.abs(lam.values))[:5]
print("largest coefficients sit near the pole direction:")
for k in big:
    print(f"  a_k = {lat.points[k, 0]:.3f}   |lambda_k| = {abs(lam.values[k]):.4f}")
