"""Writing a function in A^2 as a sum of products from A^4 x A^4.

The atom-split certificate takes the atomic decomposition of f in A^2 and
splits each atom's exponent and coefficient between the two factors. A
penalized optimizer then looks for a cheaper set of K pairs; it keeps the
atom split whenever it cannot beat it.
"""

import numpy as np

from bergmankit import lattice as L
from bergmankit import measure as m
from bergmankit import normlab as nl
from bergmankit.operators import kernel_symbol

frame = m.holder_frame(4, 0.0, 4, 0.0, 0.0)
lat = L.generate_lattice(1, 0.2, 0.8)
spec = L.AtomSpec(lat, 3.5, m.SpaceParams(frame.q, frame.beta, 1))
b1, b2 = L.split_exponents(frame, spec.b)
print(f"atom exponents split {spec.b} = {b1} + {b2}\n")

for w in (0.0, 0.3, 0.6):
    f = kernel_symbol(np.array([w + 0j]), 2.0, 12)
    seed = L.weak_factorize(f, frame, spec)
    best = nl.oplus_norm_upper(f, frame, 8, 12, nl.OptConfig(restarts=2, max_iter=200), seed_certificate=seed)
    print(f"w = {w}: ||f|| = {seed.f_norm:.4f}")
    print(f"  atom split: {len(seed.pairs):3d} pairs, cost {seed.cost:.4f}, residual {seed.residual:.1e}")
    print(f"  optimized : {len(best.pairs):3d} pairs, cost {best.cost:.4f} ({best.meta['method']})")
    print(f"  easy direction ||f|| <= C cost + residual: {seed.f_norm <= frame.product_constant() * best.cost + best.residual}")
