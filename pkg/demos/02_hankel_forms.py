"""Hankel forms with kernel symbols: estimated norm against the symbol norm.

For p1 = p2 = 4 and zero weights the product space is A^2, and the form
T_b(f, g) = <f g, b> should be comparable to the A^2 norm of b. We sweep
the symbol b_w = (1 - conj(w) z)^{-2} towards the boundary and watch the
ratio stay flat while both sides blow up.
"""

import numpy as np

from bergmankit import measure as m
from bergmankit import normlab as nl
from bergmankit.operators import kernel_symbol

frame = m.holder_frame(4, 0.0, 4, 0.0, 0.0)
print(f"product space A^{frame.q:g}_{frame.beta:g}, dual A^{frame.q_prime:g}_{frame.beta_prime:g}")
print(f"Holder constant {frame.hankel_constant():.4f}\n")

config = nl.OptConfig(restarts=4, seed=0)
print(f"{'|w|':>5} {'degree':>6} {'||T_b||':>10} {'||b||':>10} {'ratio':>8}")
for w in (0.0, 0.3, 0.6, 0.9):
    warm = []
    for degree in (8, 10, 12):
        b = kernel_symbol(np.array([w + 0j]), 2.0, 2 * degree)
        est = nl.hankel_form_norm(b, frame, degree, config, warm_start=warm)
        warm = [est.witness]
        ref = nl.poly_norm(b, frame.dual_space)
        print(f"{w:5.1f} {degree:6d} {est.value:10.4f} {ref:10.4f} {est.value / ref:8.4f}")

# The stored witness reproduces the value exactly
print("\nwitness check:", nl.evaluate_form_witness(b, frame, est), "vs", est.value)
