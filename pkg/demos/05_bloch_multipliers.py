"""Small Hankel operators into conj(A^1) versus multipliers from the Bloch space.

For each symbol we estimate the norm of h_{conj f}: A^4 -> conj(A^1) by
ascent and the norm of M_f: B -> A^{4/3} over a net of truncated log
kernels, then print the log-weight diagnostics that bracket both.
"""

import numpy as np

from bergmankit import normlab as nl
from bergmankit.operators import kernel_symbol
from bergmankit.poly import Polynomial

symbols = [(f"z^{k}", Polynomial.monomial((k,))) for k in (0, 2, 4, 6)]
symbols += [(f"kernel w={w}", kernel_symbol(np.array([w + 0j]), 2.0, 20)) for w in (0.3, 0.6)]

net = nl.bloch_net(1)
rows = nl.tm4_rows(symbols, 4.0, 0.0, 10, net, nl.OptConfig(restarts=2))
print(f"{'symbol':<14} {'||h||':>8} {'||M||':>8} {'ratio':>7} {'BLZ':>8} {'cor1':>8} {'cor2':>8}")
for r in rows:
    print(f"{r['symbol']:<14} {r['h_norm']:8.4f} {r['mult_norm']:8.4f} {r['ratio']:7.3f} {r['blz']:8.4f} {r['cor1']:8.4f} {r['cor2']:8.4f}")
ratios = [r["ratio"] for r in rows]
print(f"\nratio spread {max(ratios) / min(ratios):.3f}")
