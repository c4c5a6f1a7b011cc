"""Automorphisms of the ball and the Bergman metric.

Walks through the involution phi_a, the identity for 1 - |phi_a(z)|^2 and
the invariance of the pseudo-hyperbolic distance, then shows how a metric
ball of fixed radius shrinks in Euclidean size towards the boundary.
"""

import numpy as np

from bergmankit import geometry as g

rng = np.random.default_rng(0)
a = np.array([0.6, 0.3j])
z, w = g.random_ball_points(rng, 2, 2, 0.9)

pz = g.mobius_map(a, z)
print("phi_a(phi_a(z)) - z:", np.abs(g.mobius_map(a, pz) - z).max())

lhs = 1 - g.norm(pz) ** 2
rhs = (1 - g.norm(a) ** 2) * (1 - g.norm(z) ** 2) / abs(1 - g.inner_product(z, a)) ** 2
print(f"1 - |phi_a(z)|^2 = {lhs:.15f}")
print(f"closed form      = {rhs:.15f}")

print("rho(z, w)               :", g.pseudo_hyperbolic_distance(z, w))
print("rho(phi_a z, phi_a w)   :", g.pseudo_hyperbolic_distance(pz, g.mobius_map(a, w)))

# Bergman distance tanh^{-1}(rho): a metric ball of radius 0.5 around x*e_1
print("\nEuclidean radius of D(x e_1, 0.5) along e_1:")
t = np.tanh(0.5)
for x in (0.0, 0.5, 0.9, 0.99):
    centre = np.array([x, 0.0])
    edge = np.array([(x + t) / (1 + t * x), 0.0])  # phi_x(-t e_1)
    # the slice is a disc of radius t(1-x^2)/(1-t^2 x^2)
    print(f"  x = {x:<5} radius = {t * (1 - x * x) / (1 - t * t * x * x):.5f}"
          f"  beta(centre, edge) = {g.bergman_distance(centre, edge):.6f}")
