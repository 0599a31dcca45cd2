"""Exponential map, Jacobian and logarithm of a corank-1 group.

A random skew matrix is reduced to canonical blocks, geodesics are shot and
inverted, and the cut locus is probed.
"""
import math

import numpy as np

from carnot_mcp import corank1 as c1
from carnot_mcp.errors import CutLocus

rng = np.random.default_rng(1)
M = rng.normal(size=(5, 5))
G = c1.canonicalize(M - M.T)
print("alphas:", G.alphas, "kernel dim:", G.kernel_dim)
print("|O^T A O - blocks| =", np.abs(G.O.T @ G.A_raw @ G.O - G.A).max())
print("injectivity domain: |p_z| <", G.pz_limit)

# Unit-speed geodesic in the Heisenberg group that ends on the cut locus
# boundary after p_z = 2 pi.
H = c1.from_blocks(0, [1])
for pz in (0.0, math.pi / 2, math.pi, 2 * math.pi - 1e-3):
    q = c1.exp(H, c1.Covector([1.0, 0.0], pz))
    J = c1.jacobian_batch(H, np.array([1.0, 0.0]), pz)
    print(f"p_z={pz:8.5f}  exp -> x={np.round(q.x, 6)}, z={q.z:.6f}  J={J:.6g}")

# The Jacobian vanishes linearly at the boundary, like delta / (8 pi^3).
delta = 1e-6
print("J(2pi - 1e-6) =", c1.jacobian(H, c1.Covector([1, 0], 2 * math.pi - delta)),
      " delta/(8 pi^3) =", delta / (8 * math.pi**3))

# log inverts exp on the injectivity domain; distance is |p_x|.
p = c1.Covector(rng.normal(size=5), 0.8 * G.pz_limit)
q = c1.exp(G, p)
back = c1.log(G, q)
print("\nlog(exp(p)) - p:", np.abs(back.as_array() - p.as_array()).max())
print("d(e, exp p) =", c1.distance(G, c1.identity(G), q), " |p_x| =", np.linalg.norm(p.px))

# Points on the vertical axis are reached by a continuum of geodesics.
try:
    c1.log(H, c1.GroupPoint([0.0, 0.0], 1.0))
except CutLocus as exc:
    print("vertical axis:", exc)

# Midpoint of the geodesic from e to exp((1,0), pi).
y = c1.exp(H, c1.Covector([1.0, 0.0], math.pi))
mid = c1.homothety(H, c1.identity(H), y, 0.5)
print("midpoint:", mid, " expected z:", (math.pi / 2 - 1) / (2 * math.pi**2))
