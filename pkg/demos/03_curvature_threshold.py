"""Where the curvature exponent k + 3 comes from.

After the change of variables mu(Omega_t) = t^(k+1) int_A J(t p) dp, the
MCP(0, N) inequality holds pointwise when J(tp) >= t^(N-k-1) J(p). At
p_z = 0 the Jacobian is exactly quadratic in t, so nothing below N = k + 3
can work.
"""
import numpy as np

from carnot_mcp import corank1 as c1
from carnot_mcp import mcp

groups = {
    "Heisenberg H3 (k=2)": c1.from_blocks(0, [1]),
    "Heisenberg H5 (k=4)": c1.from_blocks(0, [1, 1]),
    "kernel group blockdiag(0_2, J) (k=4)": c1.from_blocks(2, [1]),
}
for name, G in groups.items():
    k = G.k
    at = mcp.pointwise_contraction_check(G, k + 3)
    below = mcp.find_violation(G, k + 3 - 0.01)
    print(f"{name}")
    print(f"  N = k+3 = {k + 3}: pass={at.passed}, worst ratio {at.worst_ratio:.15f}")
    print(f"  N = {k + 2.99}: violation at p_z={below.covector.pz}, t={below.t:.3g}, ratio {below.ratio:.4f}")
    print(f"  estimated exponent {mcp.estimate_curvature_exponent(G):.8f}")

# The ratio J(tp)/J(p) at p_z = 0 is t^2 on the nose.
G = groups["Heisenberg H3 (k=2)"]
t = np.array([0.5, 0.1, 0.01])
print("\nJ(tp)/J(p) at p_z = 0:", mcp.contraction_ratios(G, 3, np.array([[0.6, 0.8, 0.0]]), t)[0], "vs t^2", t**2)

# The one-variable inequality behind it: g(tx) >= t^3 g(x) for g = sin - x cos.
ok = c1.g_contraction_check(3)
bad = c1.g_contraction_check(2)
print(f"g(tx) >= t^3 g(x): {ok.passed}; f >= 0: {ok.f_nonnegative}; with t^2 instead: witness {bad.witness}")
