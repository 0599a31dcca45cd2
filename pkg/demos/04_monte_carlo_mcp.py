"""Monte Carlo MCP(K, N) checks, dilations and the exponent of mu(Omega_t).

Writes one CSV per check into ``demo_output/`` (t, lhs, rhs, margin,
std_error), ready for plotting elsewhere.
"""
import pathlib

import numpy as np

from carnot_mcp import corank1 as c1
from carnot_mcp import mcp

out = pathlib.Path("demo_output")
out.mkdir(exist_ok=True)
H = c1.from_blocks(0, [1])
box = mcp.OmegaSpec.box([(0.2, 1.0), (0.2, 1.0)], (-2.0, 2.0))

for K, N in [(0, 5), (-1, 5), (0, 4.5), (0, 4)]:
    rep = mcp.mcp_check(H, K, N, box, samples=200_000, seed=0)
    inner = rep.t_grid < 1
    worst = np.argmin(rep.margins[inner] / rep.std_errors[inner])
    print(f"MCP({K}, {N}): {rep.verdict:<5} worst margin {rep.margins[inner][worst]:+.3e} "
          f"(+- {rep.std_errors[inner][worst]:.1e}) at t={rep.t_grid[inner][worst]:.3g}")
    (out / f"mcp_K{K}_N{N}.csv").write_text(rep.to_csv())

# Dilations: delta_eps maps (G, d, mu) to (G, d/eps, mu/eps^Q), so a
# curvature bound K on delta_eps(Omega) is the bound eps^2 K on Omega.
rep = mcp.dilation_consistency_check(H, box, K=-1, N=5, eps_list=(0.5, 2.0), samples=50_000)
for row in rep.rows:
    print(f"eps={row.eps}: max |margin difference| {np.abs(row.margin_dilated - row.margin_rescaled).max():.2e}")

# mu(Omega_t) ~ C t^N with N the geodesic dimension; metric balls scale with Q.
for name, G in [("H3", H), ("kernel k=4", c1.from_blocks(2, [1]))]:
    fit = mcp.contraction_fit(G, samples=100_000)
    print(f"{name}: homothety slope {fit.slope:.4f} (k+3 = {G.k + 3})")
ball = mcp.contraction_fit(H, mode="ball", samples=100_000)
print(f"H3: ball slope {ball.slope:.4f} (Q = 4)")
