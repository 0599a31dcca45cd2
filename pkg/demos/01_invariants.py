"""Integer invariants of the built-in Carnot algebras.

For each algebra we print the growth vector of the distribution, the
Hausdorff dimension Q, the geodesic growth vector of a generic geodesic,
the geodesic dimension, the bound N_R = Q + n - k, and whether the group
is fat. Everything here is exact rational arithmetic.
"""
from carnot_mcp import library as lib
from carnot_mcp import lie

NAMES = ["abelian:3", "heisenberg:1", "heisenberg:2", "kernel:2", "free:3", "quaternionic", "engel"]

print(f"{'algebra':<14} {'growth':<12} {'Q':>3} {'geodesic':<12} {'N':>3} {'N_R':>4}  fat")
for name in NAMES:
    alg, _ = lib.parse_builtin(name)
    flag = lie.max_geodesic_growth(alg)
    fat = lie.is_fat(alg)
    print(f"{name:<14} {str(lie.growth_vector(alg)):<12} {lie.hausdorff_dimension(alg):>3} "
          f"{str(flag.geodesic_growth):<12} {lie.geodesic_dimension(alg, flag):>3} "
          f"{lie.rifford_bound(alg):>4}  {fat.fat}{'' if fat.certified else ' (sampled)'}")

# Outside the abelian case the geodesic dimension is strictly larger than
# Q, and Q is larger than the topological dimension.

# The Engel group has an abnormal line along e1: a covector kills every
# ad_X^i(g_1) with i < step.
engel = lib.engel()
abnormal, lam = lie.has_abnormal_line(engel, (1, 0))
print("\nEngel: line along e1 abnormal:", abnormal, "annihilated by", [str(v) for v in lam])
for j, basis in enumerate(lie.adjoint_power_span(engel, (1, 0), 2)):
    print(f"  dim ad_e1^{j}(g1) = {len(basis)}")
print("  line along e2:", lie.line_geodesic_growth(engel, (0, 1)).geodesic_growth)

# free:3 has no ample line at all; the maximal geodesic growth vector comes
# from a normal geodesic with a nonzero vertical covector.
free = lib.free_step2(3)
print("\nfree:3 line (1,2,3):", lie.line_geodesic_growth(free, (1, 2, 3)).geodesic_growth)
print("free:3 geodesic with lam=(1,-2,3):", lie.normal_geodesic_growth(free, (1, 2, 3), (1, -2, 3)).geodesic_growth)
