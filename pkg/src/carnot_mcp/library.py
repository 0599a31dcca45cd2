"""Built-in example algebras and corank-1 bracket matrices."""
from __future__ import annotations

from fractions import Fraction
from itertools import combinations

import numpy as np

from .lie import StratifiedLieAlgebra, validate_algebra

J2 = ((0, 1), (-1, 0))


def corank1_algebra(A, name: str = "") -> StratifiedLieAlgebra:
    """Algebra with ``[e_i, e_j] = A_ij e_k`` on a rank-``k`` horizontal layer."""
    A = [[Fraction(v) for v in row] for row in A]
    k = len(A)
    brackets = [(i, j, {k: A[i][j]}) for i in range(k) for j in range(i + 1, k) if A[i][j]]
    return validate_algebra(k + 1, [1] * k + [2], brackets, name=name)


def block_matrix(kernel_dim: int, alphas) -> list[list[Fraction]]:
    """``blockdiag(0_m, a_1 J, ..., a_d J)`` with exact entries."""
    k = kernel_dim + 2 * len(alphas)
    A = [[Fraction(0)] * k for _ in range(k)]
    for i, a in enumerate(alphas):
        r = kernel_dim + 2 * i
        A[r][r + 1] = Fraction(a)
        A[r + 1][r] = -Fraction(a)
    return A


def heisenberg_matrix(d: int) -> list[list[Fraction]]:
    return block_matrix(0, [1] * d)


def heisenberg(d: int) -> StratifiedLieAlgebra:
    """Lie algebra of the Heisenberg group of dimension ``2d + 1``."""
    if d < 1:
        raise ValueError("d must be positive")
    return corank1_algebra(heisenberg_matrix(d), name=f"heisenberg:{d}")


def kernel_group_matrix(kernel_dim: int, alphas=(1,)) -> list[list[Fraction]]:
    return block_matrix(kernel_dim, alphas)


def kernel_group(kernel_dim: int, alphas=(1,)) -> StratifiedLieAlgebra:
    """Corank-1 algebra whose bracket matrix has a ``kernel_dim`` kernel."""
    label = ",".join(str(Fraction(a)) for a in alphas)
    return corank1_algebra(block_matrix(kernel_dim, alphas), name=f"kernel:{kernel_dim}:{label}")


def engel() -> StratifiedLieAlgebra:
    """Engel algebra: ``[e1, e2] = e3``, ``[e2, e3] = -e4`` (0-based below)."""
    return validate_algebra(4, [1, 1, 2, 3], [(0, 1, {2: 1}), (1, 2, {3: -1})], name="engel")


def free_step2(r: int) -> StratifiedLieAlgebra:
    """Free nilpotent algebra of rank ``r`` and step 2."""
    pairs = list(combinations(range(r), 2))
    brackets = [(i, j, {r + p: 1}) for p, (i, j) in enumerate(pairs)]
    return validate_algebra(r + len(pairs), [1] * r + [2] * len(pairs), brackets, name=f"free:{r}")


def abelian(n: int) -> StratifiedLieAlgebra:
    """Commutative algebra: the Euclidean (Riemannian) case."""
    return validate_algebra(n, [1] * n, [], name=f"abelian:{n}")


def quaternionic_heisenberg() -> StratifiedLieAlgebra:
    """Rank 4, ``dim g_2 = 3``; brackets are left multiplication by i, j, k."""
    left = {
        "i": [[0, -1, 0, 0], [1, 0, 0, 0], [0, 0, 0, -1], [0, 0, 1, 0]],
        "j": [[0, 0, -1, 0], [0, 0, 0, 1], [1, 0, 0, 0], [0, -1, 0, 0]],
        "k": [[0, 0, 0, -1], [0, 0, -1, 0], [0, 1, 0, 0], [1, 0, 0, 0]],
    }
    brackets = []
    for a in range(4):
        for b in range(a + 1, 4):
            coeffs = {4 + m: left[q][a][b] for m, q in enumerate("ijk") if left[q][a][b]}
            if coeffs:
                brackets.append((a, b, coeffs))
    return validate_algebra(7, [1] * 4 + [2] * 3, brackets, name="quaternionic")


BUILTIN_HELP = """\
heisenberg:D        Heisenberg group of dimension 2D+1, D = 1..4
engel               Engel group (rank 2, step 3)
free:R              free nilpotent step-2 algebra of rank R = 2..3
kernel:M[:a1,a2..]  corank-1 with A = blockdiag(0_M, a1 J, a2 J, ...), default a = 1
abelian:N           Euclidean R^N
quaternionic        quaternionic Heisenberg algebra (rank 4, dim 7)"""


def parse_builtin(name: str) -> tuple[StratifiedLieAlgebra, list[list[Fraction]] | None]:
    """Resolve a built-in name to its algebra and, for corank 1, its matrix A."""
    parts = name.strip().split(":")
    kind, args = parts[0], parts[1:]
    try:
        if kind == "heisenberg":
            d = int(args[0]) if args else 1
            if not 1 <= d <= 4:
                raise ValueError("heisenberg:D needs 1 <= D <= 4")
            return heisenberg(d), heisenberg_matrix(d)
        if kind == "engel" and not args:
            return engel(), None
        if kind == "free":
            r = int(args[0]) if args else 2
            if r not in (2, 3):
                raise ValueError("free:R needs R in {2, 3}")
            alg = free_step2(r)
            return alg, (heisenberg_matrix(1) if r == 2 else None)
        if kind == "kernel":
            m = int(args[0]) if args else 1
            alphas = [Fraction(a) for a in args[1].split(",")] if len(args) > 1 else [Fraction(1)]
            if m < 0 or not alphas or any(a <= 0 for a in alphas):
                raise ValueError("kernel:M:a1,... needs M >= 0 and positive a_i")
            return kernel_group(m, alphas), block_matrix(m, alphas)
        if kind == "abelian":
            return abelian(int(args[0]) if args else 3), None
        if kind == "quaternionic" and not args:
            return quaternionic_heisenberg(), None
    except (IndexError, ValueError) as exc:
        raise KeyError(f"bad built-in {name!r}: {exc}") from None
    raise KeyError(f"unknown built-in {name!r}")


def is_builtin(name: str) -> bool:
    try:
        parse_builtin(name)
    except KeyError:
        return False
    return True


def as_float_matrix(A) -> np.ndarray:
    return np.array([[float(v) for v in row] for row in A], dtype=float)
