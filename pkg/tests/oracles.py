"""Independent reference computations used only by the tests.

Nothing here calls the closed forms under test: geodesics come from a
fixed-step RK4 integration of the Hamilton equations in the original
(non-canonical) coordinates, Jacobians from central differences, and the
expanded Jacobian formula is coded literally, denominator and all.
"""
from __future__ import annotations

import numpy as np


def hamilton_rhs(A, pz, h, x):
    """``h' = -p_z A h``, ``x' = h``, ``z' = -1/2 h^T A x``."""
    dh = -pz[:, None] * (h @ A.T)
    dz = -0.5 * np.einsum("si,ij,sj->s", h, A, x)
    return dh, h, dz


def rk4_exp(A, px, pz, steps: int = 2000):
    """Endpoint at time 1 of the normal geodesic with initial covector ``(px, pz)``."""
    A = np.asarray(A, dtype=float)
    h = np.array(px, dtype=float, ndmin=2)
    pz = np.array(pz, dtype=float, ndmin=1)
    x = np.zeros_like(h)
    z = np.zeros(len(h))
    dt = 1.0 / steps
    for _ in range(steps):
        k1 = hamilton_rhs(A, pz, h, x)
        k2 = hamilton_rhs(A, pz, h + 0.5 * dt * k1[0], x + 0.5 * dt * k1[1])
        k3 = hamilton_rhs(A, pz, h + 0.5 * dt * k2[0], x + 0.5 * dt * k2[1])
        k4 = hamilton_rhs(A, pz, h + dt * k3[0], x + dt * k3[1])
        h = h + dt / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        x = x + dt / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        z = z + dt / 6 * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2])
    return x, z


def fd_jacobian(exp_fn, p, step: float = 1e-6):
    """Determinant of the central-difference Jacobian of ``exp_fn`` at ``p``."""
    p = np.asarray(p, dtype=float)
    n = len(p)
    M = np.empty((n, n))
    for j in range(n):
        e = np.zeros(n)
        e[j] = step
        M[:, j] = (exp_fn(p + e) - exp_fn(p - e)) / (2 * step)
    return np.linalg.det(M)


def literal_jacobian(alphas, blocks_sq, pz):
    """Expanded product formula with the ``p_z^(2d+2)`` denominator (``p_z != 0``)."""
    alphas = np.asarray(alphas, dtype=float)
    d = len(alphas)
    s = np.sin(alphas * pz / 2)
    total = 0.0
    for i in range(d):
        others = np.prod([s[j] ** 2 for j in range(d) if j != i])
        w = alphas[i] * pz / 2
        total += blocks_sq[i] * others * s[i] * (s[i] - w * np.cos(w))
    return 2 ** (2 * d) / (np.prod(alphas) ** 2 * pz ** (2 * d + 2)) * total


def brute_force_violation(alphas, kernel_dim, N, pz_values, t_values, radius=1.0):
    """Smallest ``J(tp) / (t^(N-k-1) J(p))`` over a direction/p_z/t grid, literal formula."""
    alphas = np.asarray(alphas, dtype=float)
    k = kernel_dim + 2 * len(alphas)
    worst = np.inf
    for i in range(len(alphas)):
        sq = np.zeros(len(alphas))
        sq[i] = radius**2
        for pz in pz_values:
            j0 = literal_jacobian(alphas, sq, pz)
            for t in t_values:
                jt = literal_jacobian(alphas, t * t * sq, t * pz)
                worst = min(worst, jt / (t ** (N - k - 1) * j0))
    return worst


def random_skew(k: int, rng) -> np.ndarray:
    M = rng.normal(size=(k, k))
    return M - M.T


def random_orthogonal(k: int, rng) -> np.ndarray:
    Q, R = np.linalg.qr(rng.normal(size=(k, k)))
    return Q * np.sign(np.diag(R))
