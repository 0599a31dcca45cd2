"""Corank-1 Carnot groups in canonical exponential coordinates.

A corank-1 group of rank ``k`` is ``R^k x R`` with the left-invariant frame
``X_i = d/dx_i - 1/2 sum_j A_ij x_j d/dz`` for a skew ``k x k`` matrix ``A``.
After an orthogonal change of basis ``A`` is ``blockdiag(0, a_1 J, ..., a_d J)``
with ``J = [[0, 1], [-1, 0]]`` and ``0 < a_1 <= ... <= a_d``. Every function
here works in those canonical coordinates: the kernel block comes first,
then the ``d`` planes. :meth:`Corank1Group.to_canonical` converts vectors
given in the original basis.

The ``*_batch`` functions are vectorized over leading axes and are what the
Monte Carlo code uses; the scalar functions wrap them with domain checks.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    AllZero,
    ConvergenceError,
    CutLocus,
    IdentityPoint,
    NotSkew,
    OutOfDomain,
)

TWO_PI = 2.0 * math.pi
_SERIES_CUTOFF = 0.5


@dataclass(frozen=True, eq=False)
class Corank1Group:
    k: int
    A: np.ndarray  # canonical block form
    O: np.ndarray  # original coordinates = O @ canonical coordinates
    alphas: np.ndarray
    A_raw: np.ndarray

    @property
    def d(self) -> int:
        return len(self.alphas)

    @property
    def kernel_dim(self) -> int:
        return self.k - 2 * self.d

    @property
    def n(self) -> int:
        return self.k + 1

    @property
    def pz_limit(self) -> float:
        """Half-width ``2 pi / a_d`` of the injectivity domain in ``p_z``."""
        return TWO_PI / float(self.alphas[-1])

    def to_canonical(self, v) -> np.ndarray:
        return np.asarray(v, dtype=float) @ self.O

    def from_canonical(self, v) -> np.ndarray:
        return np.asarray(v, dtype=float) @ self.O.T


@dataclass(frozen=True, eq=False)
class Covector:
    px: np.ndarray
    pz: float

    def __post_init__(self):
        object.__setattr__(self, "px", np.asarray(self.px, dtype=float))
        object.__setattr__(self, "pz", float(self.pz))

    def as_array(self) -> np.ndarray:
        return np.append(self.px, self.pz)

    def __repr__(self):
        return f"Covector(px={self.px.tolist()}, pz={self.pz!r})"


@dataclass(frozen=True, eq=False)
class GroupPoint:
    x: np.ndarray
    z: float

    def __post_init__(self):
        object.__setattr__(self, "x", np.asarray(self.x, dtype=float))
        object.__setattr__(self, "z", float(self.z))

    def as_array(self) -> np.ndarray:
        return np.append(self.x, self.z)

    def __repr__(self):
        return f"GroupPoint(x={self.x.tolist()}, z={self.z!r})"


def identity(G: Corank1Group) -> GroupPoint:
    return GroupPoint(np.zeros(G.k), 0.0)


# --- canonical form -------------------------------------------------------


def block_form(kernel_dim: int, alphas) -> np.ndarray:
    alphas = np.asarray(alphas, dtype=float)
    k = kernel_dim + 2 * len(alphas)
    A = np.zeros((k, k))
    for i, a in enumerate(alphas):
        r = kernel_dim + 2 * i
        A[r, r + 1] = a
        A[r + 1, r] = -a
    return A


def _already_canonical(A: np.ndarray, tol: float):
    k = A.shape[0]
    m = 0
    while m < k and not np.any(A[m]) and not np.any(A[:, m]):
        m += 1
    if (k - m) % 2:
        return None
    alphas = np.array([A[r, r + 1] for r in range(m, k, 2)])
    if len(alphas) == 0 or np.any(alphas <= tol) or np.any(np.diff(alphas) < 0):
        return None
    if not np.array_equal(A, block_form(m, alphas)):
        return None
    return m, alphas


def canonicalize(A_raw, tol: float = 1e-12) -> Corank1Group:
    """Orthogonal reduction of a skew matrix to canonical block form.

    Singular values come from the SVD of ``A``, accurate to ``eps |A|``
    (square roots of the eigenvalues of ``A^T A`` are only good to
    ``sqrt(eps) |A|``, which hides the kernel). Each 2-plane is spanned by a
    right singular vector ``u`` and ``-A u / a``, taken orthogonal to the
    planes already chosen. Singular values below
    ``1e-10 * max|A|`` go to the kernel block.

    Raises
    ------
    NotSkew
        ``A + A^T`` exceeds ``tol`` somewhere; the message names the entry.
    AllZero
        ``A`` has no nonzero singular value.
    """
    A_raw = np.array(A_raw, dtype=float)
    if A_raw.ndim != 2 or A_raw.shape[0] != A_raw.shape[1]:
        raise NotSkew(f"A must be square, got shape {A_raw.shape}")
    k = A_raw.shape[0]
    sym = np.abs(A_raw + A_raw.T)
    if sym.size and sym.max() > tol:
        i, j = np.unravel_index(np.argmax(sym), sym.shape)
        raise NotSkew(f"A[{i},{j}] + A[{j},{i}] = {A_raw[i, j] + A_raw[j, i]:.3g} is not zero")
    A = 0.5 * (A_raw - A_raw.T)
    scale = np.abs(A).max() if A.size else 0.0
    if scale == 0.0:
        raise AllZero("A = 0 describes the abelian group, not a corank-1 group")

    hit = _already_canonical(A, tol)
    if hit is not None:
        m, alphas = hit
        return Corank1Group(k=k, A=A.copy(), O=np.eye(k), alphas=alphas, A_raw=A_raw)

    rank_tol = 1e-10 * scale
    _, svals, vt = np.linalg.svd(A)
    evecs = vt.T
    nonzero = svals > rank_tol
    kernel = evecs[:, ~nonzero]
    planes = []
    chosen = np.zeros((k, 0))
    for idx in np.flatnonzero(nonzero):
        u = evecs[:, idx]
        u = u - chosen @ (chosen.T @ u)
        norm = np.linalg.norm(u)
        if norm < 0.5:
            continue
        u /= norm
        w = -A @ u
        a = np.linalg.norm(w)
        w /= a
        w = w - chosen @ (chosen.T @ w) - u * (u @ w)
        w /= np.linalg.norm(w)
        planes.append((a, u, w))
        chosen = np.column_stack([chosen, u, w])
    planes.sort(key=lambda p: p[0])
    cols = [kernel] + [np.column_stack([u, w]) for _, u, w in planes]
    O = np.column_stack(cols)
    canon = O.T @ A @ O
    alphas = np.array([canon[r, r + 1] for r in range(kernel.shape[1], k, 2)])
    target = block_form(kernel.shape[1], alphas)
    err = np.abs(canon - target).max()
    if err > 1e-10 * max(1.0, scale):
        raise ArithmeticError(f"canonical form residual {err:.3g} too large")
    return Corank1Group(k=k, A=target, O=O, alphas=alphas, A_raw=A_raw)


def from_blocks(kernel_dim: int, alphas) -> Corank1Group:
    return canonicalize(block_form(kernel_dim, sorted(alphas)))


# --- stable special functions --------------------------------------------


def _series(w, coeffs):
    w2 = w * w
    out = np.zeros_like(w)
    for c in reversed(coeffs):
        out = out * w2 + c
    return out


# (sin w - w cos w) / w^3 = sum_n (-1)^(n+1) 2n w^(2n-2) / (2n+1)!
_GT_COEFFS = [(-1) ** (n + 1) * 2 * n / math.factorial(2 * n + 1) for n in range(1, 10)]
# (w - sin w) / w^3 = sum_n (-1)^(n+1) w^(2n-2) / (2n+1)!
_H_COEFFS = [(-1) ** (n + 1) / math.factorial(2 * n + 1) for n in range(1, 10)]


def sinc(w):
    """Unnormalized ``sin(w) / w``."""
    return np.sinc(np.asarray(w, dtype=float) / math.pi)


def gtilde(w):
    """``(sin w - w cos w) / w^3``, equal to 1/3 at 0."""
    w = np.asarray(w, dtype=float)
    small = np.abs(w) < _SERIES_CUTOFF
    safe = np.where(small, 1.0, w)
    direct = (np.sin(safe) - safe * np.cos(safe)) / safe**3
    return np.where(small, _series(w, _GT_COEFFS), direct)


def w_minus_sin_over_cube(w):
    """``(w - sin w) / w^3``, equal to 1/6 at 0."""
    w = np.asarray(w, dtype=float)
    small = np.abs(w) < _SERIES_CUTOFF
    safe = np.where(small, 1.0, w)
    direct = (safe - np.sin(safe)) / safe**3
    return np.where(small, _series(w, _H_COEFFS), direct)


def g_function(x):
    """``sin x - x cos x``, evaluated without cancellation near 0."""
    x = np.asarray(x, dtype=float)
    return x**3 * gtilde(x)


def phi(w):
    """``(w - sin w) / sin^2(w/2)``: odd, increasing on (-2 pi, 2 pi)."""
    w = np.asarray(w, dtype=float)
    return 4.0 * w * w_minus_sin_over_cube(w) / sinc(w / 2) ** 2


def phi_prime(w):
    w = np.asarray(w, dtype=float)
    small = np.abs(w) < 1e-4
    safe = np.where(small, 1.0, w)
    s2 = np.sin(safe / 2) ** 2
    direct = 2.0 - (safe - np.sin(safe)) * np.sin(safe) / (2.0 * s2 * s2)
    return np.where(small, 2.0 / 3.0 + w * w / 30.0, direct)


# --- exponential map and Jacobian ----------------------------------------


def _split(G: Corank1Group, px):
    px = np.asarray(px, dtype=float)
    m = G.kernel_dim
    blocks = px[..., m:].reshape(px.shape[:-1] + (G.d, 2))
    return px[..., :m], blocks


def exp_batch(G: Corank1Group, px, pz):
    """Exponential map at the identity; returns ``(x, z)`` arrays."""
    pz = np.asarray(pz, dtype=float)
    kernel, blocks = _split(G, px)
    w = G.alphas * pz[..., None]
    s = sinc(w)
    c = -np.sin(w / 2) * sinc(w / 2)  # (cos w - 1) / w
    p1, p2 = blocks[..., 0], blocks[..., 1]
    xb = np.stack([s * p1 + c * p2, s * p2 - c * p1], axis=-1)
    sq = p1 * p1 + p2 * p2
    z = 0.5 * np.sum(sq * G.alphas * w * w_minus_sin_over_cube(w), axis=-1)
    x = np.concatenate([np.broadcast_to(kernel, xb.shape[:-2] + (G.kernel_dim,)),
                        xb.reshape(xb.shape[:-2] + (2 * G.d,))], axis=-1)
    return x, z


def exp(G: Corank1Group, p: Covector) -> GroupPoint:
    x, z = exp_batch(G, p.px, p.pz)
    return GroupPoint(x, float(z))


def jacobian_batch(G: Corank1Group, px, pz):
    """Jacobian determinant of the exponential map, no domain check.

    Uses ``sum_i |p^i|^2 (a_i^2 / 4) gt(w_i) sinc(w_i) prod_{j != i} sinc(w_j)^2``
    with ``w_i = a_i p_z / 2``, which is free of the ``p_z^(2d+2)``
    denominator of the expanded formula.
    """
    return jacobian_from_block_norms(G, block_norms_sq(G, px), pz)


def block_norms_sq(G: Corank1Group, px) -> np.ndarray:
    """``|p^i|^2`` for each 2-plane block, on the last axis."""
    _, blocks = _split(G, px)
    return np.sum(blocks * blocks, axis=-1)


def jacobian_from_block_norms(G: Corank1Group, sq, pz):
    """``J`` from the squared block norms ``|p^i|^2`` (last axis, length ``d``)."""
    pz = np.asarray(pz, dtype=float)
    w = 0.5 * G.alphas * pz[..., None]
    sc = sinc(w)
    terms = sq * 0.25 * G.alphas**2 * gtilde(w) * sc
    if G.d == 1:
        return terms[..., 0]
    sc2 = sc * sc
    loo = np.ones(np.broadcast_shapes(terms.shape, sc.shape))
    for j in range(G.d):
        mask = np.arange(G.d) != j
        loo = loo * np.where(mask, sc2[..., j:j + 1], 1.0)
    return np.sum(terms * loo, axis=-1)


def jacobian(G: Corank1Group, p: Covector) -> float:
    """Jacobian determinant of ``exp`` at ``p``.

    Raises
    ------
    OutOfDomain
        ``|p_z| >= 2 pi / a_d``.
    """
    if abs(p.pz) >= G.pz_limit:
        raise OutOfDomain(f"|p_z| = {abs(p.pz):.6g} >= 2 pi / a_d = {G.pz_limit:.6g}")
    return float(jacobian_batch(G, p.px, p.pz))


def in_injectivity_domain(G: Corank1Group, p: Covector) -> bool:
    _, blocks = _split(G, p.px)
    return abs(p.pz) < G.pz_limit and bool(np.any(blocks != 0.0))


# --- logarithm ------------------------------------------------------------


def _solve_pz(sq, alphas, z, bound):
    """Root of ``sum sq_i a_i phi(a_i p) / 8 = z`` on ``(-bound, bound)``."""

    def F(p):
        return float(np.sum(sq * alphas * phi(alphas * p)) / 8.0 - z)

    def dF(p):
        return float(np.sum(sq * alphas**2 * phi_prime(alphas * p)) / 8.0)

    lo, hi = -bound, bound
    if z == 0.0:
        return 0.0
    while hi - lo > 1e-3:
        mid = 0.5 * (lo + hi)
        if F(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    p = 0.5 * (lo + hi)
    for _ in range(100):
        f = F(p)
        if f == 0.0:
            return p
        if f < 0.0:
            lo = p
        else:
            hi = p
        step = f / dF(p)
        nxt = p - step
        if not lo < nxt < hi:
            nxt = 0.5 * (lo + hi)
        if abs(nxt - p) < 1e-13 * max(1.0, abs(p)):
            return nxt
        p = nxt
    raise ConvergenceError(f"p_z root did not converge for z = {z!r}")


def log(G: Corank1Group, q: GroupPoint, tol: float = 1e-9) -> Covector:
    """Inverse of ``exp`` on the injectivity domain.

    The vertical coordinate determines ``p_z`` through a scalar equation that
    is strictly increasing in ``p_z``; the horizontal blocks are then
    recovered by inverting ``2 x 2`` rotation-scalings.

    Raises
    ------
    IdentityPoint
        ``q`` is the identity.
    CutLocus
        ``q`` is not the image of a covector with ``|p_z| < 2 pi / a_d`` and
        ``A p_x != 0``.
    ConvergenceError
        ``|exp(log q) - q|`` exceeds ``tol * max(1, |q|)``.
    """
    x = np.asarray(q.x, dtype=float)
    kernel, blocks = _split(G, x)
    sq = np.sum(blocks * blocks, axis=-1)
    if not np.any(sq > 0.0):
        if q.z == 0.0 and not np.any(kernel):
            raise IdentityPoint("log is undefined at the identity")
        raise CutLocus("point is reached only by abnormal covectors (A p_x = 0)")
    active = sq > 0.0
    bound = TWO_PI / float(G.alphas[active].max())
    pz = _solve_pz(sq[active], G.alphas[active], q.z, bound)
    if abs(pz) >= G.pz_limit:
        raise CutLocus(f"root p_z = {pz:.6g} lies outside |p_z| < {G.pz_limit:.6g}")
    w = G.alphas * pz
    a = sinc(w)
    b = -np.sin(w / 2) * sinc(w / 2)
    det = a * a + b * b
    x1, x2 = blocks[:, 0], blocks[:, 1]
    # (aI + bJ)^-1 = (aI - bJ) / (a^2 + b^2)
    p_blocks = np.stack([(a * x1 - b * x2) / det, (a * x2 + b * x1) / det], axis=-1)
    p = Covector(np.concatenate([kernel, p_blocks.ravel()]), pz)
    back = exp(G, p)
    err = np.abs(back.as_array() - q.as_array()).max()
    if err > tol * max(1.0, np.abs(q.as_array()).max()):
        raise ConvergenceError(f"log roundtrip error {err:.3g} exceeds tolerance")
    return p


# --- group structure ------------------------------------------------------


def group_mul(G: Corank1Group, a: GroupPoint, b: GroupPoint) -> GroupPoint:
    """``(x_a + x_b, z_a + z_b + <x_a, A x_b> / 2)``."""
    _, pa = _split(G, a.x)
    _, pb = _split(G, b.x)
    # blockwise a_1 b_2 - a_2 b_1 keeps a * a^-1 exactly the identity
    cross = float(np.sum(G.alphas * (pa[:, 0] * pb[:, 1] - pa[:, 1] * pb[:, 0])))
    return GroupPoint(a.x + b.x, a.z + b.z + 0.5 * cross)


def group_inv(G: Corank1Group, a: GroupPoint) -> GroupPoint:
    return GroupPoint(-a.x, -a.z)


def dilate(G: Corank1Group, a: GroupPoint, eps: float) -> GroupPoint:
    if not eps > 0:
        raise ValueError("dilation factor must be positive")
    return GroupPoint(eps * a.x, eps * eps * a.z)


def _same(a: GroupPoint, b: GroupPoint) -> bool:
    return a.z == b.z and np.array_equal(a.x, b.x)


def distance(G: Corank1Group, q1: GroupPoint, q2: GroupPoint) -> float:
    """Carnot-Caratheodory distance, ``|p_x|`` of ``log(q1^-1 q2)``."""
    if _same(q1, q2):
        return 0.0
    q = group_mul(G, group_inv(G, q1), q2)
    kernel, blocks = _split(G, q.x)
    if not np.any(blocks) and q.z == 0.0:
        return float(np.linalg.norm(kernel))  # straight line inside the kernel of A
    p = log(G, q)
    return float(np.linalg.norm(p.px))


def homothety(G: Corank1Group, x0: GroupPoint, y: GroupPoint, t: float) -> GroupPoint:
    """Point at parameter ``t`` on the minimizing geodesic from ``x0`` to ``y``."""
    if not 0.0 <= t <= 1.0:
        raise ValueError("t must lie in [0, 1]")
    if _same(x0, y):
        return x0
    p = log(G, group_mul(G, group_inv(G, x0), y))
    return group_mul(G, x0, exp(G, Covector(t * p.px, t * p.pz)))


# --- contraction inequality for g(x) = sin x - x cos x ----------------------


@dataclass(frozen=True)
class GCheck:
    passed: bool
    worst_margin: float  # min of g(tx) / (t^N g(x)) - 1 over the grid
    witness: tuple[float, float] | None  # (x, t) of a violation
    f_nonnegative: bool
    f_min: float


def default_g_grid(size: int = 200):
    x = np.linspace(0.0, math.pi, size + 2)[1:-1]
    t = np.linspace(0.0, 1.0, size)
    return x, t


def f_function(s):
    """``(3 - s^2) sin s - 3 s cos s``; series near 0 where it is ~ s^5/15."""
    s = np.asarray(s, dtype=float)
    coeffs = [(-1) ** n * 4 * n * (n - 1) / math.factorial(2 * n + 1) for n in range(2, 12)]
    small = np.abs(s) < 1.0
    safe = np.where(small, 1.0, s)
    direct = (3 - safe**2) * np.sin(safe) - 3 * safe * np.cos(safe)
    return np.where(small, s**5 * _series(s, coeffs), direct)


def g_contraction_check(N: float, grid_x=None, grid_t=None, rel_slack: float = 1e-12) -> GCheck:
    """Check ``g(t x) >= t^N g(x)`` on a grid, and ``f >= 0`` on ``grid_x``."""
    dx, dt = default_g_grid()
    grid_x = dx if grid_x is None else np.asarray(grid_x, dtype=float)
    grid_t = dt if grid_t is None else np.asarray(grid_t, dtype=float)
    if grid_x.size == 0 or grid_t.size == 0:
        raise ValueError("grids must be nonempty")
    X, T = np.meshgrid(grid_x, grid_t, indexing="ij")
    lhs = g_function(T * X)
    rhs = T**N * g_function(X)
    bad = lhs < rhs - rel_slack * np.abs(rhs)
    with np.errstate(divide="ignore", invalid="ignore"):
        margin = np.where(rhs > 0, lhs / rhs - 1.0, np.inf)
    witness = None
    if bad.any():
        i, j = np.unravel_index(np.argmin(np.where(bad, margin, np.inf)), bad.shape)
        witness = (float(X[i, j]), float(T[i, j]))
    f = f_function(grid_x)
    return GCheck(
        passed=not bad.any(),
        worst_margin=float(np.min(margin)),
        witness=witness,
        f_nonnegative=bool(np.all(f >= 0.0)),
        f_min=float(f.min()),
    )
