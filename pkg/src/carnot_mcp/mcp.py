"""Measure contraction checks on corank-1 Carnot groups.

Regions ``Omega`` are described in covector coordinates as the image
``exp(A)`` of a set ``A`` inside the injectivity domain. Their homotheties
with centre the identity are ``exp(tA)``, so by the change of variables

    mu(Omega_t) = t^(k+1) * integral over A of J(t p) dp,

and ``d(e, exp p) = |p_x|``. Every estimate below is built from these two
facts and the Jacobian ``J`` of the exponential map.
"""
from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .corank1 import Corank1Group, Covector, block_norms_sq, jacobian_batch, jacobian_from_block_norms
from .errors import BadOmega, DomainError, PositiveK

CHUNK = 1 << 14
RATIO_SLACK = 1e-12


def default_t_grid() -> np.ndarray:
    """``{j/50 : j = 1..50} U {2^-j : j = 1..20}``, sorted."""
    t = np.concatenate([np.arange(1, 51) / 50.0, 2.0 ** -np.arange(1, 21)])
    return np.unique(t)


def s_K(K: float, t):
    """Distortion function of the constant-curvature model space.

    ``sin(sqrt(K) t) / sqrt(K)`` for ``K > 0``, ``t`` for ``K = 0`` and
    ``sinh(sqrt(-K) t) / sqrt(-K)`` for ``K < 0``; a Taylor series is used
    where ``|K| t^2 < 1e-8`` so the three branches join continuously.
    """
    t = np.asarray(t, dtype=float)
    if K > 0 and np.any(t >= math.pi / math.sqrt(K)):
        raise DomainError(f"s_K needs t < pi / sqrt(K) = {math.pi / math.sqrt(K):.6g}")
    if K == 0:
        return t.copy() if t.ndim else float(t)
    x = K * t * t
    series = t * (1.0 - x / 6.0 + x * x / 120.0)
    r = math.sqrt(abs(K))
    exact = np.sin(r * t) / r if K > 0 else np.sinh(r * t) / r
    out = np.where(np.abs(x) < 1e-8, series, exact)
    return out if out.ndim else float(out)


def mcp_weight(K: float, N: float, t, dist):
    """Integrand factor ``t [s_K(t d / sqrt(N-1)) / s_K(d / sqrt(N-1))]^(N-1)``.

    The bracket is 1 when ``N = 1`` (``K <= 0``) and ``0/0`` is read as 1.
    """
    t = np.asarray(t, dtype=float)
    dist = np.asarray(dist, dtype=float)
    if N == 1:
        return np.broadcast_to(t, np.broadcast_shapes(t.shape, dist.shape)).copy()
    if K == 0:
        return t ** N * np.ones_like(dist)
    c = math.sqrt(N - 1.0)
    num = s_K(K, t * dist / c)
    den = s_K(K, dist / c)
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = np.where(den == 0.0, 1.0, num / np.where(den == 0.0, 1.0, den))
    return t * ratio ** (N - 1.0)


# --- regions --------------------------------------------------------------


@dataclass(frozen=True)
class OmegaSpec:
    """Region ``A`` in covector coordinates ``(p_x, p_z)``.

    ``covector_box`` uses ``bounds``: ``k + 1`` intervals, the last for
    ``p_z``. ``covector_ball_pullback`` is ``{|p_x| <= radius, |p_z| <= pz_cap}``.
    """

    kind: str
    bounds: tuple[tuple[float, float], ...] | None = None
    radius: float | None = None
    pz_cap: float | None = None
    margin: float = 0.01

    @classmethod
    def box(cls, px_bounds, pz_bounds, margin: float = 0.01) -> "OmegaSpec":
        b = tuple((float(lo), float(hi)) for lo, hi in px_bounds) + ((float(pz_bounds[0]), float(pz_bounds[1])),)
        return cls("covector_box", bounds=b, margin=margin)

    @classmethod
    def ball(cls, radius: float, pz_cap: float, margin: float = 0.01) -> "OmegaSpec":
        return cls("covector_ball_pullback", radius=float(radius), pz_cap=float(pz_cap), margin=margin)

    @classmethod
    def default_box(cls, G: Corank1Group) -> "OmegaSpec":
        cap = min(2.0, G.pz_limit - 0.05)
        return cls.box([(0.2, 1.0)] * G.k, (-cap, cap))

    def validate(self, G: Corank1Group) -> None:
        if self.margin < 0.01:
            raise BadOmega("margin to the boundary of the domain must be at least 0.01")
        limit = G.pz_limit - self.margin
        if self.kind == "covector_box":
            if self.bounds is None or len(self.bounds) != G.k + 1:
                raise BadOmega(f"box needs {G.k + 1} intervals")
            if any(not hi > lo for lo, hi in self.bounds):
                raise BadOmega("box has zero volume")
            lo, hi = self.bounds[-1]
            if max(abs(lo), abs(hi)) > limit:
                raise BadOmega(f"p_z range [{lo}, {hi}] leaves |p_z| <= {limit:.6g}")
        elif self.kind == "covector_ball_pullback":
            if not (self.radius and self.radius > 0 and self.pz_cap and self.pz_cap > 0):
                raise BadOmega("ball needs positive radius and p_z cap")
            if self.pz_cap > limit:
                raise BadOmega(f"p_z cap {self.pz_cap} exceeds {limit:.6g}")
        else:
            raise BadOmega(f"unknown region kind {self.kind!r}")

    def volume(self, G: Corank1Group) -> float:
        if self.kind == "covector_box":
            return float(np.prod([hi - lo for lo, hi in self.bounds]))
        k = G.k
        ball = math.pi ** (k / 2) / math.gamma(k / 2 + 1) * self.radius**k
        return ball * 2.0 * self.pz_cap

    def sample(self, G: Corank1Group, rng: np.random.Generator, size: int):
        if self.kind == "covector_box":
            lo = np.array([b[0] for b in self.bounds])
            hi = np.array([b[1] for b in self.bounds])
            u = rng.random((size, G.k + 1))
            p = lo + (hi - lo) * u
            return p[:, :-1], p[:, -1]
        g = rng.normal(size=(size, G.k))
        g /= np.linalg.norm(g, axis=1, keepdims=True)
        r = self.radius * rng.random(size) ** (1.0 / G.k)
        pz = self.pz_cap * (2.0 * rng.random(size) - 1.0)
        return g * r[:, None], pz

    def dilated(self, eps: float) -> "OmegaSpec":
        """Region whose image is ``delta_eps(exp(A))``: ``p_x`` scales, ``p_z`` does not."""
        if self.kind == "covector_box":
            b = tuple((eps * lo, eps * hi) for lo, hi in self.bounds[:-1]) + (self.bounds[-1],)
            return replace(self, bounds=b)
        return replace(self, radius=eps * self.radius)

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "margin": self.margin}
        if self.kind == "covector_box":
            d["bounds"] = [list(b) for b in self.bounds]
        else:
            d["radius"] = self.radius
            d["pz_cap"] = self.pz_cap
        return d


def _chunk_rng(seed: int, index: int) -> np.random.Generator:
    # Counter-based stream per chunk: results do not depend on the schedule.
    return np.random.Generator(np.random.Philox(key=seed, counter=[0, 0, index, 0]))


def _chunks(samples: int) -> list[tuple[int, int]]:
    return [(i, min(CHUNK, samples - i * CHUNK)) for i in range((samples + CHUNK - 1) // CHUNK)]


def _run_chunks(fn, samples: int, workers: int):
    jobs = _chunks(samples)
    if workers <= 1:
        return [fn(i, n) for i, n in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda job: fn(*job), jobs))


# --- pointwise checks -----------------------------------------------------


@dataclass(frozen=True)
class Witness:
    """Covector ``p`` and ratio ``t`` where ``J(tp) < t^(N-k-1) J(p)``."""

    covector: Covector
    t: float
    ratio: float  # J(tp) / (t^(N-k-1) J(p))

    def to_dict(self) -> dict:
        return {"px": self.covector.px.tolist(), "pz": self.covector.pz, "t": self.t, "ratio": self.ratio}


@dataclass(frozen=True)
class ContractionCheck:
    passed: bool
    worst_ratio: float
    witness: Witness | None  # argmin of the ratio, present when the check fails


def _patterns(G: Corank1Group) -> np.ndarray:
    """Unit horizontal directions exercising each block and mixtures."""
    m, d, k = G.kernel_dim, G.d, G.k
    dirs = []
    for i in range(d):
        v = np.zeros(k)
        v[m + 2 * i] = 1.0
        dirs.append(v)
    if d > 1:
        v = np.zeros(k)
        v[m::2] = 1.0
        dirs.append(v)
        v = np.zeros(k)
        v[m + 1::2] = np.arange(1, d + 1)
        dirs.append(v)
    if m:
        v = np.zeros(k)
        v[0] = 1.0
        v[m] = 1.0
        dirs.append(v)
        v = np.zeros(k)
        v[:m] = 1.0
        v[m:] = 0.1
        dirs.append(v)
    dirs = np.array(dirs)
    return dirs / np.linalg.norm(dirs, axis=1, keepdims=True)


def default_pz_nodes(G: Corank1Group) -> np.ndarray:
    """60 nodes: log-spaced toward 0 and linear toward the domain boundary."""
    L = G.pz_limit
    half = L / 2.0
    logs = np.logspace(-6, math.log10(half), 15)
    lin = np.linspace(half, L - 0.05, 16)[1:]
    pos = np.concatenate([logs, lin])
    return np.concatenate([-pos[::-1], pos])


def default_covector_grid(G: Corank1Group) -> np.ndarray:
    """Grid of covectors in the injectivity domain, rows ``(p_x, p_z)``."""
    radii = np.logspace(-3, math.log10(3.0), 20)
    pz = default_pz_nodes(G)
    pats = _patterns(G)
    px = (pats[:, None, :] * radii[None, :, None]).reshape(-1, G.k)
    P = np.repeat(px, len(pz), axis=0)
    Z = np.tile(pz, len(px))
    return np.column_stack([P, Z])


def contraction_ratios(G: Corank1Group, N: float, p_grid, t_grid) -> np.ndarray:
    """``J(tp) / (t^(N-k-1) J(p))`` with shape ``(len(p_grid), len(t_grid))``."""
    p = np.asarray(p_grid, dtype=float)
    t = np.asarray(t_grid, dtype=float)
    px, pz = p[:, :-1], p[:, -1]
    J0 = jacobian_batch(G, px, pz)
    Jt = jacobian_batch(G, t[None, :, None] * px[:, None, :], t[None, :] * pz[:, None])
    return Jt / (t[None, :] ** (N - G.k - 1.0) * J0[:, None])


def pointwise_contraction_check(G: Corank1Group, N: float, p_grid=None, t_grid=None) -> ContractionCheck:
    """Check ``J(tp) >= t^(N-k-1) J(p)`` at every grid node.

    This is the pointwise form of MCP(0, N) after the change of variables;
    the check passes when no ratio falls below ``1 - 1e-12``.
    """
    p_grid = default_covector_grid(G) if p_grid is None else np.asarray(p_grid, dtype=float)
    t_grid = default_t_grid() if t_grid is None else np.asarray(t_grid, dtype=float)
    R = contraction_ratios(G, N, p_grid, t_grid)
    i, j = np.unravel_index(np.argmin(R), R.shape)
    worst = float(R[i, j])
    passed = worst >= 1.0 - RATIO_SLACK
    witness = None
    if not passed:
        witness = Witness(Covector(p_grid[i, :-1], p_grid[i, -1]), float(t_grid[j]), worst)
    return ContractionCheck(passed, worst, witness)


def find_violation(G: Corank1Group, N: float, eps_pz: float = 0.05) -> Witness | None:
    """Search near ``p_z = 0`` for a covector breaking the MCP(0, N) integrand.

    Scans ``|p_z| <= eps_pz`` with ``t`` in ``{2^-j}`` and returns the worst
    violating node, or None.
    """
    pz = np.linspace(-eps_pz, eps_pz, 41)
    pats = _patterns(G)
    grid = np.column_stack([np.repeat(pats, len(pz), axis=0), np.tile(pz, len(pats))])
    t = 2.0 ** -np.arange(1, 41)
    R = contraction_ratios(G, N, grid, t)
    i, j = np.unravel_index(np.argmin(R), R.shape)
    if R[i, j] >= 1.0 - RATIO_SLACK:
        return None
    return Witness(Covector(grid[i, :-1], grid[i, -1]), float(t[j]), float(R[i, j]))


def estimate_curvature_exponent(G: Corank1Group, p_grid=None, t_grid=None) -> float:
    """Smallest ``N`` for which the pointwise MCP(0, N) inequality holds on the grid.

    Returns ``(k + 1) + max log(J(tp) / J(p)) / log(t)`` over nodes with
    ``t < 1``.
    """
    p_grid = default_covector_grid(G) if p_grid is None else np.asarray(p_grid, dtype=float)
    t_grid = default_t_grid() if t_grid is None else np.asarray(t_grid, dtype=float)
    t_grid = t_grid[(t_grid > 0) & (t_grid < 1)]
    ratios = contraction_ratios(G, G.k + 1.0, p_grid, t_grid)  # plain J(tp) / J(p)
    needed = np.log(ratios) / np.log(t_grid)[None, :]
    return float(G.k + 1 + needed.max())


# --- Monte Carlo ------------------------------------------------------------


@dataclass
class McpReport:
    K: float
    N: float
    t_grid: np.ndarray
    lhs: np.ndarray
    rhs: np.ndarray
    margins: np.ndarray
    std_errors: np.ndarray
    verdict: str  # "pass" | "fail" | "inconclusive"
    witness: Witness | None
    samples: int
    seed: int
    omega: OmegaSpec | None = None
    extra: dict = field(default_factory=dict)

    COLUMNS = ("t", "lhs", "rhs", "margin", "std_error")

    def rows(self) -> list[dict]:
        return [
            {"t": float(t), "lhs": float(l), "rhs": float(r), "margin": float(m), "std_error": float(s)}
            for t, l, r, m, s in zip(self.t_grid, self.lhs, self.rhs, self.margins, self.std_errors)
        ]

    def to_dict(self) -> dict:
        return {
            "K": self.K,
            "N": self.N,
            "verdict": self.verdict,
            "samples": self.samples,
            "seed": self.seed,
            "omega": self.omega.to_dict() if self.omega else None,
            "witness": self.witness.to_dict() if self.witness else None,
            "rows": self.rows(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.COLUMNS)
        for row in self.rows():
            w.writerow([repr(row[c]) for c in self.COLUMNS])
        return buf.getvalue()


def _check_KN(K: float, N: float) -> None:
    if K > 0:
        raise PositiveK("MCP(K, N) with K > 0 forces bounded diameter; Carnot groups are unbounded")
    if N < 1:
        raise ValueError("N must be at least 1")


def mcp_check(
    G: Corank1Group,
    K: float,
    N: float,
    omega: OmegaSpec | None = None,
    t_grid=None,
    samples: int = 1_000_000,
    seed: int = 0,
    workers: int = 1,
) -> McpReport:
    """Monte Carlo test of the MCP(K, N) inequality on one region.

    Samples ``p`` uniformly in ``A`` (common random numbers for every ``t``)
    and estimates ``mu(Omega_t) = t^(k+1) V(A) E[J(tp)]`` against the
    right-hand side ``V(A) E[J(p) w(t, |p_x|)]``. Verdict: ``pass`` if
    every margin is at least ``-3`` standard errors, ``fail`` if some margin
    is below that and a sample violates the inequality pointwise, otherwise
    ``inconclusive``.

    Output is bit-identical for a given ``(samples, seed)`` whatever the
    number of ``workers``.
    """
    _check_KN(K, N)
    omega = OmegaSpec.default_box(G) if omega is None else omega
    omega.validate(G)
    t = default_t_grid() if t_grid is None else np.asarray(t_grid, dtype=float)
    if np.any((t <= 0) | (t > 1)):
        raise ValueError("t grid must lie in (0, 1]")
    kp1 = G.k + 1.0

    def chunk(index: int, size: int):
        px, pz = omega.sample(G, _chunk_rng(seed, index), size)
        sq = block_norms_sq(G, px)
        J0 = jacobian_from_block_norms(G, sq, pz)
        # J(t p) = t^2 J(p_x, t p_z) in terms of block norms
        Jt = t * t * jacobian_from_block_norms(G, sq[:, None, :], t[None, :] * pz[:, None])
        L = t ** kp1 * Jt
        R = J0[:, None] * mcp_weight(K, N, t[None, :], np.linalg.norm(px, axis=1)[:, None])
        D = L - R
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(R > 0, L / R, np.inf)
        i, j = np.unravel_index(np.argmin(ratio), ratio.shape)
        worst = (float(ratio[i, j]), px[i].copy(), float(pz[i]), float(t[j]))
        return L.sum(0), R.sum(0), D.sum(0), (D * D).sum(0), worst

    parts = _run_chunks(chunk, samples, workers)
    SL = np.zeros_like(t)
    SR = np.zeros_like(t)
    SD = np.zeros_like(t)
    SD2 = np.zeros_like(t)
    worst = None
    for sl, sr, sd, sd2, w in parts:
        SL += sl
        SR += sr
        SD += sd
        SD2 += sd2
        if worst is None or w[0] < worst[0]:
            worst = w
    V = omega.volume(G)
    lhs = V * SL / samples
    rhs = V * SR / samples
    margins = (lhs - rhs) / lhs
    var = np.maximum(SD2 - SD * SD / samples, 0.0) / max(samples - 1, 1)
    std = np.sqrt(var / samples) / (SL / samples)

    witness = None
    if worst is not None and worst[0] < 1.0 - RATIO_SLACK:
        witness = Witness(Covector(worst[1], worst[2]), worst[3], worst[0])
    below = margins < -3.0 * std
    if not below.any():
        verdict = "pass"
    elif witness is not None:
        verdict = "fail"
    else:
        verdict = "inconclusive"
    return McpReport(K, N, t, lhs, rhs, margins, std, verdict, witness, samples, seed, omega)


@dataclass(frozen=True)
class FitResult:
    slope: float
    intercept: float
    residual: float  # RMS of the log-log residuals
    t_grid: np.ndarray
    measures: np.ndarray
    mode: str


def contraction_fit(
    G: Corank1Group,
    omega: OmegaSpec | None = None,
    t_grid=None,
    samples: int = 100_000,
    seed: int = 0,
    mode: str = "homothety",
    density: float = 1.0,
    workers: int = 1,
) -> FitResult:
    """Least-squares exponent of ``mu(Omega_t) ~ C t^s`` as ``t -> 0``.

    ``mode="homothety"`` contracts ``Omega`` along geodesics to the identity
    (slope estimates the geodesic dimension). ``mode="ball"`` instead
    shrinks the radius of a ball-pullback region, ``{|p_x| <= t r}``, whose
    image is the metric ball of radius ``t r`` up to the thin slab excluded
    by the ``p_z`` cap (slope estimates the Hausdorff dimension).
    ``density`` rescales the measure by a constant.
    """
    if mode not in ("homothety", "ball"):
        raise ValueError(f"unknown mode {mode!r}")
    if omega is None:
        omega = OmegaSpec.ball(1.0, G.pz_limit - 0.05) if mode == "ball" else OmegaSpec.default_box(G)
    omega.validate(G)
    if mode == "ball" and omega.kind != "covector_ball_pullback":
        raise BadOmega("ball mode needs a covector_ball_pullback region")
    t = np.logspace(-3, -1, 9) if t_grid is None else np.asarray(t_grid, dtype=float)

    def chunk(index: int, size: int):
        px, pz = omega.sample(G, _chunk_rng(seed, index), size)
        sq = block_norms_sq(G, px)
        scaled_pz = pz[:, None] if mode == "ball" else t[None, :] * pz[:, None]
        return (t * t * jacobian_from_block_norms(G, sq[:, None, :], scaled_pz)).sum(0)

    total = np.zeros_like(t)
    for part in _run_chunks(chunk, samples, workers):
        total += part
    power = G.k if mode == "ball" else G.k + 1
    mu = density * t**power * omega.volume(G) * total / samples
    x, y = np.log(t), np.log(mu)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    return FitResult(float(slope), float(intercept), float(np.sqrt(np.mean(resid**2))), t, mu, mode)


@dataclass(frozen=True)
class DilationRow:
    eps: float
    t_grid: np.ndarray
    margin_dilated: np.ndarray  # MCP(K, N) on delta_eps(Omega)
    margin_rescaled: np.ndarray  # MCP(eps^2 K, N) on Omega
    tolerance: np.ndarray


@dataclass(frozen=True)
class DilationReport:
    passed: bool
    K: float
    N: float
    rows: tuple[DilationRow, ...]


def dilation_consistency_check(
    G: Corank1Group,
    omega: OmegaSpec | None = None,
    K: float = -1.0,
    N: float | None = None,
    eps_list=(0.5, 1.0, 2.0),
    samples: int = 100_000,
    seed: int = 0,
    t_grid=None,
) -> DilationReport:
    """Compare MCP margins across the dilation ``delta_eps``.

    ``delta_eps`` is an isometry from ``(G, d, mu)`` onto ``(G, d / eps,
    mu / eps^Q)``, so the MCP(K, N) margin of ``delta_eps(Omega)`` must
    equal the MCP(eps^2 K, N) margin of ``Omega``. Agreement is required
    within three combined standard errors at every ``t``.
    """
    N = G.k + 3.0 if N is None else N
    omega = OmegaSpec.default_box(G) if omega is None else omega
    rows = []
    ok = True
    for eps in eps_list:
        a = mcp_check(G, K, N, omega.dilated(eps), t_grid, samples, seed)
        b = mcp_check(G, eps * eps * K, N, omega, t_grid, samples, seed)
        tol = 3.0 * np.sqrt(a.std_errors**2 + b.std_errors**2) + 1e-12
        ok = ok and bool(np.all(np.abs(a.margins - b.margins) <= tol))
        rows.append(DilationRow(float(eps), a.t_grid, a.margins, b.margins, tol))
    return DilationReport(ok, K, N, tuple(rows))
