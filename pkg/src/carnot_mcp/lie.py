"""Stratified nilpotent Lie algebras with exact structure constants.

Basis vectors are indexed ``0..n-1`` and sorted by stratum, so the first
``rank`` of them span the horizontal layer. Horizontal directions are passed
as length-``rank`` rational vectors.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, partial
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import exact
from .errors import (
    AntisymmetryViolation,
    GradingViolation,
    Inconclusive,
    JacobiViolation,
    NotAmple,
    NotStratified,
    ValidationError,
    ZeroDirection,
)
from .exact import Vector

SAMPLE_RANGE = 9  # random integer directions have entries in [-9, 9]


@dataclass(frozen=True)
class StratifiedLieAlgebra:
    """Carnot Lie algebra given by its structure constants.

    ``brackets`` holds the nonzero brackets ``[e_i, e_j]`` for ``i < j`` as
    ``((i, j), ((m, c_ij^m), ...))``, sorted. Build instances with
    :func:`validate_algebra`, which checks all the algebraic invariants.
    """

    n: int
    layer_of: tuple[int, ...]
    brackets: tuple[tuple[tuple[int, int], tuple[tuple[int, Fraction], ...]], ...]
    name: str = field(default="", compare=False)

    @property
    def step(self) -> int:
        return max(self.layer_of)

    @property
    def rank(self) -> int:
        return self.layer_of.count(1)

    def layer(self, i: int) -> tuple[int, ...]:
        """Basis indices spanning the stratum ``g_i``."""
        return tuple(a for a, l in enumerate(self.layer_of) if l == i)

    @cached_property
    def _table(self) -> dict[tuple[int, int], dict[int, Fraction]]:
        return {ij: dict(coeffs) for ij, coeffs in self.brackets}

    def basis_vector(self, i: int) -> Vector:
        return tuple(Fraction(int(a == i)) for a in range(self.n))

    def horizontal(self, u: Sequence) -> Vector:
        """Embed a length-``rank`` direction as an element of the algebra."""
        u = exact.vec(u)
        if len(u) != self.rank:
            raise ValueError(f"horizontal direction must have length {self.rank}, got {len(u)}")
        return u + (Fraction(0),) * (self.n - self.rank)

    def bracket(self, u: Sequence, v: Sequence) -> Vector:
        out = [Fraction(0)] * self.n
        for (i, j), coeffs in self._table.items():
            w = u[i] * v[j] - u[j] * v[i]
            if w:
                for m, c in coeffs.items():
                    out[m] += w * c
        return tuple(out)

    def ad_power(self, x: Sequence, y: Sequence, power: int) -> Vector:
        for _ in range(power):
            y = self.bracket(x, y)
        return tuple(y)


@dataclass(frozen=True)
class FlagReport:
    """Growth vector of the distribution and geodesic growth vector of a line."""

    growth: tuple[int, ...]
    geodesic_growth: tuple[int, ...]
    ample: bool
    geodesic_step: int | None
    direction: Vector | None = None
    covector: Vector | None = None  # lam on g_2 for step-2 normal geodesics
    consistent: bool = True  # False when two sample batches disagree


@dataclass(frozen=True)
class FatnessReport:
    fat: bool
    witness: tuple | None  # horizontal direction X with g1 + [X, g1] != g
    certified: bool
    reason: str


def _coeff_map(coeffs, n: int) -> dict[int, Fraction]:
    if isinstance(coeffs, Mapping):
        items = coeffs.items()
    else:
        coeffs = list(coeffs)
        if len(coeffs) != n:
            raise ValidationError(f"dense coefficient list must have length {n}")
        items = enumerate(coeffs)
    out = {}
    for m, c in items:
        m = int(m)
        if not 0 <= m < n:
            raise ValidationError(f"bracket target index {m} out of range")
        c = exact.as_fraction(c)
        if c:
            out[m] = c
    return out


def validate_algebra(
    n: int,
    layers: Sequence[int],
    brackets: Iterable[tuple[int, int, object]],
    name: str = "",
) -> StratifiedLieAlgebra:
    """Check a raw structure-constant table and build the algebra.

    ``brackets`` yields ``(i, j, coeffs)`` meaning ``[e_i, e_j] = sum_m
    coeffs[m] e_m`` with 0-based indices; ``coeffs`` is a dense length-``n``
    list or a sparse ``{m: c}`` mapping. Either ordering of a pair may be
    given; if both are given they must be negatives of each other.

    Raises
    ------
    AntisymmetryViolation, GradingViolation, JacobiViolation, NotStratified
        Each message names the offending indices (0-based).
    """
    layers = tuple(int(l) for l in layers)
    if n < 1 or len(layers) != n:
        raise ValidationError(f"expected {n} layer labels, got {len(layers)}")
    if layers[0] != 1 or any(b < a for a, b in zip(layers, layers[1:])):
        raise ValidationError("layer labels must be nondecreasing and start at 1")
    if set(layers) != set(range(1, max(layers) + 1)):
        raise ValidationError("every stratum between 1 and the step must be nonempty")

    raw: dict[tuple[int, int], dict[int, Fraction]] = {}
    for i, j, coeffs in brackets:
        i, j = int(i), int(j)
        if not (0 <= i < n and 0 <= j < n):
            raise ValidationError(f"bracket indices ({i}, {j}) out of range")
        if (i, j) in raw:
            raise ValidationError(f"bracket ({i}, {j}) given twice")
        raw[(i, j)] = _coeff_map(coeffs, n)

    table: dict[tuple[int, int], dict[int, Fraction]] = {}
    for (i, j), c in raw.items():
        if i == j:
            if c:
                raise AntisymmetryViolation(f"[e_{i}, e_{i}] must vanish")
            continue
        a, b = min(i, j), max(i, j)
        signed = c if i < j else {m: -v for m, v in c.items()}
        if (a, b) in table:
            if table[(a, b)] != signed:
                raise AntisymmetryViolation(
                    f"c_{{{i}{j}}} and c_{{{j}{i}}} are not negatives of each other"
                )
            continue
        table[(a, b)] = signed

    for (i, j), c in table.items():
        for m in c:
            if layers[m] != layers[i] + layers[j]:
                raise GradingViolation(
                    f"[e_{i}, e_{j}] has a component along e_{m}, which lies in layer "
                    f"{layers[m]} instead of {layers[i] + layers[j]}"
                )

    alg = StratifiedLieAlgebra(
        n=n,
        layer_of=layers,
        brackets=tuple(sorted((ij, tuple(sorted(c.items()))) for ij, c in table.items() if c)),
        name=name,
    )

    e = [alg.basis_vector(i) for i in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            for l in range(j + 1, n):
                terms = (
                    alg.bracket(e[i], alg.bracket(e[j], e[l])),
                    alg.bracket(e[j], alg.bracket(e[l], e[i])),
                    alg.bracket(e[l], alg.bracket(e[i], e[j])),
                )
                if any(sum(t[m] for t in terms) for m in range(n)):
                    raise JacobiViolation(f"Jacobi identity fails on (e_{i}, e_{j}, e_{l})")

    g1 = alg.layer(1)
    for j in range(1, alg.step):
        images = [alg.bracket(e[a], e[b]) for a in g1 for b in alg.layer(j)]
        if exact.rank(images) != len(alg.layer(j + 1)):
            raise NotStratified(f"[g_1, g_{j}] does not span g_{j + 1}")
    return alg


def growth_vector(alg: StratifiedLieAlgebra) -> tuple[int, ...]:
    """Dimensions ``(d_1, ..., d_s)`` of the bracket-generated flag."""
    g1 = [alg.basis_vector(a) for a in alg.layer(1)]
    span = exact.span_basis(g1, alg.n)
    dims = [len(span)]
    for _ in range(1, alg.step):
        new = [alg.bracket(x, y) for x in g1 for y in span]
        span = exact.span_basis(span + new, alg.n)
        dims.append(len(span))
    expected = tuple(sum(1 for l in alg.layer_of if l <= i) for i in range(1, alg.step + 1))
    assert tuple(dims) == expected, (dims, expected)
    return tuple(dims)


def hausdorff_dimension(alg: StratifiedLieAlgebra) -> int:
    d = (0,) + growth_vector(alg)
    return sum(i * (d[i] - d[i - 1]) for i in range(1, len(d)))


def rifford_bound(alg: StratifiedLieAlgebra) -> int:
    return hausdorff_dimension(alg) + alg.n - alg.rank


def _direction(alg: StratifiedLieAlgebra, u: Sequence) -> Vector:
    x = alg.horizontal(u)
    if exact.is_zero(x):
        raise ZeroDirection("direction must be nonzero")
    return x


def adjoint_power_span(alg: StratifiedLieAlgebra, u: Sequence, max_power: int) -> list[list[Vector]]:
    """Bases of ``ad_X^j(g_1)`` for ``j = 0..max_power``, ``X = sum u_i e_i``."""
    x = _direction(alg, u)
    current = [alg.basis_vector(a) for a in alg.layer(1)]
    out = []
    for _ in range(max_power + 1):
        out.append(exact.span_basis(current, alg.n))
        current = [alg.bracket(x, y) for y in current]
    return out


def line_geodesic_growth(alg: StratifiedLieAlgebra, u: Sequence) -> FlagReport:
    """Geodesic growth vector of the line ``t -> exp(tX)``.

    For a constant horizontal control the Lie derivatives along the line
    reduce to iterated adjoints, so ``k_i = dim span{ad_X^j(g_1) : j < i}``.
    The flag is cut at the first index where it stops growing.
    """
    x = _direction(alg, u)
    level = [alg.basis_vector(a) for a in alg.layer(1)]
    span = exact.span_basis(level, alg.n)
    dims = [len(span)]
    while dims[-1] < alg.n:
        level = [alg.bracket(x, y) for y in level]
        span = exact.span_basis(span + level, alg.n)
        if len(span) == dims[-1]:
            break
        dims.append(len(span))
    ample = dims[-1] == alg.n
    return FlagReport(
        growth=growth_vector(alg),
        geodesic_growth=tuple(dims),
        ample=ample,
        geodesic_step=len(dims) if ample else None,
        direction=exact.vec(u),
    )


def _random_directions(k: int, count: int, rng: np.random.Generator) -> list[tuple[int, ...]]:
    out = []
    while len(out) < count:
        u = rng.integers(-SAMPLE_RANGE, SAMPLE_RANGE + 1, size=k)
        if np.any(u):
            out.append(tuple(int(v) for v in u))
    return out


def _componentwise_max(vectors: list[tuple[int, ...]], n: int) -> tuple[int, ...]:
    width = max(len(v) for v in vectors)
    padded = [v + (v[-1],) * (width - len(v)) for v in vectors]
    best = [max(col) for col in zip(*padded)]
    return tuple(best[: best.index(best[-1]) + 1])


def normal_geodesic_growth(alg: StratifiedLieAlgebra, u: Sequence, lam: Sequence) -> FlagReport:
    """Geodesic growth vector of the step-2 normal geodesic with covector ``(u, lam)``.

    ``u`` is the initial horizontal velocity and ``lam`` the (constant)
    covector on ``g_2``. The control solves ``u' = Omega u`` with ``Omega``
    the skew form ``lam([., .])``, and since ``g_2`` is central the flag is
    ``F^i = g_1 + span{[u^(j)(0), g_1] : j <= i - 2}``. ``lam = 0`` gives
    the line.
    """
    if alg.step != 2:
        raise ValueError("normal_geodesic_growth needs a step-2 algebra")
    g2 = alg.layer(2)
    lam = exact.vec(lam)
    if len(lam) != len(g2):
        raise ValueError(f"lam must have length {len(g2)}")
    _direction(alg, u)
    om = _omega(alg, dict(zip(g2, lam)))
    g1 = [alg.basis_vector(a) for a in alg.layer(1)]
    v = exact.vec(u)
    span = exact.span_basis(g1, alg.n)
    krylov: list[Vector] = []
    dims = [len(span)]
    # The derivatives u^(j) stop contributing once they leave the Krylov space.
    while dims[-1] < alg.n and not exact.in_span(v, krylov, alg.rank):
        krylov.append(v)
        span = exact.span_basis(span + [alg.bracket(alg.horizontal(v), y) for y in g1], alg.n)
        dims.append(len(span))
        v = tuple(sum((row[b] * v[b] for b in range(alg.rank)), Fraction(0)) for row in om)
    dims = dims[: dims.index(dims[-1]) + 1]
    ample = dims[-1] == alg.n
    return FlagReport(
        growth=growth_vector(alg),
        geodesic_growth=tuple(dims),
        ample=ample,
        geodesic_step=len(dims) if ample else None,
        direction=exact.vec(u),
        covector=lam,
    )


def max_geodesic_growth(alg: StratifiedLieAlgebra, samples: int = 32, seed: int = 0) -> FlagReport:
    """Maximal geodesic growth vector over sampled geodesics.

    For step 2 the samples are normal geodesics with random integer initial
    covectors (see :func:`normal_geodesic_growth`); otherwise they are lines.
    The first batch is the ``rank`` basis directions plus ``samples`` random
    integer directions; a second, disjoint batch of ``samples`` random
    directions must reproduce the same componentwise maximum, otherwise the
    report carries ``consistent=False``.

    Raises
    ------
    NotAmple
        No sampled geodesic is ample.
    """
    if samples < 2:
        raise ValueError("samples must be at least 2")
    k = alg.rank
    rng = np.random.default_rng(seed)
    basis = [tuple(int(a == i) for a in range(k)) for i in range(k)]
    batch_a = basis + _random_directions(k, samples, rng)
    batch_b = _random_directions(k, samples, rng)
    if alg.step == 2:
        q2 = len(alg.layer(2))

        def flag(u):
            return normal_geodesic_growth(alg, u, _random_directions(q2, 1, rng)[0])

        kind = "geodesic"
    else:
        flag = partial(line_geodesic_growth, alg)
        kind = "line"
    flags_a = [flag(u) for u in batch_a]
    flags_b = [flag(u) for u in batch_b]
    max_a = _componentwise_max([f.geodesic_growth for f in flags_a], alg.n)
    max_b = _componentwise_max([f.geodesic_growth for f in flags_b], alg.n)
    if not any(f.ample for f in flags_a + flags_b):
        raise NotAmple(f"no ample {kind} among {len(batch_a) + len(batch_b)} samples")
    best = _componentwise_max([max_a, max_b], alg.n)
    witness = next((f for f in flags_a + flags_b if f.geodesic_growth == best), None)
    return FlagReport(
        growth=growth_vector(alg),
        geodesic_growth=best,
        ample=best[-1] == alg.n,
        geodesic_step=len(best) if best[-1] == alg.n else None,
        direction=witness.direction if witness else None,
        covector=witness.covector if witness else None,
        consistent=max_a == max_b,
    )


def geodesic_dimension(alg: StratifiedLieAlgebra, flag: FlagReport | None = None) -> int:
    """``sum_i (2i - 1)(k_i - k_{i-1})`` over an ample geodesic growth vector."""
    if flag is None:
        flag = max_geodesic_growth(alg)
    if not flag.ample:
        raise NotAmple(f"geodesic growth vector {flag.geodesic_growth} does not reach {alg.n}")
    k = (0,) + flag.geodesic_growth
    return sum((2 * i - 1) * (k[i] - k[i - 1]) for i in range(1, len(k)))


def has_abnormal_line(alg: StratifiedLieAlgebra, u: Sequence) -> tuple[bool, Vector | None]:
    """Whether the line along ``u`` is abnormal, with an annihilating covector.

    The line is abnormal iff some nonzero covector kills ``ad_X^i(g_1)`` for
    ``i = 0..s-1``.
    """
    spans = adjoint_power_span(alg, u, alg.step - 1)
    total = exact.span_basis([v for basis in spans for v in basis], alg.n)
    if len(total) == alg.n:
        return False, None
    return True, exact.nullspace(total, alg.n)[0]


def _omega(alg: StratifiedLieAlgebra, lam: Mapping[int, Fraction]) -> list[list[Fraction]]:
    """Skew form ``(X, Y) -> lam([X, Y])`` on the horizontal layer."""
    k = alg.rank
    out = [[Fraction(0)] * k for _ in range(k)]
    for (i, j), coeffs in alg._table.items():
        if i < k and j < k:
            w = sum((lam.get(m, 0) * c for m, c in coeffs.items()), Fraction(0))
            out[i][j] = w
            out[j][i] = -w
    return out


def _fat_deficit(alg: StratifiedLieAlgebra, x: Sequence) -> bool:
    """True when ``g_1 + [X, g_1]`` is a proper subspace."""
    xv = alg.horizontal(x)
    g1 = [alg.basis_vector(a) for a in alg.layer(1)]
    return exact.rank(g1 + [alg.bracket(xv, y) for y in g1]) < alg.n


def _step3_abnormal_direction(alg: StratifiedLieAlgebra) -> Vector:
    # Kernel construction for step >= 3: pair g_2 against a single g_3
    # direction and take X in the common kernel.
    k = alg.rank
    g2 = alg.layer(2)
    if len(g2) >= k:
        return tuple(Fraction(int(a == 0)) for a in range(k))
    z1 = alg.layer(3)[0]
    rows = []
    for y in g2:
        yv = alg.basis_vector(y)
        rows.append([alg.bracket(yv, alg.basis_vector(a))[z1] for a in range(k)])
    return exact.nullspace(rows, k)[0]


def abnormal_line_direction(alg: StratifiedLieAlgebra) -> Vector | None:
    """A horizontal direction whose line is abnormal, or None if there is none."""
    if alg.step == 1:
        return None
    if alg.step == 2:
        report = is_fat(alg)
        if report.fat or report.witness is None or not all(isinstance(w, Fraction) for w in report.witness):
            return None
        return report.witness
    return _step3_abnormal_direction(alg)


def is_fat(alg: StratifiedLieAlgebra, samples: int = 64, seed: int = 0) -> FatnessReport:
    """Decide whether ``g_1 + [X, g_1] = g`` for every nonzero horizontal X.

    Step 1 is trivially fat and step >= 3 never is. For step 2 the question
    is whether some nonzero ``lam`` in the dual of ``g_2`` makes the skew
    form ``lam([., .])`` degenerate; a rational degenerate ``lam`` found
    among basis and random covectors gives an exact witness. Without one
    the answer is exact when ``dim g_2 <= 2`` (a single form, or the real
    roots of a binary form), and for ``dim g_2 >= 3`` rests on a sampled
    lower bound of the smallest singular value (``certified=False``).

    Raises
    ------
    Inconclusive
        ``dim g_2 >= 3``, no rational witness, and sampling cannot separate
        the smallest singular value from zero.
    """
    k = alg.rank
    if alg.step == 1:
        return FatnessReport(True, None, True, "abelian: the horizontal layer is the whole algebra")
    if alg.step >= 3:
        x = _step3_abnormal_direction(alg)
        assert _fat_deficit(alg, x)
        return FatnessReport(False, x, True, "step >= 3: g_1 + [X, g_1] misses g_3")

    g2 = alg.layer(2)
    q2 = len(g2)
    if q2 >= k:
        x = tuple(Fraction(int(a == 0)) for a in range(k))
        return FatnessReport(False, x, True, "dim g_2 >= rank: [X, g_1] has dimension < rank")

    candidates = [{m: Fraction(int(m == c)) for m in g2} for c in g2]
    rng = np.random.default_rng(seed)
    for row in _random_directions(q2, samples, rng):
        candidates.append({m: Fraction(v) for m, v in zip(g2, row)})
    for lam in candidates:
        om = _omega(alg, lam)
        if exact.rank(om) < k:
            x = exact.nullspace(om, k)[0]
            assert _fat_deficit(alg, x)
            return FatnessReport(False, x, True, "degenerate skew form at a rational covector")

    if q2 == 1:
        return FatnessReport(True, None, True, "single nondegenerate skew form")
    if q2 == 2:
        return _binary_form_fatness(alg, g2)
    return _sampled_fatness(alg, g2, rng)


def _binary_form_fatness(alg: StratifiedLieAlgebra, g2: tuple[int, ...]) -> FatnessReport:
    import sympy

    k = alg.rank
    s = sympy.Symbol("s")
    om0 = _omega(alg, {g2[0]: Fraction(1), g2[1]: Fraction(0)})
    om1 = _omega(alg, {g2[0]: Fraction(0), g2[1]: Fraction(1)})
    mat = sympy.Matrix(
        k, k, lambda a, b: sympy.Rational(om0[a][b].numerator, om0[a][b].denominator) * s
        + sympy.Rational(om1[a][b].numerator, om1[a][b].denominator)
    )
    poly = sympy.Poly(mat.det(method="berkowitz"), s)
    # (1, 0) was already found nondegenerate, so only lam = (s, 1) remains.
    if poly.count_roots() == 0:
        return FatnessReport(True, None, True, "determinant of the pencil has no real root")
    root = float(poly.real_roots()[0].evalf(30))
    om = np.array(om0, dtype=float) * root + np.array(om1, dtype=float)
    _, _, vt = np.linalg.svd(om)
    return FatnessReport(False, tuple(float(v) for v in vt[-1]), True, "degenerate skew form at an irrational covector")


def _sampled_fatness(alg, g2, rng: np.random.Generator, count: int = 4096) -> FatnessReport:
    forms = np.array([np.array(_omega(alg, {m: Fraction(int(m == c)) for m in g2}), dtype=float) for c in g2])
    lam = rng.normal(size=(count, len(g2)))
    lam /= np.linalg.norm(lam, axis=1, keepdims=True)
    mats = np.einsum("sq,qab->sab", lam, forms)
    smin = np.linalg.svd(mats, compute_uv=False)[:, -1]
    scale = np.median(np.linalg.svd(mats, compute_uv=False)[:, 0])
    if smin.min() < 1e-3 * scale:
        raise Inconclusive("skew forms come close to degenerate but no rational witness was found")
    return FatnessReport(
        True, None, False, f"sampled smallest singular value >= {smin.min():.3g} on {count} covectors"
    )


def is_ideal(alg: StratifiedLieAlgebra) -> bool:
    """Carnot groups are ideal exactly when they are fat."""
    return is_fat(alg).fat
