"""Exact linear algebra over the rationals.

Rank and echelon forms use fraction-free (Bareiss) elimination on integer
rows; kernels are read off the reduced row echelon form with
:class:`fractions.Fraction` entries. Inputs are sequences of rows whose
entries are ``int`` or ``Fraction``.
"""
from __future__ import annotations

from fractions import Fraction
from math import gcd, lcm
from typing import Sequence

Vector = tuple[Fraction, ...]


def as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        raise TypeError("floats are not exact; pass Fraction, int or a 'p/q' string")
    return Fraction(value)


def vec(values) -> Vector:
    return tuple(as_fraction(v) for v in values)


def _integer_row(row: Sequence) -> list[int]:
    row = [as_fraction(v) for v in row]
    den = lcm(*(v.denominator for v in row)) if row else 1
    ints = [int(v * den) for v in row]
    g = 0
    for v in ints:
        g = gcd(g, v)
    if g > 1:
        ints = [v // g for v in ints]
    return ints


def echelon(rows: Sequence[Sequence], ncols: int | None = None) -> list[list[int]]:
    """Integer row echelon form of ``rows`` by Bareiss elimination.

    Zero rows are dropped, so ``len(echelon(rows))`` is the rank. Each
    returned row is divided by the gcd of its entries.
    """
    m = [_integer_row(r) for r in rows]
    m = [r for r in m if any(r)]
    if not m:
        return []
    if ncols is None:
        ncols = len(m[0])
    r = 0
    prev = 1
    for c in range(ncols):
        if r == len(m):
            break
        p = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if p is None:
            continue
        m[r], m[p] = m[p], m[r]
        piv = m[r][c]
        for i in range(r + 1, len(m)):
            a = m[i][c]
            row = []
            for j in range(ncols):
                q, rem = divmod(piv * m[i][j] - a * m[r][j], prev)
                assert rem == 0, "Bareiss division must be exact"
                row.append(q)
            m[i] = row
        prev = piv
        r += 1
    out = []
    for row in m[:r]:
        g = 0
        for v in row:
            g = gcd(g, v)
        out.append([v // g for v in row] if g > 1 else row)
    return out


def rank(rows: Sequence[Sequence]) -> int:
    return len(echelon(rows))


def rref(rows: Sequence[Sequence], ncols: int) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form and the list of pivot columns."""
    ech = echelon(rows, ncols)
    m = [[Fraction(v) for v in row] for row in ech]
    pivots = []
    for i, row in enumerate(m):
        c = next(j for j, v in enumerate(row) if v != 0)
        pivots.append(c)
        inv = 1 / row[c]
        m[i] = [v * inv for v in row]
    for i in reversed(range(len(m))):
        c = pivots[i]
        for h in range(i):
            f = m[h][c]
            if f:
                m[h] = [a - f * b for a, b in zip(m[h], m[i])]
    return m, pivots


def nullspace(rows: Sequence[Sequence], ncols: int) -> list[Vector]:
    """Basis of ``{v : row . v = 0 for every row}``.

    One basis vector per free column, with a 1 in that column, in
    increasing column order.
    """
    m, pivots = rref(rows, ncols)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for row, p in zip(m, pivots):
            v[p] = -row[f]
        basis.append(tuple(v))
    return basis


def span_basis(vectors: Sequence[Sequence], ncols: int) -> list[Vector]:
    """An echelon basis (as Fractions) of the span of ``vectors``."""
    return [tuple(Fraction(v) for v in row) for row in echelon(vectors, ncols)]


def in_span(v: Sequence, basis: Sequence[Sequence], ncols: int) -> bool:
    return len(echelon(list(basis) + [v], ncols)) == len(echelon(basis, ncols))


def is_zero(v: Sequence) -> bool:
    return all(x == 0 for x in v)
