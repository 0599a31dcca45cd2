"""Group description files and report rendering.

A group file is plain text, one ``key = value`` per line; ``#`` starts a
comment. Indices in files are 1-based. Numbers may be integers, ``p/q``
rationals or decimals (read exactly, so ``0.5`` is ``1/2``)::

    format_version = 1
    type = corank1
    name = h3
    row = 0 1
    row = -1 0

    format_version = 1
    type = structure_constants
    name = engel
    n = 4
    layers = 1 1 2 3
    bracket = 1 2 : 0 0 1 0      # [e1, e2] = e3
    bracket = 2 3 : 0 0 0 -1     # [e2, e3] = -e4

``row`` lines give the skew matrix ``A`` of a corank-1 group, so
``[e_i, e_j] = A_ij e_(k+1)``. A ``bracket`` line lists ``i j`` (with
``i < j``) and then the ``n`` coefficients of ``[e_i, e_j]``. Brackets
not listed are zero.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .corank1 import Corank1Group, canonicalize
from .errors import NotSkew, ParseError
from .library import as_float_matrix, corank1_algebra, is_builtin, parse_builtin
from .lie import StratifiedLieAlgebra, validate_algebra

FORMAT_VERSION = 1
_KEYS = {
    "corank1": {"format_version", "type", "name", "row"},
    "structure_constants": {"format_version", "type", "name", "n", "layers", "bracket"},
}
_REPEATED = {"row", "bracket"}


@dataclass(frozen=True, eq=False)
class LoadedSpec:
    name: str
    algebra: StratifiedLieAlgebra
    group: Corank1Group | None  # present for every corank-1 algebra
    matrix: list[list[Fraction]] | None  # exact A in the file's basis
    source: str  # text that was parsed, or the built-in name

    @property
    def digest(self) -> str:
        return hashlib.sha256(self.source.encode()).hexdigest()


def _number(token: str, line: int, col: int) -> Fraction:
    try:
        return Fraction(token)
    except (ValueError, ZeroDivisionError):
        raise ParseError(f"not a number: {token!r}", line, col) from None


def _integer(token: str, line: int, col: int) -> int:
    v = _number(token, line, col)
    if v.denominator != 1:
        raise ParseError(f"expected an integer, got {token!r}", line, col)
    return int(v)


def _tokens(text: str, start: int) -> list[tuple[str, int]]:
    """Whitespace-separated tokens with their 1-based columns."""
    out = []
    i = 0
    while i < len(text):
        if text[i].isspace():
            i += 1
            continue
        j = i
        while j < len(text) and not text[j].isspace():
            j += 1
        out.append((text[i:j], start + i + 1))
        i = j
    return out


def parse_text(text: str) -> dict:
    """Parse group file text into ``{key: [(tokens, line), ...]}``."""
    entries: dict[str, list] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        if "=" not in line:
            col = len(line) - len(line.lstrip()) + 1
            raise ParseError("expected 'key = value'", lineno, col)
        key_part, value = line.split("=", 1)
        key = key_part.strip()
        key_col = len(key_part) - len(key_part.lstrip()) + 1
        if not key:
            raise ParseError("missing key", lineno, key_col)
        if key in entries and key not in _REPEATED:
            raise ParseError(f"duplicate key {key!r}", lineno, key_col)
        entries.setdefault(key, []).append((_tokens(value, len(key_part) + 1), lineno, key_col))
    return entries


def _single(entries, key, required=True):
    if key not in entries:
        if required:
            raise ParseError(f"missing key {key!r}", 0, 0)
        return None
    toks, line, col = entries[key][0]
    if len(toks) != 1:
        raise ParseError(f"{key} takes exactly one value", line, col)
    return toks[0][0], line, toks[0][1]


def _corank1_matrix(algebra: StratifiedLieAlgebra) -> list[list[Fraction]] | None:
    if algebra.step != 2 or len(algebra.layer(2)) != 1:
        return None
    h = algebra.layer(1)
    (top,) = algebra.layer(2)
    pos = {a: i for i, a in enumerate(h)}
    k = len(h)
    A = [[Fraction(0)] * k for _ in range(k)]
    for (i, j), coeffs in algebra.brackets:
        c = dict(coeffs).get(top, Fraction(0))
        A[pos[i]][pos[j]] = c
        A[pos[j]][pos[i]] = -c
    return A


def _check_skew(A: list[list[Fraction]]) -> None:
    for i in range(len(A)):
        for j in range(i, len(A)):
            if A[i][j] != -A[j][i]:
                raise NotSkew(f"A[{i + 1},{j + 1}] = {A[i][j]} but A[{j + 1},{i + 1}] = {A[j][i]}")


def parse_spec(text: str, source_name: str = "") -> LoadedSpec:
    entries = parse_text(text)
    version = _single(entries, "format_version")
    if _integer(*version) != FORMAT_VERSION:
        raise ParseError(f"unsupported format_version {version[0]}", version[1], version[2])
    kind, kline, kcol = _single(entries, "type")
    if kind not in _KEYS:
        raise ParseError(f"unknown type {kind!r}", kline, kcol)
    for key, items in entries.items():
        if key not in _KEYS[kind]:
            _, line, col = items[0]
            raise ParseError(f"unknown key {key!r} for type {kind}", line, col)
    name_entry = _single(entries, "name", required=False)
    name = name_entry[0] if name_entry else source_name

    if kind == "corank1":
        rows = []
        for toks, line, col in entries.get("row", []):
            rows.append(([_number(t, line, c) for t, c in toks], line, col))
        if not rows:
            raise ParseError("corank1 needs at least one 'row'", 0, 0)
        k = len(rows)
        for vals, line, col in rows:
            if len(vals) != k:
                raise ParseError(f"row has {len(vals)} entries, expected {k}", line, col)
        A = [vals for vals, _, _ in rows]
        _check_skew(A)
        group = canonicalize(as_float_matrix(A))
        return LoadedSpec(name, corank1_algebra(A, name=name), group, A, text)

    n = _integer(*_single(entries, "n"))
    ltoks, lline, _ = entries["layers"][0] if "layers" in entries else (None, 0, 0)
    if ltoks is None:
        raise ParseError("missing key 'layers'", 0, 0)
    layers = [_integer(t, lline, c) for t, c in ltoks]
    brackets = []
    for toks, line, col in entries.get("bracket", []):
        words = [t for t, _ in toks]
        if ":" not in words:
            raise ParseError("bracket needs 'i j : c_1 ... c_n'", line, col)
        cut = words.index(":")
        if cut != 2:
            raise ParseError("bracket needs exactly two indices before ':'", line, toks[0][1] if toks else col)
        i, j = (_integer(t, line, c) - 1 for t, c in toks[:2])
        coeffs = [_number(t, line, c) for t, c in toks[3:]]
        if len(coeffs) != n:
            raise ParseError(f"bracket has {len(coeffs)} coefficients, expected {n}", line, toks[0][1])
        brackets.append((i, j, coeffs))
    algebra = validate_algebra(n, layers, brackets, name=name)
    A = _corank1_matrix(algebra)
    group = canonicalize(as_float_matrix(A)) if A is not None else None
    return LoadedSpec(name, algebra, group, A, text)


def load_spec(source: str) -> LoadedSpec:
    """Load a built-in name (see :data:`carnot_mcp.library.BUILTIN_HELP`) or a file.

    Corank-1 algebras, whichever way they are written, also come with their
    :class:`Corank1Group`.
    """
    if not os.path.exists(source) and is_builtin(source):
        algebra, A = parse_builtin(source)
        group = canonicalize(as_float_matrix(A)) if A is not None else None
        return LoadedSpec(algebra.name or source, algebra, group, A, source)
    try:
        with open(source, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ParseError(f"cannot read {source!r}: {exc.strerror}", 0, 0) from None
    return parse_spec(text, source_name=os.path.splitext(os.path.basename(source))[0])


def dump_spec(spec: LoadedSpec | StratifiedLieAlgebra, as_corank1: bool | None = None) -> str:
    """Serialize to the text format; :func:`parse_spec` reads it back exactly."""
    algebra = spec.algebra if isinstance(spec, LoadedSpec) else spec
    A = spec.matrix if isinstance(spec, LoadedSpec) else _corank1_matrix(algebra)
    contiguous = algebra.layer(1) == tuple(range(algebra.rank))
    if as_corank1 is None:
        as_corank1 = A is not None and contiguous
    lines = [f"format_version = {FORMAT_VERSION}"]
    if as_corank1:
        lines.append("type = corank1")
        if algebra.name:
            lines.append(f"name = {algebra.name}")
        lines += ["row = " + " ".join(str(v) for v in row) for row in A]
    else:
        lines.append("type = structure_constants")
        if algebra.name:
            lines.append(f"name = {algebra.name}")
        lines.append(f"n = {algebra.n}")
        lines.append("layers = " + " ".join(str(v) for v in algebra.layer_of))
        for (i, j), coeffs in algebra.brackets:
            dense = [Fraction(0)] * algebra.n
            for m, c in coeffs:
                dense[m] = c
            lines.append(f"bracket = {i + 1} {j + 1} : " + " ".join(str(v) for v in dense))
    return "\n".join(lines) + "\n"


# --- reports -----------------------------------------------------------------


@dataclass
class RunReport:
    """Result of one command: echo, input digest, outputs, seed and timing.

    ``results`` maps names to scalars, vectors or strings; ``rows`` is an
    optional table (one dict per row, same keys) written as the CSV body.
    """

    command: str
    input_digest: str
    results: dict
    seed: int | None = None
    wall_time: float = 0.0
    rows: list[dict] = field(default_factory=list)


def _plain(v):
    """Convert to JSON types at full precision."""
    if isinstance(v, Fraction):
        return str(v) if v.denominator != 1 else int(v)
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else repr(v)
    if isinstance(v, dict):
        return {str(k): _plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple, np.ndarray)):
        return [_plain(x) for x in v]
    return v if v is None or isinstance(v, str) else str(v)


def _short(v) -> str:
    v = _plain(v)
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return f"{v:.6g}"
    if v is None:
        return "-"
    if isinstance(v, list):
        return "(" + ", ".join(_short(x) for x in v) + ")"
    if isinstance(v, dict):
        return "{" + ", ".join(f"{k}: {_short(x)}" for k, x in v.items()) + "}"
    return str(v)


def render_report(report: RunReport, mode: str = "table") -> str:
    """Deterministic text for ``mode`` in ``table``, ``json`` or ``csv``.

    CSV writes ``rows`` when the report has them (for ``mcp check``:
    ``t, lhs, rhs, margin, std_error``) and ``key, value`` pairs otherwise.
    """
    if mode == "json":
        doc = {
            "command": report.command,
            "input_digest": report.input_digest,
            "seed": report.seed,
            "wall_time": report.wall_time,
            "results": _plain(report.results),
            "rows": _plain(report.rows),
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if mode == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        if report.rows:
            cols = list(report.rows[0])
            w.writerow(cols)
            for row in report.rows:
                w.writerow([json.dumps(_plain(row[c])) for c in cols])
        else:
            w.writerow(["key", "value"])
            for k, v in report.results.items():
                w.writerow([k, json.dumps(_plain(v))])
        return buf.getvalue()
    if mode != "table":
        raise ValueError(f"unknown report mode {mode!r}")
    width = max([len(k) for k in report.results] + [4])
    lines = [f"# {report.command}"]
    lines += [f"{k.ljust(width)}  {_short(v)}" for k, v in report.results.items()]
    if report.rows:
        cols = list(report.rows[0])
        cells = [cols] + [[_short(r[c]) for c in cols] for r in report.rows]
        widths = [max(len(row[i]) for row in cells) for i in range(len(cols))]
        lines.append("")
        for row in cells:
            lines.append("  ".join(c.rjust(wd) for c, wd in zip(row, widths)))
    if report.seed is not None:
        lines.append(f"{'seed'.ljust(width)}  {report.seed}")
    return "\n".join(lines) + "\n"
