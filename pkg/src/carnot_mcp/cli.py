"""Command line interface: ``carnot-mcp <command> <group> [options]``.

``<group>`` is a built-in name or a group file (see :mod:`carnot_mcp.formats`).
Vectors on the command line are comma separated and use the basis of the
group as given, not the canonical one. Exit codes: 0 success or pass,
1 violation found, 2 inconclusive, 3 input error. ``CARNOT_MCP_SEED``
overrides the default seed.
"""
from __future__ import annotations

import argparse
import os
import sys
import time
from fractions import Fraction

import numpy as np

from . import corank1 as c1
from . import lie, mcp
from .errors import CarnotError, Inconclusive, NotAmple
from .formats import LoadedSpec, RunReport, load_spec, render_report
from .library import BUILTIN_HELP

EXIT_OK, EXIT_FAIL, EXIT_INCONCLUSIVE, EXIT_INPUT = 0, 1, 2, 3


class InputError(Exception):
    pass


def _floats(text: str, what: str) -> np.ndarray:
    try:
        return np.array([float(v) for v in text.split(",")], dtype=float)
    except ValueError:
        raise InputError(f"{what}: expected comma-separated numbers, got {text!r}") from None


def _group(spec: LoadedSpec) -> c1.Corank1Group:
    if spec.group is None:
        raise InputError(f"{spec.name} is not a corank-1 group; this command needs one")
    return spec.group


def _covector(G: c1.Corank1Group, text: str) -> c1.Covector:
    v = _floats(text, "--covector")
    if len(v) != G.n:
        raise InputError(f"--covector needs {G.n} numbers (p_x then p_z)")
    return c1.Covector(G.to_canonical(v[:-1]), v[-1])


def _point(G: c1.Corank1Group, text: str) -> c1.GroupPoint:
    v = _floats(text, "--point")
    if len(v) != G.n:
        raise InputError(f"--point needs {G.n} numbers (x then z)")
    return c1.GroupPoint(G.to_canonical(v[:-1]), v[-1])


def _default_seed() -> int:
    raw = os.environ.get("CARNOT_MCP_SEED")
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise InputError(f"CARNOT_MCP_SEED must be an integer, got {raw!r}") from None


def _omega(G: c1.Corank1Group, text: str | None) -> mcp.OmegaSpec | None:
    """``box:a1,b1,...,ak,bk,pz_lo,pz_hi`` or ``ball:radius,pz_cap``."""
    if text is None:
        return None
    kind, _, body = text.partition(":")
    vals = _floats(body, "--omega")
    if kind == "box":
        if len(vals) != 2 * (G.k + 1):
            raise InputError(f"box needs {2 * (G.k + 1)} numbers")
        pairs = vals.reshape(-1, 2)
        return mcp.OmegaSpec.box(pairs[:-1], pairs[-1])
    if kind == "ball":
        if len(vals) != 2:
            raise InputError("ball needs radius,pz_cap")
        return mcp.OmegaSpec.ball(vals[0], vals[1])
    raise InputError(f"unknown region {kind!r}; use box:... or ball:...")


def _tgrid(text: str | None):
    return None if text in (None, "default") else _floats(text, "--tgrid")


# --- commands -----------------------------------------------------------------


def cmd_validate(args, spec: LoadedSpec):
    res = {"name": spec.name, "valid": True, "n": spec.algebra.n, "step": spec.algebra.step,
           "corank1": spec.group is not None}
    return res, [], EXIT_OK


def cmd_info(args, spec: LoadedSpec):
    alg = spec.algebra
    code = EXIT_OK
    res = {"name": spec.name, "n": alg.n, "k": alg.rank, "step": alg.step,
           "growth": lie.growth_vector(alg), "Q": lie.hausdorff_dimension(alg)}
    try:
        flag = lie.max_geodesic_growth(alg)
        res["geodesic_growth"] = flag.geodesic_growth
        res["geodesic_dimension"] = lie.geodesic_dimension(alg, flag)
    except NotAmple as exc:
        res["geodesic_growth"] = None
        res["geodesic_dimension"] = None
        res["note"] = str(exc)
        code = EXIT_INCONCLUSIVE
    res["N_R"] = lie.rifford_bound(alg)
    try:
        fat = lie.is_fat(alg)
        res["fat"] = fat.fat
        res["ideal"] = fat.fat
        res["fat_certified"] = fat.certified
    except Inconclusive as exc:
        res["fat"] = res["ideal"] = None
        res["note"] = str(exc)
        code = EXIT_INCONCLUSIVE
    direction = lie.abnormal_line_direction(alg) if res.get("fat") is False else None
    res["abnormal_line"] = direction
    if direction is not None:
        exact = all(isinstance(v, Fraction) for v in direction)
        if exact:
            res["abnormal_covector"] = lie.has_abnormal_line(alg, direction)[1]
    if spec.group is not None:
        res["alphas"] = spec.group.alphas
        res["kernel_dim"] = spec.group.kernel_dim
    return res, [], code


def cmd_exp(args, spec):
    G = _group(spec)
    p = _covector(G, args.covector)
    q = c1.exp(G, p)
    return {"x": G.from_canonical(q.x), "z": q.z, "in_domain": c1.in_injectivity_domain(G, p)}, [], EXIT_OK


def cmd_log(args, spec):
    G = _group(spec)
    p = c1.log(G, _point(G, args.point))
    return {"px": G.from_canonical(p.px), "pz": p.pz}, [], EXIT_OK


def cmd_dist(args, spec):
    G = _group(spec)
    a = _point(G, args.point)
    b = _point(G, args.to) if args.to else c1.identity(G)
    return {"distance": c1.distance(G, b, a)}, [], EXIT_OK


def cmd_jacobian(args, spec):
    G = _group(spec)
    return {"jacobian": c1.jacobian(G, _covector(G, args.covector))}, [], EXIT_OK


def cmd_mcp_check(args, spec):
    G = _group(spec)
    rep = mcp.mcp_check(G, args.K, args.N, _omega(G, args.omega), _tgrid(args.tgrid),
                        args.samples, args.seed, args.workers)
    res = {"K": args.K, "N": args.N, "samples": args.samples, "verdict": rep.verdict,
           "min_margin": float(rep.margins.min()),
           "witness": rep.witness.to_dict() if rep.witness else None}
    code = {"pass": EXIT_OK, "fail": EXIT_FAIL, "inconclusive": EXIT_INCONCLUSIVE}[rep.verdict]
    return res, rep.rows(), code


def cmd_mcp_exponent(args, spec):
    G = _group(spec)
    est = mcp.estimate_curvature_exponent(G, t_grid=_tgrid(args.tgrid))
    return {"N_est": est, "k_plus_3": G.k + 3}, [], EXIT_OK


def cmd_mcp_fit(args, spec):
    G = _group(spec)
    fit = mcp.contraction_fit(G, _omega(G, args.omega), _tgrid(args.tgrid), args.samples,
                              args.seed, mode=args.mode, workers=args.workers)
    res = {"mode": fit.mode, "slope": fit.slope, "intercept": fit.intercept, "residual": fit.residual}
    rows = [{"t": float(t), "measure": float(m)} for t, m in zip(fit.t_grid, fit.measures)]
    return res, rows, EXIT_OK


def cmd_mcp_violate(args, spec):
    G = _group(spec)
    w = mcp.find_violation(G, args.N, args.eps_pz)
    if w is None:
        return {"N": args.N, "violation": False}, [], EXIT_OK
    px = G.from_canonical(w.covector.px)
    return {"N": args.N, "violation": True, "px": px, "pz": w.covector.pz, "t": w.t,
            "ratio": w.ratio}, [], EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="carnot-mcp",
        description="Invariants and measure contraction checks for Carnot groups.",
        epilog="built-in groups:\n" + BUILTIN_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("spec", help="built-in name or group file")
    common.add_argument("--format", choices=("table", "json", "csv"), default="table")
    common.add_argument("--out", help="write the report here instead of stdout")

    seeded = argparse.ArgumentParser(add_help=False)
    seeded.add_argument("--seed", type=int, default=None)
    seeded.add_argument("--samples", type=int, default=None)
    seeded.add_argument("--workers", type=int, default=1)
    seeded.add_argument("--tgrid", help="comma-separated t values, or 'default'")
    seeded.add_argument("--omega", help="box:a1,b1,...,pz_lo,pz_hi or ball:radius,pz_cap")

    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("validate", parents=[common]).set_defaults(func=cmd_validate)
    sub.add_parser("info", parents=[common]).set_defaults(func=cmd_info)
    for name, func, opt in [("exp", cmd_exp, "--covector"), ("log", cmd_log, "--point"),
                            ("jacobian", cmd_jacobian, "--covector"), ("dist", cmd_dist, "--point")]:
        p = sub.add_parser(name, parents=[common])
        p.add_argument(opt, required=True)
        p.set_defaults(func=func)
        if name == "dist":
            p.add_argument("--to", help="second point (default: identity)")

    m = sub.add_parser("mcp").add_subparsers(dest="mcp_command", required=True)
    p = m.add_parser("check", parents=[common, seeded])
    p.add_argument("--K", type=float, default=0.0)
    p.add_argument("--N", type=float, required=True)
    p.set_defaults(func=cmd_mcp_check, default_samples=1_000_000)
    p = m.add_parser("exponent", parents=[common])
    p.add_argument("--tgrid")
    p.set_defaults(func=cmd_mcp_exponent)
    p = m.add_parser("fit", parents=[common, seeded])
    p.add_argument("--mode", choices=("homothety", "ball"), default="homothety")
    p.set_defaults(func=cmd_mcp_fit, default_samples=100_000)
    p = m.add_parser("violate", parents=[common])
    p.add_argument("--N", type=float, required=True)
    p.add_argument("--eps-pz", type=float, default=0.05)
    p.set_defaults(func=cmd_mcp_violate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    start = time.perf_counter()
    try:
        if getattr(args, "seed", 0) is None:
            args.seed = _default_seed()
        if hasattr(args, "samples") and args.samples is None:
            args.samples = args.default_samples
        spec = load_spec(args.spec)
        results, rows, code = args.func(args, spec)
    except (CarnotError, InputError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    argv_echo = " ".join(sys.argv[1:] if argv is None else argv)
    report = RunReport(
        command=f"carnot-mcp {argv_echo}",
        input_digest=spec.digest,
        results=results,
        seed=getattr(args, "seed", None),
        wall_time=time.perf_counter() - start,
        rows=rows,
    )
    text = render_report(report, args.format)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
