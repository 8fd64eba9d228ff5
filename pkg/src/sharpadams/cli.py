"""Command-line front end.

Array outputs are CSV preceded by one ``# {json}`` metadata line; scalar
reports are JSON objects with a ``meta`` key. Outputs carry no timestamps, so
identical arguments give identical bytes.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .constants import SobolevParams, alpha_n, beta_nm, c_nk, j_index, omega_n
from .rearrangement import RadialProfile, decreasing_rearrangement

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


class ConfigError(ValueError):
    """Invalid command-line configuration."""


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not serialisable: {type(o).__name__}")


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n"


def _meta(args) -> dict:
    conf = {k: (str(v) if isinstance(v, Path) else v) for k, v in sorted(vars(args).items())
            if k not in ("func",)}
    return {"version": __version__, "config": conf, "seed": getattr(args, "seed", None)}


def _emit(text: str, out: Path | None):
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text)


def _csv(meta: dict, header: list[str], rows) -> str:
    buf = io.StringIO()
    buf.write("# " + json.dumps(meta, sort_keys=True, default=_json_default) + "\n")
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(_fmt(v) for v in row) + "\n")
    return buf.getvalue()


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def _params(n, m) -> SobolevParams:
    try:
        return SobolevParams(n, m)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def read_profile(path: Path, n: int, dirichlet: bool = False) -> RadialProfile:
    """Load a ``r,value`` CSV (``#`` lines ignored) as a radial profile."""
    try:
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(line for line in fh if not line.startswith("#")))
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    if not rows or not {"r", "value"} <= set(rows[0]):
        raise ConfigError(f"{path}: expected header 'r,value'")
    try:
        r = np.array([float(row["r"]) for row in rows])
        v = np.array([float(row["value"]) for row in rows])
        return RadialProfile(n, r, v, dirichlet=dirichlet)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def write_profile(u: RadialProfile, meta: dict, out: Path | None):
    _emit(_csv(meta, ["r", "value"], zip(u.radii, u.values)), out)


# -- subcommands ---------------------------------------------------------------

def cmd_constants(args) -> int:
    p = _params(args.dim, args.order)
    k = args.k if args.k is not None else max(1, p.m // 2)
    try:
        ck = c_nk(p.n, k)
    except ValueError:
        if args.k is not None:
            raise ConfigError(f"c(n,k) needs 1 <= k < n/2, got k={k}")
        ck = None
    body = {"n": p.n, "m": p.m, "omega_n": omega_n(p.n), "alpha_n": alpha_n(p.n),
            "beta_nm": beta_nm(p), "c_nk": ck, "k": k, "j_index": j_index(p), "meta": _meta(args)}
    _emit(_dumps(body), args.out)
    return EXIT_OK


def cmd_rearrange(args) -> int:
    u = read_profile(args.input, args.dim)
    star = decreasing_rearrangement(u.to_cells())
    rows = list(zip(star.breakpoints[:-1], star.levels)) + [(star.breakpoints[-1], 0.0)]
    _emit(_csv(_meta(args), ["t", "level"], rows), args.out)
    return EXIT_OK


def cmd_kernels(args) -> int:
    from .kernels import kernel_table, log_grid

    try:
        grid = log_grid(args.lo, args.hi, args.size)
        table = kernel_table(args.dim, args.order, grid, grid, tol=args.tol)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    meta = _meta(args) | {"sup_ratio": table.sup_ratio}
    _emit(_csv(meta, ["t", "s", "value", "error", "bound_ratio"], table.rows()), args.out)
    return EXIT_OK


def cmd_solve(args) -> int:
    from .radial_solver import solve_helmholtz_like, solve_polyharmonic

    f = read_profile(args.input, args.dim)
    if args.power < 1:
        raise ConfigError("--power must be >= 1")
    try:
        if args.op == "laplace":
            u = solve_polyharmonic(f, args.power)
        else:
            u = f
            for _ in range(args.power):
                u = solve_helmholtz_like(u)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if args.radius is not None and not math.isclose(args.radius, u.R, rel_tol=1e-12):
        raise ConfigError(f"--radius {args.radius} does not match the grid radius {u.R}")
    write_profile(u, _meta(args), args.out)
    return EXIT_OK


def cmd_functional(args) -> int:
    from .functionals import adams_functional_ball, adams_functional_space
    from .radial_solver import grad_m_norm

    p = _params(args.dim, args.order)
    u = read_profile(args.input, args.dim)
    try:
        budget = grad_m_norm(u, p) if u.radii.size >= 256 else None
        if args.space:
            rep = adams_functional_space(u, p, args.mult, norm_budget=budget)
        else:
            rep = adams_functional_ball(u, p, args.mult, normalize=args.normalize, norm_budget=budget)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    body = rep.as_dict() | {"meta": _meta(args)}
    _emit(_dumps(body), args.out)
    return EXIT_OK


def cmd_sweep(args) -> int:
    from .extremals import divergence_sweep

    p = _params(args.dim, args.order)
    if args.jmax < 8:
        raise ConfigError("--jmax must be >= 8")
    if not 0.0 <= args.alpha < 1.0:
        raise ConfigError("--alpha must lie in [0, 1)")
    if args.mult <= 0:
        raise ConfigError("--mult must be positive")
    j_list = [2 ** e for e in range(3, int(math.log2(args.jmax)) + 1)]
    reports = divergence_sweep(p, args.alpha, args.mult, j_list, n_nodes=args.nodes)
    rows = [(r.j, r.norm_uj, r.log_value, r.diverged) for r in reports]
    _emit(_csv(_meta(args), ["j", "norm", "log_value", "diverged"], rows), args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    from .verify import run_suite

    try:
        reports = run_suite(args.suite, seed=args.seed, n_nodes=args.nodes)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    body = {"meta": _meta(args), "reports": [r.as_dict() for r in reports],
            "pass": all(r.passed for r in reports)}
    _emit(_dumps(body), args.out)
    return EXIT_OK if body["pass"] else EXIT_FAIL


# -- parser --------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="sharpadams", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--out", type=Path, default=None, help="output file (default: stdout)")
        sp.set_defaults(func=func)
        return sp

    sp = add("constants", cmd_constants, "sharp constants for (n, m)")
    sp.add_argument("--dim", type=int, required=True)
    sp.add_argument("--order", type=int, required=True)
    sp.add_argument("--k", type=int, default=None, help="index for c(n,k) (default: max(1, m//2))")

    sp = add("rearrange", cmd_rearrange, "decreasing rearrangement of a radial profile")
    sp.add_argument("--in", dest="input", type=Path, required=True)
    sp.add_argument("--dim", type=int, required=True)

    sp = add("kernels", cmd_kernels, "iterated kernel g_i on a log grid")
    sp.add_argument("--order", type=int, required=True)
    sp.add_argument("--dim", type=int, required=True)
    sp.add_argument("--size", type=int, default=20)
    sp.add_argument("--lo", type=float, default=1e-3)
    sp.add_argument("--hi", type=float, default=1e3)
    sp.add_argument("--tol", type=float, default=1e-8)

    sp = add("solve", cmd_solve, "radial Dirichlet solve")
    sp.add_argument("--op", choices=("laplace", "helmholtz"), required=True)
    sp.add_argument("--power", type=int, default=1)
    sp.add_argument("--dim", type=int, required=True)
    sp.add_argument("--radius", type=float, default=None, help="checked against the grid")
    sp.add_argument("--in", dest="input", type=Path, required=True)

    sp = add("functional", cmd_functional, "exponential functional of a profile")
    sp.add_argument("--in", dest="input", type=Path, required=True)
    sp.add_argument("--dim", type=int, required=True)
    sp.add_argument("--order", type=int, required=True)
    sp.add_argument("--mult", type=float, default=1.0)
    sp.add_argument("--normalize", action="store_true")
    sp.add_argument("--space", action="store_true", help="truncated exponential over the whole space")

    sp = add("sweep", cmd_sweep, "functional along the concentrating sequence")
    sp.add_argument("--dim", type=int, required=True)
    sp.add_argument("--order", type=int, required=True)
    sp.add_argument("--alpha", type=float, default=0.0)
    sp.add_argument("--mult", type=float, default=1.0)
    sp.add_argument("--jmax", type=int, default=4096)
    sp.add_argument("--nodes", type=int, default=4096)

    sp = add("verify", cmd_verify, "run inequality checks")
    sp.add_argument("--suite", default="all",
                    choices=("hardy", "ms", "keypropo", "keyfull", "odd", "radial", "all"))
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--nodes", type=int, default=4096)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
