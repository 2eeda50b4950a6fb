"""Command-line surface: approximation, kernel, volume and table pipelines.

Outputs are deterministic given (command, config, seed): results are JSON
with sorted keys, tables are CSV, and plots are SVG with floats pinned to 9
significant digits.  Exit codes: 0 success, 2 input error, 3 solver
indeterminate, 4 internal assertion.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import approx, conic, fixtures, kernel, metrics, viz
from .poly import Polynomial
from .semialg import SemialgebraicSet, bounding_box
from .kernel import PolytopeUnbounded

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_SOLVER = 3
EXIT_INTERNAL = 4


def _load_set(args) -> SemialgebraicSet:
    name = args.set
    try:
        return fixtures.by_name(name, c=getattr(args, "c", 0.9), r=getattr(args, "r", 0.4))
    except KeyError:
        pass
    try:
        with open(name) as fh:
            return SemialgebraicSet.from_dict(json.load(fh))
    except FileNotFoundError:
        raise ValueError(f"set source {name!r} is neither a named fixture nor a readable file")


def _emit(payload: dict, out: str) -> None:
    text = json.dumps(payload, sort_keys=True, indent=2) + "\n"
    if out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w") as fh:
            fh.write(text)


def _config_echo(args) -> dict:
    skip = {"func"}
    return {k: v for k, v in vars(args).items() if k not in skip}


def _boundary_field(X: SemialgebraicSet):
    return lambda pts: X.max_g_many(pts) - 1.0


def _svg_approx(path: str, X: SemialgebraicSet, f: Polynomial, s: float) -> None:
    box = bounding_box(X, pad=0.25)
    fig = viz.SvgFigure(box)
    for line in viz.marching_squares(_boundary_field(X), box):
        fig.polyline(line, "black", 2.0)
    for line in viz.marching_squares(lambda p: f.eval_many(p) - 1.0, box):
        fig.polyline(line, "#1f77b4", 1.5)
    fscaled = f.substitute_scale(s)
    for line in viz.marching_squares(lambda p: fscaled.eval_many(p) - 1.0, box):
        fig.polyline(line, "#d62728", 1.5, dash="6,3")
    fig.write(path)


def _svg_kernel(path: str, X: SemialgebraicSet, K) -> None:
    box = bounding_box(X, pad=0.25)
    fig = viz.SvgFigure(box)
    for line in viz.marching_squares(_boundary_field(X), box):
        fig.polyline(line, "black", 2.0)
    if not kernel.is_empty(K):
        try:
            verts = kernel.vertices_2d(K)
            fig.polygon(verts, "#2ca02c", fill="#2ca02c")
            center, _ = kernel.chebyshev_center(K)
            fig.point(center, "#d62728")
        except (PolytopeUnbounded, ValueError):
            pass
    fig.write(path)


def cmd_approximate(args) -> int:
    X = _load_set(args)
    res = approx.approximate(
        X,
        args.degree,
        s_tol=args.s_tol,
        eps=args.eps,
        mult_degree=args.mult_degree,
        unknown_policy=args.unknown_policy,
    )
    payload = {"command": "approximate", "config": _config_echo(args), "result": res.to_dict()}
    _emit(payload, args.out)
    if args.svg:
        if X.n != 2:
            raise ValueError("SVG output requires a 2D set")
        _svg_approx(args.svg, X, res.f, res.s_star)
    return EXIT_OK


def cmd_kernel(args) -> int:
    X = _load_set(args)
    if args.mode == "outer":
        forced = [np.array([float(t) for t in d.split(",")]) for d in args.forced_dir]
        K = kernel.outer_kernel(X, args.samples, seed=args.seed, forced_directions=forced)
    else:
        dirs = kernel.direction_set(X.n, args.directions, seed=args.seed)
        K = kernel.inner_kernel(X, dirs, mult_degree=args.mult_degree)
    result = K.to_dict()
    result["empty"] = kernel.is_empty(K)
    if not result["empty"] and X.n == 2:
        try:
            result["vertices_hull"] = [list(map(float, v)) for v in kernel.vertices_2d(K)]
            center, radius = kernel.chebyshev_center(K)
            result["chebyshev_center"] = list(map(float, center))
            result["chebyshev_radius"] = radius
        except (PolytopeUnbounded, ValueError) as exc:
            result["bounded"] = False
            result["note"] = str(exc)
    payload = {"command": f"kernel-{args.mode}", "config": _config_echo(args), "result": result}
    _emit(payload, args.out)
    if args.svg:
        if X.n != 2:
            raise ValueError("SVG output requires a 2D set")
        _svg_kernel(args.svg, X, K)
    return EXIT_OK


def cmd_volume(args) -> int:
    X = _load_set(args)
    if args.resolution < 1:
        raise ValueError(f"resolution must be >= 1, got {args.resolution}")
    region = metrics.set_region(X)
    if args.method == "polar":
        if args.center is None:
            raise ValueError("polar volume requires --center (star-convexity about it is assumed)")
        center = [float(t) for t in args.center.split(",")]
        est = metrics.volume_star(region, center, resolution=args.resolution)
    else:
        box = (
            [tuple(map(float, pair.split(","))) for pair in args.box.split(";")]
            if args.box
            else bounding_box(X)
        )
        est = metrics.volume_grid(region, box, resolution=args.resolution)
    payload = {"command": "volume", "config": _config_echo(args), "result": est.to_dict()}
    _emit(payload, args.out)
    return EXIT_OK


def cmd_table2(args) -> int:
    rs = [float(t) for t in args.rs.split(",")]
    rows = []
    for r in rs:
        try:
            X = fixtures.example_e(args.c, r)
            res = approx.approximate(X, args.degree, s_tol=args.s_tol, eps=args.eps)
            box = bounding_box(X)
            vol_x = metrics.volume_grid(metrics.set_region(X), box, args.grid_resolution).value
            f_outer = res.f.substitute_scale(res.s_star)
            obox = [(lo * res.s_star - 0.1, hi * res.s_star + 0.1) for lo, hi in box]
            vol_outer = metrics.volume_grid(
                metrics.sublevel_region(f_outer), obox, args.grid_resolution
            ).value
            vol_inner = metrics.volume_grid(
                metrics.sublevel_region(res.f), box, args.grid_resolution
            ).value
            rows.append(
                {
                    "example": f"exampleE(c={args.c},r={r})",
                    "degree": args.degree,
                    "objective": "s",
                    "s_star": res.s_star,
                    "s_lb": fixtures.example_e_scaling_lower_bound(args.c, r),
                    "vol_inner": vol_inner,
                    "vol_outer": vol_outer,
                    "percent_error": metrics.percent_error(vol_outer, vol_x),
                }
            )
            if args.include_l1:
                f_l1, _, _ = approx.find_l1_outer(X, box, args.degree)
                vol_l1 = metrics.volume_grid(
                    metrics.superlevel_region(f_l1), box, args.grid_resolution
                ).value
                rows.append(
                    {
                        "example": f"exampleE(c={args.c},r={r})",
                        "degree": args.degree,
                        "objective": "l1",
                        "vol_outer": vol_l1,
                        "percent_error": metrics.percent_error(vol_l1, vol_x),
                    }
                )
        except Exception as exc:  # noqa: BLE001 - per-row failures must not stop the table
            print(f"row r={r} failed: {exc}", file=sys.stderr)
            rows.append({"example": f"exampleE(c={args.c},r={r})", "degree": args.degree, "objective": "error"})
    metrics.write_table_csv(args.out, rows)
    return EXIT_OK


def cmd_dump_set(args) -> int:
    X = _load_set(args)
    _emit(X.to_dict(), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="starset", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    def add_set_opts(sp):
        sp.add_argument("--set", required=True, help="named fixture (disk, exampleA, exampleB, exampleE) or JSON path")
        sp.add_argument("--c", type=float, default=0.9, help="exampleE center offset")
        sp.add_argument("--r", type=float, default=0.4, help="exampleE inner radius")
        sp.add_argument("--out", default="-", help="output path (default stdout)")
        sp.add_argument("--seed", type=int, default=0)

    sp = sub.add_parser("approximate", help="inner/outer sublevel-set pair by scaling bisection")
    add_set_opts(sp)
    sp.add_argument("--degree", type=int, default=4)
    sp.add_argument("--s-tol", type=float, default=1e-3, dest="s_tol")
    sp.add_argument("--eps", type=float, default=approx.EPS_DEFAULT)
    sp.add_argument("--mult-degree", type=int, default=None, dest="mult_degree")
    sp.add_argument("--unknown-policy", choices=("infeasible", "error"), default="infeasible", dest="unknown_policy")
    sp.add_argument("--svg", default=None, help="write a 2D overlay plot to this path")
    sp.set_defaults(func=cmd_approximate)

    sp = sub.add_parser("kernel", help="polytopic kernel approximation")
    sp.add_argument("mode", choices=("outer", "inner"))
    add_set_opts(sp)
    sp.add_argument("--samples", type=int, default=2000, help="boundary samples (outer)")
    sp.add_argument("--directions", type=int, default=64, help="support directions (inner)")
    sp.add_argument("--mult-degree", type=int, default=2, dest="mult_degree")
    sp.add_argument("--forced-dir", action="append", default=[], help="comma-separated direction processed before sampling (repeatable)")
    sp.add_argument("--svg", default=None)
    sp.set_defaults(func=cmd_kernel)

    sp = sub.add_parser("volume", help="volume estimation")
    add_set_opts(sp)
    sp.add_argument("--method", choices=("polar", "grid"), default="grid")
    sp.add_argument("--center", default=None, help="polar center, e.g. 0,0")
    sp.add_argument("--resolution", type=int, default=None)
    sp.add_argument("--box", default=None, help="grid box as lo,hi;lo,hi (default: swept bounding box)")
    sp.set_defaults(func=cmd_volume)

    sp = sub.add_parser("table2", help="eccentric-annulus benchmark rows (scaling objective)")
    sp.add_argument("--c", type=float, default=0.9)
    sp.add_argument("--rs", default="0.1,0.2,0.3,0.4")
    sp.add_argument("--degree", type=int, default=4)
    sp.add_argument("--s-tol", type=float, default=1e-3, dest="s_tol")
    sp.add_argument("--eps", type=float, default=approx.EPS_DEFAULT)
    sp.add_argument("--include-l1", action="store_true", dest="include_l1")
    sp.add_argument("--grid-resolution", type=int, default=1500, dest="grid_resolution")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", required=True, help="CSV output path")
    sp.set_defaults(func=cmd_table2)

    sp = sub.add_parser("dump-set", help="write a fixture as JSON")
    add_set_opts(sp)
    sp.set_defaults(func=cmd_dump_set)

    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "resolution", "x") is None:
        args.resolution = 10_000 if args.method == "polar" else 2000
    try:
        return args.func(args)
    except (ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        _emit({"error": str(exc), "exit_code": EXIT_INPUT}, getattr(args, "out", "-"))
        return EXIT_INPUT
    except (conic.SolverIndeterminate, approx.ApproximationError) as exc:
        _emit({"error": str(exc), "exit_code": EXIT_SOLVER}, getattr(args, "out", "-"))
        return EXIT_SOLVER
    except Exception as exc:  # noqa: BLE001
        _emit({"error": f"internal: {exc}", "exit_code": EXIT_INTERNAL}, getattr(args, "out", "-"))
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
