"""Command-line front end.

Exit codes: 0 success, 1 I/O error, 2 validation error, 3 verification failure.
JSON and CSV go to stdout (or files), diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
import warnings
from pathlib import Path

from .constructions import build_fuglede_sequence, build_two_disk_competitor, fuglede_member
from .errors import IsoperimError
from .functionals import basic_terms, evaluate
from .geometry import Disk, Shape, diameter, diameter_pair, validate
from .optimality import ShootingParams, optimality_residual, shoot
from .optimizer import OptimConfig, initial_param, minimize, project_constraints, run_config_json, synthesize
from .verification import GROUPS, run_checks

EXIT_OK, EXIT_IO, EXIT_INVALID, EXIT_VERIFY = 0, 1, 2, 3
SVG_SCALE = 100.0


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _read_shape(path: str) -> Shape:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror or exc}", EXIT_IO) from exc
    try:
        return validate(Shape.from_json(text), strict=True)
    except (ValueError, KeyError, TypeError) as exc:
        raise CliError(f"{path}: {exc}", EXIT_INVALID) from exc


def _write(path: str | Path, text: str) -> None:
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise CliError(f"cannot write {path}: {exc.strerror or exc}", EXIT_IO) from exc


def _emit(text: str, out: str | None) -> None:
    if out:
        _write(out, text)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _container(shape: Shape, D: float) -> Disk:
    _, p, q = diameter_pair(shape)
    return Disk(((p.x + q.x) / 2.0, (p.y + q.y) / 2.0), D / 2.0)


# ---------------------------------------------------------------------------
# subcommands


def cmd_eval(args) -> int:
    shape = _read_shape(args.shape)
    report = evaluate(shape, fraenkel=not args.no_fraenkel)
    _emit(json.dumps(report.to_dict(), indent=2), None)
    return EXIT_OK


def cmd_construct(args) -> int:
    if args.kind == "two-disks":
        comp, shape = build_two_disk_competitor(args.D, n=args.vertices)
        analytic = comp.analytic()
    else:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            member = fuglede_member(args.n)
            shape, delta, lam = build_fuglede_sequence(args.n, vertices=args.vertices)
        for w in {str(w.message) for w in caught}:
            print(f"warning: {w}", file=sys.stderr)
        analytic = {
            "R": member.R,
            "r": member.r,
            "delta": delta,
            "lambda0": lam,
            "J": None if lam is None else delta / lam**2,
        }
    _write(f"{args.out}.shape.json", shape.to_json())
    _write(f"{args.out}.analytic.json", json.dumps(analytic, indent=2))
    _emit(json.dumps({"shape": f"{args.out}.shape.json", "analytic": f"{args.out}.analytic.json", **analytic}), None)
    return EXIT_OK


def cmd_verify(args) -> int:
    results = run_checks(args.filter)
    ok = all(r.passed for r in results)
    if args.json:
        _emit(json.dumps({"passed": ok, "checks": [r.to_dict() for r in results]}, indent=2), None)
    else:
        width = max(len(r.name) for r in results)
        for r in results:
            status = "pass" if r.passed else "FAIL"
            print(f"{r.name:<{width}}  expected {r.expected:<24} computed {r.computed:<22.12g} {status}")
        print(f"{sum(r.passed for r in results)}/{len(results)} checks passed")
    return EXIT_OK if ok else EXIT_VERIFY


def cmd_residual(args) -> int:
    shape = _read_shape(args.shape)
    container = _container(shape, args.D) if args.D is not None else None
    profile = optimality_residual(shape, container=container)
    _emit(profile.to_csv(), args.out)
    print(f"residual sup {profile.sup_norm:.6e}  L2 {profile.l2_norm:.6e}", file=sys.stderr)
    return EXIT_OK


def cmd_shoot(args) -> int:
    length = args.length if args.length is not None else 2.0 * math.pi
    params = ShootingParams(
        a_out=args.a_out,
        a_in=args.a_in,
        mu1=args.mu1,
        start=(args.x0, args.y0),
        theta0=args.theta0,
        arclength_budget=length,
        step=length / args.steps,
    )
    profile = shoot(params)
    if args.out:
        _write(args.out, profile.to_csv())
    summary = {
        "closure_gap": profile.closure_gap(),
        "length": float(profile.s[-1]),
        "samples": len(profile),
        "switches": len(profile.switches),
        "jumps": [float(j) for j in profile.jumps_measured],
    }
    _emit(json.dumps(summary), None)
    return EXIT_OK


def cmd_optimize(args) -> int:
    config = OptimConfig(
        D=args.D,
        modes=args.modes,
        max_iters=args.iters,
        resolution=args.resolution,
        seed=args.seed,
        components=args.components,
        fd_step=args.fd_step,
    )
    init = initial_param(config, args.init)

    def progress(it, _param, trace):
        if args.verbose:
            print(f"iter {it}: J = {trace.iterations[-1][1]:.10f}", file=sys.stderr)

    param, trace = minimize(config, init, callback=progress)
    shape = synthesize(project_constraints(param, config), config.resolution)
    _write(f"{args.out}.shape.json", shape.to_json())
    _write(f"{args.out}.param.json", json.dumps(param.to_dict(), indent=2))
    _write(f"{args.out}.trace.csv", trace.to_csv())
    _write(f"{args.out}.config.json", run_config_json(config, args.init))
    first, last = trace.iterations[0], trace.iterations[-1]
    _emit(json.dumps({
        "initial_J": first[1],
        "final_J": last[1],
        "iterations": last[0],
        "stalled": trace.stalled,
        "trace": f"{args.out}.trace.csv",
    }), None)
    return EXIT_OK


def _svg_path(vertices) -> str:
    pts = [f"{x * SVG_SCALE:.3f},{-y * SVG_SCALE:.3f}" for x, y in vertices]
    return "M " + " L ".join(pts) + " Z"


def render_svg(shape: Shape, D: float | None = None) -> str:
    """SVG with one path per component, the barycentric circle and a container circle."""
    t = basic_terms(shape)
    container = _container(shape, D if D is not None else diameter(shape))
    circles = [("barycentric", Disk(t.barycenter, t.radius)), ("container", container)]
    xs = [v[:, 0] for v in (c.vertices for c in shape.components)]
    ys = [v[:, 1] for v in (c.vertices for c in shape.components)]
    lo_x = min(min(float(x.min()) for x in xs), *(d.center.x - d.radius for _, d in circles))
    hi_x = max(max(float(x.max()) for x in xs), *(d.center.x + d.radius for _, d in circles))
    lo_y = min(min(float(y.min()) for y in ys), *(d.center.y - d.radius for _, d in circles))
    hi_y = max(max(float(y.max()) for y in ys), *(d.center.y + d.radius for _, d in circles))
    pad = 0.05 * max(hi_x - lo_x, hi_y - lo_y)
    vb = (
        (lo_x - pad) * SVG_SCALE,
        -(hi_y + pad) * SVG_SCALE,
        (hi_x - lo_x + 2 * pad) * SVG_SCALE,
        (hi_y - lo_y + 2 * pad) * SVG_SCALE,
    )
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        '<svg xmlns="http://www.w3.org/2000/svg" viewBox="%.3f %.3f %.3f %.3f">' % vb,
    ]
    for i, comp in enumerate(shape.components):
        lines.append(
            f'  <path id="component-{i}" d="{_svg_path(comp.vertices)}" fill="#4a7ab5" fill-opacity="0.5" stroke="#1d3d66"/>'
        )
    for name, disk in circles:
        lines.append(
            f'  <circle id="{name}" cx="{disk.center.x * SVG_SCALE:.3f}" cy="{-disk.center.y * SVG_SCALE:.3f}" '
            f'r="{disk.radius * SVG_SCALE:.3f}" fill="none" stroke="#b54a4a" stroke-dasharray="6 4"/>'
        )
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def cmd_render(args) -> int:
    shape = _read_shape(args.shape)
    _emit(render_svg(shape, args.D), args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="isoperim", description="Isoperimetric deficit and barycentric asymmetry toolkit.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", help="evaluate all functionals of a shape file")
    p.add_argument("shape")
    p.add_argument("--no-fraenkel", action="store_true", help="skip the Fraenkel asymmetry search")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("construct", help="write an explicit competitor and its analytic values")
    p.add_argument("kind", choices=["two-disks", "fuglede"])
    p.add_argument("--D", type=float, default=10.0)
    p.add_argument("--n", type=int, default=8)
    p.add_argument("--vertices", type=int, default=2048)
    p.add_argument("--out", default="competitor")
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("verify", help="recompute the published constants and inequalities")
    p.add_argument("--filter", choices=GROUPS)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("residual", help="curvature optimality residual as CSV")
    p.add_argument("shape")
    p.add_argument("--D", type=float, help="exclude points on the container circle of diameter D")
    p.add_argument("--out")
    p.set_defaults(func=cmd_residual)

    p = sub.add_parser("shoot", help="integrate the pendulum boundary ODE")
    p.add_argument("--mu1", type=float, required=True)
    p.add_argument("--a-in", type=float, required=True)
    p.add_argument("--a-out", type=float, required=True)
    p.add_argument("--x0", type=float, required=True)
    p.add_argument("--y0", type=float, required=True)
    p.add_argument("--theta0", type=float, required=True)
    p.add_argument("--steps", type=int, default=7000)
    p.add_argument("--length", type=float, help="arclength to integrate (default 2π)")
    p.add_argument("--out", help="write the curvature profile CSV here")
    p.set_defaults(func=cmd_shoot)

    p = sub.add_parser("optimize", help="minimize J under |K| = π and diam(K) <= D")
    p.add_argument("--D", type=float, default=10.0)
    p.add_argument("--init", choices=["two-disks", "disk"], default="two-disks")
    p.add_argument("--modes", type=int, default=8)
    p.add_argument("--iters", type=int, default=300)
    p.add_argument("--resolution", type=int, default=512)
    p.add_argument("--components", type=int, default=2, choices=[1, 2, 3])
    p.add_argument("--fd-step", type=float, default=1e-6)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="optimized")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("render", help="SVG of a shape with its barycentric and container circles")
    p.add_argument("shape")
    p.add_argument("--D", type=float, help="container diameter (default: the shape's diameter)")
    p.add_argument("--out")
    p.set_defaults(func=cmd_render)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (IsoperimError, ValueError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
