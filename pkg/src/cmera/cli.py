"""Command-line front end: ``cmera {correlator, verify, kernel-map, flow-dump}``.

Output files go to ``--output`` or, for bare file names, to the directory in
``CMERA_OUTPUT_DIR`` (default: the working directory). Exit codes: 0 success,
1 invalid parameters, 2 numerical failure, 3 failed verification.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .correlators import OBSERVABLES, correlator_table
from .errors import CmeraError, DomainError
from .flow import FIXED_POINT_S, alpha_closed, alpha_flow, ir_mass
from .geometry import Geometry
from .kernels import KernelFn, kernel_grid
from .magic import occupation_number
from .profiles import Profile, g_momentum
from .transforms import QuadratureSpec
from .verify import SUITES, run_suite, write_reports

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL, EXIT_VERIFY = 0, 1, 2, 3
OUTPUT_ENV = "CMERA_OUTPUT_DIR"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_VALIDATION, f"{self.prog}: error: {message}\n")


def _output_path(arg: str | None, default_name: str) -> Path:
    base = Path(os.environ.get(OUTPUT_ENV, "."))
    if arg is None:
        path = base / default_name
    else:
        path = Path(arg)
        if not path.is_absolute() and path.parent == Path("."):
            path = base / path
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def _geometry(args) -> Geometry:
    if args.geometry == "full":
        return Geometry.full()
    if args.geometry == "boundary":
        if args.xi is None:
            raise DomainError("--xi is required for the boundary geometry")
        return Geometry.boundary(args.xi)
    if args.theta is None:
        raise DomainError("--theta is required for the defect geometry")
    return Geometry.defect(args.theta)


def _positive(text: str) -> float:
    v = float(text)
    if not (v > 0 and math.isfinite(v)):
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text}")
    return v


def _add_geometry(p, kinds):
    p.add_argument("--geometry", choices=kinds, default=kinds[0])
    p.add_argument("--xi", type=int, choices=(-1, 1), help="boundary sign: -1 Dirichlet, +1 Neumann")
    p.add_argument("--theta", type=float, help="defect angle in radians, in (-pi/2, pi/2]; 3pi/8 = 1.178097 gives the reference defect panel")
    p.add_argument("--profile", choices=("gaussian", "magic"), default="gaussian")
    p.add_argument("--lam", type=_positive, default=1.0, help="UV scale Lambda")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cmera", description="Gaussian cMERA correlators, entanglers and checks.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("correlator", help="exact vs cMERA correlator sweep in x at fixed y")
    _add_geometry(c, ("full", "boundary", "defect"))
    c.add_argument("--observable", choices=OBSERVABLES, default="pipi")
    c.add_argument("--y", type=float, default=10.0, help="fixed point, in units of 1/Lambda")
    c.add_argument("--x-min", type=float, default=0.1)
    c.add_argument("--x-max", type=float, default=40.0)
    c.add_argument("--points", type=int, default=400)
    c.add_argument("--x-ref", type=float, default=1.0, help="reference point for phiphi-diff")
    c.add_argument("--abs-tol", type=_positive, default=1e-10)
    c.add_argument("--format", choices=("csv", "json"), default="csv")
    c.add_argument("--output")

    v = sub.add_parser("verify", help="run an invariant suite")
    v.add_argument("suite", choices=SUITES + ("all",))
    v.add_argument("--seed", type=int, help="seed for randomized checks (modes suite)")
    v.add_argument("--output")

    k = sub.add_parser("kernel-map", help="grid of |modification| of the entangler")
    _add_geometry(k, ("boundary", "defect"))
    k.add_argument("--extent", type=_positive, default=5.0, help="grid half-size in units of 1/Lambda")
    k.add_argument("--points", type=int, default=101)
    k.add_argument("--image-scale", type=float, default=1.0, help="defect image coefficient factor")
    k.add_argument("--output")

    f = sub.add_parser("flow-dump", help="alpha(k, s): closed form and flow quadrature")
    f.add_argument("--profile", choices=("gaussian", "magic"), default="magic")
    f.add_argument("--lam", type=_positive, default=1.0)
    f.add_argument("--s", type=float, default=math.inf, help="flow time (inf for the fixed point)")
    f.add_argument("--k-min", type=_positive, default=1e-3)
    f.add_argument("--k-max", type=_positive, default=1e3)
    f.add_argument("--points", type=int, default=121)
    f.add_argument("--output")
    return parser


def cmd_correlator(args) -> int:
    geometry = _geometry(args)
    profile = Profile(args.profile, args.lam)
    if args.points < 2 or not args.x_max > args.x_min:
        raise DomainError("need --points >= 2 and --x-max > --x-min")
    xs = np.linspace(args.x_min, args.x_max, args.points) / args.lam
    table = correlator_table(geometry, profile, args.observable, xs, args.y / args.lam,
                             QuadratureSpec(abs_tol=args.abs_tol),
                             x_ref=args.x_ref / args.lam if args.observable == "phiphi-diff" else None)
    name = f"correlator-{geometry.label()}-{profile.kind}-{args.observable}.{args.format}"
    path = _output_path(args.output, name)
    (table.to_csv if args.format == "csv" else table.to_json)(path)
    print(path)
    return EXIT_OK


def cmd_verify(args) -> int:
    names = SUITES if args.suite == "all" else (args.suite,)
    reports = []
    for name in names:
        kwargs = {"seed": args.seed} if name == "modes" and args.seed is not None else {}
        rep = run_suite(name, **kwargs)
        reports.append(rep)
        for c in rep.checks:
            print(f"[{'PASS' if c.passed else 'FAIL'}] {name}: {c.name}: {c.value:.3e} "
                  f"({'<=' if c.kind == 'max' else '>='} {c.threshold:.1e})")
    path = _output_path(args.output, f"verify-{args.suite}.json")
    write_reports(reports, path)
    print(path)
    return EXIT_OK if all(r.passed for r in reports) else EXIT_VERIFY


def cmd_kernel_map(args) -> int:
    geometry = _geometry(args)
    kernel = KernelFn(geometry, Profile(args.profile, args.lam), args.image_scale)
    grid = kernel_grid(kernel, args.extent / args.lam, args.points)
    path = _output_path(args.output, f"kernel-map-{geometry.label()}-{args.profile}.csv")
    grid.to_csv(path)
    print(path)
    return EXIT_OK


def cmd_flow_dump(args) -> int:
    profile = Profile(args.profile, args.lam)
    if args.s < 0 or math.isnan(args.s):
        raise DomainError("--s must be non-negative")
    if args.points < 2 or not args.k_max > args.k_min:
        raise DomainError("need --points >= 2 and --k-max > --k-min")
    ks = np.logspace(math.log10(args.k_min), math.log10(args.k_max), args.points) * args.lam
    s_quad = FIXED_POINT_S if math.isinf(args.s) else args.s
    closed = alpha_closed(profile, ks, args.s)
    quad = np.array([alpha_flow(profile, k, s_quad) for k in ks])
    path = _output_path(args.output, f"flow-{profile.kind}-s{args.s:g}.csv")
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        header = ["k", "alpha_closed", "alpha_flow", "g_k"]
        if profile.kind == "magic":
            header.append("occupation")
        w.writerow(header)
        occ = occupation_number(ks, args.s, args.lam) if profile.kind == "magic" else None
        gk = g_momentum(profile, ks)
        for i, k in enumerate(ks):
            row = [k, closed[i], quad[i], gk[i]] + ([occ[i]] if occ is not None else [])
            w.writerow([repr(float(v)) for v in row])
    meta = path.with_suffix(".json")
    meta.write_text(json.dumps({"profile": profile.kind, "lambda": profile.lam, "s": args.s,
                                "s_quadrature": s_quad, "m": ir_mass(profile, args.s)}, indent=2) + "\n")
    print(path)
    return EXIT_OK


_COMMANDS = {"correlator": cmd_correlator, "verify": cmd_verify,
             "kernel-map": cmd_kernel_map, "flow-dump": cmd_flow_dump}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except DomainError as exc:
        print(f"cmera: invalid parameters: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (CmeraError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"cmera: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
