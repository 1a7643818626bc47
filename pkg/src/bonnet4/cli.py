"""Command-line entry point.

Exit codes: 0 success, 1 a verification failed, 2 bad input (usage, file
format, preconditions). Reports are written as sorted, rounded JSON so that
identical inputs give identical bytes.
"""
import argparse
import dataclasses
import sys
from pathlib import Path

import numpy as np

from . import __version__, verify
from .config import DEFAULT
from .deform import deform_data, deform_data_two, procrustes_align, reconstruct
from .errors import Bonnet4Error, ParameterError
from .examples import CATALOG, catalog_text, make_example, make_stack, reattach_provider
from .immersion import PROJECTIONS, export_obj, load_grid, save_grid
from .invariants import analyze
from .moduli import compare
from .report import deformation_certificate, dumps, error_dict, export_fields, surface_report

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


class UsageError(Exception):
    pass


def _write(text, path):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _tolerances(pairs):
    if not pairs:
        return DEFAULT
    kw = {}
    for item in pairs:
        key, sep, val = item.partition("=")
        if not sep:
            raise UsageError(f"--tol expects name=value, got {item!r}")
        try:
            kw[key] = type(getattr(DEFAULT, key))(val) if hasattr(DEFAULT, key) else float(val)
        except ValueError:
            raise UsageError(f"--tol {key}: not a number: {val!r}") from None
    try:
        return DEFAULT.override(**kw)
    except KeyError as exc:
        raise UsageError(str(exc.args[0])) from None


def _example_params(args):
    params = {}
    for key in ("r", "a", "b", "k", "m", "vmax", "half"):
        val = getattr(args, key)
        if val is not None:
            params[key] = val
    for item in args.param or []:
        key, sep, val = item.partition("=")
        if not sep:
            raise UsageError(f"--param expects name=value, got {item!r}")
        params[key] = val
    return params


def _load(path):
    return reattach_provider(load_grid(path))


def _analysis_stack(imm, tol):
    """Chart stack for an unmodified built-in sphere, else None."""
    if imm.provider is None or imm.name not in ("sphere", "whitney_sphere"):
        return None
    params = {k: v for k, v in imm.params.items() if k != "chart"}
    try:
        stack = make_stack(imm.name, params, imm.grid.nu, imm.grid.nv)
    except ParameterError:
        return None
    return [(analyze(m, tol=tol), w) for m, w in stack]


# ----------------------------------------------------------------- commands

def cmd_make(args, tol):
    imm = make_example(args.example, _example_params(args), args.nu, args.nv, chart=args.chart)
    save_grid(imm, args.out)
    if args.obj:
        export_obj(imm, args.obj, args.project)
    print(f"wrote {args.out}: {imm.name} on {imm.grid.nu}x{imm.grid.nv} "
          f"(periodic u={imm.grid.periodic_u}, v={imm.grid.periodic_v})")
    return EXIT_OK


def cmd_analyze(args, tol):
    imm = _load(args.input)
    an = analyze(imm, mode=args.mode, tol=tol)
    stack = _analysis_stack(imm, tol) if args.mode == "auto" else None
    rep = surface_report(an, stack=stack, tol=tol)
    _write(dumps(rep), args.out)
    if args.fields:
        export_fields(an, args.fields)
    return EXIT_OK


def cmd_deform(args, tol):
    imm = _load(args.input)
    if imm.c != 0:
        raise ParameterError("deform reconstructs surfaces in R^4 only (c = 0)")
    an = analyze(imm, tol=tol)
    if args.two is not None:
        dd = deform_data_two(an.fd, an.hd, args.two[0], args.two[1], position=imm.position, tol=tol)
    else:
        if args.theta is None:
            raise UsageError("deform needs --theta or --two THETA PHI")
        dd = deform_data(an.fd, an.hd, args.theta, 1 if args.lift == "plus" else -1, position=imm.position)
    rec = reconstruct(dd, tol=tol)
    out = dataclasses.replace(rec.surface, name=f"deformed:{imm.name or 'surface'}",
                              params={"mode": dd.mode, "angles": list(dd.angles),
                                      "lift_sign": dd.lift_sign})
    save_grid(out, args.out)
    if args.obj:
        export_obj(out, args.obj, args.project)
    rec_an = analyze(out, tol=tol, check_isothermal=False)
    _, rms = procrustes_align(out, imm)
    cert = deformation_certificate(dd, rec, an, rec_an, rms)
    cert["green"] = _green(cert, an, tol)
    cert["all_green"] = all(cert["green"].values())
    cert_path = args.cert or str(Path(args.out).with_suffix("")) + ".cert.json"
    _write(dumps(cert), cert_path)
    print(f"wrote {args.out} and {cert_path}; certificate {'all green' if cert['all_green'] else 'NOT green'}")
    return EXIT_OK


def _green(cert, an, tol):
    """Pass flags of a deformation certificate."""
    scale = an.cd.scale
    gcr = max(cert["gcr"].values())
    return {
        "gcr": gcr <= tol.certificate * scale,
        "path_independence": cert["path_independence"] <= tol.path_factor * max(gcr, tol.path_floor),
        "orthogonality": cert["orthogonality"] <= tol.frame_orthonormal,
        "metric": cert["metric_residual"] <= tol.certificate,
        "H_norm": cert["H_norm_preservation"] <= tol.certificate * np.sqrt(scale),
    }


def cmd_compare(args, tol):
    a, b = _load(args.a), _load(args.b)
    ana, anb = analyze(a, tol=tol), analyze(b, tol=tol, check_isothermal=False)
    # a pair with only positions on one side is compared with FD jets on both,
    # so discretization errors are shared instead of read as geometry
    if ana.jets.source == "fd" and anb.jets.source != "fd":
        anb = analyze(b, mode="fd", tol=tol, check_isothermal=False)
    elif anb.jets.source == "fd" and ana.jets.source != "fd":
        ana = analyze(a, mode="fd", tol=tol)
    rep = compare(ana, anb, ids=(Path(args.a).stem, Path(args.b).stem), tol=tol)
    _write(dumps(rep), args.out)
    return EXIT_OK


def cmd_verify(args, tol):
    if args.all and args.case:
        raise UsageError("use either --all or --case")
    cases = None if args.all or not args.case else args.case
    try:
        keys = [verify.resolve(c) for c in cases] if cases else None
    except KeyError as exc:
        raise UsageError(str(exc.args[0])) from None
    if args.refine < 2:
        raise UsageError("--refine needs at least 2 levels")
    results = verify.run(keys, refine=args.refine, tol=tol)
    print(verify.format_text(results))
    rep = verify.report(results, args.refine)
    if args.out:
        _write(dumps(rep), args.out)
    return EXIT_OK if rep["passed"] else EXIT_FAIL


def cmd_examples(args, tol):
    print(catalog_text())
    return EXIT_OK


# ------------------------------------------------------------------- parser

def build_parser():
    p = argparse.ArgumentParser(prog="bonnet4", description="Surfaces in R^4 and S^4: invariants, "
                                "associated families and comparison of isometric pairs.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("--tol", action="append", metavar="NAME=VALUE",
                   help="override a tolerance (repeatable)")
    sub = p.add_subparsers(dest="command", required=True)

    m = sub.add_parser("make", help="sample a built-in example to a Surface Grid JSON file")
    m.add_argument("--example", required=True, help=f"one of {', '.join(sorted(CATALOG))} or an alias")
    m.add_argument("--nu", type=int, default=64)
    m.add_argument("--nv", type=int, default=64)
    m.add_argument("--r", type=float, help="sphere radius")
    m.add_argument("--a", type=float, help="first radius (tori)")
    m.add_argument("--b", type=float, help="second radius (product torus)")
    m.add_argument("--k", type=float, help="clothoid curvature rate or Lawson k")
    m.add_argument("--m", type=float, help="Lawson m")
    m.add_argument("--vmax", type=float, help="Mercator half-height (spheres)")
    m.add_argument("--half", type=float, help="half-width of the graph domains")
    m.add_argument("--param", action="append", metavar="NAME=VALUE", help="other example parameter")
    m.add_argument("--chart", choices=("A", "B"), default="A")
    m.add_argument("--out", required=True)
    m.add_argument("--obj", help="also write an OBJ projection (visualization only)")
    m.add_argument("--project", choices=sorted(PROJECTIONS), default="xyz")
    m.set_defaults(func=cmd_make)

    a = sub.add_parser("analyze", help="invariants, residuals and Euler numbers of a grid file")
    a.add_argument("input")
    a.add_argument("--out", help="report path (default: stdout)")
    a.add_argument("--fields", metavar="CSV", help="write per-node fields as CSV")
    a.add_argument("--mode", choices=("auto", "fd"), default="auto",
                   help="auto uses analytic or sampled derivatives when available")
    a.set_defaults(func=cmd_analyze)

    d = sub.add_parser("deform", help="associated-family deformation and reconstruction")
    d.add_argument("input")
    d.add_argument("--theta", type=float)
    d.add_argument("--lift", choices=("plus", "minus"), default="plus")
    d.add_argument("--two", type=float, nargs=2, metavar=("THETA", "PHI"),
                   help="two-parameter family (parallel mean curvature only)")
    d.add_argument("--out", required=True)
    d.add_argument("--cert", help="certificate path (default: OUT with .cert.json)")
    d.add_argument("--obj", help="also write an OBJ projection (visualization only)")
    d.add_argument("--project", choices=sorted(PROJECTIONS), default="xyz")
    d.set_defaults(func=cmd_deform)

    c = sub.add_parser("compare", help="normal bundle isometry and distortion of a pair")
    c.add_argument("a")
    c.add_argument("b")
    c.add_argument("--out", help="report path (default: stdout)")
    c.set_defaults(func=cmd_compare)

    v = sub.add_parser("verify", help="run the verification battery")
    v.add_argument("--case", action="append", help="case key or number (repeatable)")
    v.add_argument("--all", action="store_true")
    v.add_argument("--refine", type=int, default=3, help="number of grid levels")
    v.add_argument("--out", help="JSON report path")
    v.set_defaults(func=cmd_verify)

    e = sub.add_parser("examples", help="list the built-in examples")
    e.set_defaults(func=cmd_examples)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        tol = _tolerances(args.tol)
        return args.func(args, tol)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"bonnet4: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (Bonnet4Error, OSError, ValueError) as exc:
        print(dumps(error_dict(exc)), end="", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
