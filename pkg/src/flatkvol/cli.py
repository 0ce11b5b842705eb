"""Command-line front end: flatkvol <subcommand> [surface] [options].

Exit codes: 0 success, 1 usage or I/O error, 2 when a certificate fails.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys

EXIT_OK, EXIT_USAGE, EXIT_CERT = 0, 1, 2


def _threads_from_env():
    raw = os.environ.get("KVOL_THREADS")
    if raw is None:
        return None
    try:
        k = int(raw)
    except ValueError:
        raise SystemExit(f"KVOL_THREADS must be a positive integer, got {raw!r}")
    if k < 1:
        raise SystemExit("KVOL_THREADS must be a positive integer")
    # numerical kernels are the only threaded part; cap them before numpy loads
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(var, str(k))
    return k


def g12(x) -> str:
    if isinstance(x, float):
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return f"{x + 0.0:.12g}"
    return str(x)


def _round12(obj):
    if isinstance(obj, float):
        if math.isnan(obj):
            return None
        if math.isinf(obj):
            return "inf" if obj > 0 else "-inf"
        return float(f"{obj:.12g}")
    if isinstance(obj, dict):
        return {k: _round12(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round12(v) for v in obj]
    if hasattr(obj, "item"):
        return _round12(obj.item())
    return obj


def dump_json(obj, out):
    json.dump(_round12(obj), out, indent=2, sort_keys=False)
    out.write("\n")


def parse_slope(text: str) -> float:
    t = text.strip().lower()
    if t in ("inf", "infinity", "oo", "horizontal"):
        return math.inf
    return float(t)


# -- surface loading ---------------------------------------------------------------------

def add_surface_args(p: argparse.ArgumentParser):
    p.add_argument("surface", nargs="?", help="surface JSON file")
    p.add_argument("--bouw-moller", nargs=2, type=int, metavar=("M", "N"), help="build S_{m,n}")
    p.add_argument("--example", choices=["torus", "equilateral-l"], help="a built-in example surface")


def load_surface(args):
    from .surface import build_bouw_moller, equilateral_l_surface, square_torus, TranslationSurface
    sources = [x for x in (args.surface, args.bouw_moller, args.example) if x]
    if len(sources) != 1:
        raise UsageError("give exactly one surface source: a JSON file, --bouw-moller M N or --example")
    if args.bouw_moller:
        return build_bouw_moller(tuple(args.bouw_moller))
    if args.example == "torus":
        return square_torus()
    if args.example == "equilateral-l":
        return equilateral_l_surface()
    with open(args.surface) as fh:
        return TranslationSurface.from_json(fh.read())


class UsageError(Exception):
    pass


def _out(args):
    path = getattr(args, "output", None)
    return open(path, "w", newline="") if path else sys.stdout


# -- subcommands ------------------------------------------------------------------------------

def cmd_build(args) -> int:
    s = load_surface(args)
    out = _out(args)
    out.write(s.to_json() + "\n")
    if out is not sys.stdout:
        out.close()
    return EXIT_OK


def cmd_validate(args) -> int:
    from .surface import validate_hypotheses
    s = load_surface(args)
    rep = validate_hypotheses(s)
    b = lambda v: "true" if v else "false"
    print(f"P1={b(rep.satisfies_P1)} P2={b(rep.satisfies_P2)} P1prime={b(rep.satisfies_P1prime)} "
          f"convex={b(rep.convex)} theta0={g12(rep.theta0)}")
    print(f"singularities={s.num_singularities} genus={s.genus} "
          f"cone_angles={','.join(g12(a / math.pi) + 'pi' for a in s.cone_angles)} area={g12(s.area)}")
    return EXIT_OK


def _saddles(s, L):
    from .trajectory import enumerate_saddle_connections
    return enumerate_saddle_connections(s, L)


def cmd_saddles(args) -> int:
    from .trajectory import decompose
    s = load_surface(args)
    out = _out(args)
    w = csv.writer(out)
    w.writerow(["hol_x", "hol_y", "length", "slope", "k", "p", "q", "is_odd", "is_side", "is_diagonal"])
    for sc in _saddles(s, args.L):
        dec = decompose(sc)
        w.writerow([g12(sc.holonomy.x), g12(sc.holonomy.y), g12(sc.length), g12(sc.consistent_slope),
                    dec.k, dec.p, dec.q, int(dec.is_odd), int(dec.is_side), int(dec.is_diagonal)])
    if out is not sys.stdout:
        out.close()
    return EXIT_OK


def cmd_intersect(args) -> int:
    from .intersection import IntersectionError, algebraic_intersection
    s = load_surface(args)
    scs = _saddles(s, args.L)
    try:
        a = [scs[i] for i in args.a]
        b = [scs[i] for i in args.b]
    except IndexError:
        raise UsageError(f"saddle connection index out of range (0..{len(scs) - 1} at L = {args.L})")
    try:
        rep = algebraic_intersection(a, b)
    except IntersectionError as exc:
        raise UsageError(str(exc))
    dump_json(rep.as_dict(), sys.stdout)
    return EXIT_OK


def cmd_cylinders(args) -> int:
    from .periodic import cylinder_decomposition
    s = load_surface(args)
    out = _out(args)
    w = csv.writer(out)
    w.writerow(["direction", "width", "height", "modulus"])
    code = EXIT_OK
    for d in args.direction or [math.inf]:
        dec = cylinder_decomposition(s, d)
        if not dec.is_periodic:
            print(f"direction {g12(d)} is not periodic within the trace budget", file=sys.stderr)
            code = EXIT_CERT
            continue
        for c in sorted(dec.cylinders, key=lambda c: (c.height, c.width)):
            w.writerow([g12(d), g12(c.width), g12(c.height), g12(c.modulus)])
    if out is not sys.stdout:
        out.close()
    return code


def cmd_planarity(args) -> int:
    from .periodic import cylinder_decomposition, dual_separatrix_diagram, is_planar, separatrix_diagram
    s = load_surface(args)
    code = EXIT_OK
    for d in args.direction or [math.inf]:
        dec = cylinder_decomposition(s, d)
        if not dec.is_periodic:
            print(f"direction={g12(d)} non-periodic")
            code = EXIT_CERT
            continue
        g = separatrix_diagram(s, d, dec)
        gd = dual_separatrix_diagram(s, d, dec)
        planar = is_planar(g)
        print(f"direction={g12(d)} {'planar' if planar else 'non-planar'} genus={g.genus} "
              f"dual_genus={gd.genus} cylinders={len(dec.cylinders)} saddle_connections={g.num_edges}")
        if not planar:
            code = EXIT_CERT
    return code


def cmd_kvol(args) -> int:
    from .kvol import KvolError, certify_bouw_moller, kvol_bruteforce
    s = load_surface(args)
    try:
        res = kvol_bruteforce(s, args.L)
    except KvolError as exc:
        raise UsageError(str(exc))
    d = res.as_dict()
    if not args.compare_formula:
        d.pop("kvol_formula")
    code = EXIT_OK
    if args.certify:
        if s.bouw_moller is None:
            raise UsageError("--certify needs a --bouw-moller surface")
        cert = certify_bouw_moller(s.bouw_moller, res.truncation_length)
        d["certificate"] = cert.as_dict()
        if not cert.passed:
            code = EXIT_CERT
    if args.json:
        dump_json(d, sys.stdout)
    else:
        for k in ("kvol", "max_ratio", "area", "sysvol", "systole", "truncation_length", "n_curves", "n_maximizers"):
            print(f"{k}={g12(d[k])}")
        if "kvol_formula" in d:
            print(f"kvol_formula={g12(d['kvol_formula']) if d['kvol_formula'] is not None else 'n/a'}")
        if "certificate" in d:
            print(f"certificate={'pass' if d['certificate']['passed'] else 'fail'} {d['certificate']['detail']}")
    return code


def cmd_kvol_disk(args) -> int:
    import numpy as np
    from .periodic import kvol_bounded_on_orbit
    from .surface import BouwMollerParams, build_bouw_moller
    from .teich import DiskPoint, FormulaUnavailable, kvol_disk_terms
    if not args.bouw_moller:
        raise UsageError("kvol-disk needs --bouw-moller M N")
    bm = BouwMollerParams(*args.bouw_moller)
    s = build_bouw_moller(bm)
    if args.point:
        pts = [(float(x), float(y)) for x, y in args.point]
    else:
        xs = np.linspace(args.x_range[0], args.x_range[1], args.nx)
        ys = np.linspace(args.y_range[0], args.y_range[1], args.ny)
        pts = [(float(x), float(y)) for y in ys for x in xs]
    out = _out(args)
    try:
        rows = [(x, y) + kvol_disk_terms(DiskPoint.make(x, y), bm, s.area) for x, y in pts]
    except FormulaUnavailable as exc:
        ok, witness = kvol_bounded_on_orbit(s, [math.inf])
        print(f"closed form unavailable: {exc}", file=sys.stderr)
        dump_json({"formula": None, "bounded": ok, "witness": witness}, out)
        return EXIT_OK if ok else EXIT_CERT
    w = csv.writer(out)
    w.writerow(["x", "y", "sin_theta_plus", "sin_theta_minus", "kvol"])
    for row in rows:
        w.writerow([g12(v) for v in row])
    if out is not sys.stdout:
        out.close()
    return EXIT_OK


def cmd_check_hypotheses(args) -> int:
    from .surface import build_bouw_moller
    from .teich import check_domain_hypotheses, comparison_domains, slope_table
    if not args.bouw_moller:
        raise UsageError("check-hypotheses needs --bouw-moller M N")
    m, n = args.bouw_moller
    s = build_bouw_moller((m, n))
    table = slope_table(s, args.L)
    reports = {}
    ok = True
    for name, dom in comparison_domains(m, n).items():
        rep = check_domain_hypotheses(dom, table)
        reports[name] = rep.as_dict()
        ok &= rep.H1 and rep.H2 and rep.H3 and rep.H4
    dump_json({"m": m, "n": n, "L": args.L, "slopes": len(table.slopes), "domains": reports}, sys.stdout)
    return EXIT_OK if ok else EXIT_CERT


# -- parser ----------------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="flatkvol", description="Translation surfaces, saddle connections and KVol.")
    sub = p.add_subparsers(dest="command", required=True)

    def command(name, func, help_text, L=None):
        sp = sub.add_parser(name, help=help_text)
        add_surface_args(sp)
        if L is not None:
            sp.add_argument("-L", type=float, default=L, help=f"length budget (default {L})")
        sp.set_defaults(func=func)
        return sp

    sp = command("build", cmd_build, "write a surface as JSON")
    sp.add_argument("-o", "--output")
    command("validate", cmd_validate, "check the polygon hypotheses and cone data")
    sp = command("saddles", cmd_saddles, "list saddle connections as CSV", L=3.0)
    sp.add_argument("-o", "--output")
    sp = command("intersect", cmd_intersect, "algebraic intersection of two curves", L=3.0)
    sp.add_argument("--a", nargs="+", type=int, required=True, help="saddle connection indices of the first curve")
    sp.add_argument("--b", nargs="+", type=int, required=True, help="saddle connection indices of the second curve")
    for name, func, text in (("cylinders", cmd_cylinders, "cylinder decomposition as CSV"),
                             ("planarity", cmd_planarity, "separatrix diagram genus per direction")):
        sp = command(name, func, text)
        sp.add_argument("--direction", type=parse_slope, action="append", help="consistent slope, 'inf' for horizontal")
        if name == "cylinders":
            sp.add_argument("-o", "--output")
    sp = command("kvol", cmd_kvol, "brute-force KVol", L=None)
    sp.add_argument("-L", type=float, default=None, help="length budget (default 3 x diameter)")
    sp.add_argument("--json", action="store_true")
    sp.add_argument("--compare-formula", action="store_true")
    sp.add_argument("--certify", action="store_true", help="run the Bouw-Moller certificate too")
    sp = command("kvol-disk", cmd_kvol_disk, "closed-form KVol on the Teichmuller disk")
    sp.add_argument("--point", nargs=2, action="append", metavar=("X", "Y"))
    sp.add_argument("--x-range", nargs=2, type=float, default=(-2.0, 2.0))
    sp.add_argument("--y-range", nargs=2, type=float, default=(0.5, 3.0))
    sp.add_argument("--nx", type=int, default=9)
    sp.add_argument("--ny", type=int, default=6)
    sp.add_argument("-o", "--output")
    command("check-hypotheses", cmd_check_hypotheses, "hypothesis report on the domains D1-D4", L=3.0)
    return p


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    _threads_from_env()
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main():
    sys.exit(run())
