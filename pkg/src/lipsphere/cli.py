"""Command-line front end.

Every subcommand prints one JSON report on stdout.  Errors go to stderr as
JSON with exit status 2 (usage), 3 (unreadable or invalid mesh) or 1
(audit violation or failed construction).
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__, audit, generators, geodesic, homology, levelset, spheremap, sweepout
from .surface import MeshParseError, TopologyError, load_surface, refine_surface, save_surface

SCHEMA = "lipsphere.report/1"

EXIT_VIOLATION = 1
EXIT_USAGE = 2
EXIT_MESH = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _plain(x):
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, np.ndarray):
        return _plain(x.tolist())
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else str(x)
    return x


def _dumps(obj):
    return json.dumps(_plain(obj), indent=2, sort_keys=True)


def _report(command, result, s=None, refine=None):
    out = {"schema": SCHEMA, "command": command, "version": __version__, "result": result}
    if s is not None:
        rel, ab = geodesic.distance_tolerance(s)
        out["refine"] = refine
        out["distance_tolerance"] = {"relative": rel, "absolute": ab}
        out["mesh"] = {"vertices": s.n_vertices, "triangles": s.n_triangles, "genus": s.genus}
    return out


def _load(args):
    s = load_surface(args.mesh)
    return refine_surface(s, args.refine)


# subcommands ----------------------------------------------------------------

def _gen_params(args):
    keys = {
        "icosphere": ("subdiv", "radius"),
        "ellipsoid": ("axes", "n"),
        "dumbbell": ("neck_radius", "n", "fingers"),
        "fingered_sphere": ("fingers", "n"),
        "flat_torus": ("L1", "L2", "n"),
        "genus_g": ("G", "handle_scale", "n"),
    }[args.kind]
    return {k: getattr(args, k) for k in keys if getattr(args, k) is not None}


def cmd_gen(args):
    out = Path(args.output)
    if args.kind == "branched_cover":
        bc = generators.branched_double_cover(args.epsilon, args.seed)
        save_surface(bc.cover, out)
        base_path = out.with_name(out.stem + ".base" + out.suffix)
        save_surface(bc.base, base_path)
        side = {
            "kind": "branched_cover", "params": {"epsilon": bc.epsilon}, "seed": bc.seed,
            "base": base_path.name, "vertex_map": bc.vertex_map, "branch_points": bc.branch_points,
            "cut_edges": bc.cut_edges, "reference": {"degree": 2, "width_bound": 3 * bc.epsilon},
        }
        s = bc.cover
    else:
        g = generators.generate(args.kind, _gen_params(args), args.seed)
        s = g.surface
        save_surface(s, out)
        side = {"kind": g.kind, "params": g.params, "seed": g.seed, "reference": g.reference}
    side_path = out.with_suffix(".json")
    side_path.write_text(_dumps({"schema": SCHEMA, **side}) + "\n")
    return _report("gen", {"mesh": str(out), "sidecar": str(side_path), "genus": s.genus,
                           "vertices": s.n_vertices, "triangles": s.n_triangles})


def cmd_analyze(args):
    s = _load(args)
    if args.basepoint is None:
        p, _ = geodesic.eccentricity_scan(s)
    else:
        p = args.basepoint
    est = levelset.estimate_D(s, p, args.radii)
    return _report("analyze", est.as_dict(), s, args.refine)


def cmd_map(args):
    s = _load(args)
    hb = spheremap.hypersphericity_bounds(s, args.basepoint, args.radii)
    m, cert = hb["map"], hb["certificate"]
    if args.output:
        m.to_obj(s, args.output)
    res = {
        "certificate": cert.as_dict(),
        "descriptor": m.descriptor,
        "hypersphericity": {k: hb[k] for k in ("lower", "upper", "lower_from_D", "lower_from_map")},
        "D": hb["estimate"].D,
        "constant": "(2+sqrt2) pi / D",
        "obj": args.output,
    }
    return _report("map", res, s, args.refine)


def cmd_systole(args):
    s = _load(args)
    if s.genus == 0:
        return _report("systole", {"genus": 0, "systole": None, "basis": [], "note": "sphere: no nontrivial cycles"},
                       s, args.refine)
    sy = homology.systole(s, jobs=args.jobs)
    basis = homology.greedy_minimal_basis(s, jobs=args.jobs)
    res = {
        "genus": s.genus,
        "systole": sy.as_dict(2 * s.genus),
        "basis": [c.as_dict(2 * s.genus) for c in basis.cycles],
        "intersection": basis.intersection,
        "straightness": homology.straightness_audit(s, basis),
    }
    if args.planarity:
        pr = homology.planarity_radius(s)
        res["planarity_radius"] = {"radius": pr.radius, "center": pr.witness, "edge": pr.edge, "method": pr.notes}
    return _report("systole", res, s, args.refine)


def cmd_width(args):
    s = _load(args)
    p = 0 if args.basepoint is None else args.basepoint
    g = levelset.reeb_graph(s, p, args.radii)
    uw = levelset.uryson_width_upper(s, p, args.radii)
    if args.dot:
        Path(args.dot).write_text(g.to_dot())
    res = {
        "basepoint": p,
        "uryson_width_upper": uw.width,
        "tolerance": uw.tolerance,
        "witness": uw.witness,
        "reeb": {"nodes": g.n_nodes, "arcs": g.n_arcs, "betti1": g.betti1, "is_tree": g.is_tree,
                 "leaves": len(g.leaves)},
        "constant": "HS <= 2 UW1 / pi",
    }
    return _report("width", res, s, args.refine)


def cmd_sweepout(args):
    s = _load(args)
    p = 0 if args.basepoint is None else args.basepoint
    params = {"levels": args.levels, "extra_basepoints": args.extra_basepoints, "jobs": args.jobs}
    r = sweepout.sweepout_search(s, p, params)
    if args.output and r.best is not None:
        Path(args.output).write_text(r.best.curve.to_obj(s))
    res = r.as_dict()
    res["constant"] = "closed geodesic shorter than 160 when HS <= 1"
    return _report("sweepout", res, s, args.refine)


def cmd_audit(args):
    res = audit.run_audit(args.suite, args.seed, args.refine, args.jobs)
    rep = _report("audit", res)
    rep["refine"] = args.refine
    return rep


# parser -----------------------------------------------------------------------

def build_parser():
    ap = _Parser(prog="lipsphere", description="Lipschitz maps to spheres, widths and systoles of surface meshes.")
    ap.add_argument("--version", action="version", version=f"lipsphere {__version__}")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def mesh_cmd(name, helptext):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("mesh", help="OFF or OBJ file")
        p.add_argument("--refine", type=int, default=1, help="midpoint refinements before analysis (default 1)")
        return p

    g = sub.add_parser("gen", help="write a generated surface and its JSON sidecar")
    g.add_argument("kind", choices=list(generators.KINDS) + ["branched_cover"])
    g.add_argument("-o", "--output", required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--subdiv", type=int)
    g.add_argument("--radius", type=float)
    g.add_argument("--axes", type=float, nargs=3)
    g.add_argument("--n", type=int)
    g.add_argument("--neck-radius", dest="neck_radius", type=float)
    g.add_argument("--fingers", type=int)
    g.add_argument("--L1", type=float)
    g.add_argument("--L2", type=float)
    g.add_argument("--G", type=int)
    g.add_argument("--handle-scale", dest="handle_scale", type=float)
    g.add_argument("--epsilon", type=float, default=0.3)
    g.set_defaults(func=cmd_gen)

    a = mesh_cmd("analyze", "estimate D and the hypersphericity sandwich")
    a.add_argument("--basepoint", type=int)
    a.add_argument("--radii", default="default", help="'default' or 'dense:N'")
    a.set_defaults(func=cmd_analyze)

    m = mesh_cmd("map", "build and certify a degree-1 map to the unit sphere")
    m.add_argument("--basepoint", type=int)
    m.add_argument("--radii", default="default")
    m.add_argument("-o", "--output", help="OBJ file for the map")
    m.set_defaults(func=cmd_map)

    s = mesh_cmd("systole", "systole, greedy homology basis and intersections")
    s.add_argument("--jobs", type=int, default=1)
    s.add_argument("--planarity", action="store_true", help="also compute the planarity radius")
    s.set_defaults(func=cmd_systole)

    w = mesh_cmd("width", "Reeb graph width (upper bound for the Uryson 1-width)")
    w.add_argument("--basepoint", type=int)
    w.add_argument("--radii", default="default")
    w.add_argument("--dot", help="write the Reeb graph as DOT")
    w.set_defaults(func=cmd_width)

    c = mesh_cmd("sweepout", "shorten level-set curves to closed quasi-geodesics")
    c.add_argument("--basepoint", type=int)
    c.add_argument("--levels", type=int, default=16)
    c.add_argument("--extra-basepoints", dest="extra_basepoints", type=int, default=2)
    c.add_argument("--jobs", type=int, default=1)
    c.add_argument("-o", "--output", help="OBJ polyline of the shortest curve")
    c.set_defaults(func=cmd_sweepout)

    u = sub.add_parser("audit", help="run the inequality suite; exit 1 on any violation")
    u.add_argument("--suite", default="default", choices=sorted(audit.SUITES))
    u.add_argument("--seed", type=int, default=7)
    u.add_argument("--refine", type=int, default=1)
    u.add_argument("--jobs", type=int, default=1)
    u.set_defaults(func=cmd_audit)
    return ap


def _fail(kind, message, code, **extra):
    sys.stderr.write(_dumps({"schema": SCHEMA, "error": kind, "message": message, "exit": code, **extra}) + "\n")
    return code


def run(argv=None):
    try:
        args = build_parser().parse_args(argv)
    except UsageError as e:
        return _fail("usage", str(e), EXIT_USAGE)
    if getattr(args, "refine", 0) < 0:
        return _fail("usage", "--refine must be >= 0", EXIT_USAGE)
    try:
        rep = args.func(args)
    except (FileNotFoundError, IsADirectoryError) as e:
        return _fail("mesh", f"cannot read {e.filename or e}", EXIT_MESH)
    except MeshParseError as e:
        return _fail("mesh_parse", str(e), EXIT_MESH)
    except TopologyError as e:
        return _fail("topology", str(e), EXIT_MESH, simplex=getattr(e, "simplex", None))
    except (spheremap.ConstructionError, spheremap.DegreeError) as e:
        return _fail("construction", str(e), EXIT_VIOLATION, vertex=getattr(e, "vertex", None))
    except ValueError as e:
        return _fail("invalid", str(e), EXIT_USAGE)
    sys.stdout.write(_dumps(rep) + "\n")
    if args.command == "audit" and rep["result"]["violations"]:
        return _fail("violation", f"{rep['result']['violations']} audit check(s) failed", EXIT_VIOLATION)
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
