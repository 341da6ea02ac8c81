"""Inequality audit over a suite of generated surfaces.

Each check records the constant it tests, the computed value, the bound,
the tolerance granted and a witness, so every number in a report can be
traced back.
"""
from __future__ import annotations

import math

import numpy as np

from . import generators, homology, levelset, spheremap
from .surface import refine_surface

__all__ = ["SUITES", "audit_branched_cover", "audit_genus0", "audit_higher_genus", "build_suite", "run_audit"]

SQRT2 = math.sqrt(2.0)

# (kind, params) pairs; genus is read off the surface
SUITES = {
    "default": [
        ("icosphere", {"subdiv": 2, "radius": 1.0}),
        ("ellipsoid", {"axes": (1.0, 1.0, 0.5), "n": 3}),
        ("dumbbell", {"neck_radius": 0.2, "n": 3}),
        ("fingered_sphere", {"fingers": 3, "n": 2}),
        ("flat_torus", {"L1": 1.0, "L2": 1.0, "n": 8}),
        ("genus_g", {"G": 2, "handle_scale": 0.3, "n": 12}),
        ("genus_g", {"G": 3, "handle_scale": 0.3, "n": 12}),
    ],
    "quick": [
        ("icosphere", {"subdiv": 1, "radius": 1.0}),
        ("flat_torus", {"L1": 1.0, "L2": 1.0, "n": 6}),
        ("genus_g", {"G": 2, "handle_scale": 0.3, "n": 12}),
    ],
}
COVER_EPSILON = {"default": 0.3, "quick": 0.5}


def _check(name, value, bound, ok, constant=None, tolerance=0.0, witness=None, mesh=None):
    return {
        "check": name,
        "mesh": mesh,
        "constant": constant,
        "value": value,
        "bound": bound,
        "tolerance": tolerance,
        "witness": witness,
        "ok": bool(ok),
    }


def build_suite(name="default", refine=1, seed=0):
    if name not in SUITES:
        raise ValueError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
    out = []
    for kind, params in SUITES[name]:
        g = generators.generate(kind, params, seed)
        label = kind + "(" + ",".join(f"{k}={v}" for k, v in g.params.items()) + ")"
        out.append((label, g, refine_surface(g.surface, refine)))
    return out


def audit_genus0(label, gen, s):
    """Sandwich containment and the degree-1 map bound on a sphere."""
    hb = spheremap.hypersphericity_bounds(s)
    est, cert = hb["estimate"], hb["certificate"]
    D = est.D
    tol = est.tolerance
    checks = [
        _check("sandwich_nonempty", hb["lower"], hb["upper"], hb["lower"] <= hb["upper"] * (1 + 1e-12),
               "HS in [D/(pi(2+sqrt2)), 2D/pi]", witness={"D": D, "basepoint": est.basepoint}, mesh=label),
        _check("map_degree", cert.degree, 1, cert.degree == 1, "degree 1", witness=list(cert.methods), mesh=label),
        _check("map_lipschitz", cert.discrete_lipschitz, 1.05 * (2 + SQRT2) * math.pi / D,
               cert.discrete_lipschitz <= 1.05 * (2 + SQRT2) * math.pi / D, "(2+sqrt2) pi / D",
               tolerance=0.05, witness=list(cert.lipschitz_edge), mesh=label),
    ]
    if gen.kind == "icosphere":
        r = gen.params["radius"]
        lo, hi = est.sandwich["hs_lower"], est.sandwich["hs_upper"]
        checks.append(_check("round_sphere_contains_true_value", r, [lo, hi], lo <= r <= hi,
                             "HS(round sphere of radius r) = r", tolerance=tol, mesh=label))
    return checks


def audit_higher_genus(label, gen, s, jobs=1):
    """``sys <= 8 UW`` and the greedy length schedule ``|C_k| <= 200k``."""
    G = s.genus
    sy = homology.systole(s, jobs=jobs)
    uw = levelset.uryson_width_upper(s, 0)
    basis = homology.greedy_minimal_basis(s, jobs=jobs)
    checks = [
        _check("systole_vs_width", sy.length, 8 * uw.width, sy.length <= 8 * uw.width, "sys <= 8 UW1",
               tolerance=uw.tolerance, witness={"cycle": list(sy.vertices), "reeb_arc": uw.witness["arc"]}, mesh=label),
        _check("basis_rank", basis.rank, 2 * G, basis.rank == 2 * G, "rank 2G", mesh=label),
    ]
    # normalize so the certified upper bound HS <= 2 UW / pi equals 1
    lam = math.pi / (2 * uw.width)
    for k, c in enumerate(basis.cycles, 1):
        checks.append(_check(f"greedy_length_C{k}", lam * c.length, 200 * k, lam * c.length <= 200 * k,
                             "|C_k| <= 200k", witness=list(c.vertices), mesh=label))
    checks.append(_check("width_schedule", lam * uw.width, 200 * G + 12, lam * uw.width <= 200 * G + 12,
                         "UW1 < 200G + 12", mesh=label))
    return checks


def audit_branched_cover(epsilon, seed):
    bc = generators.branched_double_cover(epsilon, seed)
    V = bc.base.positions[bc.vertex_map]
    V = V / np.linalg.norm(V, axis=1)[:, None]
    cert = spheremap.verify_map(bc.cover, V, 1.0, seed=seed)
    w = levelset.map_width(bc.cover, bc.base, bc.vertex_map)
    label = f"branched_cover(epsilon={epsilon},seed={seed})"
    return [
        _check("cover_degree", cert.degree, 2, cert.degree == 2, "degree 2", witness=list(cert.methods), mesh=label),
        _check("cover_lipschitz", cert.discrete_lipschitz, 1.02, cert.discrete_lipschitz <= 1.02,
               "contracting", tolerance=0.02, witness=list(cert.lipschitz_edge), mesh=label),
        _check("cover_width", w.width, 3 * epsilon, w.width <= 3 * epsilon, "width < 3 epsilon",
               tolerance=w.tolerance, witness=w.witness, mesh=label),
    ]


def run_audit(suite="default", seed=7, refine=1, jobs=1):
    checks = []
    for label, gen, s in build_suite(suite, refine, seed):
        if s.genus == 0:
            checks += audit_genus0(label, gen, s)
        else:
            checks += audit_higher_genus(label, gen, s, jobs)
    checks += audit_branched_cover(COVER_EPSILON[suite], seed)
    bad = [c for c in checks if not c["ok"]]
    return {
        "suite": suite,
        "seed": seed,
        "refine": refine,
        "checks": checks,
        "violations": len(bad),
    }

