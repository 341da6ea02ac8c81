"""Explicit Lipschitz maps of nonzero degree to the unit 2-sphere.

Both constructions push the surface to the plane with
``F0(x) = (dist(p, x), dist(q, x))``, pick a disk the image of a separating
curve avoids, and wrap the disk over the sphere: one side of the curve goes
through the northern hemisphere map, the other through its mirror image.
Points of the plane outside the disk land on the equator.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components, dijkstra

from . import geodesic, levelset

__all__ = [
    "ConstructionError",
    "DegreeError",
    "MapCertificate",
    "PlanarMap",
    "SphereMap",
    "SplitCurve",
    "SystolicResult",
    "assemble_degree1_map",
    "assemble_systolic_map",
    "build_planar_map",
    "build_split_curve",
    "degree_regular_value",
    "degree_signed_area",
    "discrete_lipschitz",
    "disk_to_sphere",
    "hypersphericity_bounds",
    "verify_map",
]

SQRT2 = math.sqrt(2.0)


class ConstructionError(RuntimeError):
    """The mesh is too coarse (or inconsistent) for the construction."""

    def __init__(self, message, vertex=None):
        super().__init__(message)
        self.vertex = vertex


class DegreeError(RuntimeError):
    """The two degree computations disagree or the area sum is not integral."""


# planar map --------------------------------------------------------------------

@dataclass(frozen=True)
class PlanarMap:
    p: int
    q: int
    values: np.ndarray
    lipschitz: float
    tolerance: float

    @property
    def certified(self):
        return self.lipschitz <= SQRT2 * (1 + 1e-12) + self.tolerance


def _edge_ratio(s, values):
    E = s.edges
    diff = np.linalg.norm(values[E[:, 0]] - values[E[:, 1]], axis=1)
    ratio = diff / s.edge_lengths
    return float(ratio.max()) if len(ratio) else 0.0


def build_planar_map(s, p, q):
    """``F0(x) = (dist(p, x), dist(q, x))`` at every vertex."""
    p, q = int(p), int(q)
    if p == q:
        raise ValueError("p and q must differ")
    fp = geodesic.distance_field(s, p)
    fq = geodesic.distance_field(s, q)
    vals = np.stack([fp.dist, fq.dist], axis=1)
    vals.flags.writeable = False
    return PlanarMap(p, q, vals, _edge_ratio(s, vals), fp.tolerance)


# disk to hemisphere -----------------------------------------------------------

def disk_to_sphere(points, center, radius, south=None):
    """Radial stretch of the disk onto a hemisphere, clamped outside.

    A point at distance ``r < radius`` from ``center`` goes to polar angle
    ``(pi / 2) (r / radius)``; everything else lands on the equator.  Rows
    flagged in ``south`` are reflected through the equatorial plane.
    """
    v = np.asarray(points, dtype=float) - np.asarray(center, dtype=float)
    r = np.hypot(v[:, 0], v[:, 1])
    phi = np.arctan2(v[:, 1], v[:, 0])
    theta = 0.5 * np.pi * np.minimum(r / radius, 1.0)
    out = np.stack([np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)], axis=1)
    out[r >= radius, 2] = 0.0
    out /= np.linalg.norm(out, axis=1)[:, None]
    if south is not None:
        out[np.asarray(south, dtype=bool), 2] *= -1.0
    return out


# split curve ------------------------------------------------------------------

@dataclass(frozen=True)
class SplitCurve:
    """The closed curve ``g_pq + gamma_qr + g_pr`` and the two disks it bounds.

    ``cycle`` lists the vertices in the order p -> q -> r -> back to p;
    ``labels[t]`` is 0 for triangles of the disk whose boundary orientation
    agrees with that order and 1 for the other disk.
    """

    p: int
    q: int
    r: int
    g_pq: list
    gamma_qr: list
    g_pr: list
    cycle: list
    labels: np.ndarray
    radius: float
    delta: float
    gamma_offsets: np.ndarray


def _loop_erase(walk):
    out = []
    pos = {}
    for v in walk:
        if v in pos:
            cut = pos[v]
            for w in out[cut + 1:]:
                del pos[w]
            out = out[:cut + 1]
        else:
            pos[v] = len(out)
            out.append(v)
    return out


def _tree_path(pred, v):
    path = [int(v)]
    while pred[path[-1]] >= 0:
        path.append(int(pred[path[-1]]))
    return path[::-1]


def _best_pair(s, p, outer):
    dp = geodesic.distance_field(s, p).dist[outer]
    rows = geodesic.distance_rows(s, outer)[:, outer]
    h = rows - dp[:, None] - dp[None, :]
    i, j = np.unravel_index(int(np.argmax(h)), h.shape)
    return int(outer[i]), int(outer[j])


def _edge_fill(s, eg, path):
    """Replace each chord hop of a metric-graph path by a shortest edge path.

    Tree paths of the metric graph are exact graph geodesics, so every vertex
    on them satisfies ``dist(p, x) + dist(x, end) = dist(p, end)``; the fill
    vertices deviate from that by at most one hop's worth of detour.
    """
    out = [path[0]]
    for a, b in zip(path[:-1], path[1:]):
        try:
            s.edge_index(a, b)
            out.append(b)
            continue
        except KeyError:
            pass
        L = geodesic.metric_graph(s)[a, b]
        _, pr = dijkstra(eg, directed=True, indices=a, return_predecessors=True, limit=4 * L + 1e-12)
        out.extend(_tree_path(pr, b)[1:])
    return out


def _dual_regions(s, cut_edges):
    """Connected components of triangles across edges not in ``cut_edges``."""
    et = s.edge_triangles
    keep = np.ones(s.n_edges, dtype=bool)
    keep[np.asarray(list(cut_edges), dtype=np.int64)] = False
    a, b = et[keep, 0], et[keep, 1]
    F = s.n_triangles
    g = coo_matrix((np.ones(len(a)), (a, b)), shape=(F, F))
    return connected_components(g, directed=False)


def _cycle_edges(s, cycle):
    return [s.edge_index(u, v) for u, v in zip(cycle, cycle[1:] + cycle[:1])]


def _oriented_boundary(s, labels, region, edge_ids):
    """Directed boundary edges of ``region``, oriented by its triangles."""
    out = []
    tri = s.triangles
    et = s.edge_triangles
    for e in edge_ids:
        t1, t2 = et[e]
        inside = [t for t in (t1, t2) if labels[t] == region]
        if len(inside) != 1:
            continue
        t = inside[0]
        u, v = s.edges[e]
        row = tri[t].tolist()
        i = row.index(int(u))
        out.append((int(u), int(v)) if row[(i + 1) % 3] == v else (int(v), int(u)))
    return out


def _winding(values, center, directed_edges):
    c = np.asarray(center, dtype=float)
    total = 0.0
    for u, v in directed_edges:
        a = values[u] - c
        b = values[v] - c
        total += math.atan2(a[0] * b[1] - a[1] * b[0], a[0] * b[0] + a[1] * b[1])
    return total / (2 * math.pi)


def build_split_curve(s, p, D_est, pick="best"):
    """Curve through p, the witness pair q, r and back, with the two disks.

    ``q`` and ``r`` are taken at the outer endpoints of the witness crossing
    edges, ``gamma_qr`` runs through outer endpoints of the witness component
    only (so it stays within one edge of the level), and the two radial
    paths come from the shortest-path tree of ``p`` and are merged at their
    last common vertex.

    With ``pick="best"`` the pair of outer vertices is chosen to maximize the
    height ``d(q, r) - (d(p, q) - m) - (d(p, r) - m)`` of the triangle the
    construction avoids (``m`` the lowest outer value); ``"witness"`` uses the
    outer endpoints of the estimator's own witness edges.
    """
    if s.genus != 0:
        raise ValueError("split curve needs a sphere")
    p = int(p)
    comp = D_est.component
    outer = np.unique(comp.edges[:, 1])
    if pick == "witness":
        qv, rv = int(D_est.q[1]), int(D_est.r[1])
    elif pick == "best":
        qv, rv = _best_pair(s, p, outer)
    else:
        raise ValueError("pick must be 'best' or 'witness'")
    if qv == rv:
        raise ConstructionError("witness points share their outer vertex; refine the mesh", qv)
    eg = geodesic.edge_graph(s)
    mask = np.zeros(s.n_vertices, dtype=bool)
    mask[outer] = True
    E = s.edges
    keep = mask[E[:, 0]] & mask[E[:, 1]]
    n = s.n_vertices
    w = s.edge_lengths[keep]
    sub = coo_matrix((np.concatenate([w, w]), (np.concatenate([E[keep, 0], E[keep, 1]]),
                                               np.concatenate([E[keep, 1], E[keep, 0]]))), shape=(n, n)).tocsr()
    _, pred_g = dijkstra(sub, directed=True, indices=qv, return_predecessors=True)
    if pred_g[rv] < 0:
        raise ConstructionError("witness component does not connect q to r", rv)
    gamma = _tree_path(pred_g, rv)
    _, pred = dijkstra(geodesic.metric_graph(s), directed=True, indices=p, return_predecessors=True)
    to_q = _edge_fill(s, eg, _tree_path(pred, qv))
    to_r = _edge_fill(s, eg, _tree_path(pred, rv))
    walk = to_q + gamma[1:] + to_r[::-1][1:-1]
    cyc = _loop_erase(walk)
    if len(cyc) < 3:
        raise ConstructionError("split curve degenerated; refine the mesh", qv)
    edges = _cycle_edges(s, cyc)
    n_reg, lab = _dual_regions(s, edges)
    if n_reg != 2:
        raise ConstructionError(f"split curve leaves {n_reg} regions instead of 2", qv)
    # name the regions so that region 0 induces the traversal order on c
    first = (cyc[0], cyc[1])
    bnd0 = _oriented_boundary(s, lab, 0, edges[:1])
    if bnd0 and bnd0[0] != first:
        lab = 1 - lab
    dist = geodesic.distance_field(s, p).dist
    delta = 2.0 * float(s.edge_lengths.mean())
    offs = np.abs(dist[gamma] - comp.radius)
    lab = lab.astype(np.int8)
    lab.flags.writeable = False
    return SplitCurve(p, qv, rv, to_q, gamma, to_r, cyc, lab, comp.radius, delta, offs)


# sphere maps --------------------------------------------------------------------

@dataclass(frozen=True)
class SphereMap:
    vectors: np.ndarray
    labels: np.ndarray
    descriptor: dict

    def to_obj(self, s, path):
        with open(path, "w") as fh:
            fh.write(f"# sphere map, variant {self.descriptor.get('variant')}\n")
            for x, y, z in self.vectors:
                fh.write(f"v {x!r} {y!r} {z!r}\n")
            for a, b, c in s.triangles + 1:
                fh.write(f"f {a} {b} {c}\n")

    def to_json(self):
        return json.dumps(_jsonable(self.descriptor), indent=2, sort_keys=True)


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, float) and not math.isfinite(x):
        return str(x)
    return x


def _segment_distance(c, a, b):
    ab = b - a
    L2 = (ab * ab).sum(-1)
    t = np.clip(((c - a) * ab).sum(-1) / np.where(L2 > 0, L2, 1.0), 0.0, 1.0)
    return np.linalg.norm(a + t[..., None] * ab - c, axis=-1)


def _fit_radius(values, center, nominal, cycle, min_fraction, strict):
    """Largest radius <= nominal whose disk the curve image avoids."""
    c = np.asarray(center, dtype=float)
    V = values[np.asarray(cycle)]
    W = np.roll(V, -1, axis=0)
    d = _segment_distance(c, V, W)
    i = int(np.argmin(d))
    if d[i] >= nominal:
        return nominal, None
    offender = int(cycle[i])
    if strict or d[i] < min_fraction * nominal:
        raise ConstructionError(
            f"split-curve vertex {offender} maps inside the disk "
            f"({d[i]:.4g} < radius {nominal:.4g}); refine the mesh", offender)
    return float(d[i]), offender


def _grow_disk(values, center, cycle):
    """Center of a locally largest disk missed by the curve image."""
    V = values[np.asarray(cycle)]
    W = np.roll(V, -1, axis=0)
    res = minimize(lambda c: -_segment_distance(np.asarray(c), V, W).min(), center,
                   method="Nelder-Mead", options={"xatol": 1e-10, "fatol": 1e-12})
    return np.asarray(res.x, dtype=float), float(-res.fun)


def assemble_degree1_map(s, planar, split, params=None, strict=False, min_fraction=0.5):
    """Two-hemisphere map built from ``F0`` and the split curve.

    The avoided triangle is rebuilt from the realized data: its vertical side
    sits at the smallest ``dist(p, .)`` on ``gamma_qr``, its lower side on
    ``x + y = dist(p, q)``, and its upper side on
    ``y = x + dist(q, r) - dist(p, r)``.  The disk starts as the incircle.
    If a vertex of the curve still lands inside (the radial paths are edge
    paths, not exact geodesics) the disk shrinks to clear it, unless
    ``strict``.  It is then grown to a locally largest disk that the curve
    image misses and winds once around (``params["grow_disk"]``, default on).
    """
    params = dict(params or {})
    F0 = planar.values
    if planar.p != split.p or planar.q != split.q:
        raise ValueError("planar map and split curve use different points")
    p, q, r = split.p, split.q, split.r
    R = float(params.get("R", split.radius))
    D = float(params.get("D", np.nan))
    R_q = F0[q, 0]
    R_r = F0[r, 0]
    D_qr = F0[r, 1]
    R_g = float(F0[split.gamma_qr, 0].min())
    # triangle {x < R_g, x + y > R_q, y < x + D_qr - R_r}
    y_lo = R_q - R_g
    y_hi = R_g + D_qr - R_r
    h = y_hi - y_lo
    if h <= 0:
        raise ConstructionError("avoided triangle is empty; refine the mesh", q)
    inradius = h / (2 * SQRT2 + 2)
    center = np.array([R_g - inradius, 0.5 * (y_lo + y_hi)])
    radius, offender = _fit_radius(F0, center, inradius, split.cycle, min_fraction, strict)
    cyc_edges = list(zip(split.cycle, split.cycle[1:] + split.cycle[:1]))
    center_in = center
    if params.get("grow_disk", True):
        # any disk the curve image misses and winds once around will do
        c2, r2 = _grow_disk(F0, center, split.cycle)
        if r2 > radius and abs(abs(_winding(F0, c2, cyc_edges)) - 1) < 1e-6:
            center, radius, offender = c2, r2, None
    # orient c so that F0(c) winds +1 around the disk; D1 takes the north
    w = _winding(F0, center, cyc_edges)
    wr = int(round(w))
    if abs(wr) != 1 or abs(w - wr) > 1e-6:
        raise ConstructionError(f"F0 image of the split curve winds {w:.3f} times around the disk", q)
    labels = split.labels if wr == 1 else (1 - split.labels).astype(np.int8)
    south = _vertex_side(s, labels)
    vec = disk_to_sphere(F0, center, radius, south)
    bound = (2 + SQRT2) * math.pi / D if np.isfinite(D) else SQRT2 * math.pi / (2 * radius)
    desc = {
        "variant": "two-hemisphere",
        "p": p, "q": q, "r": r,
        "R": R, "D": D,
        "triangle_nominal": [[R, 0.0], [R, D], [R - D / 2, D / 2]],
        "disk_radius_nominal": D / (2 * SQRT2 + 2),
        "triangle_realized": [[R_g, y_lo], [R_g, y_hi], [R_g - h / 2, 0.5 * (y_lo + y_hi)]],
        "disk_center": center.tolist(),
        "disk_center_incircle": center_in.tolist(),
        "disk_radius_inscribed": inradius,
        "disk_radius": radius,
        "radius_limited_by": offender,
        "hemisphere_lipschitz": math.pi / (2 * radius),
        "bound_claimed": bound,
        "bound_realized": SQRT2 * math.pi / (2 * radius),
        "curve_winding": wr,
        "cycle": list(split.cycle),
    }
    lab = labels.copy()
    lab.flags.writeable = False
    vec.flags.writeable = False
    return SphereMap(vec, lab, desc)


def _vertex_side(s, labels):
    """True for vertices whose triangles all lie in region 1.

    Vertices on the separating curve touch both regions and must map to the
    equator, where both hemisphere maps agree.
    """
    tri = s.triangles
    n = s.n_vertices
    has0 = np.zeros(n, dtype=bool)
    has1 = np.zeros(n, dtype=bool)
    for k in range(3):
        has0[tri[labels == 0, k]] = True
        has1[tri[labels == 1, k]] = True
    return has1 & ~has0


# degree and Lipschitz checks ----------------------------------------------------

def discrete_lipschitz(s, vectors):
    """Max over edges of great-circle distance over edge length."""
    V = np.asarray(vectors, dtype=float)
    E = s.edges
    a, b = V[E[:, 0]], V[E[:, 1]]
    # atan2 form is accurate for both tiny and large angles
    ang = np.arctan2(np.linalg.norm(np.cross(a, b), axis=1), (a * b).sum(1))
    ratio = ang / s.edge_lengths
    i = int(np.argmax(ratio))
    return float(ratio[i]), int(i)


def degree_signed_area(s, vectors):
    """Total signed spherical area of the image triangles over 4 pi."""
    V = np.asarray(vectors, dtype=float)
    T = s.triangles
    a, b, c = V[T[:, 0]], V[T[:, 1]], V[T[:, 2]]
    num = np.einsum("ij,ij->i", a, np.cross(b, c))
    den = 1.0 + (a * b).sum(1) + (b * c).sum(1) + (c * a).sum(1)
    omega = 2.0 * np.arctan2(num, den)
    return float(omega.sum() / (4 * math.pi))


def degree_regular_value(s, vectors, rng=None, max_tries=50, eps=1e-10):
    """Signed count of image triangles containing a random point ``y``.

    Returns ``(degree, y)``.  A triangle contains ``y`` when ``y`` lies on the
    same side of all three great circles as the opposite corners; points too
    close to an image edge trigger a fresh ``y``.
    """
    rng = np.random.default_rng(rng)
    V = np.asarray(vectors, dtype=float)
    T = s.triangles
    a, b, c = V[T[:, 0]], V[T[:, 1]], V[T[:, 2]]
    vol = np.einsum("ij,ij->i", a, np.cross(b, c))
    nondeg = np.abs(vol) > 1e-18
    a, b, c, vol = a[nondeg], b[nondeg], c[nondeg], vol[nondeg]
    nab, nbc, nca = np.cross(a, b), np.cross(b, c), np.cross(c, a)
    for _ in range(max_tries):
        y = rng.normal(size=3)
        y /= np.linalg.norm(y)
        d1, d2, d3 = nab @ y, nbc @ y, nca @ y
        sg = np.sign(vol)
        inside = (np.sign(d1) == sg) & (np.sign(d2) == sg) & (np.sign(d3) == sg)
        near = np.minimum(np.minimum(np.abs(d1), np.abs(d2)), np.abs(d3)) < eps
        # only candidates on the near side can straddle y
        close = near & ((a + b + c) @ y > 0)
        if close.any():
            continue
        return int(sg[inside].sum()), y
    raise DegreeError("no regular value found")


@dataclass(frozen=True)
class MapCertificate:
    discrete_lipschitz: float
    degree: int
    degree_area: float
    degree_regular: int
    residual: float
    methods: tuple
    bound_claimed: float
    lipschitz_edge: tuple
    regular_value: tuple

    @property
    def within_bound(self):
        return self.discrete_lipschitz <= self.bound_claimed * (1 + 1e-9)

    def as_dict(self):
        return _jsonable({
            "discrete_lipschitz": self.discrete_lipschitz,
            "degree": self.degree,
            "degree_signed_area": self.degree_area,
            "degree_regular_value": self.degree_regular,
            "residual": self.residual,
            "methods": list(self.methods),
            "bound_claimed": self.bound_claimed,
            "within_bound": self.within_bound,
            "lipschitz_edge": list(self.lipschitz_edge),
            "regular_value": list(self.regular_value),
        })


def verify_map(s, m, bound_claimed=np.inf, seed=0, max_residual=0.1):
    """Independent check of a vertex map to the unit sphere."""
    V = m.vectors if isinstance(m, SphereMap) else np.asarray(m, dtype=float)
    if V.shape != (s.n_vertices, 3):
        raise ValueError("map must give a 3-vector per vertex")
    norms = np.linalg.norm(V, axis=1)
    if np.abs(norms - 1).max() > 1e-12:
        raise ValueError("map vectors must have unit norm")
    lip, e = discrete_lipschitz(s, V)
    area = degree_signed_area(s, V)
    k = int(round(area))
    res = abs(area - k)
    reg, y = degree_regular_value(s, V, rng=seed)
    if res > max_residual:
        raise DegreeError(f"signed-area degree {area:.4f} is not near an integer")
    if reg != k:
        raise DegreeError(f"degree methods disagree: signed area {area:.4f}, regular value {reg}")
    return MapCertificate(lip, k, area, reg, res, ("signed-area", "regular-value"), float(bound_claimed),
                          tuple(int(x) for x in s.edges[e]), tuple(float(x) for x in y))


# sandwich end to end ------------------------------------------------------------

def hypersphericity_bounds(s, p=None, radii_policy="default"):
    """Interval for the degree-1 hypersphericity with its certificates."""
    if s.genus != 0:
        raise ValueError("hypersphericity bounds need a sphere")
    if p is None:
        p, _ = geodesic.eccentricity_scan(s)
    est = levelset.estimate_D(s, p, radii_policy)
    split = build_split_curve(s, p, est)
    planar = build_planar_map(s, p, split.q)
    m = assemble_degree1_map(s, planar, split, {"R": est.radius, "D": est.D})
    cert = verify_map(s, m, m.descriptor["bound_claimed"])
    lower_d = est.sandwich["hs_lower"]
    lower_map = 1.0 / cert.discrete_lipschitz if cert.degree == 1 and cert.discrete_lipschitz > 0 else 0.0
    upper = est.sandwich["hs_upper"]
    return {
        "lower": max(lower_d, lower_map),
        "upper": upper,
        "lower_from_D": lower_d,
        "lower_from_map": lower_map,
        "estimate": est,
        "map": m,
        "certificate": cert,
    }


# systolic variant --------------------------------------------------------------

@dataclass(frozen=True)
class SystolicResult:
    status: str
    message: str
    map: SphereMap = None
    certificate: MapCertificate = None
    details: dict = field(default_factory=dict)


def _arc_positions(s, cycle):
    lens = [s.edge_lengths[s.edge_index(u, v)] for u, v in zip(cycle, cycle[1:] + cycle[:1])]
    return np.concatenate([[0.0], np.cumsum(lens)])


def assemble_systolic_map(s, gamma, tau, params=None, strict=False, min_fraction=0.5, seed=0):
    """Degree-1 map from a long systole ``gamma`` and a far homologous ``tau``.

    Returns a :class:`SystolicResult` whose ``status`` is ``"ok"``, or names
    the hypothesis that failed (``"short_systole"``, ``"tau_near_q"``,
    ``"no_odd_winding"``): those are the branches in which the argument
    concludes without a map.
    """
    params = dict(params or {})
    gamma = [int(v) for v in gamma]
    tau = [int(v) for v in tau]
    if s.genus < 1:
        raise ValueError("systolic map needs genus >= 1")
    pos = _arc_positions(s, gamma)
    L = float(params.get("L", pos[-1]))
    details = {"L": L, "threshold": 4 * math.pi}
    if L < 4 * math.pi:
        return SystolicResult("short_systole", f"systole {L:.4g} < 4 pi: curve is already short", details=details)
    p = gamma[0]
    # q: the cycle vertex closest to a quarter of the way round
    iq = int(np.argmin(np.abs(pos[:-1] - L / 4)))
    q = gamma[iq]
    planar = build_planar_map(s, p, q)
    F0 = planar.values
    a = F0[q, 0]
    dq = F0[:, 1]
    tau_q = float(dq[tau].min())
    details.update({"p": p, "q": q, "dist_pq": float(a), "dist_tau_q": tau_q})
    if tau_q < 2 * math.pi:
        return SystolicResult("tau_near_q", f"tau passes within {tau_q:.4g} < 2 pi of q", details=details)
    center = np.array([a, math.pi])
    nominal = math.pi / SQRT2
    e_gamma = _cycle_edges(s, gamma)
    e_tau = _cycle_edges(s, tau)
    cut = sorted(set(e_gamma) | set(e_tau))
    n_reg, lab = _dual_regions(s, cut)
    windings = []
    for reg in range(n_reg):
        bnd = _oriented_boundary(s, lab, reg, cut)
        windings.append(_winding(F0, center, bnd))
    w_gamma = _winding(F0, center, list(zip(gamma, gamma[1:] + gamma[:1])))
    details.update({"regions": n_reg, "region_windings": [float(w) for w in windings], "gamma_winding": float(w_gamma)})
    odd = [i for i, w in enumerate(windings) if abs(round(w)) == 1]
    if not odd:
        return SystolicResult("no_odd_winding", "no complementary region winds once around the disk", details=details)
    b1 = odd[0]
    labels = np.where(lab == b1, 0, 1).astype(np.int8)
    bnd = sorted({v for e in _oriented_boundary(s, lab, b1, cut) for v in e})
    # shrink only if the boundary of the chosen region meets the disk
    d_b = np.linalg.norm(F0[bnd] - center, axis=1)
    i = int(np.argmin(d_b))
    radius, offender = nominal, None
    if d_b[i] < nominal:
        offender = bnd[i]
        if strict or d_b[i] < min_fraction * nominal:
            raise ConstructionError(f"boundary vertex {offender} maps inside the disk; refine the mesh", offender)
        radius = float(d_b[i])
    south = _vertex_side(s, labels)
    vec = disk_to_sphere(F0, center, radius, south)
    wr = int(round(windings[b1]))
    if wr == -1:
        vec[:, 1] *= -1.0
    cert = verify_map(s, vec, 1.0 * nominal / radius, seed=seed)
    desc = {
        "variant": "systolic",
        "p": p, "q": q, "L": L,
        "square": [[a - math.pi, math.pi], [a, 0.0], [a + math.pi, math.pi], [a, 2 * math.pi]],
        "disk_center": center.tolist(),
        "disk_radius_nominal": nominal,
        "disk_radius": radius,
        "radius_limited_by": offender,
        "region": b1,
        "region_winding": wr,
        "reflected": wr == -1,
        "bound_claimed": 1.0,
    }
    vec.flags.writeable = False
    labels.flags.writeable = False
    m = SphereMap(vec, labels, desc)
    return SystolicResult("ok", "constructed", m, cert, details)
