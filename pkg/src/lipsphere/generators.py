"""Deterministic test surfaces with known analytic reference values."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ellipe

from .surface import TriSurface, TopologyError

__all__ = [
    "BranchedCover",
    "GeneratedSurface",
    "KINDS",
    "branched_double_cover",
    "dumbbell",
    "ellipsoid",
    "fingered_sphere",
    "flat_torus",
    "generate",
    "genus_g",
    "icosphere",
]

_ICO_F = [
    (0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
    (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
    (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
    (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1),
]


@dataclass
class GeneratedSurface:
    surface: TriSurface
    kind: str
    params: dict
    seed: int
    reference: dict = field(default_factory=dict)


def _unit_icosphere(subdiv):
    t = (1 + math.sqrt(5)) / 2
    base = np.array([[-1, t, 0], [1, t, 0], [-1, -t, 0], [1, -t, 0],
                     [0, -1, t], [0, 1, t], [0, -1, -t], [0, 1, -t],
                     [t, 0, -1], [t, 0, 1], [-t, 0, -1], [-t, 0, 1]], float)
    verts = [v / np.linalg.norm(v) for v in base]
    faces = [tuple(f) for f in _ICO_F]
    for _ in range(subdiv):
        cache = {}
        new_faces = []

        def mid(a, b):
            key = (a, b) if a < b else (b, a)
            if key not in cache:
                m = verts[a] + verts[b]
                verts.append(m / np.linalg.norm(m))
                cache[key] = len(verts) - 1
            return cache[key]

        for a, b, c in faces:
            ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
            new_faces += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        faces = new_faces
    return np.array(verts), np.array(faces, dtype=np.int64)


def icosphere(subdiv=3, radius=1.0):
    """Geodesic icosphere with ``20 * 4**subdiv`` triangles."""
    if subdiv < 0 or radius <= 0:
        raise ValueError("icosphere needs subdiv >= 0 and radius > 0")
    v, f = _unit_icosphere(int(subdiv))
    return TriSurface(f, positions=v * radius)


def ellipsoid(a=1.0, b=1.0, c=0.5, n=3):
    if min(a, b, c) <= 0:
        raise ValueError("ellipsoid semi-axes must be positive")
    v, f = _unit_icosphere(int(n))
    return TriSurface(f, positions=v * np.array([a, b, c]))


def _finger_directions(k):
    ang = 2 * np.pi * np.arange(k) / max(k, 1)
    return np.stack([np.cos(ang), np.sin(ang), np.zeros(k)], axis=1)


def _push_fingers(v, k, height=1.0, width=0.15):
    if k == 0:
        return v
    dirs = _finger_directions(k)
    bump = height * np.exp(-(1.0 - v @ dirs.T) / width**2).sum(axis=1)
    return v * (1.0 + bump)[:, None]


def fingered_sphere(fingers=3, n=3, height=1.0, width=0.15):
    """Unit sphere with ``fingers`` radial protrusions around the equator."""
    if fingers < 0:
        raise ValueError("fingers must be nonnegative")
    v, f = _unit_icosphere(int(n))
    return TriSurface(f, positions=_push_fingers(v, int(fingers), height, width))


def dumbbell(neck_radius=0.2, n=4, fingers=0):
    """Two round lobes joined by a neck of radius ``neck_radius``.

    The optional ``fingers`` are pushed out of the lobes before pinching.
    """
    if not 0 < neck_radius < 1:
        raise ValueError("neck_radius must lie in (0, 1)")
    v, f = _unit_icosphere(int(n))
    if fingers:
        # side fingers on the lobes, away from the neck
        dirs = np.array([[1.0, 0.0, 0.6], [-1.0, 0.0, -0.6], [0.0, 1.0, 0.6], [0.0, -1.0, -0.6]])[:fingers]
        dirs /= np.linalg.norm(dirs, axis=1)[:, None]
        bump = np.exp(-(1.0 - v @ dirs.T) / 0.15**2).sum(axis=1)
        v = v * (1.0 + bump)[:, None]
    z = v[:, 2] / np.linalg.norm(v, axis=1)
    w = 1.0 - (1.0 - neck_radius) * np.exp(-(z / 0.3) ** 2)
    p = np.stack([v[:, 0] * w, v[:, 1] * w, 2.0 * v[:, 2]], axis=1)
    return TriSurface(f, positions=p)


def _grid_torus(n1, n2, L1, L2, offset=0, hole_cells=()):
    """Triangulated n1 x n2 lattice torus; ``hole_cells`` are squares left out."""
    vid = lambda i, j: offset + (i % n1) * n2 + (j % n2)  # noqa: E731
    tris = []
    holes = set(hole_cells)
    for i in range(n1):
        for j in range(n2):
            if (i, j) in holes:
                continue
            a, b, c, d = vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)
            tris.append((a, b, c))
            tris.append((a, c, d))
    h1, h2 = L1 / n1, L2 / n2
    pairs = []
    vals = []
    for i in range(n1):
        for j in range(n2):
            pairs += [(vid(i, j), vid(i + 1, j)), (vid(i, j), vid(i, j + 1)), (vid(i, j), vid(i + 1, j + 1))]
            vals += [h1, h2, math.hypot(h1, h2)]
    return tris, pairs, vals


def flat_torus(L1=1.0, L2=1.0, n=16):
    """Flat torus R^2 / (L1 Z x L2 Z) on an ``n x n`` lattice with diagonals."""
    if n < 3 or L1 <= 0 or L2 <= 0:
        raise ValueError("flat_torus needs n >= 3 and positive side lengths")
    tris, pairs, vals = _grid_torus(n, n, L1, L2)
    return TriSurface.from_edge_values(tris, pairs, vals)


def genus_g(G=2, handle_scale=0.2, n=15):
    """Chain of ``G`` lattice tori glued along removed grid squares.

    The first ``G - 1`` tori are unit squares on an ``n x n`` lattice; the last
    one has side ``m / n`` with ``m = round(handle_scale * n)`` so that the
    glued squares match exactly.  Returns a genus-``G`` surface.
    """
    G = int(G)
    if G < 1:
        raise ValueError("genus_g needs G >= 1")
    if G == 1:
        return flat_torus(1.0, 1.0, n)
    m = int(round(handle_scale * n))
    if m < 4 or n < 6:
        raise ValueError("handle too small for the lattice: increase n")
    sizes = [n] * (G - 1) + [m]
    sides = [1.0] * (G - 1) + [m / n]
    h = 1.0 / n
    offsets = np.concatenate([[0], np.cumsum([k * k for k in sizes])]).tolist()
    tris, pairs, vals = [], [], []
    hole_a = (0, 0)
    for t, k in enumerate(sizes):
        holes = []
        if t > 0:
            holes.append(hole_a)
        if t < G - 1:
            holes.append((k // 2, k // 2))
        tt, pp, vv = _grid_torus(k, k, sides[t], sides[t], offsets[t], holes)
        tris += tt
        pairs += pp
        vals += vv
    # glue the square (k//2, k//2) of torus t to square (0, 0) of torus t + 1
    ident = {}
    for t in range(G - 1):
        k, k2 = sizes[t], sizes[t + 1]
        i0 = j0 = k // 2
        sq_a = [offsets[t] + ((i0 + di) % k) * k + (j0 + dj) % k for di, dj in ((0, 0), (1, 0), (1, 1), (0, 1))]
        sq_b = [offsets[t + 1] + (di % k2) * k2 + dj % k2 for di, dj in ((0, 0), (1, 0), (1, 1), (0, 1))]
        for q in range(4):
            ident[sq_b[q]] = sq_a[(1 - q) % 4]

    def find(v):
        while v in ident:
            v = ident[v]
        return v

    tris = [tuple(find(v) for v in t) for t in tris]
    pairs = [(find(a), find(b)) for a, b in pairs]
    used = sorted({v for t in tris for v in t})
    relabel = {v: i for i, v in enumerate(used)}
    tris = [tuple(relabel[v] for v in t) for t in tris]
    # drop lattice edges that only existed inside removed squares
    keep_pairs, keep_vals = [], []
    for (a, b), val in zip(pairs, vals):
        if a in relabel and b in relabel:
            keep_pairs.append((relabel[a], relabel[b]))
            keep_vals.append(val)
    edge_set = {}
    for (a, b), val in zip(keep_pairs, keep_vals):
        key = (min(a, b), max(a, b))
        edge_set[key] = min(val, edge_set.get(key, np.inf))
    tri_edges = {(min(a, b), max(a, b)) for t in tris for a, b in ((t[0], t[1]), (t[1], t[2]), (t[2], t[0]))}
    lengths = {e: edge_set[e] for e in tri_edges}
    s = TriSurface(np.array(tris), edge_lengths=lengths)
    if s.genus != G:
        raise TopologyError(f"genus_g produced genus {s.genus}, expected {G}")
    assert abs(h - sides[-1] / m) < 1e-12
    return s


KINDS = ("icosphere", "ellipsoid", "dumbbell", "fingered_sphere", "flat_torus", "genus_g")


def _ellipse_perimeter(a, b):
    a, b = max(a, b), min(a, b)
    return 4 * a * ellipe(1 - (b / a) ** 2)


def generate(kind, params=None, seed=0):
    """Build a generator surface by name, with analytic reference values."""
    params = dict(params or {})
    ref = {}
    if kind == "icosphere":
        subdiv = int(params.get("subdiv", 3))
        radius = float(params.get("radius", 1.0))
        s = icosphere(subdiv, radius)
        ref = {"D": math.pi * radius, "degree1_hypersphericity": radius,
               "shortest_closed_geodesic": 2 * math.pi * radius, "genus": 0}
        params = {"subdiv": subdiv, "radius": radius}
    elif kind == "ellipsoid":
        a, b, c = (float(x) for x in params.get("axes", (1.0, 1.0, 0.5)))
        n = int(params.get("n", 3))
        s = ellipsoid(a, b, c, n)
        sections = sorted([_ellipse_perimeter(a, b), _ellipse_perimeter(a, c), _ellipse_perimeter(b, c)])
        ref = {"principal_section_perimeters": sections, "shortest_closed_geodesic": sections[0], "genus": 0}
        params = {"axes": [a, b, c], "n": n}
    elif kind == "dumbbell":
        neck = float(params.get("neck_radius", 0.2))
        n = int(params.get("n", 4))
        fingers = int(params.get("fingers", 0))
        s = dumbbell(neck, n, fingers)
        ref = {"neck_circumference": 2 * math.pi * neck, "genus": 0}
        params = {"neck_radius": neck, "n": n, "fingers": fingers}
    elif kind == "fingered_sphere":
        fingers = int(params.get("fingers", 3))
        n = int(params.get("n", 3))
        s = fingered_sphere(fingers, n)
        ref = {"fingers": fingers, "genus": 0}
        params = {"fingers": fingers, "n": n}
    elif kind == "flat_torus":
        L1 = float(params.get("L1", 1.0))
        L2 = float(params.get("L2", 1.0))
        n = int(params.get("n", 16))
        s = flat_torus(L1, L2, n)
        ref = {"systole": min(L1, L2), "genus": 1}
        params = {"L1": L1, "L2": L2, "n": n}
    elif kind == "genus_g":
        G = int(params.get("G", 2))
        scale = float(params.get("handle_scale", 0.2))
        n = int(params.get("n", 15))
        s = genus_g(G, scale, n)
        side = round(scale * n) / n if G > 1 else 1.0
        ref = {"genus": G, "handle_side": side, "systole": min(1.0, side)}
        params = {"G": G, "handle_scale": scale, "n": n}
    else:
        raise ValueError(f"unknown surface kind {kind!r}; choose from {', '.join(KINDS)}")
    return GeneratedSurface(s, kind, params, int(seed), ref)


@dataclass
class BranchedCover:
    cover: TriSurface
    base: TriSurface
    vertex_map: np.ndarray
    branch_points: np.ndarray
    cut_edges: np.ndarray
    epsilon: float
    seed: int


def _greedy_net(dist_fn, n, eps, start):
    """Farthest-point sampling until every vertex is within ``eps``."""
    centers = [start]
    best = dist_fn(start).copy()
    while best.max() > eps:
        far = int(np.argmax(best))
        centers.append(far)
        best = np.minimum(best, dist_fn(far))
    return centers, best


def branched_double_cover(epsilon=0.3, seed=7, max_subdiv=5, star_stretch=1e-6):
    """Degree-2 cover of the unit icosphere branched over an ``epsilon``-net.

    The branch set is a greedy farthest-point net (padded to even size); branch
    points are paired greedily by distance and joined by shortest edge paths
    whose mod-2 sum is the cut.  Crossing a cut edge swaps sheets.  Cover edges
    inherit base lengths, stretched by ``1 + star_stretch`` on branch stars.
    """
    from . import geodesic

    if not 0 < epsilon < 1:
        raise ValueError("epsilon must lie in (0, 1)")
    subdiv = 0
    while True:
        base = icosphere(subdiv, 1.0)
        if base.edge_lengths.max() <= epsilon / 2:
            break
        subdiv += 1
        if subdiv > max_subdiv:
            raise ValueError(f"epsilon={epsilon} too small for refinement budget max_subdiv={max_subdiv}")
    rng = np.random.default_rng(seed)
    start = int(rng.integers(base.n_vertices))
    field_cache = {}

    def dist(v):
        if v not in field_cache:
            field_cache[v] = geodesic.distance_field(base, v).dist
        return field_cache[v]

    centers, _ = _greedy_net(dist, base.n_vertices, epsilon, start)
    if len(centers) % 2:
        far = int(np.argmax(np.min([dist(c) for c in centers], axis=0)))
        if far in centers:
            far = int(next(v for v in rng.permutation(base.n_vertices) if v not in centers))
        centers.append(far)
    if len(centers) < 2:
        centers.append(int(np.argmax(dist(centers[0]))))
    # greedy matching by distance
    pairs = sorted(
        ((dist(a)[b], a, b) for i, a in enumerate(centers) for b in centers[i + 1:]),
    )
    matched = set()
    matching = []
    for _, a, b in pairs:
        if a in matched or b in matched:
            continue
        matched.update((a, b))
        matching.append((a, b))
    cut = np.zeros(base.n_edges, dtype=bool)
    for a, b in matching:
        path = geodesic.edge_path(base, a, b)
        for u, v in zip(path[:-1], path[1:]):
            e = base.edge_index(u, v)
            cut[e] ^= True
    cover, vmap = _cut_and_cross_join(base, cut)
    branch = np.array(sorted(centers), dtype=np.int64)
    stretch = np.ones(cover.n_edges)
    is_branch = np.zeros(base.n_vertices, dtype=bool)
    is_branch[branch] = True
    star = is_branch[vmap[cover.edges[:, 0]]] | is_branch[vmap[cover.edges[:, 1]]]
    stretch[star] += star_stretch
    cover = TriSurface(cover.triangles, edge_lengths=cover.edge_lengths * stretch)
    return BranchedCover(cover, base, vmap, branch, np.flatnonzero(cut), float(epsilon), int(seed))


def _cut_and_cross_join(base, cut):
    """Two sheets of ``base`` glued crosswise along the ``cut`` edges."""
    F = base.n_triangles
    tri = base.triangles
    # union-find over corners (triangle, corner, sheet)
    parent = np.arange(F * 3 * 2)

    def idx(t, k, s):
        return (t * 3 + k) * 2 + s

    def find(x):
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)

    pos = {}
    for t in range(F):
        for k in range(3):
            pos[(t, int(tri[t, k]))] = k
    for e, (t1, t2) in enumerate(base.edge_triangles.tolist()):
        swap = int(cut[e])
        for v in base.edges[e].tolist():
            k1, k2 = pos[(t1, v)], pos[(t2, v)]
            for s in (0, 1):
                union(idx(t1, k1, s), idx(t2, k2, s ^ swap))
    roots = {}
    cover_tri = np.empty((2 * F, 3), dtype=np.int64)
    vmap = []
    for s in (0, 1):
        for t in range(F):
            for k in range(3):
                r = find(idx(t, k, s))
                if r not in roots:
                    roots[r] = len(roots)
                    vmap.append(int(tri[t, k]))
                cover_tri[s * F + t, k] = roots[r]
    vmap = np.array(vmap, dtype=np.int64)
    L = {}
    for a, b, c in cover_tri.tolist():
        for u, v in ((a, b), (b, c), (c, a)):
            key = (min(u, v), max(u, v))
            if key not in L:
                L[key] = base.edge_lengths[base.edge_index(vmap[u], vmap[v])]
    return TriSurface(cover_tri, edge_lengths=L), vmap
