"""Distance-sphere components, the D estimator, Reeb graphs and map widths.

The distance function is perturbed symbolically: vertices are ranked by
``(dist, index)`` and every value between two consecutive ranks is regular.
For the open interval ``k`` (between ranks ``k`` and ``k + 1``) the level set
crosses exactly the edges whose endpoint ranks straddle ``k``; every crossed
triangle contains two crossed edges, so components are simple cycles.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse.csgraph import dijkstra

from . import geodesic
from ._kernels import component_diameter

__all__ = [
    "DEstimate",
    "LevelComponent",
    "MapWidth",
    "ReebGraph",
    "estimate_D",
    "extract_level_components",
    "map_width",
    "reeb_graph",
    "sandwich",
    "uryson_width_upper",
]

SQRT2 = math.sqrt(2.0)
HS_LOWER_FACTOR = 1.0 / (math.pi * (2.0 + SQRT2))
HS_UPPER_FACTOR = 2.0 / math.pi


def sandwich(D):
    """Closed-form bounds implied by the estimator value ``D``.

    Degree-1 hypersphericity lies in ``[D / (pi (2 + sqrt2)), 2 D / pi]`` and
    the Uryson 1-width in ``[D / (2 (2 + sqrt2)), D]``; the width lower bound
    follows from ``HS <= 2 UW / pi``.
    """
    return {
        "hs_lower": D * HS_LOWER_FACTOR,
        "hs_upper": D * HS_UPPER_FACTOR,
        "uw_lower": D * HS_LOWER_FACTOR * math.pi / 2.0,
        "uw_upper": D,
        "ratio": 2.0 * (2.0 + SQRT2),
    }


@dataclass(frozen=True)
class LevelComponent:
    """One component of a perturbed distance sphere.

    ``edges[i] = (lo, hi)`` is a crossed edge oriented from its lower- to its
    higher-ranked endpoint, listed in cyclic order, and ``t[i]`` is the
    fraction of the way from ``lo`` to ``hi`` where the level set crosses.
    """

    radius: float
    interval: int
    edges: np.ndarray
    t: np.ndarray
    diameter: float
    witness: tuple
    component_id: int = 0

    @property
    def points(self):
        return [(int(a), int(b), float(t)) for (a, b), t in zip(self.edges, self.t)]

    def polyline(self, s):
        """Crossing points in 3-space (needs positions)."""
        if s.positions is None:
            raise ValueError("surface has no positions")
        P = s.positions
        return P[self.edges[:, 0]] * (1 - self.t)[:, None] + P[self.edges[:, 1]] * self.t[:, None]


@dataclass(frozen=True)
class DEstimate:
    basepoint: int
    D: float
    radius: float
    interval: int
    component: LevelComponent
    q: tuple
    r: tuple
    tolerance: float
    sandwich: dict
    samples: int

    def as_dict(self):
        return {
            "basepoint": self.basepoint,
            "D": self.D,
            "tolerance": self.tolerance,
            "witness": {"R": self.radius, "interval": self.interval,
                        "component": self.component.component_id,
                        "q": list(self.q), "r": list(self.r)},
            "sandwich": {
                "degree1_hypersphericity": [self.sandwich["hs_lower"], self.sandwich["hs_upper"]],
                "uryson_width": [self.sandwich["uw_lower"], self.sandwich["uw_upper"]],
                "ratio": self.sandwich["ratio"],
                "constants": {"hs_lower": "D/(pi*(2+sqrt2))", "hs_upper": "2D/pi",
                              "uw_lower": "D/(2*(2+sqrt2))", "uw_upper": "D"},
            },
            "radii_sampled": self.samples,
        }


@dataclass
class ReebGraph:
    """Quotient graph of level-set components.

    ``nodes[i]`` is a dict with the critical vertex, its value and the
    numbers of components merging in from below and leaving above.  ``arcs``
    are families of persisting components with their largest sampled fiber
    diameter and the interval range they span.
    """

    basepoint: int
    nodes: list
    arcs: list
    tolerance: float

    @property
    def n_nodes(self):
        return len(self.nodes)

    @property
    def n_arcs(self):
        return len(self.arcs)

    @property
    def betti1(self):
        # cycles of a connected graph
        return self.n_arcs - self.n_nodes + 1

    @property
    def is_tree(self):
        return self.n_arcs == self.n_nodes - 1 and self._connected()

    @property
    def leaves(self):
        deg = np.zeros(self.n_nodes, dtype=int)
        for a in self.arcs:
            deg[a["source"]] += 1
            deg[a["target"]] += 1
        return [i for i in range(self.n_nodes) if deg[i] == 1]

    @property
    def max_fiber_diameter(self):
        return max((a["diameter"] for a in self.arcs), default=0.0)

    def _connected(self):
        parent = list(range(self.n_nodes))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for a in self.arcs:
            parent[find(a["source"])] = find(a["target"])
        return len({find(i) for i in range(self.n_nodes)}) <= 1

    def to_json(self):
        return json.dumps({"basepoint": self.basepoint, "nodes": self.nodes, "arcs": self.arcs,
                           "is_tree": self.is_tree, "tolerance": self.tolerance}, indent=2)

    def to_dot(self):
        lines = ["graph reeb {"]
        for i, nd in enumerate(self.nodes):
            lines.append(f'  n{i} [label="v{nd["vertex"]} @ {nd["value"]:.4g}"];')
        for a in self.arcs:
            lines.append(f'  n{a["source"]} -- n{a["target"]} [label="{a["diameter"]:.4g}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class MapWidth:
    width: float
    witness: object
    tolerance: float
    samples: int = 0


# sweep machinery --------------------------------------------------------------

class _Sweep:
    """Shared state for the perturbed level-set sweep of one distance field."""

    def __init__(self, s, dist):
        self.s = s
        self.dist = np.asarray(dist, dtype=float)
        n = s.n_vertices
        self.order = np.lexsort((np.arange(n), self.dist))
        self.rank = np.empty(n, dtype=np.int64)
        self.rank[self.order] = np.arange(n)
        E = s.edges
        r0, r1 = self.rank[E[:, 0]], self.rank[E[:, 1]]
        flip = r0 > r1
        self.lo = np.where(flip, E[:, 1], E[:, 0])
        self.hi = np.where(flip, E[:, 0], E[:, 1])
        self.lo_r = np.minimum(r0, r1)
        self.hi_r = np.maximum(r0, r1)
        # upper edges of w start at w, lower edges end at w
        self.upper = self._group(self.lo, n)
        self.lower = self._group(self.hi, n)
        self.tri_edges = s.triangle_edges
        self.edge_tris = s.edge_triangles

    @staticmethod
    def _group(key, n):
        order = np.argsort(key, kind="stable")
        starts = np.searchsorted(key[order], np.arange(n + 1))
        return [order[starts[v]:starts[v + 1]] for v in range(n)]

    def active(self, e, k):
        return self.lo_r[e] <= k < self.hi_r[e]

    def trace(self, e0, k):
        """Cyclically ordered crossed edges of the component through ``e0``."""
        te, et = self.tri_edges, self.edge_tris
        lo_r, hi_r = self.lo_r, self.hi_r
        cyc = [int(e0)]
        e = int(e0)
        t = int(et[e, 0])
        while True:
            nxt = -1
            for f in te[t]:
                f = int(f)
                if f != e and lo_r[f] <= k < hi_r[f]:
                    nxt = f
                    break
            if nxt < 0:
                raise RuntimeError("level set is not a closed curve")
            if nxt == cyc[0]:
                return cyc
            cyc.append(nxt)
            a, b = et[nxt]
            t = int(b) if int(a) == t else int(a)
            e = nxt

    def components_at(self, k):
        """All components of interval ``k`` as lists of edge ids."""
        act = np.flatnonzero((self.lo_r <= k) & (k < self.hi_r))
        seen = np.zeros(self.s.n_edges, dtype=bool)
        comps = []
        for e in act.tolist():
            if seen[e]:
                continue
            cyc = self.trace(e, k)
            seen[cyc] = True
            comps.append(cyc)
        return comps

    def offsets(self, edges, k, frac):
        """Edge points of a component at the value a fraction ``frac`` into
        interval ``k``: returns ``(t, ta, tb)``."""
        d = self.dist
        r0 = d[self.order[k]]
        r1 = d[self.order[k + 1]]
        R = r0 + frac * (r1 - r0)
        a, b = self.lo[edges], self.hi[edges]
        da, db = d[a], d[b]
        span = db - da
        with np.errstate(invalid="ignore", divide="ignore"):
            t = np.where(span > 0, (R - da) / np.where(span > 0, span, 1.0), frac)
        t = np.clip(t, 0.0, 1.0)
        L = self.s.edge_lengths[edges]
        return R, t, t * L, (1.0 - t) * L


class _RowCache:
    """Distance rows of the vertices currently touching the level set.

    Every vertex is needed for one contiguous range of intervals, so its row
    is computed once on entry and its slot recycled on exit.
    """

    def __init__(self, sweep, graph):
        s = sweep.s
        n = s.n_vertices
        E = s.edges
        first = sweep.rank.copy()
        last = sweep.rank.copy() - 1
        rk = sweep.rank
        np.minimum.at(first, E[:, 0], rk[E[:, 1]])
        np.minimum.at(first, E[:, 1], rk[E[:, 0]])
        np.maximum.at(last, E[:, 0], rk[E[:, 1]] - 1)
        np.maximum.at(last, E[:, 1], rk[E[:, 0]] - 1)
        self.first, self.last = first, last
        delta = np.zeros(n + 1, dtype=np.int64)
        np.add.at(delta, first, 1)
        np.add.at(delta, last + 1, -1)
        cap = (int(np.cumsum(delta).max()) if n else 0) + self.PREFETCH
        self.rows = np.empty((cap, n))
        self.slot = np.full(n, -1, dtype=np.int64)
        self.free = list(range(cap - 1, -1, -1))
        self.enter = sweep._group(first, n)
        self.leave = sweep._group(last, n)
        self.graph = graph
        self.n_rows = 0
        self.loaded_until = 0

    PREFETCH = 64

    def advance(self, k):
        if 0 < k <= len(self.leave):
            for v in self.leave[k - 1].tolist():
                self.free.append(int(self.slot[v]))
                self.slot[v] = -1
        if k < self.loaded_until or k >= len(self.enter):
            return
        # one Dijkstra call for the next few intervals' worth of vertices
        batch = [self.enter[k]]
        size = len(self.enter[k])
        j = k + 1
        while j < len(self.enter) and size + len(self.enter[j]) <= self.PREFETCH:
            batch.append(self.enter[j])
            size += len(self.enter[j])
            j += 1
        self.loaded_until = j
        new = np.concatenate(batch)
        if len(new) == 0:
            return
        rows = dijkstra(self.graph, directed=True, indices=new)
        for v, row in zip(new.tolist(), np.atleast_2d(rows)):
            i = self.free.pop()
            self.slot[v] = i
            self.rows[i] = row
        self.n_rows += len(new)


def _fractions(policy):
    if policy in (None, "default", "vertex+mid"):
        return (0.0, 0.5, 1.0)
    if isinstance(policy, str) and policy.startswith("dense:"):
        m = int(policy.split(":", 1)[1])
        if m < 1:
            raise ValueError("dense policy needs at least one subdivision")
        return tuple(np.linspace(0.0, 1.0, m + 1).tolist())
    if isinstance(policy, (int, np.integer)):
        return tuple(np.linspace(0.0, 1.0, int(policy) + 1).tolist())
    fr = tuple(float(x) for x in policy)
    if not fr or min(fr) < 0 or max(fr) > 1:
        raise ValueError("radius fractions must lie in [0, 1]")
    return fr


def _field_of(s, field):
    if isinstance(field, geodesic.DistanceField):
        return field
    return geodesic.distance_field(s, int(field))


def _run(s, fld, fractions):
    key = ("sweep", fld.source, fractions)
    if key in s._cache:
        return s._cache[key]
    sw = _Sweep(s, fld.dist)
    cache = _RowCache(sw, geodesic.metric_graph(s))
    n = s.n_vertices
    comp_of = np.full(s.n_edges, -1, dtype=np.int64)
    comps = {}          # comp id -> edge list
    arc_of = {}         # comp id -> arc index
    nodes, arcs = [], []
    next_id = 0
    best = (-1.0, None)
    for k in range(n):
        w = int(sw.order[k])
        cache.advance(k)
        below = sorted({int(comp_of[e]) for e in sw.lower[w].tolist()})
        for c in below:
            comp_of[comps[c]] = -1
        above = []
        if k < n - 1:
            for e in sw.upper[w].tolist():
                if comp_of[e] < 0:
                    cyc = sw.trace(e, k)
                    comps[next_id] = cyc
                    comp_of[cyc] = next_id
                    above.append(next_id)
                    next_id += 1
            # leftovers of old components that no longer touch w
            for c in below:
                for e in comps[c]:
                    if sw.active(e, k) and comp_of[e] < 0:
                        cyc = sw.trace(e, k)
                        comps[next_id] = cyc
                        comp_of[cyc] = next_id
                        above.append(next_id)
                        next_id += 1
        if len(below) == 1 and len(above) == 1:
            arc_of[above[0]] = arc_of.pop(below[0])
        else:
            node = len(nodes)
            nodes.append({"vertex": w, "value": float(fld.dist[w]), "rank": k,
                          "below": len(below), "above": len(above)})
            for c in below:
                arcs[arc_of.pop(c)]["target"] = node
            for c in above:
                arc_of[c] = len(arcs)
                arcs.append({"source": node, "target": -1, "diameter": 0.0,
                             "first_interval": k, "last_interval": k,
                             "argmax": [k, 0.0]})
        for c in below:
            del comps[c]
        if k == n - 1:
            break
        # sample every live component in this interval
        for c, cyc in comps.items():
            arc = arcs[arc_of[c]]
            arc["last_interval"] = k
            edges = np.asarray(cyc, dtype=np.int64)
            a, b = sw.lo[edges], sw.hi[edges]
            for fr in fractions:
                R, t, ta, tb = sw.offsets(edges, k, fr)
                d, i, j = component_diameter(cache.rows, cache.slot, a, b, ta, tb)
                if d > arc["diameter"]:
                    arc["diameter"] = d
                    arc["argmax"] = [k, fr]
                if d > best[0]:
                    best = (d, (k, fr, c, edges, t, i, j, R))
    out = {"sweep": sw, "nodes": nodes, "arcs": arcs, "best": best, "rows": cache.n_rows,
           "samples": (n - 1) * len(fractions)}
    s._cache[key] = out
    return out


def extract_level_components(s, field, R):
    """Components of the distance sphere of radius ``R``.

    A vertex with value exactly ``R`` counts as below the level (symbolic
    perturbation), so a regular interval is always used.
    """
    fld = _field_of(s, field)
    d = fld.dist
    R = float(R)
    if not 0 < R < d.max():
        raise ValueError(f"radius {R} outside (0, {d.max()})")
    sw = _Sweep(s, d)
    k = int(np.searchsorted(d[sw.order], R, side="right")) - 1
    k = min(max(k, 0), s.n_vertices - 2)
    out = []
    for cid, cyc in enumerate(sw.components_at(k)):
        edges = np.asarray(cyc, dtype=np.int64)
        a, b = sw.lo[edges], sw.hi[edges]
        da, db = d[a], d[b]
        span = db - da
        with np.errstate(invalid="ignore", divide="ignore"):
            t = np.where(span > 0, (R - da) / np.where(span > 0, span, 1.0), 0.5)
        t = np.clip(t, 0.0, 1.0)
        L = s.edge_lengths[edges]
        verts = np.unique(np.concatenate([a, b]))
        slot = np.full(s.n_vertices, -1, dtype=np.int64)
        slot[verts] = np.arange(len(verts))
        rows = geodesic.distance_rows(s, verts)
        diam, i, j = component_diameter(rows, slot, a, b, t * L, (1 - t) * L)
        pts = np.stack([a, b], 1)
        out.append(LevelComponent(R, k, pts, t, diam,
                                  ((int(a[i]), int(b[i]), float(t[i])), (int(a[j]), int(b[j]), float(t[j]))), cid))
    return out


def estimate_D(s, p, radii_policy="default"):
    """Largest ambient diameter of any component of any distance sphere
    around ``p``, with its witness and the implied sandwich bounds."""
    fld = _field_of(s, p)
    fr = _fractions(radii_policy)
    res = _run(s, fld, fr)
    D, wit = res["best"]
    if wit is None:
        raise ValueError("surface too small to sample any level set")
    k, frac, cid, edges, t, i, j, R = wit
    sw = res["sweep"]
    a, b = sw.lo[edges], sw.hi[edges]
    pts = np.stack([a, b], 1)
    q = (int(a[i]), int(b[i]), float(t[i]))
    r = (int(a[j]), int(b[j]), float(t[j]))
    comp = LevelComponent(float(R), int(k), pts, np.asarray(t), float(D), (q, r), int(cid))
    tol = fld.bound(D)
    return DEstimate(fld.source, float(D), float(R), int(k), comp, q, r, tol, sandwich(float(D)), res["samples"])


def reeb_graph(s, field, radii_policy="default"):
    """Reeb graph of the perturbed distance function, with fiber diameters."""
    fld = _field_of(s, field)
    res = _run(s, fld, _fractions(radii_policy))
    arcs = []
    for a in res["arcs"]:
        b = dict(a)
        b["argmax"] = list(a["argmax"])
        arcs.append(b)
    return ReebGraph(fld.source, [dict(n) for n in res["nodes"]], arcs, fld.bound(res["best"][0]))


def uryson_width_upper(s, field, radii_policy="default"):
    """Width of the Reeb quotient map: the largest fiber diameter."""
    g = reeb_graph(s, field, radii_policy)
    best = max(range(g.n_arcs), key=lambda i: g.arcs[i]["diameter"])
    return MapWidth(g.arcs[best]["diameter"], {"arc": best, **g.arcs[best]}, g.tolerance, g.n_arcs)


def _check_simplicial(dom, tgt, f):
    fe = f[dom.edges]
    same = fe[:, 0] == fe[:, 1]
    lo = np.minimum(fe[:, 0], fe[:, 1])
    hi = np.maximum(fe[:, 0], fe[:, 1])
    n = tgt.n_vertices
    keys = tgt.edges[:, 0] * n + tgt.edges[:, 1]
    q = lo * n + hi
    pos = np.clip(np.searchsorted(keys, q), 0, len(keys) - 1)
    ok = same | (keys[pos] == q)
    if not ok.all():
        e = int(np.flatnonzero(~ok)[0])
        raise ValueError(f"map is not simplicial: edge {dom.edges[e].tolist()} maps to a non-edge")
    return pos, same


def map_width(dom, tgt, vertex_map, limit=None):
    """Largest diameter (in ``dom``) of a fiber over sampled target points.

    The samples are the target vertices and edge midpoints.  ``limit`` caps
    the Dijkstra searches; fibers reaching past it are recomputed uncapped.
    """
    f = np.asarray(vertex_map, dtype=np.int64)
    if f.shape != (dom.n_vertices,) or f.min() < 0 or f.max() >= tgt.n_vertices:
        raise ValueError("vertex_map must send every domain vertex to a target vertex")
    pos, same = _check_simplicial(dom, tgt, f)
    graph = geodesic.metric_graph(dom)
    if limit is None:
        limit = 12.0 * float(dom.edge_lengths.max())
    pre_v = [[] for _ in range(tgt.n_vertices)]
    for v, y in enumerate(f.tolist()):
        pre_v[y].append(v)
    # domain edges over each target edge, and domain edges collapsed to a vertex
    over_e = [[] for _ in range(tgt.n_edges)]
    for e in np.flatnonzero(~same).tolist():
        over_e[pos[e]].append(e)
    collapsed = [[] for _ in range(tgt.n_vertices)]
    for e in np.flatnonzero(same).tolist():
        collapsed[f[dom.edges[e, 0]]].append(e)
    edges_at = [[] for _ in range(tgt.n_vertices)]
    for e, (y1, _) in enumerate(tgt.edges.tolist()):
        edges_at[y1].append(e)
    slot = np.full(dom.n_vertices, -1, dtype=np.int64)
    best = (0.0, None)
    samples = 0
    dE = dom.edges
    Ld = dom.edge_lengths
    for y in range(tgt.n_vertices):
        jobs = []
        # vertex sample: preimage vertices plus every collapsed edge's midpoint
        a = list(pre_v[y]) + [int(dE[e, 0]) for e in collapsed[y]]
        b = list(pre_v[y]) + [int(dE[e, 1]) for e in collapsed[y]]
        ta = [0.0] * len(pre_v[y]) + [Ld[e] / 2 for e in collapsed[y]]
        jobs.append((("vertex", y), a, b, ta, ta))
        for te in edges_at[y]:
            ee = over_e[te]
            if not ee:
                continue
            a = [int(dE[e, 0]) for e in ee]
            b = [int(dE[e, 1]) for e in ee]
            h = [Ld[e] / 2 for e in ee]
            jobs.append((("edge", te), a, b, h, h))
        need = sorted({v for _, a, b, _, _ in jobs for v in a + b})
        if not need:
            continue
        rows = np.atleast_2d(dijkstra(graph, directed=True, indices=need, limit=limit))
        slot[need] = np.arange(len(need))
        for tag, a, b, ta, tb in jobs:
            if len(a) < 1:
                continue
            samples += 1
            args = (np.array(a), np.array(b), np.array(ta, float), np.array(tb, float))
            d, _, _ = component_diameter(rows, slot, *args)
            if not np.isfinite(d):
                full = np.atleast_2d(dijkstra(graph, directed=True, indices=need))
                d, _, _ = component_diameter(full, slot, *args)
            if d > best[0]:
                best = (d, tag)
        slot[need] = -1
    rel, ab = geodesic.distance_tolerance(dom)
    return MapWidth(float(best[0]), best[1], rel * best[0] + ab, samples)
