"""Mod-2 homology of surface meshes: bases, systoles, intersections, planarity.

Every edge carries a signature in ``(Z/2)^{2G}`` packed into a ``uint64``:
the xor of the signatures along a closed edge walk is its homology class.
Signatures come from a tree-cotree split (spanning tree, dual spanning tree
of the remaining edges, ``2G`` leftover edges).
"""
from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import breadth_first_order, dijkstra, minimum_spanning_tree

from . import geodesic
from ._kernels import planarity_sweep, tree_xor

__all__ = [
    "Cycle",
    "CycleBasis",
    "PlanarityReport",
    "cycle_from_vertices",
    "edge_signatures",
    "greedy_minimal_basis",
    "homology_basis",
    "intersection_mod2",
    "pairing",
    "planarity_radius",
    "straightness_audit",
    "systole",
]

MAX_RANK = 64


@dataclass(frozen=True)
class Cycle:
    vertices: tuple
    edges: tuple
    length: float
    signature: int

    @property
    def nontrivial(self):
        return self.signature != 0

    def bits(self, rank):
        return [(self.signature >> i) & 1 for i in range(rank)]

    def as_dict(self, rank=None):
        d = {"vertices": list(self.vertices), "length": self.length, "signature": self.signature}
        if rank is not None:
            d["signature_bits"] = self.bits(rank)
        return d


@dataclass(frozen=True)
class CycleBasis:
    cycles: tuple
    intersection: np.ndarray
    rank: int
    genus: int
    method: str
    notes: tuple = ()

    @property
    def lengths(self):
        return [c.length for c in self.cycles]

    @property
    def empty(self):
        return len(self.cycles) == 0

    def to_json(self):
        return json.dumps({
            "genus": self.genus,
            "method": self.method,
            "rank": self.rank,
            "cycles": [c.as_dict(2 * self.genus) for c in self.cycles],
            "intersection": self.intersection.tolist(),
            "notes": list(self.notes),
        }, indent=2)


@dataclass(frozen=True)
class PlanarityReport:
    radius: float
    witness: int
    edge: tuple
    notes: str


# signatures -----------------------------------------------------------------------

def edge_signatures(s):
    """Per-edge ``uint64`` signatures from a tree-cotree decomposition.

    Returns ``(sig, leftover)`` where ``leftover[i]`` is the edge carrying
    bit ``i``.  Tree edges are 0; each cotree edge is fixed by requiring
    every triangle boundary to have signature 0.
    """
    if "signatures" in s._cache:
        return s._cache["signatures"]
    G2 = 2 * s.genus
    if G2 > MAX_RANK:
        raise ValueError(f"genus {s.genus} exceeds the {MAX_RANK // 2} supported by packed signatures")
    n, E, F = s.n_vertices, s.n_edges, s.n_triangles
    edges = s.edges
    # primal spanning tree by BFS from vertex 0
    g = geodesic.edge_graph(s)
    order, pred = breadth_first_order(g, 0, directed=True, return_predecessors=True)
    in_tree = np.zeros(E, dtype=bool)
    child = order[1:]
    in_tree[_edge_ids(s, child, pred[child])] = True
    # dual spanning tree over the remaining edges
    et = s.edge_triangles
    free = np.flatnonzero(~in_tree)
    dual = coo_matrix((free + 1.0, (et[free, 0], et[free, 1])), shape=(F, F)).tocsr()
    dual = dual + dual.T
    dorder, dpred = breadth_first_order(dual, 0, directed=True, return_predecessors=True)
    if len(dorder) != F:
        raise ValueError("dual graph is disconnected")
    in_cotree = np.zeros(E, dtype=bool)
    dchild = dorder[1:]
    # the edge joining each dual child to its parent
    par_edge = np.asarray(dual[dchild, dpred[dchild]]).ravel().astype(np.int64) - 1
    in_cotree[par_edge] = True
    leftover = np.flatnonzero(~in_tree & ~in_cotree)
    if len(leftover) != G2:
        raise ValueError(f"tree-cotree left {len(leftover)} edges, expected {G2}")
    sig = np.zeros(E, dtype=np.uint64)
    for i, e in enumerate(leftover):
        sig[e] = np.uint64(1) << np.uint64(i)
    te = s.triangle_edges
    # peel dual leaves: each child triangle fixes the edge to its parent
    for t, e in zip(dchild[::-1].tolist(), par_edge[::-1].tolist()):
        a, b, c = te[t]
        sig[e] = sig[a] ^ sig[b] ^ sig[c] ^ sig[e]
    # consistency: every triangle boundary is trivial
    if np.any(sig[te[:, 0]] ^ sig[te[:, 1]] ^ sig[te[:, 2]]):
        raise RuntimeError("edge signatures are inconsistent")
    sig.flags.writeable = False
    out = (sig, leftover)
    s._cache["signatures"] = out
    s._cache["signature_tree"] = pred.astype(np.int64)
    return out


def _edge_ids(s, u, v):
    n = s.n_vertices
    u = np.asarray(u, dtype=np.int64)
    v = np.asarray(v, dtype=np.int64)
    keys = np.minimum(u, v) * n + np.maximum(u, v)
    ekeys = s.edges[:, 0] * n + s.edges[:, 1]
    idx = np.searchsorted(ekeys, keys)
    idx = np.clip(idx, 0, len(ekeys) - 1)
    if not np.array_equal(ekeys[idx], keys):
        raise KeyError("vertex pair is not an edge")
    return idx


def cycle_from_vertices(s, vertices):
    """Cycle record of a closed vertex walk (last vertex joins the first)."""
    vs = [int(v) for v in vertices]
    if len(vs) < 2:
        raise ValueError("a cycle needs at least two vertices")
    nxt = vs[1:] + vs[:1]
    eids = _edge_ids(s, vs, nxt)
    sig, _ = edge_signatures(s)
    acc = 0
    for e in eids.tolist():
        acc ^= int(sig[e])
    length = math.fsum(s.edge_lengths[eids].tolist())
    return Cycle(tuple(vs), tuple(eids.tolist()), length, acc)


# candidate cycles -----------------------------------------------------------------

def _tree_path(pred, v):
    path = [int(v)]
    while pred[path[-1]] >= 0:
        path.append(int(pred[path[-1]]))
    return path[::-1]


def _scan_batch(s, g, idx):
    sig, _ = edge_signatures(s)
    E = s.edges
    d, pred = dijkstra(g, directed=True, indices=idx, return_predecessors=True)
    parts = []
    for row, srow, sv in zip(d, pred, idx.tolist()):
        par = srow.astype(np.int64)
        par[par < 0] = -1
        vv = np.flatnonzero(par >= 0)
        psig = np.zeros(s.n_vertices, dtype=np.uint64)
        psig[vv] = sig[_edge_ids(s, vv, par[vv])]
        sp = tree_xor(par, psig, np.argsort(row, kind="stable"))
        # tree edges close no cycle and get signature 0 automatically
        c_sig = sp[E[:, 0]] ^ sp[E[:, 1]] ^ sig
        c_len = row[E[:, 0]] + row[E[:, 1]] + s.edge_lengths
        nz = np.flatnonzero(c_sig)
        parts.append((c_sig[nz], c_len[nz], np.full(len(nz), sv, dtype=np.int64), nz))
    return parts


def _shortest_per_signature(arrays):
    order = np.lexsort((arrays[3], arrays[2], arrays[1], arrays[0]))
    csig = arrays[0][order]
    first = np.ones(len(csig), dtype=bool)
    first[1:] = csig[1:] != csig[:-1]
    return tuple(a[order][first] for a in arrays)


def _scan_candidates(s, sources=None, batch=64, jobs=1):
    """Shortest cycle per signature among tight candidates.

    For every source and every edge ``uw``, the closed walk made of the two
    shortest-path-tree paths to ``u`` and ``w`` plus the edge is a candidate.
    Returns sorted arrays ``(sig, length, source, edge)`` with one row per
    distinct nonzero signature.  Batches of sources run on ``jobs`` threads;
    the reduction is order independent, so results do not depend on it.
    """
    key = ("candidates", None if sources is None else tuple(sources))
    if key in s._cache:
        return s._cache[key]
    g = geodesic.edge_graph(s)
    edge_signatures(s)
    src = np.arange(s.n_vertices) if sources is None else np.asarray(list(sources), dtype=np.int64)
    batches = [src[lo:lo + batch] for lo in range(0, len(src), batch)]

    def one(idx):
        parts = _scan_batch(s, g, idx)
        return _shortest_per_signature([np.concatenate([t[i] for t in parts]) for i in range(4)])

    if jobs > 1:
        with ThreadPoolExecutor(jobs) as ex:
            tabs = list(ex.map(one, batches))
    else:
        tabs = [one(b) for b in batches]
    tab = _shortest_per_signature([np.concatenate([t[i] for t in tabs]) for i in range(4)])
    s._cache[key] = tab
    return tab


def _reconstruct(s, source, edge):
    g = geodesic.edge_graph(s)
    _, pred = dijkstra(g, directed=True, indices=int(source), return_predecessors=True)
    u, w = (int(x) for x in s.edges[edge])
    pu = _tree_path(pred, u)
    pw = _tree_path(pred, w)
    c = 0
    while c < min(len(pu), len(pw)) and pu[c] == pw[c]:
        c += 1
    # pu[c-1] is the last common vertex
    cyc = pu[c - 1:] + pw[c - 1:][::-1][:-1]
    return cycle_from_vertices(s, cyc)


def systole(s, sources=None, jobs=1):
    """Shortest homologically nontrivial cycle of the edge graph."""
    if s.genus == 0:
        raise ValueError("a sphere has no nontrivial cycles")
    csig, clen, csrc, cedge = _scan_candidates(s, sources, jobs=jobs)
    i = int(np.lexsort((cedge, csrc, clen))[0])
    return _reconstruct(s, csrc[i], cedge[i])


def _insert(pivots, x):
    """Reduce ``x`` against a pivot table; store it if independent."""
    x = int(x)
    for h in range(MAX_RANK - 1, -1, -1):
        if not (x >> h) & 1:
            continue
        if pivots[h]:
            x ^= pivots[h]
        else:
            pivots[h] = x
            return True
    return False


def greedy_minimal_basis(s, sources=None, jobs=1):
    """Shortest cycle independent of those already chosen, ``2G`` times."""
    G2 = 2 * s.genus
    if G2 == 0:
        return CycleBasis((), np.zeros((0, 0), dtype=np.int64), 0, 0, "greedy", ("genus 0: empty basis",))
    csig, clen, csrc, cedge = _scan_candidates(s, sources, jobs=jobs)
    order = np.lexsort((cedge, csrc, clen))
    pivots = [0] * MAX_RANK
    chosen = []
    for i in order.tolist():
        if _insert(pivots, csig[i]):
            chosen.append(_reconstruct(s, csrc[i], cedge[i]))
            if len(chosen) == G2:
                break
    M = intersection_matrix(s, chosen)
    return CycleBasis(tuple(chosen), M, len(chosen), s.genus, "greedy")


def homology_basis(s):
    """Fundamental cycles of the leftover tree-cotree edges."""
    if s.genus == 0:
        return CycleBasis((), np.zeros((0, 0), dtype=np.int64), 0, 0, "tree-cotree", ("genus 0: empty basis",))
    sig, leftover = edge_signatures(s)
    # the tree whose edges carry signature zero, so cycle i has signature 1 << i
    pred = s._cache["signature_tree"]
    cycles = []
    for e in leftover.tolist():
        u, w = (int(x) for x in s.edges[e])
        cycles.append(_fundamental(s, pred, u, w))
    M = intersection_matrix(s, cycles)
    return CycleBasis(tuple(cycles), M, _rank([c.signature for c in cycles]), s.genus, "tree-cotree")


def _fundamental(s, pred, u, w):
    pu = _tree_path(pred, u)
    pw = _tree_path(pred, w)
    c = 0
    while c < min(len(pu), len(pw)) and pu[c] == pw[c]:
        c += 1
    return cycle_from_vertices(s, pu[c - 1:] + pw[c - 1:][::-1][:-1])


def _rank(sigs):
    pivots = [0] * MAX_RANK
    return sum(_insert(pivots, x) for x in sigs)


# intersections --------------------------------------------------------------------

def intersection_mod2(s, c1, c2):
    """Parity of crossings between ``c1`` and a left push-off of ``c2``.

    At each visit of ``c2`` to a vertex, the push-off crosses the edges that
    leave the vertex strictly inside the counterclockwise wedge from the
    outgoing to the incoming edge.
    """
    v1 = list(c1.vertices if isinstance(c1, Cycle) else c1)
    v2 = list(c2.vertices if isinstance(c2, Cycle) else c2)
    rot = s.rotation
    crossed = {}
    m = len(v2)
    for i, v in enumerate(v2):
        a = v2[i - 1]
        b = v2[(i + 1) % m]
        u = rot[(v, b)]
        guard = 0
        while u != a:
            key = (min(v, u), max(v, u))
            crossed[key] = crossed.get(key, 0) ^ 1
            u = rot[(v, u)]
            guard += 1
            if guard > 10_000:
                raise RuntimeError("rotation system is inconsistent")
    total = 0
    n1 = len(v1)
    for i, x in enumerate(v1):
        y = v1[(i + 1) % n1]
        total ^= crossed.get((min(x, y), max(x, y)), 0)
    return total


def intersection_matrix(s, cycles):
    k = len(cycles)
    M = np.zeros((k, k), dtype=np.int64)
    for i in range(k):
        for j in range(i + 1, k):
            M[i, j] = M[j, i] = intersection_mod2(s, cycles[i], cycles[j])
    return M


def _form_rows(s):
    """Intersection form in signature coordinates, rows as bitmasks."""
    if "form" in s._cache:
        return s._cache["form"]
    sig, leftover = edge_signatures(s)
    basis = homology_basis(s)
    G2 = len(leftover)
    # express basis signatures -> coordinates: B has rows = basis signatures
    B = np.array([[(c.signature >> j) & 1 for j in range(G2)] for c in basis.cycles], dtype=np.int64)
    Binv = _gf2_inverse(B)
    # form on coordinates x: x^T (Binv^T M Binv) y, with x = sig bits
    Q = (Binv.T @ basis.intersection @ Binv) % 2
    rows = np.array([sum(int(Q[i, j]) << j for j in range(G2)) for i in range(G2)], dtype=np.uint64)
    s._cache["form"] = (Q, rows)
    return Q, rows


def _gf2_inverse(A):
    n = len(A)
    M = np.concatenate([A % 2, np.eye(n, dtype=np.int64)], axis=1)
    r = 0
    for c in range(n):
        piv = next((i for i in range(r, n) if M[i, c]), None)
        if piv is None:
            raise ValueError("basis signatures are dependent")
        M[[r, piv]] = M[[piv, r]]
        for i in range(n):
            if i != r and M[i, c]:
                M[i] ^= M[r]
        r += 1
    return M[:, n:]


def pairing(s, sig1, sig2):
    """Mod-2 intersection number of two classes given by signatures."""
    Q, _ = _form_rows(s)
    G2 = len(Q)
    x = np.array([(int(sig1) >> i) & 1 for i in range(G2)])
    y = np.array([(int(sig2) >> i) & 1 for i in range(G2)])
    return int(x @ Q @ y) % 2


# planarity ------------------------------------------------------------------------

def planarity_radius(s, centers=None):
    """Smallest ball radius at which some ball carries two oddly crossing cycles.

    For every center the ball grows through the vertices in order of
    distance; edges join when both endpoints are inside.  The radius is exact
    for the ball subgraphs (no bisection needed).
    """
    if s.genus == 0:
        return PlanarityReport(math.inf, -1, (), "genus 0: every ball is planar")
    sig, _ = edge_signatures(s)
    _, rows = _form_rows(s)
    E = s.edges
    cand = np.arange(s.n_vertices) if centers is None else np.asarray(list(centers), dtype=np.int64)
    best = (math.inf, -1, ())
    for lo in range(0, len(cand), 64):
        idx = cand[lo:lo + 64]
        D = geodesic.distance_rows(s, idx)
        for c, d in zip(idx.tolist(), D):
            enter = np.maximum(d[E[:, 0]], d[E[:, 1]])
            order = np.argsort(enter, kind="stable")
            k = planarity_sweep(E[order, 0], E[order, 1], sig[order], s.n_vertices, rows)
            if k >= 0 and enter[order[k]] < best[0]:
                e = int(order[k])
                best = (float(enter[e]), int(c), tuple(int(x) for x in E[e]))
    return PlanarityReport(best[0], best[1], best[2],
                           "incremental union-find sweep over balls of the metric graph")


# straightness ---------------------------------------------------------------------

def straightness_audit(s, basis, samples=64, rtol=None, seed=0):
    """Compare arc distance along each cycle with the surface distance.

    Returns one record per cycle: the largest relative gap over sampled
    vertex pairs and whether it is within ``rtol`` (default: the distance
    tolerance of the mesh).
    """
    rng = np.random.default_rng(seed)
    if rtol is None:
        rtol = geodesic.distance_tolerance(s)[0]
    g = geodesic.edge_graph(s)
    out = []
    for c in basis.cycles:
        vs = np.array(c.vertices)
        m = len(vs)
        L = np.array([s.edge_lengths[e] for e in c.edges])
        pos = np.concatenate([[0.0], np.cumsum(L)])[:-1]
        total = c.length
        k = min(samples, m)
        pick = np.unique(rng.choice(m, size=k, replace=False))
        D = dijkstra(g, directed=True, indices=vs[pick])
        worst = 0.0
        pair = None
        for a, row in zip(pick.tolist(), D):
            arc = np.abs(pos - pos[a])
            arc = np.minimum(arc, total - arc)
            gap = (arc - row[vs]) / np.maximum(arc, 1e-300)
            gap[arc == 0] = 0.0
            j = int(np.argmax(gap))
            if gap[j] > worst:
                worst = float(gap[j])
                pair = (int(vs[a]), int(vs[j]))
        out.append({"length": c.length, "max_relative_gap": worst, "pair": pair, "straight": worst <= rtol})
    return out
