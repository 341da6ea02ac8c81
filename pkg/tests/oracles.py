"""Slow, independent reference computations used by the tests.

Nothing here imports the package's homology or level-set code; the oracles
work from the raw triangle list and scipy shortest paths.
"""
import math

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import dijkstra


def edge_table(s):
    """Dict (u, v) -> edge id with u < v, built from the triangles."""
    keys = {}
    for t in s.triangles.tolist():
        for a, b in ((t[0], t[1]), (t[1], t[2]), (t[2], t[0])):
            k = (min(a, b), max(a, b))
            if k not in keys:
                keys[k] = None
    table = {}
    for i, (u, v) in enumerate(s.edges.tolist()):
        table[(u, v)] = i
    assert set(keys) == set(table)
    return table


def plain_edge_graph(s):
    n = s.n_vertices
    u, v = s.edges[:, 0], s.edges[:, 1]
    w = s.edge_lengths
    return coo_matrix((np.r_[w, w], (np.r_[u, v], np.r_[v, u])), shape=(n, n)).tocsr()


# mod-2 homology ----------------------------------------------------------------

class BoundarySpace:
    """Row-reduced span of the triangle boundaries over GF(2), as int bitsets."""

    def __init__(self, s):
        self.table = edge_table(s)
        self.pivots = {}
        for t in s.triangles.tolist():
            self._add(self._mask([(t[0], t[1]), (t[1], t[2]), (t[2], t[0])]))

    def _mask(self, pairs):
        m = 0
        for a, b in pairs:
            m ^= 1 << self.table[(min(a, b), max(a, b))]
        return m

    def _reduce(self, x):
        while x:
            top = x.bit_length() - 1
            if top not in self.pivots:
                return x
            x ^= self.pivots[top]
        return 0

    def _add(self, x):
        x = self._reduce(x)
        if x:
            self.pivots[x.bit_length() - 1] = x

    @property
    def rank(self):
        return len(self.pivots)

    def is_boundary(self, cycle_vertices):
        vs = list(cycle_vertices)
        return self._reduce(self._mask(zip(vs, vs[1:] + vs[:1]))) == 0

    def independent_mod_boundaries(self, cycles):
        """Rank of the cycles' classes in H1 = Z / B."""
        sp = BoundarySpace.__new__(BoundarySpace)
        sp.table, sp.pivots = self.table, dict(self.pivots)
        base = sp.rank
        for c in cycles:
            vs = list(c)
            sp._add(sp._mask(zip(vs, vs[1:] + vs[:1])))
        return sp.rank - base


def simple_cycles(s, cap):
    """Every simple cycle of the edge graph with length <= cap (each once).

    Depth-first search from each start vertex through larger vertex ids only,
    and each cycle is kept in one direction.
    """
    nbr = [[] for _ in range(s.n_vertices)]
    for (u, v), L in zip(s.edges.tolist(), s.edge_lengths.tolist()):
        nbr[u].append((v, L))
        nbr[v].append((u, L))
    eps = 1e-12 * max(cap, 1.0)
    out = []
    for start in range(s.n_vertices):
        path = [start]
        on = {start}

        def dfs(v, length):
            for w, L in nbr[v]:
                if length + L > cap + eps:
                    continue
                if w == start and len(path) >= 3 and path[1] < path[-1]:
                    out.append((length + L, list(path)))
                elif w > start and w not in on:
                    path.append(w)
                    on.add(w)
                    dfs(w, length + L)
                    path.pop()
                    on.discard(w)

        dfs(start, 0.0)
    return out


def cycle_length(s, cyc):
    # correctly rounded, so equal multisets of edges give equal floats
    return math.fsum(s.edge_lengths[s.edge_index(a, b)] for a, b in zip(cyc, cyc[1:] + cyc[:1]))


def brute_force_systole(s, cap):
    """Shortest simple cycle of length <= cap that bounds no 2-chain."""
    bs = BoundarySpace(s)
    best, arg = math.inf, None
    for _, cyc in simple_cycles(s, cap):
        L = cycle_length(s, cyc)
        if L < best and not bs.is_boundary(cyc):
            best, arg = L, cyc
    return best, arg


# level sets --------------------------------------------------------------------

def level_components(s, d, R):
    """Components of {d = R} for R off the vertex values.

    Crossed edges sharing a triangle are joined with union-find.  Returns a
    list of point lists ``(lo, hi, t)`` with ``d(lo) < R < d(hi)``.
    """
    E = s.edges
    crossed = {}
    for i, (u, v) in enumerate(E.tolist()):
        if min(d[u], d[v]) < R < max(d[u], d[v]):
            crossed[i] = len(crossed)
    parent = list(range(len(crossed)))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for tri in s.triangle_edges.tolist():
        hit = [crossed[e] for e in tri if e in crossed]
        for a in hit[1:]:
            parent[find(a)] = find(hit[0])
    groups = {}
    for e, k in crossed.items():
        u, v = E[e]
        lo, hi = (u, v) if d[u] < d[v] else (v, u)
        t = (R - d[lo]) / (d[hi] - d[lo])
        groups.setdefault(find(k), []).append((int(lo), int(hi), float(t)))
    return list(groups.values())


def points_diameter(s, graph, pts):
    """Ambient diameter of edge points via full Dijkstra rows from endpoints."""
    verts = sorted({p[0] for p in pts} | {p[1] for p in pts})
    rows = dijkstra(graph, directed=False, indices=verts)
    col = np.full(s.n_vertices, -1)
    col[verts] = np.arange(len(verts))
    a = np.array([p[0] for p in pts])
    b = np.array([p[1] for p in pts])
    L = np.array([s.edge_lengths[s.edge_index(u, v)] for u, v, _ in pts])
    ta = np.array([p[2] for p in pts]) * L
    tb = L - ta
    best = 0.0
    for i in range(len(pts)):
        to_v = np.minimum(ta[i] + rows[col[a[i]]], tb[i] + rows[col[b[i]]])
        dj = np.minimum(to_v[a] + ta, to_v[b] + tb)
        same = (a == a[i]) & (b == b[i])
        dj[same] = np.minimum(dj[same], np.abs(ta[same] - ta[i]))
        best = max(best, float(dj.max()))
    return best
