"""Discrete Birkhoff curve shortening and a sweepout search for short geodesics.

A closed curve is a cyclic list of anchor vertices joined by shortest paths
of the metric graph.  One pass resamples the anchors evenly, reconnects them,
then replaces the curve by shortest paths between consecutive segment
midpoints.  Every step replaces a stretch of curve by a path that is no
longer, so the length never increases.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse.csgraph import dijkstra

from . import geodesic
from .levelset import _Sweep, _field_of, reeb_graph

__all__ = [
    "CONVERGED",
    "COLLAPSED",
    "ITER_LIMIT",
    "CurveState",
    "ShortenResult",
    "SweepoutResult",
    "curve_from_vertices",
    "default_angle_tol",
    "level_seeds",
    "shorten_curve",
    "sweepout_search",
    "turning_deviation",
]

CONVERGED = "converged_geodesic"
COLLAPSED = "collapsed_point"
ITER_LIMIT = "iter_limit"


@dataclass(frozen=True)
class CurveState:
    """Closed curve: ``path`` is the full vertex cycle, ``anchors`` the
    resampling points, ``length`` the metric-graph length."""

    anchors: tuple
    path: tuple
    length: float
    iterations: int = 0

    def to_obj(self, s):
        if s.positions is None:
            raise ValueError("surface has no positions")
        P = s.positions[list(self.path)]
        lines = [f"v {x:.17g} {y:.17g} {z:.17g}" for x, y, z in P]
        n = len(P)
        lines.append("l " + " ".join(str(i + 1) for i in range(n)) + " 1")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class ShortenResult:
    curve: CurveState
    outcome: str
    history: tuple
    turning_deviation: float

    @property
    def monotone(self):
        return all(b <= a for a, b in zip(self.history, self.history[1:]))

    def as_dict(self):
        return {
            "outcome": self.outcome,
            "length": self.curve.length,
            "iterations": self.curve.iterations,
            "seed_length": self.history[0],
            "turning_deviation": self.turning_deviation,
            "monotone": self.monotone,
        }


@dataclass(frozen=True)
class SweepoutResult:
    best: ShortenResult | None
    table: list = field(default_factory=list)
    basepoint: int = -1

    @property
    def length(self):
        return math.inf if self.best is None else self.best.curve.length

    def as_dict(self):
        return {
            "basepoint": self.basepoint,
            "length": None if self.best is None else self.length,
            "outcome": None if self.best is None else self.best.outcome,
            "seeds": self.table,
        }


# paths -----------------------------------------------------------------------------

def _walk(pred, src, dst):
    out = [dst]
    while out[-1] != src:
        p = pred[out[-1]]
        if p < 0:
            raise RuntimeError("vertex unreachable from anchor")
        out.append(int(p))
    return out[::-1]


def _connect(g, anchors, limit):
    """Shortest paths between consecutive anchors, as one closed vertex cycle.

    Returns ``(path, cum, lengths)``: ``cum[i]`` is the arc position of
    ``path[i]`` and ``lengths`` the per-segment lengths.
    """
    m = len(anchors)
    src = np.asarray(anchors, dtype=np.int64)
    uniq, inv = np.unique(src, return_inverse=True)
    d, pred = dijkstra(g, directed=True, indices=uniq, limit=limit, return_predecessors=True)
    path, cum, seg = [], [], []
    pos = 0.0
    for i in range(m):
        a, b = int(src[i]), int(src[(i + 1) % m])
        row, prow = d[inv[i]], pred[inv[i]]
        lim = limit
        while not np.isfinite(row[b]):
            lim *= 4
            row, prow = dijkstra(g, directed=True, indices=a, limit=lim, return_predecessors=True)
        p = _walk(prow, a, b)
        for v in p[:-1]:
            path.append(v)
            cum.append(pos + row[v])
        seg.append(float(row[b]))
        pos += row[b]
    return path, np.asarray(cum), seg


def _resample(path, cum, total, m):
    """``m`` anchors at roughly even arc spacing along a closed path.

    Returns the anchor vertices and their indices into ``path``.
    """
    if total <= 0:
        return [path[0]], [0]
    targets = np.arange(m) * (total / m)
    idx = np.searchsorted(cum, targets, side="left")
    idx = np.clip(idx, 0, len(path) - 1)
    prev = np.clip(idx - 1, 0, len(path) - 1)
    pick = np.where(np.abs(cum[prev] - targets) < np.abs(cum[idx] - targets), prev, idx)
    return _dedupe(path, pick.tolist())


def _dedupe(path, picks):
    out, pos = [], []
    for i in picks:
        v = path[i]
        if not out or out[-1] != v:
            out.append(v)
            pos.append(i)
    if len(out) > 1 and out[0] == out[-1]:
        out.pop()
        pos.pop()
    return out, pos


def _arc_limit(cum, total, pos):
    """Longest arc between consecutive picks: no shortest segment is longer."""
    c = np.asarray(cum)[pos]
    gaps = np.diff(np.concatenate([c, [c[0] + total]]))
    return float(gaps.max()) * (1 + 1e-9) + 1e-12


def curve_from_vertices(s, vertices):
    """Close a vertex sequence into a curve of shortest segments."""
    vs = [int(v) for v in vertices]
    vs = [v for i, v in enumerate(vs) if v != vs[i - 1]] or vs[:1]
    g = geodesic.metric_graph(s)
    if len(vs) < 2:
        return CurveState((vs[0],), (vs[0],), 0.0, 0)
    path, cum, seg = _connect(g, vs, float(s.edge_lengths.max()) * (1 + 1e-9))
    return CurveState(tuple(vs), tuple(path), float(sum(seg)), 0)


# shortening ------------------------------------------------------------------------

def turning_deviation(s, curve, spacing=None):
    """Largest gap between pi and the comparison-triangle angle at an anchor.

    The angle at ``x`` between its neighbours ``a`` and ``b`` is the angle
    of the flat triangle with side lengths ``d(a,x)``, ``d(x,b)``, ``d(a,b)``.
    """
    g = geodesic.metric_graph(s)
    A = list(curve.anchors)
    lim = np.inf
    if spacing is not None and curve.length > 0:
        lim = 3.0 * spacing + 4 * float(s.edge_lengths.max())
        path, cum, _ = _connect(g, A, lim)
        A, _ = _resample(path, cum, curve.length, max(3, int(math.ceil(curve.length / spacing))))
    m = len(A)
    if m < 3:
        return math.pi
    uniq, inv = np.unique(A, return_inverse=True)
    D = dijkstra(g, directed=True, indices=uniq, limit=lim)
    worst = 0.0
    for i in range(m):
        a, x, b = A[i - 1], A[i], A[(i + 1) % m]
        p = D[inv[i]][a]
        q = D[inv[i]][b]
        r = D[inv[i - 1]][b]
        if not np.isfinite(r):
            r = float(dijkstra(g, directed=True, indices=a)[b])
        if p <= 0 or q <= 0:
            return math.pi
        c = (p * p + q * q - r * r) / (2 * p * q)
        ang = math.acos(min(1.0, max(-1.0, c)))
        worst = max(worst, math.pi - ang)
    return worst


def default_angle_tol(s):
    """Turning tolerance matched to the metric graph's accuracy.

    A relative distance error ``rel`` on the sides of a nearly degenerate
    comparison triangle moves its angle by about ``sqrt(2 rel)``.
    """
    rel = geodesic.distance_tolerance(s)[0]
    return max(0.25, math.sqrt(2 * rel))


def _scales(spacing, L):
    sp = spacing
    while sp < L / 6:
        yield sp
        sp *= 2
    yield L / 6


def shorten_curve(s, c, max_iters=200, tol=1e-3, spacing=None, collapse_length=None, angle_tol=None):
    """Run Birkhoff passes until the length stalls, collapses, or time runs out.

    ``spacing`` is the target anchor spacing (default six longest edges).
    A pass that shortens the curve by less than ``tol`` times its length is
    a stall.  A stalled curve is converged when its turning deviation, checked
    at every doubling of the spacing up to a sixth of its length, is at most
    ``angle_tol`` (default :func:`default_angle_tol`).  Otherwise it is
    collapsed if shorter than ``collapse_length`` (default twelve longest
    edges), and is shortened further with doubled spacing while segments
    stay under a third of it.
    """
    h = float(s.edge_lengths.max())
    spacing = 6 * h if spacing is None else float(spacing)
    collapse_length = 12 * h if collapse_length is None else float(collapse_length)
    if angle_tol is None:
        angle_tol = default_angle_tol(s)
    dev = math.nan
    g = geodesic.metric_graph(s)
    path, cum, seg = _connect(g, list(c.anchors), h * (1 + 1e-9))
    L = float(sum(seg))
    history = [L]
    outcome = ITER_LIMIT
    it = 0
    anchors = list(c.anchors)
    while it < max_iters:
        if len(set(path)) < 3:
            outcome = COLLAPSED
            break
        it += 1
        m = max(3, int(math.ceil(L / spacing)))
        anchors, pos = _resample(path, cum, L, m)
        if len(anchors) < 3:
            outcome = COLLAPSED
            break
        p1, c1, s1 = _connect(g, anchors, _arc_limit(cum, L, pos))
        L1 = float(sum(s1))
        # midpoints of each segment
        starts = np.concatenate([[0.0], np.cumsum(s1)[:-1]])
        picks = [int(np.argmin(np.abs(c1 - (a + 0.5 * b)))) for a, b in zip(starts, s1)]
        mids, pos = _dedupe(p1, picks)
        if len(mids) < 3:
            path, cum, L = p1, c1, min(L1, L)
            history.append(L)
            outcome = COLLAPSED
            break
        p2, c2, s2 = _connect(g, mids, _arc_limit(c1, L1, pos))
        L2 = float(sum(s2))
        if L2 <= L1:
            path, cum, anchors = p2, c2, mids
        else:
            path, cum, L2 = p1, c1, L1
        L2 = min(L2, L)
        history.append(L2)
        done = (L - L2) < tol * L2
        L = L2
        if not done:
            continue
        cur = CurveState(tuple(anchors), tuple(path), L, it)
        dev = max(turning_deviation(s, cur, sp) for sp in _scales(spacing, L))
        if dev <= angle_tol:
            outcome = CONVERGED
            break
        if L < collapse_length:
            outcome = COLLAPSED
            break
        # bent but stuck: longer segments move the midpoints further than
        # the vertex spacing, until segments reach a third of the curve
        if 2 * spacing > L / 3:
            break
        spacing *= 2
    state = CurveState(tuple(anchors), tuple(path), L, it)
    return ShortenResult(state, outcome, tuple(history), dev)


# seeds -----------------------------------------------------------------------------

def level_seeds(s, field, levels=16, reeb=True):
    """Closed vertex walks hugging level-set components.

    Each component of ``{d = R}`` becomes the cycle of lower endpoints of
    its crossed edges.  Radii are the midpoints of every Reeb arc plus
    ``levels`` evenly spaced values.
    """
    fld = _field_of(s, field)
    d = fld.dist
    sw = _Sweep(s, d)
    n = s.n_vertices
    ks = set()
    if levels:
        for R in np.linspace(0, d.max(), levels + 2)[1:-1]:
            k = int(np.searchsorted(d[sw.order], R, side="right")) - 1
            ks.add(min(max(k, 0), n - 2))
    if reeb:
        for a in reeb_graph(s, fld).arcs:
            ks.add((a["first_interval"] + a["last_interval"]) // 2)
    seeds = []
    for k in sorted(ks):
        for cyc in sw.components_at(k):
            lo = sw.lo[np.asarray(cyc, dtype=np.int64)].tolist()
            walk = [v for i, v in enumerate(lo) if v != lo[i - 1]]
            if len(walk) >= 3:
                seeds.append((k, walk))
    return seeds


def _farthest_points(s, first, k):
    pts = [first]
    near = geodesic.distance_field(s, first).dist.copy()
    for _ in range(k):
        v = int(np.argmax(near))
        pts.append(v)
        near = np.minimum(near, geodesic.distance_field(s, v).dist)
    return pts


def sweepout_search(s, field, params=None):
    """Shorten every level-set seed and keep the shortest converged curve.

    ``params`` keys: ``levels``, ``max_iters``, ``tol``, ``spacing``,
    ``collapse_length``, ``angle_tol``, ``jobs`` and ``extra_basepoints``
    (farthest-point basepoints whose level sets are seeded as well).
    """
    params = dict(params or {})
    fld = _field_of(s, field)
    bases = _farthest_points(s, fld.source, int(params.get("extra_basepoints", 0)))
    seeds = []
    for b in bases:
        f = fld if b == fld.source else b
        # Reeb arcs for the main field only; the rest use evenly spaced levels
        seeds.extend((b, k, w) for k, w in level_seeds(s, f, params.get("levels", 16), reeb=b == fld.source))
    kw = {k: params[k] for k in ("max_iters", "tol", "spacing", "collapse_length", "angle_tol") if k in params}

    def run(seed):
        return shorten_curve(s, curve_from_vertices(s, seed[2]), **kw)

    jobs = int(params.get("jobs", 1))
    if jobs > 1:
        with ThreadPoolExecutor(jobs) as ex:
            results = list(ex.map(run, seeds))
    else:
        results = [run(x) for x in seeds]
    table = []
    best = None
    for (b, k, _), r in zip(seeds, results):
        row = r.as_dict()
        row["basepoint"] = b
        row["interval"] = k
        table.append(row)
        if r.outcome == CONVERGED and (best is None or r.curve.length < best.curve.length):
            best = r
    return SweepoutResult(best, table, fld.source)
