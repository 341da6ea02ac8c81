"""Hot loops, compiled with numba when available.

Set ``LIPSPHERE_NO_NUMBA=1`` to force the numpy/pure-python fallbacks.  Both
paths return identical results; ``benchmarks/bench_kernels.py`` times them.
"""
from __future__ import annotations

import os

import numpy as np

__all__ = ["USE_NUMBA", "component_diameter", "tree_xor", "planarity_sweep", "backend"]

USE_NUMBA = os.environ.get("LIPSPHERE_NO_NUMBA", "").strip() not in ("1", "true", "yes")
if USE_NUMBA:
    try:
        from numba import njit
    except ImportError:  # pragma: no cover - numba is a declared dependency
        USE_NUMBA = False


def backend():
    return "numba" if USE_NUMBA else "numpy"


# component diameter --------------------------------------------------------
#
# A point on edge (a, b) sits at distance ta from a and tb from b.  The
# distance between two such points is the min over endpoint combinations of
# ta + d(a, a') + ta', except on a shared edge where |ta - ta'| also counts.

def _diameter_numpy(rows, slot, a, b, ta, tb):
    k = len(a)
    if k < 2:
        return 0.0, 0, 0
    best, bi, bj = -1.0, 0, 0
    sa, sb = slot[a], slot[b]
    # chunked over the first index to bound memory
    step = max(1, 2_000_000 // k)
    for lo in range(0, k, step):
        hi = min(k, lo + step)
        d_aa = rows[sa[lo:hi]][:, a]
        d_ab = rows[sa[lo:hi]][:, b]
        d_ba = rows[sb[lo:hi]][:, a]
        d_bb = rows[sb[lo:hi]][:, b]
        t1 = ta[lo:hi, None]
        t2 = tb[lo:hi, None]
        d = np.minimum(
            np.minimum(t1 + d_aa + ta[None, :], t1 + d_ab + tb[None, :]),
            np.minimum(t2 + d_ba + ta[None, :], t2 + d_bb + tb[None, :]),
        )
        same = (a[lo:hi, None] == a[None, :]) & (b[lo:hi, None] == b[None, :])
        d = np.where(same, np.abs(t1 - ta[None, :]), d)
        # upper triangle only, matching the compiled loop's tie-breaking
        d = np.where(np.arange(lo, hi)[:, None] < np.arange(k)[None, :], d, -1.0)
        idx = int(np.argmax(d))
        val = float(d.flat[idx])
        if val > best:
            best = val
            bi, bj = lo + idx // k, idx % k
    return best, bi, bj


if USE_NUMBA:

    @njit(cache=True)
    def _diameter_jit(rows, slot, a, b, ta, tb):
        k = a.shape[0]
        best = 0.0
        bi = 0
        bj = 0
        for i in range(k):
            ra = slot[a[i]]
            rb = slot[b[i]]
            for j in range(i + 1, k):
                if a[i] == a[j] and b[i] == b[j]:
                    d = abs(ta[i] - ta[j])
                else:
                    d = ta[i] + rows[ra, a[j]] + ta[j]
                    x = ta[i] + rows[ra, b[j]] + tb[j]
                    if x < d:
                        d = x
                    x = tb[i] + rows[rb, a[j]] + ta[j]
                    if x < d:
                        d = x
                    x = tb[i] + rows[rb, b[j]] + tb[j]
                    if x < d:
                        d = x
                if d > best:
                    best = d
                    bi = i
                    bj = j
        return best, bi, bj


def component_diameter(rows, slot, a, b, ta, tb):
    """Diameter of a set of edge points, with the index pair attaining it.

    ``rows[slot[v]]`` is the distance row of vertex ``v``; every endpoint in
    ``a`` and ``b`` must have a row.
    """
    a = np.ascontiguousarray(a, dtype=np.int64)
    b = np.ascontiguousarray(b, dtype=np.int64)
    ta = np.ascontiguousarray(ta, dtype=np.float64)
    tb = np.ascontiguousarray(tb, dtype=np.float64)
    if len(a) < 2:
        return 0.0, 0, 0
    if USE_NUMBA:
        d, i, j = _diameter_jit(rows, slot, a, b, ta, tb)
        return float(d), int(i), int(j)
    return _diameter_numpy(rows, slot, a, b, ta, tb)


# xor accumulation along a rooted tree ---------------------------------------

def _tree_xor_numpy(pred, edge_sig):
    # pointer doubling: acc[v] = xor of edge_sig over the path v -> root
    acc = edge_sig.copy()
    anc = pred.copy()
    live = anc >= 0
    while live.any():
        idx = np.flatnonzero(live)
        acc[idx] ^= acc[anc[idx]]
        anc[idx] = anc[anc[idx]]
        live = anc >= 0
    return acc


if USE_NUMBA:

    @njit(cache=True)
    def _tree_xor_jit(pred, edge_sig, order):
        acc = np.zeros(pred.shape[0], dtype=np.uint64)
        for v in order:
            p = pred[v]
            if p >= 0:
                acc[v] = acc[p] ^ edge_sig[v]
            else:
                acc[v] = edge_sig[v]
        return acc


def tree_xor(pred, edge_sig, order=None):
    """Xor of ``edge_sig`` along each vertex's path to the root of ``pred``.

    ``edge_sig[v]`` labels the tree edge ``(v, pred[v])`` (unused at roots).
    ``order`` must list parents before children when given; it lets the
    compiled path run in one pass.
    """
    pred = np.ascontiguousarray(pred, dtype=np.int64)
    edge_sig = np.ascontiguousarray(edge_sig, dtype=np.uint64).copy()
    edge_sig[pred < 0] = 0
    if USE_NUMBA and order is not None:
        return _tree_xor_jit(pred, edge_sig, np.ascontiguousarray(order, dtype=np.int64))
    return _tree_xor_numpy(pred, edge_sig)


# planarity sweep -------------------------------------------------------------
#
# Edges enter the ball in order of radius.  A union-find with xor potentials
# gives the homology signature of every cycle the new edge closes; the ball
# stops being planar at the first cycle that pairs oddly with an earlier one.

def _parity(x):
    x = int(x)
    return bin(x).count("1") & 1


def _planarity_python(eu, ev, esig, n, form_rows):
    parent = list(range(n))
    pot = [0] * n
    basis = [0] * 64

    def find(x):
        acc = 0
        path = []
        while parent[x] != x:
            path.append(x)
            acc ^= pot[x]
            x = parent[x]
        root = x
        # compress: recompute potentials relative to the root
        run = acc
        for y in path:
            old = pot[y]
            pot[y] = run
            parent[y] = root
            run ^= old
        return root, acc

    def form_image(s):
        out = 0
        i = 0
        while s:
            if s & 1:
                out ^= int(form_rows[i])
            s >>= 1
            i += 1
        return out

    for k in range(len(eu)):
        u, v, s = int(eu[k]), int(ev[k]), int(esig[k])
        ru, pu = find(u)
        rv, pv = find(v)
        if ru != rv:
            parent[ru] = rv
            pot[ru] = pu ^ pv ^ s
            continue
        c = pu ^ pv ^ s
        if c == 0:
            continue
        img = form_image(c)
        for b in basis:
            if b and _parity(img & b):
                return k
        # insert into the pivot table (slot h holds the element led by bit h)
        r = c
        for h in range(63, -1, -1):
            if not (r >> h) & 1:
                continue
            if basis[h]:
                r ^= basis[h]
            else:
                basis[h] = r
                break
    return -1


if USE_NUMBA:

    @njit(cache=True)
    def _popparity(x):
        p = 0
        while x:
            p ^= 1
            x &= x - np.uint64(1)
        return p

    @njit(cache=True)
    def _find(parent, pot, x):
        acc = np.uint64(0)
        y = x
        while parent[y] != y:
            acc ^= pot[y]
            y = parent[y]
        root = y
        run = acc
        y = x
        while parent[y] != y:
            nxt = parent[y]
            old = pot[y]
            pot[y] = run
            parent[y] = root
            run ^= old
            y = nxt
        return root, acc

    @njit(cache=True)
    def _planarity_jit(eu, ev, esig, n, form_rows):
        parent = np.arange(n)
        pot = np.zeros(n, dtype=np.uint64)
        basis = np.zeros(64, dtype=np.uint64)
        for k in range(eu.shape[0]):
            ru, pu = _find(parent, pot, eu[k])
            rv, pv = _find(parent, pot, ev[k])
            if ru != rv:
                parent[ru] = rv
                pot[ru] = pu ^ pv ^ esig[k]
                continue
            c = pu ^ pv ^ esig[k]
            if c == 0:
                continue
            img = np.uint64(0)
            s = c
            i = 0
            while s:
                if s & np.uint64(1):
                    img ^= form_rows[i]
                s >>= np.uint64(1)
                i += 1
            for t in range(64):
                if basis[t] and _popparity(img & basis[t]):
                    return k
            r = c
            for h in range(63, -1, -1):
                if not (r >> np.uint64(h)) & np.uint64(1):
                    continue
                if basis[h]:
                    r ^= basis[h]
                else:
                    basis[h] = r
                    break
        return -1


def planarity_sweep(eu, ev, esig, n, form_rows):
    """Index of the first edge at which the growing subgraph turns nonplanar.

    ``form_rows[i]`` is row ``i`` of the mod-2 intersection form as a bitmask.
    Returns -1 when the whole edge sequence stays planar.
    """
    eu = np.ascontiguousarray(eu, dtype=np.int64)
    ev = np.ascontiguousarray(ev, dtype=np.int64)
    esig = np.ascontiguousarray(esig, dtype=np.uint64)
    form_rows = np.ascontiguousarray(form_rows, dtype=np.uint64)
    if USE_NUMBA:
        return int(_planarity_jit(eu, ev, esig, int(n), form_rows))
    return _planarity_python(eu, ev, esig, int(n), form_rows)
