"""Closed oriented triangulated surfaces with an intrinsic edge-length metric.

The metric of a :class:`TriSurface` is its edge lengths.  Vertex positions are
optional provenance (generated meshes carry them, intrinsic constructions such
as flat tori do not).  Every triangle is modelled as a flat Euclidean triangle.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

__all__ = [
    "MeshParseError",
    "SurfaceInfo",
    "TopologyError",
    "TriSurface",
    "load_surface",
    "refine_surface",
    "save_surface",
    "scale_metric",
    "validate_surface",
]

_LENGTH_TAG = "lipsphere-length"
_PATCH_TAG = "lipsphere-patch"
_NOPOS_TAG = "lipsphere-no-positions"
_LEVEL_TAG = "lipsphere-refine-level"


class MeshParseError(ValueError):
    """Malformed OFF/OBJ input."""


class TopologyError(ValueError):
    """Input is not a closed, connected, oriented 2-manifold.

    ``simplex`` names the offending simplex, e.g. ``("edge", (3, 7))``.
    """

    def __init__(self, message, simplex=None):
        super().__init__(message)
        self.simplex = simplex


@dataclass(frozen=True)
class SurfaceInfo:
    n_vertices: int
    n_edges: int
    n_triangles: int
    euler_characteristic: int
    genus: int
    is_sphere: bool


def _edge_keys(pairs, n):
    pairs = np.asarray(pairs, dtype=np.int64)
    lo = np.minimum(pairs[:, 0], pairs[:, 1])
    hi = np.maximum(pairs[:, 0], pairs[:, 1])
    return lo * n + hi


class TriSurface:
    """Immutable closed oriented triangulated surface.

    Parameters
    ----------
    triangles : (F, 3) int array
        Consistently oriented vertex triples.
    edge_lengths : array, dict or None
        Lengths aligned with :attr:`edges`, or a mapping ``{(u, v): length}``.
        Computed from ``positions`` when omitted.
    positions : (V, 3) array or None
        Optional embedding.
    patches : tuple or None
        ``(points, coords)`` describing flat coarse faces of a refined surface;
        ``points`` is ``(P, m)`` vertex ids (first three are the corners) and
        ``coords`` the ``(P, m, 2)`` flat coordinates.  Set by
        :func:`refine_surface`.
    triangle_patch : (F,) int array or None
        Patch of each triangle.
    refine_level : int
        Number of 4-fold subdivisions applied since the coarse surface.
    """

    def __init__(self, triangles, edge_lengths=None, positions=None, patches=None,
                 triangle_patch=None, refine_level=0, validate=True):
        tri = np.ascontiguousarray(triangles, dtype=np.int64)
        if tri.ndim != 2 or tri.shape[1] != 3 or len(tri) == 0:
            raise TopologyError("triangles must be a non-empty (F, 3) array")
        n = int(tri.max()) + 1
        if tri.min() < 0:
            raise TopologyError("negative vertex index", ("triangle", int(np.argmin(tri.min(axis=1)))))
        if positions is not None:
            positions = np.array(positions, dtype=float)
            if positions.ndim != 2 or positions.shape[1] != 3:
                raise TopologyError("positions must be (V, 3)")
            if len(positions) < n:
                raise TopologyError("triangle references a missing vertex")
            n = len(positions)
        self.n_vertices = n
        self.triangles = tri
        self.positions = positions

        bad = (tri[:, 0] == tri[:, 1]) | (tri[:, 1] == tri[:, 2]) | (tri[:, 2] == tri[:, 0])
        if bad.any():
            i = int(np.flatnonzero(bad)[0])
            raise TopologyError(f"degenerate triangle {i}: {tri[i].tolist()}", ("triangle", i))

        directed = np.concatenate([tri[:, [0, 1]], tri[:, [1, 2]], tri[:, [2, 0]]])
        keys = _edge_keys(directed, n)
        ukeys, inverse, counts = np.unique(keys, return_inverse=True, return_counts=True)
        self.edges = np.stack([ukeys // n, ukeys % n], axis=1)
        f = len(tri)
        self.triangle_edges = inverse.reshape(3, f).T.copy()
        if validate:
            self._check_edges(directed, counts)
        order = np.argsort(inverse, kind="stable")
        corner_tri = order % f
        self.edge_triangles = corner_tri.reshape(-1, 2) if (counts == 2).all() else None

        if edge_lengths is None:
            if positions is None:
                raise ValueError("either edge_lengths or positions is required")
            lengths = np.linalg.norm(positions[self.edges[:, 0]] - positions[self.edges[:, 1]], axis=1)
        elif isinstance(edge_lengths, dict):
            lengths = np.empty(len(self.edges))
            lookup = {}
            for (u, v), val in edge_lengths.items():
                lookup[(min(u, v), max(u, v))] = float(val)
            for i, (u, v) in enumerate(self.edges):
                try:
                    lengths[i] = lookup[(int(u), int(v))]
                except KeyError:
                    raise ValueError(f"missing length for edge ({u}, {v})") from None
        else:
            lengths = np.array(edge_lengths, dtype=float)
            if lengths.shape != (len(self.edges),):
                raise ValueError("edge_lengths must align with the edge list")
        self.edge_lengths = lengths
        self.refine_level = int(refine_level)
        self.patches = patches
        self.triangle_patch = None if triangle_patch is None else np.asarray(triangle_patch, dtype=np.int64)
        for arr in (self.triangles, self.edges, self.triangle_edges, self.edge_lengths):
            arr.flags.writeable = False
        if self.positions is not None:
            self.positions.flags.writeable = False
        self._cache = {}
        if validate:
            self._check_vertices()
            self._check_metric()

    # construction helpers -------------------------------------------------

    @classmethod
    def from_edge_values(cls, triangles, pairs, values, **kw):
        """Build from an unordered list of ``pairs`` with matching ``values``."""
        tri = np.asarray(triangles, dtype=np.int64)
        n = int(tri.max()) + 1
        if kw.get("positions") is not None:
            n = max(n, len(kw["positions"]))
        keys = _edge_keys(pairs, n)
        order = np.argsort(keys)
        skeys = keys[order]
        svals = np.asarray(values, dtype=float)[order]
        directed = np.concatenate([tri[:, [0, 1]], tri[:, [1, 2]], tri[:, [2, 0]]])
        ukeys = np.unique(_edge_keys(directed, n))
        idx = np.searchsorted(skeys, ukeys)
        idx = np.clip(idx, 0, len(skeys) - 1)
        if not np.array_equal(skeys[idx], ukeys):
            raise ValueError("edge values do not cover every edge")
        return cls(tri, edge_lengths=svals[idx], **kw)

    # validation --------------------------------------------------------------

    def _check_edges(self, directed, counts):
        n = self.n_vertices
        if (counts == 1).any():
            k = int(np.flatnonzero(counts == 1)[0])
            e = tuple(int(x) for x in self.edges[k])
            raise TopologyError(f"boundary edge {e}: surface is not closed", ("edge", e))
        if (counts > 2).any():
            k = int(np.flatnonzero(counts > 2)[0])
            e = tuple(int(x) for x in self.edges[k])
            raise TopologyError(f"non-manifold edge {e} shared by {int(counts[k])} triangles", ("edge", e))
        dkeys = directed[:, 0] * n + directed[:, 1]
        u, c = np.unique(dkeys, return_counts=True)
        if (c > 1).any():
            k = int(u[np.flatnonzero(c > 1)[0]])
            e = (k // n, k % n)
            raise TopologyError(f"inconsistent orientation across edge {e}", ("edge", e))

    def _check_vertices(self):
        n = self.n_vertices
        tri = self.triangles
        used = np.zeros(n, dtype=bool)
        used[tri.ravel()] = True
        if not used.all():
            v = int(np.flatnonzero(~used)[0])
            raise TopologyError(f"isolated vertex {v}", ("vertex", v))
        # each vertex link must be a single cycle
        nxt = self.rotation
        first = np.empty(n, dtype=np.int64)
        first[tri[:, 0]] = tri[:, 1]
        first[tri[:, 1]] = tri[:, 2]
        first[tri[:, 2]] = tri[:, 0]
        deg = self.vertex_degree
        for v, start in enumerate(first.tolist()):
            count = 0
            u = start
            while True:
                u = nxt[(v, u)]
                count += 1
                if u == start or count > deg[v]:
                    break
            if count != deg[v]:
                raise TopologyError(f"non-manifold vertex {v} (pinched link)", ("vertex", v))
        ncomp, _ = connected_components(self.adjacency(), directed=False)
        if ncomp != 1:
            raise TopologyError(f"surface has {ncomp} connected components", ("surface", ncomp))

    def _check_metric(self):
        L = self.edge_lengths
        if not np.all(np.isfinite(L)) or (L <= 0).any():
            k = int(np.flatnonzero(~(np.isfinite(L) & (L > 0)))[0])
            raise TopologyError(f"edge {tuple(self.edges[k])} has non-positive length", ("edge", tuple(self.edges[k])))
        a, b, c = (L[self.triangle_edges[:, i]] for i in range(3))
        bad = (a >= b + c) | (b >= a + c) | (c >= a + b)
        if bad.any():
            i = int(np.flatnonzero(bad)[0])
            raise TopologyError(f"triangle {i} violates the triangle inequality", ("triangle", i))
        if self.positions is not None:
            P = self.positions
            d = np.linalg.norm(P[self.edges[:, 0]] - P[self.edges[:, 1]], axis=1)
            if not np.allclose(d, L, rtol=1e-9, atol=0.0):
                raise ValueError("edge lengths disagree with vertex positions")

    # derived structure ---------------------------------------------------------

    @property
    def n_edges(self):
        return len(self.edges)

    @property
    def n_triangles(self):
        return len(self.triangles)

    @property
    def euler_characteristic(self):
        return self.n_vertices - self.n_edges + self.n_triangles

    @property
    def genus(self):
        return (2 - self.euler_characteristic) // 2

    @property
    def vertex_degree(self):
        if "degree" not in self._cache:
            self._cache["degree"] = np.bincount(self.edges.ravel(), minlength=self.n_vertices)
        return self._cache["degree"]

    @property
    def rotation(self):
        """``{(v, u): w}``: the neighbour after ``u`` counter-clockwise around ``v``."""
        if "rotation" not in self._cache:
            rot = {}
            for a, b, c in self.triangles.tolist():
                rot[(a, b)] = c
                rot[(b, c)] = a
                rot[(c, a)] = b
            self._cache["rotation"] = rot
        return self._cache["rotation"]

    def adjacency(self, weights=None):
        """Symmetric CSR adjacency of the 1-skeleton weighted by edge length."""
        w = self.edge_lengths if weights is None else weights
        e = self.edges
        n = self.n_vertices
        return coo_matrix(
            (np.concatenate([w, w]), (np.concatenate([e[:, 0], e[:, 1]]), np.concatenate([e[:, 1], e[:, 0]]))),
            shape=(n, n),
        ).tocsr()

    def edge_index(self, u, v):
        """Index of the undirected edge ``uv`` (``KeyError`` if absent)."""
        if "edge_lookup" not in self._cache:
            self._cache["edge_lookup"] = {(int(a), int(b)): i for i, (a, b) in enumerate(self.edges)}
        a, b = (u, v) if u < v else (v, u)
        return self._cache["edge_lookup"][(int(a), int(b))]

    def corner_angles(self):
        """(F, 3) interior angles of the flat triangles at each corner."""
        L = self.edge_lengths
        te = self.triangle_edges
        # side k joins corner k and corner k+1; the side opposite corner k is k+1
        opp = np.stack([L[te[:, 1]], L[te[:, 2]], L[te[:, 0]]], axis=1)
        adj1 = np.stack([L[te[:, 0]], L[te[:, 1]], L[te[:, 2]]], axis=1)
        adj2 = np.stack([L[te[:, 2]], L[te[:, 0]], L[te[:, 1]]], axis=1)
        cos = (adj1**2 + adj2**2 - opp**2) / (2 * adj1 * adj2)
        return np.arccos(np.clip(cos, -1.0, 1.0))

    def info(self):
        return SurfaceInfo(
            n_vertices=self.n_vertices,
            n_edges=self.n_edges,
            n_triangles=self.n_triangles,
            euler_characteristic=self.euler_characteristic,
            genus=self.genus,
            is_sphere=self.genus == 0,
        )

    def __repr__(self):
        return (f"TriSurface(V={self.n_vertices}, E={self.n_edges}, F={self.n_triangles}, "
                f"genus={self.genus}, refine_level={self.refine_level})")


def validate_surface(s):
    """Re-check the manifold invariants of ``s`` and return its counts."""
    s._check_edges(
        np.concatenate([s.triangles[:, [0, 1]], s.triangles[:, [1, 2]], s.triangles[:, [2, 0]]]),
        np.bincount(s.triangle_edges.ravel(), minlength=s.n_edges),
    )
    s._check_vertices()
    s._check_metric()
    chi = s.euler_characteristic
    if chi % 2:
        raise TopologyError(f"odd Euler characteristic {chi}", ("surface", chi))
    return s.info()


def scale_metric(s, lam):
    """Multiply every edge length (and position) by ``lam``."""
    lam = float(lam)
    if not (lam > 0 and math.isfinite(lam)):
        raise ValueError(f"scale factor must be positive and finite, got {lam}")
    patches = None
    if s.patches is not None:
        patches = (s.patches[0], s.patches[1] * lam)
    out = TriSurface(
        s.triangles,
        edge_lengths=s.edge_lengths * lam,
        positions=None if s.positions is None else s.positions * lam,
        patches=patches,
        triangle_patch=s.triangle_patch,
        refine_level=s.refine_level,
        validate=False,
    )
    return out


def _triangle_coords(a, b, c):
    """Flat coordinates of a triangle with sides ab=c, bc=a, ca=b."""
    x = (c * c + b * b - a * a) / (2 * c)
    y = np.sqrt(np.maximum(b * b - x * x, 0.0))
    z = np.zeros_like(x)
    return np.stack([np.stack([z, z], -1), np.stack([c, z], -1), np.stack([x, y], -1)], axis=1)


def _initial_patches(s):
    L = s.edge_lengths
    te = s.triangle_edges
    coords = _triangle_coords(L[te[:, 1]], L[te[:, 2]], L[te[:, 0]])
    return (s.triangles.copy(), coords), np.arange(s.n_triangles)


def _refine_once(s):
    n = s.n_vertices
    tri = s.triangles
    te = s.triangle_edges
    E = s.edges
    L = s.edge_lengths
    mid = n + np.arange(len(E))
    a, b, c = tri[:, 0], tri[:, 1], tri[:, 2]
    mab, mbc, mca = mid[te[:, 0]], mid[te[:, 1]], mid[te[:, 2]]
    new_tri = np.stack([
        np.stack([a, mab, mca], 1),
        np.stack([b, mbc, mab], 1),
        np.stack([c, mca, mbc], 1),
        np.stack([mab, mbc, mca], 1),
    ], axis=1).reshape(-1, 3)
    lab, lbc, lca = L[te[:, 0]], L[te[:, 1]], L[te[:, 2]]
    pairs = np.concatenate([
        np.stack([E[:, 0], mid], 1), np.stack([E[:, 1], mid], 1),
        np.stack([mab, mbc], 1), np.stack([mbc, mca], 1), np.stack([mca, mab], 1),
    ])
    vals = np.concatenate([L / 2, L / 2, lca / 2, lab / 2, lbc / 2])
    positions = None
    if s.positions is not None:
        positions = np.concatenate([s.positions, 0.5 * (s.positions[E[:, 0]] + s.positions[E[:, 1]])])

    if s.patches is None:
        (points, coords), tpatch = _initial_patches(s)
    else:
        points, coords = s.patches
        tpatch = s.triangle_patch
    # extend every patch with the midpoints of its interior and boundary edges
    P, m = points.shape
    pos_in_patch = [dict(zip(points[p].tolist(), range(m))) for p in range(P)]
    patch_edges = [set() for _ in range(P)]
    for t in range(len(tri)):
        patch_edges[tpatch[t]].update(te[t].tolist())
    new_points = []
    new_coords = []
    for p in range(P):
        eids = sorted(patch_edges[p])
        lookup = pos_in_patch[p]
        ia = [lookup[int(E[e, 0])] for e in eids]
        ib = [lookup[int(E[e, 1])] for e in eids]
        new_points.append(np.concatenate([points[p], mid[eids]]))
        new_coords.append(np.concatenate([coords[p], 0.5 * (coords[p][ia] + coords[p][ib])]))
    sizes = {len(x) for x in new_points}
    if len(sizes) != 1:
        raise ValueError("patches refined to unequal sizes")
    patches = (np.array(new_points), np.array(new_coords))
    out = TriSurface.from_edge_values(
        new_tri, pairs, vals,
        positions=positions,
        patches=patches,
        triangle_patch=np.repeat(tpatch, 4),
        refine_level=s.refine_level + 1,
        validate=False,
    )
    return out


def refine_surface(s, level):
    """Subdivide every triangle ``4**level``-fold in the flat-triangle model."""
    level = int(level)
    if level < 0:
        raise ValueError("refinement level must be nonnegative")
    for _ in range(level):
        s = _refine_once(s)
    return s


# ---------------------------------------------------------------------------
# file formats

def _orient(triangles):
    """Flip triangles so orientations agree; raise if non-orientable."""
    tri = [list(t) for t in triangles]
    f = len(tri)
    by_edge = {}
    for i, t in enumerate(tri):
        for k in range(3):
            a, b = t[k], t[(k + 1) % 3]
            by_edge.setdefault((min(a, b), max(a, b)), []).append(i)
    for key, ts in by_edge.items():
        if len(ts) == 1:
            raise TopologyError(f"boundary edge {key}: surface is not closed", ("edge", key))
        if len(ts) > 2:
            raise TopologyError(f"non-manifold edge {key} shared by {len(ts)} triangles", ("edge", key))
    state = [0] * f  # 0 unvisited, 1 visited
    for root in range(f):
        if state[root]:
            continue
        state[root] = 1
        stack = [root]
        while stack:
            i = stack.pop()
            t = tri[i]
            for k in range(3):
                a, b = t[k], t[(k + 1) % 3]
                for j in by_edge[(min(a, b), max(a, b))]:
                    if j == i:
                        continue
                    tj = tri[j]
                    # consistent iff tj traverses the edge as b -> a
                    same = any(tj[m] == a and tj[(m + 1) % 3] == b for m in range(3))
                    if not state[j]:
                        if same:
                            tj[1], tj[2] = tj[2], tj[1]
                        state[j] = 1
                        stack.append(j)
                    elif same:
                        raise TopologyError(f"non-orientable surface (edge {(a, b)})", ("edge", (min(a, b), max(a, b))))
    return np.array(tri, dtype=np.int64)


def _parse_tags(comments):
    lengths = None
    patches = []
    nopos = False
    level = 0
    for line in comments:
        parts = line.split()
        if not parts:
            continue
        tag = parts[0]
        if tag == _LENGTH_TAG:
            if lengths is None:
                lengths = {}
            lengths[(int(parts[1]), int(parts[2]))] = float(parts[3])
        elif tag == _PATCH_TAG:
            nums = parts[1:]
            m = len(nums) // 3
            ids = [int(x) for x in nums[:m]]
            xy = [float(x) for x in nums[m:]]
            patches.append((ids, np.array(xy).reshape(m, 2)))
        elif tag == _NOPOS_TAG:
            nopos = True
        elif tag == _LEVEL_TAG:
            level = int(parts[1])
    return lengths, patches, nopos, level


def _fan(face):
    return [(face[0], face[i], face[i + 1]) for i in range(1, len(face) - 1)]


def _read_off(path):
    with open(path) as fh:
        raw = fh.read().splitlines()
    comments = []
    tokens = []
    for ln, line in enumerate(raw, 1):
        body, _, comment = line.partition("#")
        if comment:
            comments.append(comment.strip())
        if body.strip():
            tokens.append((ln, body.split()))
    if not tokens:
        raise MeshParseError(f"{path}: empty file")
    ln, head = tokens[0]
    if not head[0].endswith("OFF"):
        raise MeshParseError(f"{path}:{ln}: missing OFF header")
    rest = head[1:]
    idx = 1
    if not rest:
        if len(tokens) < 2:
            raise MeshParseError(f"{path}: missing counts line")
        ln, rest = tokens[1]
        idx = 2
    try:
        nv, nf = int(rest[0]), int(rest[1])
    except (ValueError, IndexError):
        raise MeshParseError(f"{path}:{ln}: bad counts line") from None
    if len(tokens) < idx + nv + nf:
        raise MeshParseError(f"{path}: expected {nv} vertices and {nf} faces")
    pos = np.empty((nv, 3))
    for i in range(nv):
        ln, vals = tokens[idx + i]
        try:
            pos[i] = [float(x) for x in vals[:3]]
        except ValueError:
            raise MeshParseError(f"{path}:{ln}: bad vertex line") from None
        if len(vals) < 3:
            raise MeshParseError(f"{path}:{ln}: vertex needs three coordinates")
    faces = []
    for i in range(nf):
        ln, vals = tokens[idx + nv + i]
        try:
            k = int(vals[0])
            face = [int(x) for x in vals[1:1 + k]]
        except ValueError:
            raise MeshParseError(f"{path}:{ln}: bad face line") from None
        if k < 3 or len(face) != k:
            raise MeshParseError(f"{path}:{ln}: malformed face")
        if max(face) >= nv or min(face) < 0:
            raise MeshParseError(f"{path}:{ln}: face index out of range")
        faces.extend(_fan(face))
    return pos, faces, comments


def _read_obj(path):
    pos = []
    faces = []
    comments = []
    with open(path) as fh:
        for ln, line in enumerate(fh, 1):
            body, _, comment = line.partition("#")
            if comment:
                comments.append(comment.strip())
            parts = body.split()
            if not parts:
                continue
            try:
                if parts[0] == "v":
                    pos.append([float(x) for x in parts[1:4]])
                elif parts[0] == "f":
                    face = []
                    for tok in parts[1:]:
                        j = int(tok.split("/")[0])
                        face.append(j - 1 if j > 0 else len(pos) + j)
                    if len(face) < 3:
                        raise MeshParseError(f"{path}:{ln}: face with fewer than 3 vertices")
                    faces.extend(_fan(face))
            except (ValueError, IndexError):
                raise MeshParseError(f"{path}:{ln}: cannot parse {parts[0]!r} line") from None
    if not pos or not faces:
        raise MeshParseError(f"{path}: no vertices or faces")
    pos = np.array(pos, dtype=float)
    if pos.shape[1] != 3:
        raise MeshParseError(f"{path}: vertex lines need three coordinates")
    flat = [i for f in faces for i in f]
    if max(flat) >= len(pos) or min(flat) < 0:
        raise MeshParseError(f"{path}: face index out of range")
    return pos, faces, comments


def load_surface(path, format=None):
    """Read an ASCII OFF or OBJ file into a validated :class:`TriSurface`.

    Polygonal faces are fan-triangulated and orientations made consistent.
    Edge lengths come from the positions unless the file carries the
    ``lipsphere-length`` comment records written by :func:`save_surface`.
    """
    path = os.fspath(path)
    fmt = (format or os.path.splitext(path)[1].lstrip(".")).upper()
    if not os.path.exists(path):
        raise FileNotFoundError(path)
    if fmt == "OFF":
        pos, faces, comments = _read_off(path)
    elif fmt == "OBJ":
        pos, faces, comments = _read_obj(path)
    else:
        raise MeshParseError(f"unsupported format {fmt!r}")
    tri = _orient(faces)
    lengths, patch_rows, nopos, level = _parse_tags(comments)
    positions = None if nopos else pos
    patches = tpatch = None
    if patch_rows:
        points = np.array([p[0] for p in patch_rows], dtype=np.int64)
        coords = np.array([p[1] for p in patch_rows])
        patches = (points, coords)
        tpatch = _assign_patches(tri, points)
    if lengths is not None and positions is not None:
        s = TriSurface(tri, edge_lengths=lengths, validate=False)
        d = np.linalg.norm(positions[s.edges[:, 0]] - positions[s.edges[:, 1]], axis=1)
        if not np.allclose(d, s.edge_lengths, rtol=1e-9, atol=0):
            positions = None
    return TriSurface(tri, edge_lengths=lengths, positions=positions, patches=patches,
                      triangle_patch=tpatch, refine_level=level)


def _assign_patches(tri, points):
    owner = {}
    for p, row in enumerate(points.tolist()):
        for v in row:
            owner.setdefault(v, set()).add(p)
    out = np.empty(len(tri), dtype=np.int64)
    for t, (a, b, c) in enumerate(tri.tolist()):
        common = owner[a] & owner[b] & owner[c]
        if not common:
            raise MeshParseError(f"triangle {t} is not inside any patch")
        out[t] = min(common)
    return out


def save_surface(s, path, format=None):
    """Write ``s`` as ASCII OFF or OBJ.

    Edge lengths are recorded exactly (``repr``) in comment lines so that
    intrinsic metrics survive a round trip bit for bit.
    """
    path = os.fspath(path)
    fmt = (format or os.path.splitext(path)[1].lstrip(".")).upper()
    pos = s.positions if s.positions is not None else np.zeros((s.n_vertices, 3))
    lines = []
    if fmt == "OFF":
        lines.append("OFF")
    elif fmt != "OBJ":
        raise MeshParseError(f"unsupported format {fmt!r}")
    lines.append(f"# {_LEVEL_TAG} {s.refine_level}")
    if s.positions is None:
        lines.append(f"# {_NOPOS_TAG} coordinates below are placeholders")
    for (u, v), L in zip(s.edges.tolist(), s.edge_lengths.tolist()):
        lines.append(f"# {_LENGTH_TAG} {u} {v} {L!r}")
    if s.patches is not None:
        for ids, xy in zip(s.patches[0].tolist(), s.patches[1]):
            nums = " ".join(repr(float(x)) for x in xy.ravel())
            lines.append(f"# {_PATCH_TAG} {' '.join(map(str, ids))} {nums}")
    if fmt == "OFF":
        lines.append(f"{s.n_vertices} {s.n_triangles} {s.n_edges}")
        lines.extend(f"{x!r} {y!r} {z!r}" for x, y, z in pos.tolist())
        lines.extend(f"3 {a} {b} {c}" for a, b, c in s.triangles.tolist())
    else:
        lines.extend(f"v {x!r} {y!r} {z!r}" for x, y, z in pos.tolist())
        lines.extend(f"f {a + 1} {b + 1} {c + 1}" for a, b, c in s.triangles.tolist())
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
