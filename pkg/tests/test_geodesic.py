import itertools
import math

import numpy as np
import pytest

from lipsphere import generators, geodesic, refine_surface, scale_metric

from conftest import great_circle


def _torus_true(i, j, n, L=1.0):
    """Flat-torus distance between lattice vertices i and j of an n x n grid."""
    (a, b), (c, d) = divmod(i, n), divmod(j, n)
    dx = abs(a - c) % n
    dy = abs(b - d) % n
    return L / n * math.hypot(min(dx, n - dx), min(dy, n - dy))


def test_source_is_zero_and_edges_are_lipschitz(ico2r1):
    f = geodesic.distance_field(ico2r1, 5)
    assert f.dist[5] == 0.0
    E = ico2r1.edges
    assert np.all(np.abs(f.dist[E[:, 0]] - f.dist[E[:, 1]]) <= ico2r1.edge_lengths * (1 + 1e-12))
    assert np.isfinite(f.dist).all()


def test_symmetry(ico2r1):
    rng = np.random.default_rng(0)
    ids = rng.choice(ico2r1.n_vertices, 12, replace=False)
    rows = geodesic.distance_rows(ico2r1, ids)
    sub = rows[:, ids]
    assert np.allclose(sub, sub.T, rtol=1e-9, atol=0)


def test_triangle_inequality_on_samples(genus2):
    rng = np.random.default_rng(1)
    ids = rng.choice(genus2.n_vertices, 15, replace=False)
    D = geodesic.distance_rows(genus2, ids)[:, ids]
    for a, b, c in itertools.permutations(range(len(ids)), 3):
        assert D[a, c] <= D[a, b] + D[b, c] + 1e-12


@pytest.mark.parametrize("refine", [0, 1, 2])
def test_flat_torus_against_lattice_distances(refine):
    n = 8
    s = refine_surface(generators.flat_torus(1.0, 1.0, n), refine)
    rel, ab = geodesic.distance_tolerance(s)
    rows = geodesic.distance_rows(s, [0, 19, 42])
    for r, src in zip(rows, [0, 19, 42]):
        true = np.array([_torus_true(src, j, n) for j in range(n * n)])
        got = r[: n * n]
        # graph paths are real curves, so never shorter than the flat metric
        assert np.all(got >= true * (1 - 1e-12))
        assert np.all(got <= true * (1 + rel) + ab)


def test_flat_torus_straight_rows_are_exact(torus16):
    d = geodesic.distance_field(torus16, 0).dist
    for j in range(9):
        assert d[j] == pytest.approx(j / 16, rel=1e-12)


def test_icosphere_bracketed_by_chord_and_great_circle():
    s = refine_surface(generators.icosphere(2), 1)
    rel, ab = geodesic.distance_tolerance(s)
    P = s.positions
    for src in (0, 17, 300):
        d = geodesic.distance_field(s, src).dist
        chord = np.linalg.norm(P - P[src], axis=1)
        gc = np.array([great_circle(P, src, j) for j in range(s.n_vertices)])
        assert np.all(d >= chord * (1 - 1e-12))
        assert np.all(d <= gc * (1 + rel) + ab)


def test_icosphere_antipodal_distance():
    s = refine_surface(generators.icosphere(3), 1)
    dmax = geodesic.distance_field(s, 0).dist.max()
    assert 0.95 * math.pi <= dmax <= 1.05 * math.pi


@pytest.mark.parametrize("kind,params", [
    ("icosphere", {"subdiv": 1}),
    ("ellipsoid", {"axes": (1.0, 0.8, 0.5), "n": 1}),
    ("flat_torus", {"n": 5}),
    ("genus_g", {"G": 2, "handle_scale": 0.3, "n": 12}),
])
def test_monotone_under_refinement(kind, params):
    s0 = generators.generate(kind, params).surface
    n0 = s0.n_vertices
    prev = geodesic.distance_rows(s0, [0, n0 // 2])
    s = s0
    for _ in range(2):
        s = refine_surface(s, 1)
        cur = geodesic.distance_rows(s, [0, n0 // 2])[:, :n0]
        assert np.all(cur <= prev * (1 + 1e-12))
        prev = cur


def test_scaling_doubles_exactly(ico2r1):
    d1 = geodesic.distance_field(ico2r1, 3).dist
    d2 = geodesic.distance_field(scale_metric(ico2r1, 2.0), 3).dist
    assert np.array_equal(d2, 2.0 * d1)


def test_bad_source(ico2):
    with pytest.raises(IndexError):
        geodesic.distance_field(ico2, ico2.n_vertices)


def test_subset_diameter_basics(ico2r1):
    assert geodesic.subset_diameter(ico2r1, [7]).value == 0.0
    with pytest.raises(ValueError):
        geodesic.subset_diameter(ico2r1, [])
    u, v = (int(x) for x in ico2r1.edges[0])
    L = ico2r1.edge_lengths[0]
    d = geodesic.subset_diameter(ico2r1, [(u, v, 0.2), (u, v, 0.7)])
    assert d.value == pytest.approx(0.5 * L, rel=1e-12)


def test_subset_diameter_equator():
    s = refine_surface(generators.icosphere(3), 1)
    P = s.positions
    eq = np.flatnonzero(np.abs(P[:, 2]) < 0.05)
    d = geodesic.subset_diameter(s, eq.tolist())
    assert abs(d.value - math.pi) <= 0.05 * math.pi
    a, b = d.witness
    assert np.dot(P[a], P[b]) < -0.9


def test_eccentricity_scan():
    s = refine_surface(generators.icosphere(1), 1)
    best, ecc = geodesic.eccentricity_scan(s)
    vals = np.array(list(ecc.values()))
    assert ecc[best] == vals.min()
    assert best == min(k for k, v in ecc.items() if v == vals.min())
    assert geodesic.eccentricity_scan(s, [11])[0] == 11


def test_dumbbell_neck_beats_cap_tip():
    g = generators.generate("dumbbell", {"neck_radius": 0.2, "n": 3})
    s = g.surface
    P = s.positions
    axis = np.argmax(P.max(0) - P.min(0))
    tip = int(np.argmax(P[:, axis]))
    neck = int(np.argmin(np.abs(P[:, axis] - 0.5 * (P[:, axis].max() + P[:, axis].min()))))
    _, ecc = geodesic.eccentricity_scan(s, [tip, neck])
    assert ecc[neck] < ecc[tip]
