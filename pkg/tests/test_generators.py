import math

import numpy as np
import pytest
from scipy.integrate import quad

from lipsphere import generators


def _perimeter(a, b):
    # arc length of the parametrized ellipse, by quadrature
    val, _ = quad(lambda t: math.hypot(a * math.sin(t), b * math.cos(t)), 0.0, 2 * math.pi, limit=200)
    return val


@pytest.mark.parametrize("k", [0, 1, 2, 3])
def test_icosphere_counts(k):
    s = generators.icosphere(k, 2.0)
    assert s.n_triangles == 20 * 4**k
    assert s.n_vertices == 10 * 4**k + 2
    assert s.genus == 0
    assert np.allclose(np.linalg.norm(s.positions, axis=1), 2.0)


def test_ellipsoid_reference_perimeters():
    g = generators.generate("ellipsoid", {"axes": (1.0, 0.8, 0.5), "n": 2})
    want = sorted([_perimeter(1.0, 0.8), _perimeter(1.0, 0.5), _perimeter(0.8, 0.5)])
    assert np.allclose(g.reference["principal_section_perimeters"], want, rtol=1e-10)
    assert g.reference["shortest_closed_geodesic"] == pytest.approx(min(want), rel=1e-10)


def test_flat_torus_lattice():
    s = generators.flat_torus(2.0, 1.0, 5)
    assert s.n_vertices == 25 and s.genus == 1
    assert sorted(set(np.round(s.edge_lengths, 12))) == [0.2, 0.4, round(math.hypot(0.4, 0.2), 12)]


@pytest.mark.parametrize("G", [1, 2, 3])
def test_genus_g(G):
    g = generators.generate("genus_g", {"G": G, "handle_scale": 0.3, "n": 12})
    assert g.surface.genus == G == g.reference["genus"]
    if G > 1:
        assert g.reference["handle_side"] == 4 / 12


def test_dumbbell_neck():
    g = generators.generate("dumbbell", {"neck_radius": 0.25, "n": 3})
    P = g.surface.positions
    near = np.abs(P[:, 2]) < 0.05
    assert near.any()
    assert np.hypot(P[near, 0], P[near, 1]).max() == pytest.approx(0.25, abs=0.02)
    assert g.reference["neck_circumference"] == pytest.approx(2 * math.pi * 0.25)


def test_fingers_stick_out():
    s = generators.fingered_sphere(4, 3)
    r = np.linalg.norm(s.positions, axis=1)
    assert r.min() == pytest.approx(1.0, abs=1e-6)
    assert r.max() > 1.9
    # one tip per finger, all on the equator
    tips = s.positions[r > 1.9]
    ang = np.unique(np.round(np.degrees(np.arctan2(tips[:, 1], tips[:, 0])) % 360))
    assert set(ang.tolist()) == {0.0, 90.0, 180.0, 270.0}


@pytest.mark.parametrize("kind", generators.KINDS)
def test_generate_is_deterministic(kind):
    params = {"n": 2} if kind in ("ellipsoid", "fingered_sphere", "dumbbell") else {}
    if kind == "genus_g":
        params = {"G": 2, "handle_scale": 0.3, "n": 12}
    a = generators.generate(kind, params, seed=3)
    b = generators.generate(kind, params, seed=3)
    assert np.array_equal(a.surface.triangles, b.surface.triangles)
    assert np.array_equal(a.surface.edge_lengths, b.surface.edge_lengths)
    assert a.reference == b.reference and a.params == b.params
    assert a.surface.genus == a.reference["genus"]


@pytest.mark.parametrize("kind, params", [
    ("klein_bottle", {}),
    ("icosphere", {"radius": -1.0}),
    ("dumbbell", {"neck_radius": 1.5}),
    ("flat_torus", {"n": 2}),
    ("genus_g", {"G": 0}),
    ("genus_g", {"G": 2, "handle_scale": 0.1, "n": 12}),
])
def test_generate_rejects_bad_input(kind, params):
    with pytest.raises(ValueError):
        generators.generate(kind, params)


# branched double cover ---------------------------------------------------------

@pytest.fixture(scope="module")
def cover():
    return generators.branched_double_cover(0.3, 7)


def test_cover_preimage_counts(cover):
    counts = np.bincount(cover.vertex_map, minlength=cover.base.n_vertices)
    branch = np.zeros(cover.base.n_vertices, dtype=bool)
    branch[cover.branch_points] = True
    assert np.all(counts[branch] == 1)
    assert np.all(counts[~branch] == 2)
    assert cover.cover.n_triangles == 2 * cover.base.n_triangles


def test_cover_riemann_hurwitz(cover):
    b = len(cover.branch_points)
    assert b % 2 == 0
    chi = cover.cover.n_vertices - cover.cover.n_edges + cover.cover.n_triangles
    assert chi == 2 * 2 - b
    assert cover.cover.genus == (b - 2) // 2


def test_cover_branch_set_is_dense(cover):
    # the base is inscribed in the unit sphere; measure along great circles
    P = cover.base.positions
    gc = np.arccos(np.clip(P @ P[cover.branch_points].T, -1.0, 1.0)).min(axis=1)
    assert gc.max() <= cover.epsilon


def test_cover_projection_is_short(cover):
    # every cover edge maps onto a base edge at most as long
    E = cover.cover.edges
    base = cover.base
    for (u, v), L in zip(E.tolist(), cover.cover.edge_lengths.tolist()):
        a, b = int(cover.vertex_map[u]), int(cover.vertex_map[v])
        assert L >= base.edge_lengths[base.edge_index(a, b)]


def test_cover_is_seeded():
    a = generators.branched_double_cover(0.4, 1)
    b = generators.branched_double_cover(0.4, 1)
    assert np.array_equal(a.branch_points, b.branch_points)
    assert np.array_equal(a.cover.triangles, b.cover.triangles)


def test_cover_rejects_bad_epsilon():
    with pytest.raises(ValueError):
        generators.branched_double_cover(1.5)
    with pytest.raises(ValueError):
        generators.branched_double_cover(0.01, max_subdiv=2)
