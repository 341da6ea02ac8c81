import numpy as np
import pytest

from lipsphere import (
    MeshParseError,
    TopologyError,
    TriSurface,
    generators,
    geodesic,
    load_surface,
    refine_surface,
    save_surface,
    scale_metric,
    validate_surface,
)

TETRA_POS = np.array([[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]], dtype=float)
TETRA = np.array([[0, 1, 2], [0, 2, 3], [0, 3, 1], [1, 3, 2]])


def test_tetrahedron_counts():
    s = TriSurface(TETRA, positions=TETRA_POS)
    info = validate_surface(s)
    assert (info.n_vertices, info.n_edges, info.n_triangles) == (4, 6, 4)
    assert info.euler_characteristic == 2 and info.genus == 0 and info.is_sphere


@pytest.mark.parametrize("kind,params,genus", [
    ("icosphere", {"subdiv": 1}, 0),
    ("flat_torus", {"n": 5}, 1),
    ("genus_g", {"G": 2, "handle_scale": 0.3, "n": 12}, 2),
    ("genus_g", {"G": 3, "handle_scale": 0.3, "n": 12}, 3),
])
def test_genus_from_euler(kind, params, genus):
    s = generators.generate(kind, params).surface
    assert s.genus == genus
    assert s.n_vertices - s.n_edges + s.n_triangles == 2 - 2 * genus


def test_boundary_edge_rejected():
    with pytest.raises(TopologyError) as e:
        TriSurface(TETRA[:3], positions=TETRA_POS)
    assert e.value.simplex[0] == "edge"


def test_nonmanifold_edge_rejected():
    # two closed tetrahedra sharing the edge (0, 1)
    other = np.array([0, 1, 4, 5])[TETRA]
    tri = np.vstack([TETRA, other])
    pos = np.vstack([TETRA_POS, [[3, 0, 0], [0, 3, 0]]])
    with pytest.raises(TopologyError, match="non-manifold edge") as e:
        TriSurface(tri, positions=pos)
    assert e.value.simplex == ("edge", (0, 1))


def test_inconsistent_orientation_rejected():
    tri = TETRA.copy()
    tri[3] = tri[3, ::-1]
    with pytest.raises(TopologyError, match="orientation"):
        TriSurface(tri, positions=TETRA_POS)


def test_degenerate_triangle_rejected():
    with pytest.raises(TopologyError, match="degenerate"):
        TriSurface([[0, 1, 1], [0, 1, 2]], positions=TETRA_POS[:3])


def test_pinched_vertex_rejected():
    # two tetrahedra sharing only vertex 0
    other = np.array([0, 4, 5, 6])[TETRA]
    tri = np.vstack([TETRA, other])
    pos = np.vstack([TETRA_POS, TETRA_POS[1:] + 5])
    with pytest.raises(TopologyError) as e:
        TriSurface(tri, positions=pos)
    assert e.value.simplex == ("vertex", 0)


def test_two_components_rejected():
    tri = np.vstack([TETRA, TETRA + 4])
    pos = np.vstack([TETRA_POS, TETRA_POS + 5])
    with pytest.raises(TopologyError, match="connected components"):
        TriSurface(tri, positions=pos)


def test_triangle_inequality_rejected():
    s = TriSurface(TETRA, positions=TETRA_POS)
    L = s.edge_lengths.copy()
    L[0] = 10.0
    with pytest.raises(TopologyError, match="triangle inequality"):
        TriSurface(TETRA, edge_lengths=L)


def test_nonpositive_length_rejected():
    with pytest.raises(TopologyError, match="non-positive"):
        TriSurface(TETRA, edge_lengths=np.r_[0.0, np.ones(5)])


@pytest.mark.parametrize("fmt", ["off", "obj"])
def test_round_trip_bit_exact(tmp_path, fmt):
    s = refine_surface(generators.ellipsoid(1.0, 0.8, 0.5, 1), 1)
    p1 = tmp_path / f"a.{fmt}"
    p2 = tmp_path / f"b.{fmt}"
    save_surface(s, p1)
    t = load_surface(p1)
    assert np.array_equal(t.triangles, s.triangles)
    assert np.array_equal(t.edge_lengths, s.edge_lengths)
    assert np.array_equal(t.positions, s.positions)
    assert t.refine_level == 1
    save_surface(t, p2)
    assert p1.read_bytes() == p2.read_bytes()
    # the refined metric (patch chords) survives too
    d0 = geodesic.distance_field(s, 0).dist
    d1 = geodesic.distance_field(t, 0).dist
    assert np.array_equal(d0, d1)


def test_intrinsic_metric_round_trip(tmp_path):
    s = generators.flat_torus(1.0, 2.0, 5)
    assert s.positions is None
    p = tmp_path / "t.off"
    save_surface(s, p)
    t = load_surface(p)
    assert t.positions is None
    assert np.array_equal(t.edge_lengths, s.edge_lengths)


def test_quad_faces_are_fanned(tmp_path):
    cube = "\n".join([
        "OFF", "8 6 0",
        "0 0 0", "1 0 0", "1 1 0", "0 1 0", "0 0 1", "1 0 1", "1 1 1", "0 1 1",
        "4 0 3 2 1", "4 4 5 6 7", "4 0 1 5 4", "4 1 2 6 5", "4 2 3 7 6", "4 3 0 4 7",
    ])
    p = tmp_path / "cube.off"
    p.write_text(cube + "\n")
    s = load_surface(p)
    assert s.n_triangles == 12 and s.genus == 0


def test_orientation_repaired_on_load(tmp_path):
    lines = ["OFF", "4 4 0"] + [" ".join(map(str, r)) for r in TETRA_POS.tolist()]
    tri = TETRA.copy()
    tri[2] = tri[2, ::-1]
    lines += ["3 " + " ".join(map(str, t)) for t in tri.tolist()]
    p = tmp_path / "t.off"
    p.write_text("\n".join(lines) + "\n")
    assert load_surface(p).genus == 0


@pytest.mark.parametrize("text,match", [
    ("", "empty"),
    ("PLY\n3 1 0\n", "header"),
    ("OFF\n3 1\n0 0 0\n1 0 0\n", "expected"),
    ("OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 7\n", "out of range"),
    ("OFF\n3 1 0\n0 0 0\n1 x 0\n0 1 0\n3 0 1 2\n", "bad vertex"),
])
def test_malformed_off(tmp_path, text, match):
    p = tmp_path / "bad.off"
    p.write_text(text)
    with pytest.raises(MeshParseError, match=match):
        load_surface(p)


def test_malformed_obj(tmp_path):
    p = tmp_path / "bad.obj"
    p.write_text("v 0 0 0\nv 1 0 0\nf 1 2\n")
    with pytest.raises(MeshParseError):
        load_surface(p)


def test_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_surface(tmp_path / "nope.off")


def test_refine_counts_and_determinism():
    s = generators.icosphere(1)
    r1 = refine_surface(s, 1)
    r2 = refine_surface(s, 1)
    assert r1.n_triangles == 4 * s.n_triangles
    assert r1.n_vertices == s.n_vertices + s.n_edges
    assert np.array_equal(r1.triangles, r2.triangles)
    assert np.array_equal(r1.edge_lengths, r2.edge_lengths)
    assert r1.genus == 0


def test_refine_halves_edges_of_flat_triangles():
    s = generators.flat_torus(1.0, 1.0, 4)
    r = refine_surface(s, 1)
    assert np.isclose(r.edge_lengths.max(), s.edge_lengths.max() / 2)
    assert r.genus == 1


def test_scale_metric():
    s = generators.icosphere(1)
    t = scale_metric(s, 2.5)
    assert np.allclose(t.edge_lengths, 2.5 * s.edge_lengths, rtol=1e-15)
    with pytest.raises(ValueError):
        scale_metric(s, 0.0)
    with pytest.raises(ValueError):
        scale_metric(s, float("nan"))
