import math

import numpy as np
import pytest

from lipsphere import TriSurface, generators, geodesic, levelset, refine_surface, scale_metric, spheremap

SQRT2 = math.sqrt(2.0)


@pytest.fixture(scope="module")
def built(ico2r1):
    est = levelset.estimate_D(ico2r1, 0)
    split = spheremap.build_split_curve(ico2r1, 0, est)
    planar = spheremap.build_planar_map(ico2r1, 0, split.q)
    m = spheremap.assemble_degree1_map(ico2r1, planar, split, {"R": est.radius, "D": est.D})
    return est, split, planar, m


def _unit(P):
    return P / np.linalg.norm(P, axis=1)[:, None]


def test_planar_map(ico2r1, built):
    _, split, planar, _ = built
    d = geodesic.distance_field(ico2r1, split.q).dist[0]
    assert tuple(planar.values[0]) == (0.0, d)
    assert tuple(planar.values[split.q]) == (d, 0.0)
    assert planar.lipschitz <= 1.415
    assert planar.certified
    with pytest.raises(ValueError):
        spheremap.build_planar_map(ico2r1, 3, 3)


def test_split_curve_structure(ico2r1, built):
    est, split, _, _ = built
    cyc = split.cycle
    assert len(set(cyc)) == len(cyc)
    for u, v in zip(cyc, cyc[1:] + cyc[:1]):
        ico2r1.edge_index(u, v)   # raises if not an edge
    assert set(np.unique(split.labels).tolist()) == {0, 1}
    assert len(split.labels) == ico2r1.n_triangles
    assert np.all(split.gamma_offsets <= split.delta)
    assert cyc[0] == 0 and split.q in cyc and split.r in cyc


def test_split_curve_needs_sphere(genus2):
    with pytest.raises(ValueError):
        spheremap.build_split_curve(genus2, 0, None)


def test_map_hemispheres_and_equator(ico2r1, built):
    _, split, _, m = built
    V = m.vectors
    assert np.abs(np.linalg.norm(V, axis=1) - 1).max() <= 1e-12
    # curve vertices land on the equator, where both hemisphere maps agree
    assert np.all(V[split.cycle, 2] == 0.0)
    touch0 = np.zeros(ico2r1.n_vertices, dtype=bool)
    for k in range(3):
        touch0[ico2r1.triangles[m.labels == 0, k]] = True
    assert np.all(V[touch0, 2] >= 0.0)
    assert np.all(V[~touch0, 2] <= 0.0)


def test_map_certificate(ico2r1, built):
    est, _, _, m = built
    cert = spheremap.verify_map(ico2r1, m, m.descriptor["bound_claimed"])
    assert cert.degree == cert.degree_regular == 1
    assert cert.residual <= 0.1
    assert cert.discrete_lipschitz <= 1.05 * (2 + SQRT2) * math.pi / est.D
    assert m.descriptor["disk_radius"] >= m.descriptor["disk_radius_inscribed"] * (1 - 1e-12)
    # each hemisphere map alone is (sqrt2 + 1) pi / D Lipschitz up to the disk shrinkage
    assert m.descriptor["hemisphere_lipschitz"] <= (SQRT2 + 1) * math.pi / est.D * 1.05


def test_strict_mode_reports_offender():
    s = refine_surface(generators.generate("fingered_sphere", {"fingers": 3, "n": 2}).surface, 1)
    p, _ = geodesic.eccentricity_scan(s)
    est = levelset.estimate_D(s, p)
    split = spheremap.build_split_curve(s, p, est)
    planar = spheremap.build_planar_map(s, p, split.q)
    fixed = spheremap.assemble_degree1_map(s, planar, split, {"D": est.D, "grow_disk": False})
    assert fixed.descriptor["radius_limited_by"] is not None
    grown = spheremap.assemble_degree1_map(s, planar, split, {"D": est.D})
    assert grown.descriptor["disk_radius"] > fixed.descriptor["disk_radius"]
    with pytest.raises(spheremap.ConstructionError) as e:
        spheremap.assemble_degree1_map(s, planar, split, {"D": est.D}, strict=True)
    assert e.value.vertex in split.cycle


def test_constant_map():
    s = generators.icosphere(1)
    V = np.tile([0.0, 0.0, 1.0], (s.n_vertices, 1))
    cert = spheremap.verify_map(s, V)
    assert cert.degree == 0 and cert.discrete_lipschitz == 0.0


def test_identity_map(ico2):
    V = _unit(ico2.positions)
    cert = spheremap.verify_map(ico2, V)
    assert cert.degree == 1
    # arc over chord for the longest edge
    assert 1.0 <= cert.discrete_lipschitz <= 1.01


@pytest.mark.parametrize("flip", ["antipodal", "reflection"])
def test_orientation_reversing_maps(ico2, flip):
    V = _unit(ico2.positions)
    V = -V if flip == "antipodal" else V * np.array([1.0, 1.0, -1.0])
    cert = spheremap.verify_map(ico2, V)
    assert cert.degree == cert.degree_regular == -1


def test_tetrahedron_degree_oracles_agree():
    P = np.array([[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]], dtype=float)
    s = refine_surface(TriSurface([[0, 1, 2], [0, 2, 3], [0, 3, 1], [1, 3, 2]], positions=P), 1)
    V = _unit(s.positions)
    area = spheremap.degree_signed_area(s, V)
    for seed in range(20):
        reg, y = spheremap.degree_regular_value(s, V, rng=seed)
        assert reg == round(area) == 1
        assert abs(np.linalg.norm(y) - 1) < 1e-12


def test_verify_rejects_bad_vectors(ico2):
    with pytest.raises(ValueError):
        spheremap.verify_map(ico2, np.ones((ico2.n_vertices, 3)))
    with pytest.raises(ValueError):
        spheremap.verify_map(ico2, np.ones((3, 3)))


def test_degree_survives_scaling(ico2r1, built):
    _, _, _, m = built
    big = scale_metric(ico2r1, 4.0)
    a = spheremap.verify_map(ico2r1, m)
    b = spheremap.verify_map(big, m)
    assert a.degree == b.degree == 1
    assert b.discrete_lipschitz == pytest.approx(a.discrete_lipschitz / 4.0, rel=1e-12)


def test_hypersphericity_interval(ico2r1):
    hb = spheremap.hypersphericity_bounds(ico2r1, 0)
    assert hb["lower"] <= 1.0 <= hb["upper"]
    assert hb["upper"] / hb["lower_from_D"] <= 2 * (2 + SQRT2) * (1 + 1e-12)
    assert hb["lower_from_map"] == pytest.approx(1.0 / hb["certificate"].discrete_lipschitz)
    with pytest.raises(ValueError):
        spheremap.hypersphericity_bounds(generators.flat_torus(1, 1, 4))


# systolic variant ------------------------------------------------------------------

def _rows(n, i):
    return [i * n + j for j in range(n)]


def test_systolic_map_ok(torus16):
    s = scale_metric(torus16, 16.0)
    r = spheremap.assemble_systolic_map(s, _rows(16, 0), _rows(16, 8))
    assert r.status == "ok"
    assert r.certificate.degree == 1
    assert r.certificate.discrete_lipschitz <= 1.0 + 1e-9
    assert abs(r.details["region_windings"][r.map.descriptor["region"]]) == pytest.approx(1.0)


def test_systolic_map_short(torus16):
    r = spheremap.assemble_systolic_map(torus16, _rows(16, 0), _rows(16, 8))
    assert r.status == "short_systole" and r.map is None


def test_systolic_map_tau_near(torus16):
    s = scale_metric(torus16, 16.0)
    r = spheremap.assemble_systolic_map(s, _rows(16, 0), _rows(16, 1))
    assert r.status == "tau_near_q"


def test_systolic_map_needs_genus(ico2):
    with pytest.raises(ValueError):
        spheremap.assemble_systolic_map(ico2, [0, 1, 2], [0, 1, 2])
