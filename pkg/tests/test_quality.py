import json
import math

import numpy as np
import pytest

from oracles import brute_triangle_distance, law_of_cosines_angles
from tetramesh.errors import TetrameshError
from tetramesh.field import Sphere, Torus
from tetramesh.mesh import IndexedMesh
from tetramesh.midnormal import mid_normal
from tetramesh.pyramid import pyramid_mesh
from tetramesh.quality import (TriangleGrid, angle_histogram, estimate_max_curvature, measure,
                               mesh_to_surface, point_triangle_distance, report_json, triangle_angles,
                               write_report)
from tetramesh.refine import slid_normal
from tetramesh.theory import angle_profile
from tetramesh.tiling import Box, GoldbergShape

MAXIMIN_A = math.sqrt(3) / 4
CENTRE = np.array([0.5, 0.5, 0.5])


def shape_for(n, a=MAXIMIN_A):
    return GoldbergShape(a, 1.0 / n)


@pytest.fixture(scope="module")
def sphere_mesh():
    s = shape_for(24)
    return mid_normal(Sphere(0.3, CENTRE), s, Box.unit().padded(s.e)), s


def test_equilateral_angles():
    tri = np.array([[[0, 0, 0], [1, 0, 0], [0.5, math.sqrt(3) / 2, 0]]])
    np.testing.assert_allclose(triangle_angles(tri), 60.0, atol=1e-12)


def test_triangle_angles_match_law_of_cosines():
    pts = np.random.default_rng(1).normal(size=(500, 3, 3))
    ref = np.array([law_of_cosines_angles(*t) for t in pts])
    np.testing.assert_allclose(triangle_angles(pts), ref, atol=1e-7)


def test_midnormal_angles_hit_the_closed_form_interval(sphere_mesh):
    m, s = sphere_mesh
    ang = triangle_angles(m.triangle_points())
    lo, hi = angle_profile(s.a).interval
    assert ang.min() == pytest.approx(lo, abs=1e-9)
    assert ang.max() == pytest.approx(hi, abs=1e-9)


def test_histogram_counts_every_corner(sphere_mesh):
    m, _ = sphere_mesh
    h = angle_histogram(triangle_angles(m.triangle_points()))
    assert len(h) == 180 and h.sum() == 3 * m.n_triangles
    assert angle_histogram(np.array([0.0, 180.0, 59.5])).tolist()[59] == 1


def test_point_triangle_distance_matches_brute_force():
    rng = np.random.default_rng(2)
    p = rng.normal(size=(2000, 3)) * 2
    t = rng.normal(size=(2000, 3, 3))
    ours = point_triangle_distance(p, t[:, 0], t[:, 1], t[:, 2])
    ref = np.array([brute_triangle_distance(x, tri) for x, tri in zip(p, t)])
    np.testing.assert_allclose(ours, ref, atol=1e-12)


def test_bucket_grid_is_exact(sphere_mesh):
    m, _ = sphere_mesh
    tris = m.triangle_points()[::7]
    q = np.random.default_rng(4).uniform(-0.2, 1.2, size=(150, 3))
    got = TriangleGrid(tris).distance(q)
    ref = [min(brute_triangle_distance(x, t) for t in tris) for x in q]
    np.testing.assert_allclose(got, ref, atol=1e-12)
    with pytest.raises(ValueError):
        TriangleGrid(np.zeros((0, 3, 3)))


def test_mesh_to_sphere_distance_is_radial(sphere_mesh):
    m, _ = sphere_mesh
    levels = mesh_to_surface(m, Sphere(0.3, CENTRE))
    assert levels == sorted(levels) and len(levels) == 3
    p = m.vertices
    exact = np.abs(np.linalg.norm(p - CENTRE, axis=1) - 0.3).max()
    assert levels[0] >= exact - 1e-12
    assert levels[-1] <= 2 * m.edge_lengths().max()


def test_curvature_estimate():
    pts = CENTRE + 0.3 * np.array([[1, 0, 0], [0, 0.6, 0.8]])
    assert estimate_max_curvature(Sphere(0.3, CENTRE), pts, 1e-5) == pytest.approx(1 / 0.3, rel=1e-4)
    torus = Torus(0.3, 0.12, CENTRE)
    inner = CENTRE + np.array([[0.18, 0, 0]])
    assert estimate_max_curvature(torus, inner, 1e-5) == pytest.approx(1 / 0.12, rel=1e-4)


def test_midnormal_report_passes(sphere_mesh):
    m, s = sphere_mesh
    rep = measure(m, Sphere(0.3, CENTRE), s, algorithm="midnormal")
    assert rep.passed, rep.pass_flags
    d = rep.to_dict()
    assert list(d)[:13] == ["algorithm", "a", "e", "surface", "V", "E", "F", "eulerChar", "minAngleDeg",
                            "maxAngleDeg", "edgeRatio", "hausdorffUpper", "pass"]
    assert d["eulerChar"] == 2 and d["hausdorff"]["bound2de"] == pytest.approx(2 * s.diameter)


def test_slid_mesh_fails_the_midpoint_angle_check():
    s = shape_for(24)
    f = Sphere(0.3, CENTRE)
    m = slid_normal(f, s, Box.unit().padded(s.e), 0.3)
    assert not measure(m, f, s, algorithm="midnormal", hausdorff=False).pass_flags["midnormal-angles"]
    assert measure(m, f, s, algorithm="slidnormal", t=0.3, hausdorff=False).passed


def test_pyramid_report():
    f = Sphere(0.3, CENTRE)
    m = pyramid_mesh(f, 12)
    rep = measure(m, f, algorithm="pyramid", e=1 / 12)
    assert rep.pass_flags["pyramid-equilateral"] and rep.passed
    assert rep.hausdorff_upper <= 2 / 12


def test_report_is_byte_identical(tmp_path, sphere_mesh):
    m, s = sphere_mesh
    f = Sphere(0.3, CENTRE)
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    write_report(measure(m, f, s), a)
    write_report(measure(m, f, s), b)
    assert a.read_bytes() == b.read_bytes()
    json.loads(a.read_text())
    assert report_json(measure(m, f, s, hausdorff=False)).endswith("}\n")


def test_bad_inputs(sphere_mesh):
    m, s = sphere_mesh
    with pytest.raises(TetrameshError):
        measure(IndexedMesh.empty(), Sphere(0.3, CENTRE), s)
    with pytest.raises(ValueError):
        measure(m, Sphere(0.3, CENTRE))
    with pytest.raises(ValueError):
        measure(m, Sphere(0.3, CENTRE), s, algorithm="marching")
