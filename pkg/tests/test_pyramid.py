import math

import numpy as np
import pytest

from tetramesh.field import ExprField, Sphere, Torus
from tetramesh.mesh import analyze_topology
from tetramesh.pyramid import build_pyramids, interior_overlaps
from tetramesh.tiling import Box

CENTRE = np.array([0.5, 0.5, 0.5])


@pytest.fixture(scope="module")
def sphere_run():
    return build_pyramids(Sphere(0.3, CENTRE), 12)


def test_every_edge_has_length_e_over_six(sphere_run):
    m = sphere_run.mesh
    np.testing.assert_allclose(m.edge_lengths(), sphere_run.e / 6, rtol=1e-12)
    # four lateral faces per square, each equilateral
    assert m.n_triangles == 4 * len(sphere_run.corners)


def test_sphere_gives_two_closed_shells(sphere_run):
    rep = analyze_topology(sphere_run.mesh)
    assert rep.is_closed_manifold and rep.is_oriented
    assert rep.euler_char == 4 and rep.component_count == 2


def test_torus_shells():
    # at N=16 the tube is wide enough that the inner shell is one torus
    rep = analyze_topology(build_pyramids(Torus(0.3, 0.12, CENTRE), 16).mesh)
    assert rep.is_closed_manifold and rep.euler_char == 0 and rep.component_count == 2


def test_coarse_torus_shells_stay_manifold():
    # a thin tube leaves the all-negative core in separate pockets, each a sphere
    rep = analyze_topology(build_pyramids(Torus(0.3, 0.12, CENTRE), 12).mesh)
    assert rep.is_closed_manifold
    assert rep.euler_char == 2 * (rep.component_count - 1)


def test_pyramids_do_not_overlap(sphere_run):
    assert len(interior_overlaps(sphere_run.corners, sphere_run.apexes, sphere_run.e)) == 0


def test_overlap_detector_flags_pyramids_sharing_a_wedge():
    h = math.sqrt(2) / 2  # apex height for unit squares
    floor = np.array([[[0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0]]], dtype=float)
    wall = np.array([[[0, 0, 0], [0, 1, 0], [0, 1, 1], [0, 0, 1]]], dtype=float)
    corners = np.concatenate([floor, wall])
    inside = np.array([[0.5, 0.5, h], [h, 0.5, 0.5]])
    outside = np.array([[0.5, 0.5, -h], [h, 0.5, 0.5]])
    assert interior_overlaps(corners, inside, 6.0).tolist() == [[0, 1]]
    assert len(interior_overlaps(corners, outside, 6.0)) == 0


def test_constant_field_gives_empty_mesh():
    r = build_pyramids(ExprField("1"), 8)
    assert r.mesh.n_triangles == 0 and r.coarse_cells == 0


def test_mesh_stays_within_two_e_of_the_sphere(sphere_run):
    r, e = 0.3, sphere_run.e
    m = sphere_run.mesh
    # triangle points are convex combinations, so the vertex distances bound the mesh
    pts = m.triangle_points()
    bary = np.array([[1, 1, 1], [4, 1, 1], [1, 4, 1], [1, 1, 4]]) / np.array([[3], [6], [6], [6]])
    samples = np.einsum("sk,fkd->fsd", bary, pts).reshape(-1, 3)
    dist = np.abs(np.linalg.norm(samples - CENTRE, axis=1) - r)
    assert dist.max() <= 2 * e
    rng = np.random.default_rng(3)
    u = rng.normal(size=(2000, 3))
    on = CENTRE + r * u / np.linalg.norm(u, axis=1, keepdims=True)
    near = np.min(np.linalg.norm(on[:, None] - m.vertices[None], axis=2), axis=1)
    assert near.max() <= 2 * e


def test_padding_by_whole_cells_keeps_the_edge_length():
    e = 1 / 12
    r = build_pyramids(Sphere(0.3, CENTRE), 14, Box.unit().padded(e))
    assert r.e == pytest.approx(e)


def test_bad_resolution():
    with pytest.raises(ValueError):
        build_pyramids(Sphere(0.3, CENTRE), 0)
