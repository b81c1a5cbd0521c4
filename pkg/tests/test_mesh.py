import math

import numpy as np
import pytest

from oracles import naive_topology, read_obj
from tetramesh.errors import DegenerateTriangleError, TetrameshError
from tetramesh.field import Genus2, Sphere, Torus
from tetramesh.mesh import IndexedMesh, analyze_topology, build_mesh, mesh_text, write_mesh
from tetramesh.midnormal import mid_normal
from tetramesh.tiling import Box, GoldbergShape

MAXIMIN_A = math.sqrt(3) / 4
TETRA = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]], dtype=float)
TETRA_FACES = [(0, 2, 1), (0, 1, 3), (0, 3, 2), (1, 2, 3)]


def tetra_boundary():
    return build_mesh(TETRA[np.array(TETRA_FACES)])


def midnormal_mesh(field, n):
    e = 1.0 / n
    return mid_normal(field, GoldbergShape(MAXIMIN_A, e), Box.unit().padded(e))


def test_shared_edge_is_welded_by_key():
    pts = np.array([[[0, 0, 0], [1, 0, 0], [0, 1, 0]], [[1, 0, 0], [1, 1, 0], [0, 1, 0]]], dtype=float)
    keys = np.array([[[0, 0, 0], [4, 0, 0], [0, 4, 0]], [[4, 0, 0], [4, 4, 0], [0, 4, 0]]])
    m = build_mesh(pts, keys=keys)
    assert (m.n_vertices, m.n_triangles) == (4, 2)
    assert len(m.edges) == 5


def test_keys_win_over_coordinates():
    # equal coordinates with different keys stay apart
    pts = np.zeros((1, 3, 3)) + np.arange(3)[None, :, None]
    pts2 = np.concatenate([pts, pts])
    keys = np.array([[[0, 0, 0], [1, 0, 0], [2, 0, 0]], [[5, 0, 0], [6, 0, 0], [7, 0, 0]]])
    assert build_mesh(pts2, keys=keys).n_vertices == 6
    assert build_mesh(pts2).n_vertices == 3


def test_empty_input():
    m = build_mesh(np.zeros((0, 3, 3)))
    top = analyze_topology(m)
    assert (top.V, top.E, top.F) == (0, 0, 0)


def test_repeated_key_is_rejected():
    pts = np.array([[[0, 0, 0], [1, 0, 0], [0, 1, 0]]], dtype=float)
    keys = np.array([[[0, 0, 0], [0, 0, 0], [0, 4, 0]]])
    with pytest.raises(DegenerateTriangleError) as info:
        build_mesh(pts, keys=keys, sources=[17])
    assert "source 17" in str(info.value)


def test_triangles_sorted_by_source_then_slot():
    base = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0]], dtype=float)
    pts = np.stack([base + i for i in range(4)])
    m = build_mesh(pts, sources=[2, 1, 2, 1], slots=[6, 5, 1, 2])
    np.testing.assert_array_equal(m.sources, [1, 1, 2, 2])
    firsts = m.vertices[m.triangles[:, 0], 0]
    np.testing.assert_array_equal(firsts, [3, 1, 2, 0])


def test_negative_zero_welds_with_zero():
    pts = np.array([[[0.0, 0, 0], [1, 0, 0], [0, 1, 0]], [[-0.0, 0, 0], [0, 1, 0], [-1, 0, 0]]])
    assert build_mesh(pts).n_vertices == 4


def test_mesh_is_immutable():
    m = tetra_boundary()
    with pytest.raises(ValueError):
        m.vertices[0, 0] = 5.0
    with pytest.raises(ValueError):
        IndexedMesh(np.zeros((2, 3)), [[0, 1, 2]])


def test_tetrahedron_boundary_topology():
    top = analyze_topology(tetra_boundary())
    assert (top.V, top.E, top.F, top.euler_char) == (4, 6, 4, 2)
    assert top.is_closed_manifold and top.is_oriented
    assert top.component_count == 1


def test_open_and_pinched_meshes_report_defects():
    open_mesh = build_mesh(TETRA[np.array(TETRA_FACES[:3])])
    top = analyze_topology(open_mesh)
    assert not top.is_closed_manifold
    assert len(top.bad_edges) == 3
    # two tetrahedra glued at one vertex: edges fine, the shared vertex is not
    other = TETRA * -1.0
    pts = np.concatenate([TETRA[np.array(TETRA_FACES)], other[np.array([(0, 1, 2), (0, 3, 1), (0, 2, 3), (1, 3, 2)])]])
    top = analyze_topology(build_mesh(pts))
    assert not top.bad_edges
    assert top.bad_vertices == [int(np.flatnonzero(np.all(build_mesh(pts).vertices == 0, axis=1))[0])]
    assert not top.is_closed_manifold


def test_inconsistent_orientation_detected():
    faces = list(TETRA_FACES)
    faces[0] = faces[0][::-1]
    assert not analyze_topology(build_mesh(TETRA[np.array(faces)])).is_oriented


@pytest.mark.parametrize("field, chi", [
    (Sphere(0.3, (0.5, 0.5, 0.5)), 2),
    (Torus(0.3, 0.12, (0.5, 0.5, 0.5)), 0),
    (Genus2(0.028, (0.5, 0.5, 0.5), 0.42), -2),
])
def test_midnormal_topology_matches_dictionary_oracle(field, chi):
    m = midnormal_mesh(field, 24)
    top = analyze_topology(m)
    ref = naive_topology(m.triangles.tolist())
    assert (top.V, top.E, top.F, top.euler_char) == (ref["V"], ref["E"], ref["F"], ref["chi"])
    assert top.euler_char == chi
    assert ref["edge_counts"] == [2]
    assert ref["good_links"] == top.V
    assert top.is_closed_manifold and top.is_oriented
    assert 2 * top.E == 3 * top.F


def test_obj_and_ply_text():
    m = build_mesh(np.array([[[0, 0, 0], [1, 0, 0], [0, 1, 0]]], dtype=float))
    obj = mesh_text(m, "obj").splitlines()
    assert sum(line.startswith("v ") for line in obj) == 3
    assert obj == ["v 0 0 0", "v 0 1 0", "v 1 0 0", "f 1 3 2"]
    ply = mesh_text(m, "ply")
    assert ply.startswith("ply\nformat ascii 1.0\n")
    assert "element vertex 3" in ply and "element face 1" in ply
    assert ply.splitlines()[-1] == "3 0 2 1"
    with pytest.raises(ValueError):
        mesh_text(m, "stl")


def test_write_is_deterministic_and_round_trips(tmp_path):
    m = midnormal_mesh(Sphere(0.3, (0.5, 0.5, 0.5)), 12)
    p1, p2 = tmp_path / "a.obj", tmp_path / "b.obj"
    write_mesh(m, p1)
    write_mesh(m, p2)
    assert p1.read_bytes() == p2.read_bytes()
    v, f = read_obj(p1)
    np.testing.assert_allclose(v, m.vertices, rtol=1e-8, atol=1e-12)
    np.testing.assert_array_equal(f, m.triangles)
    write_mesh(m, tmp_path / "c.ply")
    assert (tmp_path / "c.ply").read_text().startswith("ply\n")


def test_write_errors_name_the_path(tmp_path):
    target = tmp_path / "missing" / "x.obj"
    with pytest.raises(TetrameshError) as info:
        write_mesh(tetra_boundary(), target)
    assert str(target) in str(info.value)
