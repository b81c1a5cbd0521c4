"""Indexed triangle meshes: welding, adjacency, topology checks and file output."""
from __future__ import annotations

import os
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .errors import DegenerateTriangleError, TetrameshError


def _readonly(arr):
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class IndexedMesh:
    """Deduplicated vertices plus oriented triangles.

    Parameters
    ----------
    vertices : (V, 3) float array
    triangles : (F, 3) int array of vertex indices
    keys : (V, 3) int array, optional
        Integer lattice key of each vertex (see :mod:`tetramesh.tiling`).
    sources : (F,) int array, optional
        Id of the tetrahedron (or square) that produced each triangle;
        ``-1`` marks triangles created after extraction.
    """

    vertices: np.ndarray
    triangles: np.ndarray
    keys: np.ndarray | None = None
    sources: np.ndarray | None = None

    def __post_init__(self):
        v = np.array(self.vertices, dtype=np.float64).reshape(-1, 3)
        t = np.array(self.triangles, dtype=np.int64).reshape(-1, 3)
        if t.size and (t.min() < 0 or t.max() >= len(v)):
            raise ValueError("triangle references a vertex out of range")
        object.__setattr__(self, "vertices", _readonly(v))
        object.__setattr__(self, "triangles", _readonly(t))
        if self.keys is not None:
            k = np.array(self.keys, dtype=np.int64).reshape(-1, 3)
            if len(k) != len(v):
                raise ValueError("keys must have one row per vertex")
            object.__setattr__(self, "keys", _readonly(k))
        if self.sources is not None:
            s = np.array(self.sources, dtype=np.int64).reshape(-1)
            if len(s) != len(t):
                raise ValueError("sources must have one entry per triangle")
            object.__setattr__(self, "sources", _readonly(s))

    @classmethod
    def empty(cls) -> "IndexedMesh":
        return cls(np.zeros((0, 3)), np.zeros((0, 3), dtype=np.int64))

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    def __len__(self):
        return self.n_triangles

    def triangle_points(self) -> np.ndarray:
        return self.vertices[self.triangles]

    def with_vertices(self, vertices) -> "IndexedMesh":
        """Same connectivity and provenance, new positions."""
        return IndexedMesh(vertices, self.triangles, self.keys, self.sources)

    @cached_property
    def _edge_data(self):
        t = self.triangles
        if len(t) == 0:
            return np.zeros((0, 2), dtype=np.int64), np.zeros(0, dtype=np.int64)
        half = np.stack([t, np.roll(t, -1, axis=1)], axis=-1).reshape(-1, 2)
        und = np.sort(half, axis=1)
        edges, counts = np.unique(und, axis=0, return_counts=True)
        return edges, counts

    @property
    def edges(self) -> np.ndarray:
        """Unique undirected edges as sorted index pairs, shape (E, 2)."""
        return self._edge_data[0]

    @property
    def edge_face_counts(self) -> np.ndarray:
        return self._edge_data[1]

    def valence(self) -> np.ndarray:
        """Number of triangles incident to each vertex."""
        return np.bincount(self.triangles.ravel(), minlength=self.n_vertices)

    def edge_lengths(self) -> np.ndarray:
        e = self.edges
        return np.linalg.norm(self.vertices[e[:, 1]] - self.vertices[e[:, 0]], axis=1)


def build_mesh(points, keys=None, sources=None, slots=None) -> IndexedMesh:
    """Weld a triangle soup into an :class:`IndexedMesh`.

    Parameters
    ----------
    points : (F, 3, 3) array
        Corner coordinates of each triangle, in winding order.
    keys : (F, 3, 3) int array, optional
        Lattice key of each corner.  When given, corners are welded by key;
        otherwise by exact coordinate equality.
    sources, slots : (F,) int arrays, optional
        Triangles are ordered by ``(source, slot)`` with a stable sort.

    Returns
    -------
    IndexedMesh
        Vertices sorted by key (or by coordinates when there are no keys).
    """
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 3, 3)
    n = len(pts)
    if n == 0:
        return IndexedMesh.empty() if keys is None else IndexedMesh(
            np.zeros((0, 3)), np.zeros((0, 3), dtype=np.int64),
            np.zeros((0, 3), dtype=np.int64), np.zeros(0, dtype=np.int64))
    if not np.all(np.isfinite(pts)):
        raise ValueError("triangle coordinates must be finite")

    src = None if sources is None else np.asarray(sources, dtype=np.int64).reshape(n)
    if src is not None or slots is not None:
        s0 = np.zeros(n, dtype=np.int64) if src is None else src
        s1 = np.zeros(n, dtype=np.int64) if slots is None else np.asarray(slots, dtype=np.int64).reshape(n)
        order = np.lexsort((s1, s0))
        pts = pts[order]
        if keys is not None:
            keys = np.asarray(keys)[order]
        if src is not None:
            src = src[order]

    if keys is not None:
        flat_keys = np.asarray(keys, dtype=np.int64).reshape(-1, 3)
        uniq, first, inv = np.unique(flat_keys, axis=0, return_index=True, return_inverse=True)
        verts = pts.reshape(-1, 3)[first]
    else:
        flat = pts.reshape(-1, 3) + 0.0  # folds -0.0 into 0.0
        uniq = None
        verts, inv = np.unique(flat, axis=0, return_inverse=True)
    tris = inv.reshape(-1, 3)

    bad = (tris[:, 0] == tris[:, 1]) | (tris[:, 1] == tris[:, 2]) | (tris[:, 0] == tris[:, 2])
    if bad.any():
        i = int(np.flatnonzero(bad)[0])
        where = f" from source {src[i]}" if src is not None else ""
        raise DegenerateTriangleError(
            f"{int(bad.sum())} triangle(s) with a repeated vertex; first is #{i}{where}: {tris[i].tolist()}")
    return IndexedMesh(verts, tris, uniq, src)


@dataclass(frozen=True)
class TopologyReport:
    V: int
    E: int
    F: int
    euler_char: int
    is_closed_manifold: bool
    bad_edges: list = field(default_factory=list)
    bad_vertices: list = field(default_factory=list)
    component_count: int = 0
    is_oriented: bool = True

    def to_dict(self) -> dict:
        return {
            "V": self.V, "E": self.E, "F": self.F,
            "eulerChar": self.euler_char,
            "isClosedManifold": self.is_closed_manifold,
            "badEdgeCount": len(self.bad_edges),
            "badVertexCount": len(self.bad_vertices),
            "componentCount": self.component_count,
            "isOriented": self.is_oriented,
        }


def _link_defects(mesh: IndexedMesh) -> np.ndarray:
    """Vertices whose link (the fan of opposite edges) is not one closed cycle."""
    t = mesh.triangles
    nv = mesh.n_vertices
    bad = np.ones(nv, dtype=bool)
    if len(t) == 0:
        return np.flatnonzero(bad)
    # for every corner, the opposite edge (u, w) is a link edge of the corner vertex
    centre = t.reshape(-1)
    u = np.roll(t, -1, axis=1).reshape(-1)
    w = np.roll(t, -2, axis=1).reshape(-1)
    ends = np.concatenate([np.stack([centre, u], 1), np.stack([centre, w], 1)])
    nodes, node_of, degree = np.unique(ends, axis=0, return_inverse=True, return_counts=True)
    node_of = node_of.reshape(-1)
    m = len(centre)
    graph = coo_matrix((np.ones(m), (node_of[:m], node_of[m:])), shape=(len(nodes), len(nodes)))
    _, label = connected_components(graph, directed=False)

    owner = nodes[:, 0]
    has_link = np.zeros(nv, dtype=bool)
    has_link[owner] = True
    deg_ok = np.ones(nv, dtype=bool)
    np.logical_and.at(deg_ok, owner, degree == 2)
    pairs = np.unique(np.stack([owner, label], 1), axis=0)
    cycles = np.bincount(pairs[:, 0], minlength=nv)
    good = has_link & deg_ok & (cycles == 1)
    return np.flatnonzero(~good)


def analyze_topology(mesh: IndexedMesh) -> TopologyReport:
    """Counts, Euler characteristic, manifold defects and component count."""
    edges, counts = mesh.edges, mesh.edge_face_counts
    V, E, F = mesh.n_vertices, len(edges), mesh.n_triangles
    bad_edges = [tuple(int(x) for x in e) for e in edges[counts != 2]]
    bad_vertices = [int(v) for v in _link_defects(mesh)]
    if V:
        graph = coo_matrix((np.ones(E), (edges[:, 0], edges[:, 1])), shape=(V, V))
        ncomp = int(connected_components(graph, directed=False)[0])
    else:
        ncomp = 0
    # consistent orientation: every directed half-edge occurs at most once
    t = mesh.triangles
    if F:
        half = np.stack([t, np.roll(t, -1, axis=1)], axis=-1).reshape(-1, 2)
        oriented = len(np.unique(half, axis=0)) == len(half)
    else:
        oriented = True
    return TopologyReport(
        V=V, E=E, F=F, euler_char=V - E + F,
        is_closed_manifold=not bad_edges and not bad_vertices,
        bad_edges=bad_edges, bad_vertices=bad_vertices,
        component_count=ncomp, is_oriented=bool(oriented),
    )


def _fmt_rows(prefix, rows, fmt):
    return "".join(prefix + (fmt % tuple(r)) + "\n" for r in rows.tolist())


def mesh_text(mesh: IndexedMesh, fmt: str = "obj") -> str:
    fmt = fmt.lower()
    if fmt == "obj":
        return (_fmt_rows("v ", mesh.vertices, "%.9g %.9g %.9g")
                + _fmt_rows("f ", mesh.triangles + 1, "%d %d %d"))
    if fmt == "ply":
        header = (
            "ply\nformat ascii 1.0\n"
            f"element vertex {mesh.n_vertices}\n"
            "property float x\nproperty float y\nproperty float z\n"
            f"element face {mesh.n_triangles}\n"
            "property list uchar int vertex_indices\nend_header\n"
        )
        return (header + _fmt_rows("", mesh.vertices, "%.9g %.9g %.9g")
                + _fmt_rows("3 ", mesh.triangles, "%d %d %d"))
    raise ValueError(f"unknown mesh format {fmt!r} (expected 'obj' or 'ply')")


def write_mesh(mesh: IndexedMesh, path, fmt: str | None = None) -> None:
    """Write ``mesh`` as ASCII OBJ or PLY; the format defaults to the file suffix."""
    path = os.fspath(path)
    if fmt is None:
        ext = os.path.splitext(path)[1].lower().lstrip(".")
        fmt = ext if ext in ("obj", "ply") else "obj"
    text = mesh_text(mesh, fmt)
    try:
        with open(path, "w", encoding="ascii", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise TetrameshError(f"cannot write mesh to {path}: {exc.strerror or exc}") from exc
