"""Normal-surface extraction through tiling edge midpoints.

Every tiling vertex is classified by the sign of f (zero counts as
positive).  A tetrahedron whose four signs differ contributes one
elementary disk: a triangle cutting off a single vertex, or a
quadrilateral separating two pairs, split into two triangles along a
fixed diagonal.  Disk corners sit at edge midpoints, labelled

    K = AB, L = AC, M = AD, N = BC, P = CD, Q = BD.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ._parallel import chunk_bounds, pmap
from .field import ScalarField
from .errors import FieldError
from .mesh import IndexedMesh, build_mesh
from .tiling import (EDGE_LABELS, EDGE_VERTICES, Box, GoldbergShape, columns_for_box,
                     lattice_keys, tetra_lattice)

# triangle cutting off one vertex, by vertex index A..D
SINGLE_DISKS = {0: "KLM", 1: "KNQ", 2: "LNP", 3: "MPQ"}
# quadrilateral split by the pair containing A: {A,B}|{C,D}, {A,C}|{B,D}, {A,D}|{B,C}
QUAD_DISKS = {
    1: ("LMN", "MQN"),                      # LMNQ, diagonal MN
    2: ("MKN", "MPN"),                      # KMPN, diagonal MN
    3: {"LQ": ("KLQ", "LPQ"), "KP": ("KLP", "KPQ")},  # KLPQ
}

VALUE_CHUNK = 1 << 16
COLUMN_CHUNK = 256


@dataclass(frozen=True)
class SignPattern:
    """Signs of f at A, B, C, D, with zero counted as positive."""

    positive: tuple[bool, bool, bool, bool]

    @property
    def code(self) -> int:
        return sum(1 << v for v, s in enumerate(self.positive) if s)

    @property
    def kind(self) -> str:
        n = sum(self.positive)
        return "empty" if n in (0, 4) else ("triangle" if n in (1, 3) else "quad")

    def disk(self, diagonal: str = "KP") -> list[str]:
        """Midpoint-label triangles emitted for this pattern (unoriented)."""
        return [t for t, _ in _disk_labels(self.code, diagonal)]

    def separated(self) -> tuple[str, ...]:
        """Vertices on the smaller side (for quads, the side containing A)."""
        pos = self.positive
        n = sum(pos)
        if n in (0, 4):
            return ()
        if n in (1, 3):
            odd = [v for v in range(4) if pos[v] == (n == 1)]
            return ("ABCD"[odd[0]],)
        return tuple("ABCD"[v] for v in range(4) if pos[v] == pos[0])


def classify(values) -> SignPattern:
    """Sign pattern of four field values."""
    v = np.asarray(values, dtype=np.float64).reshape(-1)
    if v.shape != (4,):
        raise ValueError("classify needs exactly four values")
    if np.isnan(v).any():
        raise ValueError("cannot classify NaN field values")
    return SignPattern(tuple(bool(x >= 0) for x in v))


def _disk_labels(code: int, diagonal: str):
    """[(labels, slot), ...] for a sign code, before orientation."""
    pos = [(code >> v) & 1 for v in range(4)]
    n = sum(pos)
    if n in (0, 4):
        return []
    if n in (1, 3):
        v = next(i for i in range(4) if pos[i] == (1 if n == 1 else 0))
        return [(SINGLE_DISKS[v], v + 1)]
    partner = next(i for i in (1, 2, 3) if pos[i] == pos[0])
    tris = QUAD_DISKS[partner]
    if isinstance(tris, dict):
        tris = tris[diagonal]
    return [(tris[0], 5), (tris[1], 6)]


@lru_cache(maxsize=None)
def disk_table(a: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Oriented disk table for shape parameter ``a``.

    Returns
    -------
    labels : (2, 16, 2, 3) int array
        Midpoint indices (0..5 for K..Q) of up to two triangles, indexed by
        parity and sign code; wound so the normal points toward the
        positive vertices.
    slots : (2, 16, 2) int array
    counts : (16,) int array of triangles per code
    """
    shape = GoldbergShape(a)
    diagonal = shape.quad_diagonal
    labels = np.zeros((2, 16, 2, 3), dtype=np.int64)
    slots = np.zeros((2, 16, 2), dtype=np.int64)
    counts = np.zeros(16, dtype=np.int64)
    for parity in (0, 1):
        verts = shape.canonical_vertices()
        if parity:
            verts[:, 1] *= -1.0
        mids = np.array([(verts[p] + verts[q]) / 2 for p, q in EDGE_VERTICES])
        for code in range(16):
            entries = _disk_labels(code, diagonal)
            counts[code] = len(entries)
            pos = np.array([(code >> v) & 1 for v in range(4)], dtype=bool)
            for t, (tri, slot) in enumerate(entries):
                idx = [EDGE_LABELS.index(c) for c in tri]
                p0, p1, p2 = mids[idx]
                normal = np.cross(p1 - p0, p2 - p0)
                toward = verts[pos].mean(axis=0) - verts[~pos].mean(axis=0)
                if normal @ toward < 0:
                    idx = [idx[0], idx[2], idx[1]]
                labels[parity, code, t] = idx
                slots[parity, code, t] = slot
    return labels, slots, counts


@dataclass(frozen=True)
class NormalSurface:
    """Extracted mesh plus, per vertex, the tiling edge it lies on.

    ``edge_keys[v]`` holds the lattice keys of the edge endpoints (smaller
    key first) and ``edge_values[v]`` the field values there.
    """

    mesh: IndexedMesh
    shape: GoldbergShape
    edge_keys: np.ndarray
    edge_values: np.ndarray

    def edge_points(self) -> np.ndarray:
        return self.shape.key_points(self.edge_keys)


class _VertexTable:
    """Field values at every lattice vertex used by a set of columns."""

    def __init__(self, field, shape, cs, workers):
        cols = cs.columns
        self.i0 = int(cols[:, 0].min())
        self.j0 = int(cols[:, 1].min())
        self.m0 = (cs.k_lo - 2) // 3
        ni = int(cols[:, 0].max()) + 2 - self.i0
        nj = int(cols[:, 1].max()) + 2 - self.j0
        nm = (cs.k_hi + 3) // 3 + 1 - self.m0
        self.dims = (ni, nj, nm)
        total = ni * nj * nm

        def run(bounds):
            flat = np.arange(*bounds, dtype=np.int64)
            ii, jj, mm = np.unravel_index(flat, self.dims)
            ci, cj = ii + self.i0, jj + self.j0
            h = (ci - cj) % 3 + 3 * (mm + self.m0)
            pts = shape.key_points(lattice_keys(np.stack([ci, cj, h], axis=1)))
            return field.value(pts)

        values = np.concatenate(pmap(run, chunk_bounds(total, VALUE_CHUNK), workers))
        if not np.all(np.isfinite(values)):
            raise FieldError(f"{field.describe()} is not finite on the tiling vertices")
        self.values = values.reshape(self.dims)

    def lookup(self, lattice):
        ci, cj, h = lattice[..., 0], lattice[..., 1], lattice[..., 2]
        m = (h - (ci - cj) % 3) // 3
        return self.values[ci - self.i0, cj - self.j0, m - self.m0]


def extract(field: ScalarField, shape: GoldbergShape, box: Box, workers=None) -> NormalSurface:
    """Run the midpoint extraction and keep per-vertex edge data."""
    cs = columns_for_box(shape, box)
    empty = NormalSurface(build_mesh(np.zeros((0, 3, 3)), keys=np.zeros((0, 3, 3))), shape,
                          np.zeros((0, 2, 3), dtype=np.int64), np.zeros((0, 2)))
    if len(cs) == 0:
        return empty
    table = _VertexTable(field, shape, cs, workers)
    nk = cs.n_levels
    ks = np.arange(cs.k_lo, cs.k_hi + 1, dtype=np.int64)
    weights = 1 << np.arange(4)

    def run(bounds):
        c0, c1 = bounds
        cols = np.repeat(cs.columns[c0:c1], nk, axis=0)
        kk = np.tile(ks, c1 - c0)
        lat = tetra_lattice(cols, kk)
        vals = table.lookup(lat)
        code = (vals >= 0) @ weights
        hit = (code != 0) & (code != 15)
        rank = np.arange(c0 * nk, c1 * nk, dtype=np.int64)[hit]
        return rank, code[hit], cols[hit, 2], lat[hit], vals[hit]

    parts = pmap(run, chunk_bounds(len(cs.columns), COLUMN_CHUNK), workers)
    rank, code, parity, lat, vals = (np.concatenate([p[i] for p in parts]) for i in range(5))
    if len(rank) == 0:
        return empty

    labels, slots, counts = disk_table(shape.a)
    per = counts[code]
    owner = np.repeat(np.arange(len(rank)), per)
    sub = np.arange(len(owner)) - np.repeat(np.cumsum(per) - per, per)
    tri_labels = labels[parity[owner], code[owner], sub]  # (F, 3)
    tri_slots = slots[parity[owner], code[owner], sub]

    vkeys = lattice_keys(lat)  # (T, 4, 3)
    ends = np.array(EDGE_VERTICES)[tri_labels]  # (F, 3, 2)
    end_keys = vkeys[owner[:, None, None], ends]  # (F, 3, 2, 3)
    end_vals = vals[owner[:, None, None], ends]  # (F, 3, 2)
    corner_keys = end_keys.sum(axis=2) // 2
    points = shape.key_points(corner_keys)
    mesh = build_mesh(points, keys=corner_keys, sources=rank[owner], slots=tri_slots)

    # edge data per vertex; endpoints put in key order so any occurrence agrees
    nv = mesh.n_vertices
    first = np.empty(nv, dtype=np.int64)
    flat_v = mesh.triangles.reshape(-1)
    first[flat_v[::-1]] = np.arange(len(flat_v) - 1, -1, -1)
    ek = end_keys.reshape(-1, 2, 3)[first]
    ev = end_vals.reshape(-1, 2)[first]
    swap = _lex_less(ek[:, 1], ek[:, 0])
    ek = np.where(swap[:, None, None], ek[:, ::-1], ek)
    ev = np.where(swap[:, None], ev[:, ::-1], ev)
    return NormalSurface(mesh, shape, ek, ev)


def _lex_less(p, q):
    """Row-wise lexicographic p < q for integer (n, 3) arrays."""
    lt = p < q
    eq = p == q
    return lt[:, 0] | (eq[:, 0] & (lt[:, 1] | (eq[:, 1] & lt[:, 2])))


def mid_normal(field: ScalarField, shape: GoldbergShape, box: Box, workers=None) -> IndexedMesh:
    """Mesh of the zero set of ``field`` through tiling edge midpoints.

    Triangles are wound so their normals point toward positive f.
    """
    return extract(field, shape, box, workers).mesh


def default_shape_param() -> float:
    return math.sqrt(3.0) / 4.0
