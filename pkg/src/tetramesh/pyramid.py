"""All-equilateral meshes from cube boundaries.

Cubes of side e whose corners see both signs of f are kept, cut into 27
cells of side e/3, and grown until the cell set is well composed (no two
cells meet only along an edge or a vertex).  Each boundary face of the cell
set is cut into four squares of side e/6, and every square is replaced by
the four lateral faces of a square pyramid whose apex sits sqrt(2) e/12
off the square, so all triangle sides equal e/6.

Apex sides are chosen so that pyramids on two squares meeting at a right
angle never point into the same 90 degree wedge.  These are two-variable
clauses, solved exactly as a 2-SAT instance.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import networkx as nx
import numpy as np
from scipy.spatial import cKDTree

from .errors import OrientationConflictError
from .field import ScalarField
from .mesh import IndexedMesh, build_mesh
from .tiling import Box

APEX_FACTOR = math.sqrt(2.0) / 12.0
_PAD = 2
# for normal axis n, in-plane axes (u, v) with u x v = +n
_PLANE_AXES = {0: (1, 2), 1: (2, 0), 2: (0, 1)}


def _critical_blocks(occ: np.ndarray):
    """Critical configurations of a 3D binary picture.

    Returns ``(edges, vertices)``.  ``edges[axis]`` marks 2x2 blocks (indexed
    by their lowest cell) orthogonal to ``axis`` whose filled cells are
    diagonal; ``vertices`` marks 2x2x2 blocks whose only two filled (or only
    two empty) cells are antipodal.
    """
    o = occ.astype(np.int8)
    edges = []
    for axis in range(3):
        u, v = [d for d in range(3) if d != axis]
        a = _shift(o, {u: 0, v: 0})
        b = _shift(o, {u: 1, v: 0})
        c = _shift(o, {u: 0, v: 1})
        d = _shift(o, {u: 1, v: 1})
        edges.append((a == d) & (b == c) & (a != b))
    cube = [_shift(o, {0: i, 1: j, 2: k}) for i in (0, 1) for j in (0, 1) for k in (0, 1)]
    total = sum(cube)
    vertices = np.zeros(cube[0].shape, dtype=bool)
    for idx in range(4):
        p, q = cube[idx], cube[7 - idx]  # antipodal pair
        vertices |= ((total == 2) & (p == 1) & (q == 1)) | ((total == 6) & (p == 0) & (q == 0))
    return edges, vertices


def _critical(occ: np.ndarray) -> np.ndarray:
    """Cells belonging to some critical block."""
    edges, vertices = _critical_blocks(occ)
    mark = np.zeros_like(occ, dtype=bool)
    for axis, bad in enumerate(edges):
        u, v = [d for d in range(3) if d != axis]
        for du in (0, 1):
            for dv in (0, 1):
                _or_shifted(mark, bad, {u: du, v: dv})
    for i in (0, 1):
        for j in (0, 1):
            for k in (0, 1):
                _or_shifted(mark, vertices, {0: i, 1: j, 2: k})
    return mark


def _shift(arr, offsets):
    """View of ``arr`` shifted by 0/1 along the given axes (shape shrinks by one)."""
    sl = []
    for ax in range(arr.ndim):
        if ax in offsets:
            sl.append(slice(offsets[ax], arr.shape[ax] - 1 + offsets[ax]))
        else:
            sl.append(slice(0, arr.shape[ax] - 1))
    return arr[tuple(sl)]


def _or_shifted(mark, bad, offsets):
    sl = []
    for ax in range(mark.ndim):
        off = offsets.get(ax, 0)
        sl.append(slice(off, mark.shape[ax] - 1 + off))
    mark[tuple(sl)] |= bad


@dataclass(frozen=True)
class PyramidResult:
    mesh: IndexedMesh
    corners: np.ndarray  # (S, 4, 3) square corners, counter-clockwise about the outward normal
    apexes: np.ndarray  # (S, 3)
    outward: np.ndarray  # (S,) True where the apex points away from the cell set
    e: float
    coarse_cells: int
    fine_cells: int
    repair_rounds: int


def _cell_sets(field, box, n):
    e = float(np.max(box.extent)) / n
    dims = np.ceil(box.extent / e - 1e-9).astype(int)
    axes = [box.lo[d] + e * np.arange(dims[d] + 1) for d in range(3)]
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
    pos = field.value(grid) >= 0
    corners = [_shift(pos, {0: i, 1: j, 2: k}) for i in (0, 1) for j in (0, 1) for k in (0, 1)]
    allpos = np.logical_and.reduce(corners)
    anypos = np.logical_or.reduce(corners)
    coarse = anypos & ~allpos
    return e, coarse


def _fine_cells(coarse):
    """Subdivide, add fine cells at singular edges and vertices, then repair.

    Singular features of the coarse set get the fine cells touching them;
    afterwards every fine cell of a remaining critical block is filled
    until the picture is well composed.
    """
    occ_c = np.pad(coarse, 1)
    fine = np.pad(np.repeat(np.repeat(np.repeat(coarse, 3, 0), 3, 1), 3, 2), _PAD)
    edges, vertices = _critical_blocks(occ_c)
    # padded coarse vertex index w maps to fine vertex index 3 (w - 1) + _PAD
    for axis, bad in enumerate(edges):
        u, v = [d for d in range(3) if d != axis]
        for b in np.argwhere(bad):
            lo = np.empty(3, dtype=np.int64)
            hi = np.empty(3, dtype=np.int64)
            lo[axis] = 3 * (b[axis] - 1) + _PAD
            hi[axis] = lo[axis] + 3
            for d in (u, v):
                w = 3 * b[d] + _PAD
                lo[d], hi[d] = w - 1, w + 1
            fine[lo[0]:hi[0], lo[1]:hi[1], lo[2]:hi[2]] = True
    for b in np.argwhere(vertices):
        w = 3 * b + _PAD
        fine[w[0] - 1:w[0] + 1, w[1] - 1:w[1] + 1, w[2] - 1:w[2] + 1] = True
    rounds = 0
    while True:
        bad = _critical(fine) & ~fine
        if not bad.any():
            break
        fine |= bad
        rounds += 1
    return fine, rounds


def _boundary_squares(fine):
    """Sub-squares of side e/6 on the boundary of the fine cell set.

    Returns corner coordinates in units of e/6 (relative to the padded
    grid), the outward axis and sign for each square.
    """
    corners, normals = [], []
    for axis in range(3):
        u, v = _PLANE_AXES[axis]
        a = _shift(fine, {axis: 0})
        b = _shift(fine, {axis: 1})
        for sign, mask in ((1, a & ~b), (-1, ~a & b)):
            cells = np.argwhere(mask)  # face between cell c and c + axis
            if len(cells) == 0:
                continue
            base = 2 * cells
            base[:, axis] += 2
            eu = np.zeros(3, dtype=np.int64)
            ev = np.zeros(3, dtype=np.int64)
            eu[u] = 1
            ev[v] = 1
            if sign < 0:
                eu, ev = ev, eu
            for su in (0, 1):
                for sv in (0, 1):
                    p0 = base + (su * eu if sign > 0 else sv * ev) + (sv * ev if sign > 0 else su * eu)
                    quad = np.stack([p0, p0 + eu, p0 + eu + ev, p0 + ev], axis=1)
                    corners.append(quad)
                    nrm = np.zeros((len(cells), 3), dtype=np.int64)
                    nrm[:, axis] = sign
                    normals.append(nrm)
    if not corners:
        return np.zeros((0, 4, 3), dtype=np.int64), np.zeros((0, 3), dtype=np.int64)
    corners = np.concatenate(corners)
    normals = np.concatenate(normals)
    centre2 = corners.sum(axis=1)  # 4 x centre, integer
    order = np.lexsort((normals[:, 2], normals[:, 1], normals[:, 0],
                        centre2[:, 2], centre2[:, 1], centre2[:, 0]))
    return corners[order], normals[order]


def _fold_clauses(corners, normals):
    """Pairs of squares meeting at a right angle along an edge.

    Returns (i, j, convex) rows; ``convex`` means the cell set fills the
    90 degree side, so the two apexes must not both point inward.
    """
    n = len(corners)
    edge_rows = []
    for s in range(4):
        p = corners[:, s]
        q = corners[:, (s + 1) % 4]
        lo = np.minimum(p, q)
        hi = np.maximum(p, q)
        edge_rows.append(np.concatenate([lo, hi, np.arange(n)[:, None]], axis=1))
    rows = np.concatenate(edge_rows)
    rows = rows[np.lexsort(rows[:, ::-1].T)]
    keys = rows[:, :6]
    same = np.all(keys[1:] == keys[:-1], axis=1)
    starts = np.flatnonzero(np.concatenate([[True], ~same]))
    counts = np.diff(np.concatenate([starts, [len(rows)]]))
    if np.any(counts != 2):
        raise OrientationConflictError("cell boundary is not a closed manifold of squares")
    i = rows[starts, 6]
    j = rows[starts + 1, 6]
    perp = np.einsum("ij,ij->i", normals[i], normals[j]) == 0
    i, j = i[perp], j[perp]
    ci = corners[i].sum(axis=1)
    cj = corners[j].sum(axis=1)
    convex = np.einsum("ij,ij->i", cj - ci, normals[i]) < 0
    return np.stack([i, j, convex.astype(np.int64)], axis=1)


def _solve_2sat(n, clauses):
    """Assign True (outward) / False (inward) to n squares.

    Convex folds forbid (in, in); concave folds forbid (out, out).
    """
    g = nx.DiGraph()
    g.add_nodes_from(range(2 * n))  # 2i: out, 2i + 1: in

    def lit(i, out):
        return 2 * i + (0 if out else 1)

    for i, j, convex in clauses.tolist():
        if convex:
            # (out_i or out_j): in_i -> out_j, in_j -> out_i
            g.add_edge(lit(i, False), lit(j, True))
            g.add_edge(lit(j, False), lit(i, True))
        else:
            g.add_edge(lit(i, True), lit(j, False))
            g.add_edge(lit(j, True), lit(i, False))
    cond = nx.condensation(g)
    comp = cond.graph["mapping"]
    topo = {c: r for r, c in enumerate(nx.lexicographical_topological_sort(cond))}
    out = np.zeros(n, dtype=bool)
    conflicts = []
    for i in range(n):
        a, b = comp[lit(i, True)], comp[lit(i, False)]
        if a == b:
            conflicts.append(i)
        out[i] = topo[a] > topo[b]
    if conflicts:
        raise OrientationConflictError(
            f"no consistent apex sides for {len(conflicts)} squares (first: #{conflicts[0]})")
    return out


def build_pyramids(field: ScalarField, n: int, box: Box | None = None) -> PyramidResult:
    """Run the full construction and keep the pyramid geometry for inspection."""
    if n < 1:
        raise ValueError(f"resolution must be positive, got {n}")
    box = Box.unit() if box is None else box
    e, coarse = _cell_sets(field, box, n)
    if not coarse.any():
        empty = np.zeros((0, 4, 3))
        return PyramidResult(IndexedMesh.empty(), empty, np.zeros((0, 3)), np.zeros(0, bool),
                             e, 0, 0, 0)
    fine, rounds = _fine_cells(coarse)
    corners, normals = _boundary_squares(fine)
    clauses = _fold_clauses(corners, normals)
    outward = _solve_2sat(len(corners), clauses)

    unit = e / 6.0
    origin = np.asarray(box.lo) - 2 * _PAD * unit
    cpts = origin + corners * unit
    centre = cpts.mean(axis=1)
    sign = np.where(outward, 1.0, -1.0)
    apex = centre + (sign * APEX_FACTOR * e)[:, None] * normals
    tri = np.stack([np.stack([cpts[:, s], cpts[:, (s + 1) % 4], apex], axis=1) for s in range(4)], axis=1)
    src = np.repeat(np.arange(len(corners)), 4)
    slots = np.tile(np.arange(4), len(corners))
    mesh = build_mesh(tri.reshape(-1, 3, 3), sources=src, slots=slots)
    return PyramidResult(mesh, cpts, apex, outward, e, int(coarse.sum()),
                         int(fine.sum()), rounds)


def pyramid_mesh(field: ScalarField, n: int, box: Box | None = None) -> IndexedMesh:
    """Equilateral pyramid mesh of side e/6 around the zero set of ``field``."""
    return build_pyramids(field, n, box).mesh


def _solids(corners, apexes):
    """(S, 5, 3) vertex arrays: four base corners then the apex."""
    return np.concatenate([corners, apexes[:, None]], axis=1)


def _axes(solid):
    base = solid[:, :4]
    apex = solid[:, 4:5]
    base_edges = np.roll(base, -1, axis=1) - base
    side_edges = apex - base
    normals = [np.cross(base_edges[:, 0], base_edges[:, 1])[:, None]]
    normals.append(np.cross(base_edges, side_edges))
    return np.concatenate(normals, axis=1), np.concatenate([base_edges, side_edges], axis=1)


def interior_overlaps(corners, apexes, e: float, tol: float = 1e-9) -> np.ndarray:
    """Pairs of pyramids whose interiors intersect (separating-axis test).

    Returns an (m, 2) array of offending index pairs; empty when the
    pyramids only touch along shared faces, edges or vertices.
    """
    solids = _solids(np.asarray(corners, float), np.asarray(apexes, float))
    if len(solids) < 2:
        return np.zeros((0, 2), dtype=np.int64)
    centre = solids[:, :4].mean(axis=1)
    reach = np.max(np.linalg.norm(solids - centre[:, None], axis=2))
    pairs = np.array(sorted(cKDTree(centre).query_pairs(2 * reach * (1 + 1e-9))), dtype=np.int64)
    if len(pairs) == 0:
        return np.zeros((0, 2), dtype=np.int64)
    fn, ed = _axes(solids)
    bad = []
    for lo in range(0, len(pairs), 4096):
        pr = pairs[lo:lo + 4096]
        P, Q = solids[pr[:, 0]], solids[pr[:, 1]]
        cross = np.cross(ed[pr[:, 0]][:, :, None, :], ed[pr[:, 1]][:, None, :, :]).reshape(len(pr), -1, 3)
        axes = np.concatenate([fn[pr[:, 0]], fn[pr[:, 1]], cross], axis=1)
        norm = np.linalg.norm(axes, axis=2, keepdims=True)
        valid = norm[..., 0] > 1e-12 * e * e
        axes = axes / np.where(norm > 0, norm, 1.0)
        pp = np.einsum("pav,pkv->pak", axes, P)
        qq = np.einsum("pav,pkv->pak", axes, Q)
        gap = np.maximum(qq.min(2) - pp.max(2), pp.min(2) - qq.max(2))
        gap = np.where(valid, gap, -np.inf)
        separated = gap.max(axis=1) >= -tol * e
        bad.append(pr[~separated])
    return np.concatenate(bad)
