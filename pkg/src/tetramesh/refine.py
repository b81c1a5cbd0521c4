"""Vertex sliding, valence-4 collapse and gradient projection."""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np

from .errors import NonManifoldError, VanishingGradientError
from .field import GRADIENT_FLOOR, ScalarField
from .mesh import IndexedMesh
from .midnormal import extract
from .tiling import Box, GoldbergShape

GRADNORMAL_A = math.sqrt(2.0) / 4.0


def slide_positions(surface, t: float) -> np.ndarray:
    """Move each vertex along its tiling edge toward the linear root of f.

    The root fraction ``s = f(P) / (f(P) - f(Q))`` is clamped to
    ``[1/2 - t, 1/2 + t]``; at ``s = 1/2`` the midpoint is kept bit for bit.
    """
    if not 0.0 <= t <= 0.5:
        raise ValueError(f"slide fraction t must lie in [0, 1/2], got {t}")
    ends = surface.edge_points()
    fp, fq = surface.edge_values[:, 0], surface.edge_values[:, 1]
    s = np.clip(fp / (fp - fq), 0.5 - t, 0.5 + t)
    mid = surface.mesh.vertices
    moved = mid + (s - 0.5)[:, None] * (ends[:, 1] - ends[:, 0])
    return np.where((s == 0.5)[:, None], mid, moved)


def slid_normal(field: ScalarField, shape: GoldbergShape, box: Box, t: float, workers=None) -> IndexedMesh:
    """Midpoint mesh with vertices slid toward the surface by at most ``t`` of an edge."""
    if not 0.0 <= t <= 0.5:
        raise ValueError(f"slide fraction t must lie in [0, 1/2], got {t}")
    surface = extract(field, shape, box, workers)
    return surface.mesh.with_vertices(slide_positions(surface, t))


@dataclass(frozen=True)
class CollapseRecord:
    vertex: int
    removed_triangles: tuple[int, int, int, int]
    corners: tuple[int, int, int, int]
    diagonal: tuple[int, int]


def _link_cycle(v, tris, incident):
    """Corners of the star of ``v`` in cyclic order, starting at the smallest index.

    Returns ``None`` when ``v`` is a boundary vertex (its link is a path).
    """
    nxt = {}
    for t in incident:
        a, b, c = tris[t]
        if a == v:
            x, y = b, c
        elif b == v:
            x, y = c, a
        else:
            x, y = a, b
        if x in nxt:
            raise NonManifoldError(f"vertex {v} has a non-manifold star")
        nxt[x] = y
    if set(nxt.values()) != set(nxt):
        if len(set(nxt.values())) == len(nxt):
            return None
        raise NonManifoldError(f"vertex {v} has a non-manifold star")
    start = min(nxt)
    cycle = [start]
    while nxt[cycle[-1]] != start:
        cycle.append(nxt[cycle[-1]])
    if len(cycle) != len(nxt):
        raise NonManifoldError(f"link of vertex {v} is not a single cycle")
    return cycle


def _split_min_angle(verts, w, start):
    """Smallest angle of the two triangles made by splitting quad ``w`` at ``w[start]``."""
    q = verts[[w[start], w[start + 1], w[(start + 2) % 4], w[(start + 3) % 4]]]
    worst = 180.0
    for tri in (q[[0, 1, 2]], q[[2, 3, 0]]):
        for i in range(3):
            u = tri[(i + 1) % 3] - tri[i]
            v = tri[(i + 2) % 3] - tri[i]
            c = u @ v / (np.linalg.norm(u) * np.linalg.norm(v))
            worst = min(worst, math.degrees(math.acos(max(-1.0, min(1.0, c)))))
    return round(worst, 9)


def collapse_valence4(mesh: IndexedMesh, cascade: bool = True) -> tuple[IndexedMesh, list[CollapseRecord]]:
    """Remove every vertex with four incident triangles.

    Vertices are visited in ascending index order from a heap; when a
    collapse changes the valence of a corner, that corner is pushed again
    and re-examined at its current valence.  The quad left behind is split
    by the diagonal whose endpoints have the smaller valence sum; ties go
    to the split whose two triangles have the larger minimum angle, then
    to the smaller sorted lattice key pair (index pair when keys are
    absent).  If the chosen diagonal already exists as an
    edge the other one is used, and if both exist the vertex is kept.
    Boundary vertices are never removed.

    With ``cascade=False`` only vertices that already had valence 4 in the
    input are candidates.
    """
    tris = [tuple(int(x) for x in t) for t in mesh.triangles]
    alive = [True] * len(tris)
    nv = mesh.n_vertices
    incident = [set() for _ in range(nv)]
    for t, tri in enumerate(tris):
        for v in tri:
            incident[v].add(t)
    keys = None if mesh.keys is None else [tuple(int(x) for x in k) for k in mesh.keys]

    def rank(u, w):
        if keys is not None:
            return tuple(sorted((keys[u], keys[w])))
        return tuple(sorted((u, w)))

    def has_edge(u, w):
        return not incident[u].isdisjoint(incident[w])

    verts = mesh.vertices
    removed = [False] * nv
    records = []
    new_sources = []
    eligible = [len(s) == 4 for s in incident] if not cascade else [True] * nv
    heap = list(range(nv))
    heapq.heapify(heap)
    while heap:
        v = heapq.heappop(heap)
        if removed[v] or not eligible[v] or len(incident[v]) != 4:
            continue
        star = sorted(incident[v])
        w = _link_cycle(v, tris, star)
        if w is None:
            continue
        options = [(w[0], w[2]), (w[1], w[3])]
        score = [len(incident[p]) + len(incident[q]) for p, q in options]
        if score[0] == score[1]:
            # equal valences: prefer the better-shaped split
            score = [-_split_min_angle(verts, w, i) for i in range(2)]
        order = sorted(range(2), key=lambda i: (score[i], rank(*options[i])))
        chosen = next((options[i] for i in order if not has_edge(*options[i])), None)
        if chosen is None:
            continue
        p, q = chosen
        # two new triangles, wound like the removed fan
        pos = w.index(p)
        cyc = w[pos:] + w[:pos]  # p, o1, q, o2
        new = [(cyc[0], cyc[1], cyc[2]), (cyc[2], cyc[3], cyc[0])]
        for t in star:
            alive[t] = False
            for x in tris[t]:
                incident[x].discard(t)
        for tri in new:
            tris.append(tri)
            alive.append(True)
            tid = len(tris) - 1
            for x in tri:
                incident[x].add(tid)
            new_sources.append(-1)
        removed[v] = True
        records.append(CollapseRecord(v, tuple(star), tuple(w), (p, q)))
        for x in w:
            heapq.heappush(heap, x)

    if not records:
        return mesh, []
    keep_v = np.flatnonzero(~np.asarray(removed))
    remap = np.full(nv, -1, dtype=np.int64)
    remap[keep_v] = np.arange(len(keep_v))
    live = np.flatnonzero(np.asarray(alive))
    tri_arr = remap[np.asarray(tris, dtype=np.int64)[live]]
    sources = None
    if mesh.sources is not None:
        src = np.concatenate([mesh.sources, np.asarray(new_sources, dtype=np.int64)])
        sources = src[live]
    new_keys = None if mesh.keys is None else mesh.keys[keep_v]
    return IndexedMesh(mesh.vertices[keep_v], tri_arr, new_keys, sources), records


def grad_project(mesh: IndexedMesh, field: ScalarField, iterate: bool = False,
                 tol: float = 1e-14, max_steps: int = 10) -> IndexedMesh:
    """Move each vertex by ``-f(v) grad f(v) / |grad f(v)|^2``.

    One step by default.  With ``iterate=True`` the step is repeated until
    ``|f| <= tol`` at every vertex or ``max_steps`` steps were taken.
    """
    v = np.array(mesh.vertices)
    for _ in range(max_steps if iterate else 1):
        f = field.value(v)
        if iterate and np.all(np.abs(f) <= tol):
            break
        g = field.gradient(v)
        g2 = np.einsum("ij,ij->i", g, g)
        small = ~(np.sqrt(g2) >= GRADIENT_FLOOR)
        if small.any():
            i = int(np.flatnonzero(small)[0])
            raise VanishingGradientError(
                f"gradient vanishes at vertex {i} ({v[i].tolist()}); cannot project", vertex=i)
        v = v - (f / g2)[:, None] * g
    return mesh.with_vertices(v)


def grad_normal(field: ScalarField, box: Box, e: float, workers=None, a: float = GRADNORMAL_A,
                iterate: bool = False, cascade: bool = True) -> IndexedMesh:
    """Midpoint mesh at a = sqrt(2)/4, valence-4 collapse, then gradient projection."""
    mesh = extract(field, GoldbergShape(a, e), box, workers).mesh
    mesh, _ = collapse_valence4(mesh, cascade=cascade)
    return grad_project(mesh, field, iterate=iterate)
