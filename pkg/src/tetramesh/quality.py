"""Mesh quality: angles, edges, topology, Hausdorff estimates and pass flags."""
from __future__ import annotations

import itertools
import json
import math
import os
from dataclasses import dataclass, field as dc_field
from functools import lru_cache

import numpy as np

from .errors import FieldError, TetrameshError
from .field import GRADIENT_FLOOR, ScalarField
from .mesh import IndexedMesh, TopologyReport, analyze_topology
from .tiling import GoldbergShape

DEGENERATE_AREA = 1e-12
HAUSDORFF_SLACK = 1.05
PROFILE_TOL = 0.1
SLIDE_TOL = 0.5
GRADNORMAL_BOUNDS = (35.2, 101.5)
EQUILATERAL_RTOL = 1e-12
NEWTON_STEPS = 40

# barycentric sample points, four per level; each level adds new points
SAMPLE_LEVELS = (
    ((1, 0, 0), (0, 1, 0), (0, 0, 1), (1 / 3, 1 / 3, 1 / 3)),
    ((0.5, 0.5, 0), (0, 0.5, 0.5), (0.5, 0, 0.5), (0.5, 0.25, 0.25)),
    ((2 / 3, 1 / 6, 1 / 6), (1 / 6, 2 / 3, 1 / 6), (1 / 6, 1 / 6, 2 / 3), (0.25, 0.5, 0.25)),
)


def triangle_angles(points: np.ndarray) -> np.ndarray:
    """(F, 3) corner angles in degrees for triangles given as (F, 3, 3) points."""
    p = np.asarray(points, dtype=np.float64)
    out = np.empty(p.shape[:2])
    for i in range(3):
        u = p[:, (i + 1) % 3] - p[:, i]
        v = p[:, (i + 2) % 3] - p[:, i]
        with np.errstate(invalid="ignore", divide="ignore"):
            c = np.einsum("ij,ij->i", u, v) / (np.linalg.norm(u, axis=1) * np.linalg.norm(v, axis=1))
        out[:, i] = np.degrees(np.arccos(np.clip(c, -1.0, 1.0)))
    return out


def triangle_areas(points: np.ndarray) -> np.ndarray:
    p = np.asarray(points, dtype=np.float64)
    return 0.5 * np.linalg.norm(np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]), axis=1)


def angle_histogram(angles: np.ndarray) -> np.ndarray:
    """Counts in 180 one-degree bins; 180 itself falls in the last bin."""
    return np.histogram(np.ravel(angles), bins=180, range=(0.0, 180.0))[0]


def point_triangle_distance(p, a, b, c) -> np.ndarray:
    """Row-wise distance from points ``p`` to triangles ``(a, b, c)``.

    Closest-point search over the seven Voronoi regions of the triangle.
    """
    ab, ac, ap = b - a, c - a, p - a
    d1 = np.einsum("ij,ij->i", ab, ap)
    d2 = np.einsum("ij,ij->i", ac, ap)
    bp = p - b
    d3 = np.einsum("ij,ij->i", ab, bp)
    d4 = np.einsum("ij,ij->i", ac, bp)
    cp = p - c
    d5 = np.einsum("ij,ij->i", ab, cp)
    d6 = np.einsum("ij,ij->i", ac, cp)
    va = d3 * d6 - d5 * d4
    vb = d5 * d2 - d1 * d6
    vc = d1 * d4 - d3 * d2

    with np.errstate(invalid="ignore", divide="ignore"):
        denom = va + vb + vc
        v_in = vb / denom
        w_in = vc / denom
        t_ab = d1 / (d1 - d3)
        t_ac = d2 / (d2 - d6)
        t_bc = (d4 - d3) / ((d4 - d3) + (d5 - d6))
    q = a + v_in[:, None] * ab + w_in[:, None] * ac
    cases = [
        (vc <= 0) & (d1 >= 0) & (d3 <= 0), a + t_ab[:, None] * ab,
        (vb <= 0) & (d2 >= 0) & (d6 <= 0), a + t_ac[:, None] * ac,
        (va <= 0) & (d4 - d3 >= 0) & (d5 - d6 >= 0), b + t_bc[:, None] * (c - b),
        (d6 >= 0) & (d5 <= d6), c,
        (d3 >= 0) & (d4 <= d3), b,
        (d1 <= 0) & (d2 <= 0), a,
    ]
    # later assignments win, so vertex regions override edge regions
    for mask, target in zip(cases[::2], cases[1::2]):
        q = np.where(mask[:, None], target, q)
    return np.linalg.norm(p - q, axis=1)


class TriangleGrid:
    """Uniform grid of buckets for nearest-triangle distance queries.

    Each triangle is stored in every cell its bounding box touches; the
    cell size is the largest triangle extent, so a box spans at most two
    cells per axis.
    """

    def __init__(self, points: np.ndarray):
        p = np.asarray(points, dtype=np.float64)
        if len(p) == 0:
            raise ValueError("cannot index an empty triangle set")
        self.points = p
        lo, hi = p.min(axis=1), p.max(axis=1)
        self.h = max(float((hi - lo).max()), 1e-12)
        self.origin = lo.min(axis=0)
        cl = np.floor((lo - self.origin) / self.h).astype(np.int64)
        ch = np.floor((hi - self.origin) / self.h).astype(np.int64)
        self.dims = ch.max(axis=0) + 1
        tri_ids, cells = [], []
        for d in itertools.product((0, 1), repeat=3):
            c = cl + np.array(d)
            ok = np.all(c <= ch, axis=1)
            tri_ids.append(np.flatnonzero(ok))
            cells.append(np.ravel_multi_index(c[ok].T, self.dims))
        tri_ids, cells = np.concatenate(tri_ids), np.concatenate(cells)
        order = np.lexsort((tri_ids, cells))
        self.entries = tri_ids[order]
        self.cell_of_entry = cells[order]

    def _candidates(self, q, ring):
        offsets = np.array(list(itertools.product(range(-ring, ring + 1), repeat=3)))
        base = np.floor((q - self.origin) / self.h).astype(np.int64)
        cells = base[:, None, :] + offsets[None]  # (m, k, 3)
        ok = np.all((cells >= 0) & (cells < self.dims), axis=2)
        flat = np.where(ok, np.ravel_multi_index(np.clip(cells, 0, self.dims - 1).transpose(2, 0, 1), self.dims), -1)
        start = np.searchsorted(self.cell_of_entry, flat, side="left")
        stop = np.searchsorted(self.cell_of_entry, flat, side="right")
        count = np.where(ok, stop - start, 0)
        owner = np.repeat(np.arange(len(q)).repeat(count.shape[1]), count.reshape(-1))
        first = np.repeat(start.reshape(-1), count.reshape(-1))
        within = np.arange(len(first)) - np.repeat(np.cumsum(count.reshape(-1)) - count.reshape(-1), count.reshape(-1))
        return owner, self.entries[first + within]

    def distance(self, query, chunk: int = 4096) -> np.ndarray:
        """Exact distance from each query point to the nearest triangle."""
        q = np.asarray(query, dtype=np.float64).reshape(-1, 3)
        out = np.full(len(q), np.inf)
        pending = np.arange(len(q))
        ring = 1
        max_ring = int(self.dims.max()) + 1
        while len(pending):
            for s in range(0, len(pending), chunk):
                idx = pending[s:s + chunk]
                owner, tri = self._candidates(q[idx], ring)
                if len(tri) == 0:
                    continue
                t = self.points[tri]
                d = point_triangle_distance(q[idx][owner], t[:, 0], t[:, 1], t[:, 2])
                best = np.full(len(idx), np.inf)
                np.minimum.at(best, owner, d)
                out[idx] = np.minimum(out[idx], best)
            # a result is final once no unvisited cell can hold anything closer
            if ring >= max_ring:
                break
            pending = pending[~(out[pending] <= ring * self.h)]
            ring = min(2 * ring, max_ring)
        return out


def newton_project(field: ScalarField, points, steps: int = NEWTON_STEPS, max_step: float | None = None):
    """Newton line search toward ``f = 0`` from each point.

    Returns the feet and a mask of points that converged; steps are capped
    at ``max_step`` so a flat gradient cannot throw a point far away.
    """
    q = np.array(points, dtype=np.float64).reshape(-1, 3)
    done = np.zeros(len(q), dtype=bool)
    for _ in range(steps):
        act = ~done
        if not act.any():
            break
        f = field.value(q[act])
        g = field.gradient(q[act])
        if not (np.all(np.isfinite(f)) and np.all(np.isfinite(g))):
            raise FieldError("field is not finite during projection")
        g2 = np.einsum("ij,ij->i", g, g)
        flat = g2 < GRADIENT_FLOOR ** 2
        g2 = np.where(flat, 1.0, g2)
        step = -(f / g2)[:, None] * g
        if max_step is not None:
            n = np.linalg.norm(step, axis=1)
            step *= np.minimum(1.0, max_step / np.maximum(n, 1e-300))[:, None]
        step[flat] = 0.0
        q[act] += step
        small = np.linalg.norm(step, axis=1) <= 1e-13 * (1.0 + np.linalg.norm(q[act], axis=1))
        idx = np.flatnonzero(act)
        done[idx[small & ~flat]] = True
    return q, done


def mesh_to_surface(mesh: IndexedMesh, field: ScalarField, levels: int = 3, max_step=None) -> list[float]:
    """Largest sample-to-F distance, cumulative over sampling levels.

    Level ``k`` uses ``4 k`` barycentric points per triangle, so the list
    is nondecreasing.
    """
    p = mesh.triangle_points()
    out, best = [], 0.0
    for bary in SAMPLE_LEVELS[:levels]:
        s = np.einsum("sk,fki->fsi", np.asarray(bary, dtype=np.float64), p).reshape(-1, 3)
        s = np.unique(s, axis=0)
        foot, ok = newton_project(field, s, max_step=max_step)
        d = np.linalg.norm(foot - s, axis=1)
        d = np.where(ok, d, np.inf)
        best = max(best, float(d.max()) if len(d) else 0.0)
        out.append(best)
    return out


def surface_samples(field: ScalarField, lo, hi, spacing: float) -> np.ndarray:
    """Points on F from projecting grid points lying within ``spacing`` of F."""
    lo, hi = np.asarray(lo, dtype=np.float64), np.asarray(hi, dtype=np.float64)
    axes = [np.arange(a, b + spacing, spacing) for a, b in zip(lo, hi)]
    ny, nz = len(axes[1]), len(axes[2])
    keep = []
    for x in axes[0]:
        yy, zz = np.meshgrid(axes[1], axes[2], indexing="ij")
        pts = np.stack([np.full(ny * nz, x), yy.ravel(), zz.ravel()], axis=1)
        f = field.value(pts)
        g = np.linalg.norm(field.gradient(pts), axis=1)
        with np.errstate(invalid="ignore", divide="ignore"):
            near = np.abs(f) < spacing * g
        keep.append(pts[near])
    pts = np.concatenate(keep) if keep else np.zeros((0, 3))
    foot, ok = newton_project(field, pts, max_step=spacing)
    foot = foot[ok]
    inside = np.all((foot >= lo) & (foot <= hi), axis=1)
    return foot[inside]


def surface_to_mesh(mesh: IndexedMesh, field: ScalarField, spacing: float) -> float:
    """Largest distance from F samples near the mesh to the mesh."""
    p = mesh.vertices
    pad = float(mesh.edge_lengths().max()) if mesh.n_triangles else 0.0
    samples = surface_samples(field, p.min(axis=0) - pad, p.max(axis=0) + pad, spacing)
    if len(samples) == 0:
        return 0.0
    return float(TriangleGrid(mesh.triangle_points()).distance(samples).max())


def estimate_max_curvature(field: ScalarField, points, h: float) -> float:
    """Largest principal curvature of the level sets at ``points``.

    The Hessian is a central difference of the gradient; the shape operator
    is its restriction to the tangent plane divided by ``|grad f|``.
    """
    p = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    g = field.gradient(p)
    cols = []
    for axis in range(3):
        d = np.zeros(3)
        d[axis] = h
        cols.append((field.gradient(p + d) - field.gradient(p - d)) / (2.0 * h))
    hess = np.stack(cols, axis=-1)
    hess = 0.5 * (hess + np.swapaxes(hess, 1, 2))
    norm = np.linalg.norm(g, axis=1)
    ok = norm > GRADIENT_FLOOR
    n = g[ok] / norm[ok, None]
    proj = np.eye(3)[None] - n[:, :, None] * n[:, None, :]
    shape_op = proj @ hess[ok] @ proj / norm[ok, None, None]
    eig = np.linalg.eigvalsh(shape_op)
    return float(np.abs(eig).max()) if len(eig) else 0.0


def gradnormal_tolerance(kme: float) -> float:
    """Angle slack in degrees for gradient-projected meshes, given k_M * e."""
    return 0.1 + 40.0 * kme


@lru_cache(maxsize=None)
def _slide_interval(a, t):
    from .theory import slid_worst_case
    return slid_worst_case(a, t).interval


def _edge_ratio_bound(shape: GoldbergShape) -> float:
    """Largest to smallest possible midpoint-mesh edge, relative to e."""
    a = shape.a
    lengths = [math.sqrt(a * a + 1) / 2, math.sqrt(4 * a * a + 1) / 2, 1.5 * a]
    lengths.append(math.sqrt(3) / 2 if shape.quad_diagonal == "KP" else math.sqrt(16 * a * a + 1) / 2)
    return max(lengths) / min(lengths)


@dataclass
class QualityReport:
    algorithm: str
    surface: str
    a: float | None
    e: float
    min_angle: float
    max_angle: float
    histogram: np.ndarray
    min_edge: float
    max_edge: float
    degenerate_count: int
    topology: TopologyReport
    mesh_to_f: float | None
    f_to_mesh: float | None
    bound: float | None
    curvature: dict | None
    pass_flags: dict = dc_field(default_factory=dict)
    angle_bounds: dict = dc_field(default_factory=dict)

    @property
    def edge_ratio(self) -> float:
        return self.max_edge / self.min_edge if self.min_edge > 0 else math.inf

    @property
    def hausdorff_upper(self) -> float | None:
        if self.mesh_to_f is None:
            return None
        return max(self.mesh_to_f, self.f_to_mesh)

    @property
    def passed(self) -> bool:
        return all(self.pass_flags.values())

    def to_dict(self) -> dict:
        top = self.topology
        return {
            "algorithm": self.algorithm,
            "a": self.a,
            "e": self.e,
            "surface": self.surface,
            "V": top.V,
            "E": top.E,
            "F": top.F,
            "eulerChar": top.euler_char,
            "minAngleDeg": self.min_angle,
            "maxAngleDeg": self.max_angle,
            "edgeRatio": self.edge_ratio,
            "hausdorffUpper": self.hausdorff_upper,
            "pass": dict(self.pass_flags),
            "minEdge": self.min_edge,
            "maxEdge": self.max_edge,
            "degenerateTriangleCount": self.degenerate_count,
            "hausdorff": {"meshToF": self.mesh_to_f, "fToMesh": self.f_to_mesh, "bound2de": self.bound},
            "angleBounds": dict(self.angle_bounds),
            "curvature": self.curvature,
            "topology": top.to_dict(),
            "angleHistogram": [int(x) for x in self.histogram],
        }


def measure(mesh: IndexedMesh, field: ScalarField, shape: GoldbergShape | None = None, *,
            algorithm: str = "midnormal", e: float | None = None, surface: str | None = None,
            t: float | None = None, hausdorff: bool = True) -> QualityReport:
    """Measure a mesh against the guarantees of the algorithm that built it.

    Parameters
    ----------
    shape : GoldbergShape, optional
        Tiling shape for the tetrahedral algorithms; sets ``a`` and ``e``.
    e : float, optional
        Scale for pyramid meshes (cube side) when ``shape`` is absent.
    t : float, optional
        Slide fraction for SlidNormal meshes.
    hausdorff : bool
        Skip the (slowest) Hausdorff estimate when False.
    """
    if mesh.n_triangles == 0:
        raise TetrameshError("cannot measure an empty mesh")
    if shape is not None:
        e = shape.e
    if e is None:
        raise ValueError("measure needs a tiling shape or a scale e")
    pts = mesh.triangle_points()
    areas = triangle_areas(pts)
    degenerate = areas < DEGENERATE_AREA * e * e
    angles = triangle_angles(pts[~degenerate])
    if not len(angles):
        raise TetrameshError("every triangle is degenerate")
    lengths = mesh.edge_lengths()
    topo = analyze_topology(mesh)
    rep = QualityReport(
        algorithm=algorithm,
        surface=surface or field.describe(),
        a=None if shape is None else shape.a,
        e=e,
        min_angle=float(angles.min()),
        max_angle=float(angles.max()),
        histogram=angle_histogram(angles),
        min_edge=float(lengths.min()),
        max_edge=float(lengths.max()),
        degenerate_count=int(degenerate.sum()),
        topology=topo,
        mesh_to_f=None, f_to_mesh=None, bound=None, curvature=None,
    )
    flags = {"closed-manifold": topo.is_closed_manifold}

    if algorithm == "pyramid":
        side = lengths / (e / 6.0)
        flags["pyramid-equilateral"] = bool(np.all(np.abs(side - 1.0) <= EQUILATERAL_RTOL))
        rep.bound = 2.0 * e
    else:
        if shape is None:
            raise ValueError(f"{algorithm} meshes need the tiling shape")
        rep.bound = 2.0 * shape.diameter
        if algorithm == "midnormal":
            from .theory import angle_profile
            lo, hi = angle_profile(shape.a).interval
            rep.angle_bounds = {"min": lo, "max": hi, "tolerance": PROFILE_TOL}
            flags["midnormal-angles"] = rep.min_angle >= lo - PROFILE_TOL and rep.max_angle <= hi + PROFILE_TOL
            ratio = _edge_ratio_bound(shape)
            flags["edge-ratio"] = rep.edge_ratio <= ratio * (1.0 + 1e-9)
        elif algorithm == "slidnormal":
            if t is None:
                raise ValueError("slidnormal meshes need the slide fraction t")
            lo, hi = _slide_interval(shape.a, float(t))
            rep.angle_bounds = {"min": lo, "max": hi, "tolerance": SLIDE_TOL}
            flags["slidnormal-angles"] = rep.min_angle >= lo - SLIDE_TOL and rep.max_angle <= hi + SLIDE_TOL
        elif algorithm == "gradnormal":
            km = field.max_curvature
            source = "exact"
            if km is None:
                km = estimate_max_curvature(field, mesh.vertices, 1e-4 * e)
                source = "estimated"
            tol = gradnormal_tolerance(km * e)
            lo, hi = GRADNORMAL_BOUNDS
            rep.curvature = {"kM": km, "kMe": km * e, "source": source,
                             "thetaMin": rep.min_angle, "thetaMax": rep.max_angle}
            rep.angle_bounds = {"min": lo, "max": hi, "tolerance": tol}
            flags["gradnormal-angles"] = rep.min_angle >= lo - tol and rep.max_angle <= hi + tol
        else:
            raise ValueError(f"unknown algorithm {algorithm!r}")

    if hausdorff:
        levels = mesh_to_surface(mesh, field, max_step=e)
        rep.mesh_to_f = levels[-1]
        rep.f_to_mesh = surface_to_mesh(mesh, field, spacing=e / 2.0)
        flags["hausdorff"] = rep.hausdorff_upper <= rep.bound * HAUSDORFF_SLACK
    rep.pass_flags = {k: bool(v) for k, v in flags.items()}
    return rep


def report_json(report: QualityReport) -> str:
    return json.dumps(report.to_dict(), indent=2, allow_nan=True) + "\n"


def write_report(report: QualityReport, path) -> None:
    """Write the report as JSON with a fixed key order."""
    path = os.fspath(path)
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(report_json(report))
    except OSError as exc:
        raise TetrameshError(f"cannot write report to {path}: {exc.strerror or exc}") from exc
