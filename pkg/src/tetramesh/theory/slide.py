"""Worst-case angles after sliding disk corners along their edges."""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from ..tiling import EDGE_LABELS, EDGE_VERTICES, GoldbergShape
from .profile import diagonal_for

SLIDE_GRID = 9
SLIDE_STARTS = 3

# disk triangles emitted by the mesher, per KLPQ diagonal
MESH_TRIANGLES = {
    "KP": ("KLM", "KNQ", "LNP", "MPQ", "LMN", "MQN", "MKN", "MPN", "KLP", "KPQ"),
    "LQ": ("KLM", "KNQ", "LNP", "MPQ", "LMN", "MQN", "MKN", "MPN", "KLQ", "LPQ"),
}


def _corner_angles(p: np.ndarray) -> np.ndarray:
    """Angles in degrees at the three corners of triangles ``p`` of shape (..., 3, 3)."""
    out = []
    for i in range(3):
        u = p[..., (i + 1) % 3, :] - p[..., i, :]
        v = p[..., (i + 2) % 3, :] - p[..., i, :]
        with np.errstate(invalid="ignore", divide="ignore"):
            c = np.einsum("...i,...i->...", u, v) / (np.linalg.norm(u, axis=-1) * np.linalg.norm(v, axis=-1))
        out.append(np.degrees(np.arccos(np.clip(c, -1.0, 1.0))))
    return np.stack(out, axis=-1)


@dataclass(frozen=True)
class SlideBounds:
    a: float
    t: float
    min_angle: float
    max_angle: float
    per_triangle: dict  # label -> (min, max)

    @property
    def interval(self) -> tuple[float, float]:
        return self.min_angle, self.max_angle


def slid_worst_case(a: float, t: float, grid: int = SLIDE_GRID, starts: int = SLIDE_STARTS) -> SlideBounds:
    """Smallest and largest disk angle when each corner may sit anywhere in
    the middle ``[1/2 - t, 1/2 + t]`` fraction of its edge.

    Each triangle depends on its own three slide fractions only, so every
    triangle and corner is optimized separately: a ``grid``-per-axis scan
    picks ``starts`` seeds, which L-BFGS-B then polishes inside the box.
    At ``t = 1/2`` corners may reach the tetrahedron vertices and
    triangles can collapse, so the bounds are 0 and 180.
    """
    if not 0.0 <= t <= 0.5:
        raise ValueError(f"slide fraction t must lie in [0, 1/2], got {t}")
    if t == 0.5:
        per = {tri: (0.0, 180.0) for tri in MESH_TRIANGLES[diagonal_for(a)]}
        return SlideBounds(a, t, 0.0, 180.0, per)
    verts = GoldbergShape(a).canonical_vertices()
    ends = {lab: (verts[p], verts[q]) for lab, (p, q) in zip(EDGE_LABELS, EDGE_VERTICES)}
    lo, hi = 0.5 - t, 0.5 + t
    axis = np.linspace(lo, hi, grid)
    samples = np.array(list(itertools.product(axis, repeat=3)))

    per = {}
    for tri in MESH_TRIANGLES[diagonal_for(a)]:
        p0 = np.array([ends[c][0] for c in tri])
        d = np.array([ends[c][1] - ends[c][0] for c in tri])

        def angles(s, p0=p0, d=d):
            s = np.asarray(s, dtype=np.float64)
            return _corner_angles(p0 + s[..., :, None] * d)

        table = angles(samples)  # (grid^3, 3)
        low, high = np.inf, -np.inf
        for corner in range(3):
            for sign in (1.0, -1.0):
                vals = sign * table[:, corner]
                best = float(vals.min())
                for k in np.argsort(vals, kind="stable")[:starts]:
                    if t == 0.0:
                        break
                    r = minimize(lambda s: sign * angles(s)[corner], samples[k],
                                 method="L-BFGS-B", bounds=[(lo, hi)] * 3)
                    best = min(best, float(r.fun))
                if sign > 0:
                    low = min(low, best)
                else:
                    high = max(high, -best)
        per[tri] = (low, high)
    return SlideBounds(a, t, min(v[0] for v in per.values()), max(v[1] for v in per.values()), per)
