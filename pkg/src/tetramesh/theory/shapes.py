"""Search over all tetrahedron shapes for the best disk-triangle angles.

A shape is normalized so that its longest edge is ``AB`` with ``A`` at the
origin and ``B = (1, 0, 0)``; ``C = (x_C, y_C, 0)`` and
``D = (x_D, y_D, z_D)``.  Reflections make ``y_C >= 0`` and ``z_D >= 0``,
and swapping ``A`` with ``B`` makes ``x_D >= 1/2``.  What is left cannot
also fix the sign of ``y_D``, so the region searched by default keeps
``y_D`` in ``[-1, 1]``; ``region="positive"`` restricts it to
``[0, 1]``.

Each of the three quadrilateral disks can be split two ways, giving eight
triangulation choices; a shape is scored by its best choice.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from ..tiling import EDGE_LABELS, EDGE_VERTICES
from .profile import diagonal_for
from .slide import _corner_angles

SINGLE_TRIANGLES = ("KLM", "KNQ", "LNP", "MPQ")
# per quadrilateral (LMNQ, KMPN, KLPQ): the two splits
QUAD_SPLITS = (
    (("LMN", "MQN"), ("LNQ", "LMQ")),
    (("KMN", "MNP"), ("KMP", "KNP")),
    (("KLP", "KPQ"), ("KLQ", "LPQ")),
)
CHOICES = tuple(itertools.product((0, 1), repeat=3))
REGIONS = {
    "full": [(0.0, 1.0), (0.0, 1.0), (0.5, 1.0), (-1.0, 1.0), (0.0, 1.0)],
    "positive": [(0.0, 1.0), (0.0, 1.0), (0.5, 1.0), (0.0, 1.0), (0.0, 1.0)],
}
_SIDE_PAIRS = ((0, 2), (1, 2), (0, 3), (1, 3), (2, 3))
_MID = np.zeros((6, 4))
for _k, (_p, _q) in enumerate(EDGE_VERTICES):
    _MID[_k, _p] = _MID[_k, _q] = 0.5


@dataclass(frozen=True)
class ShapePoint:
    x_c: float
    y_c: float
    x_d: float
    y_d: float
    z_d: float

    def as_array(self) -> np.ndarray:
        return np.array([self.x_c, self.y_c, self.x_d, self.y_d, self.z_d])

    def vertices(self) -> np.ndarray:
        return shape_vertices(self.as_array())

    def in_region(self, region: str = "full", tol: float = 1e-9) -> bool:
        x = self.as_array()
        box = REGIONS[region]
        inside = all(lo - tol <= v <= hi + tol for v, (lo, hi) in zip(x, box))
        return bool(inside and _side_slack(x[None]).min() >= -tol)


def shape_vertices(x: np.ndarray) -> np.ndarray:
    """(..., 4, 3) vertices A, B, C, D for parameter rows ``x`` of shape (..., 5)."""
    x = np.asarray(x, dtype=np.float64)
    xc, yc, xd, yd, zd = np.moveaxis(x, -1, 0)
    zero, one = np.zeros_like(xc), np.ones_like(xc)
    return np.stack([
        np.stack([zero, zero, zero], -1),
        np.stack([one, zero, zero], -1),
        np.stack([xc, yc, zero], -1),
        np.stack([xd, yd, zd], -1),
    ], axis=-2)


def _side_slack(x):
    v = shape_vertices(x)
    return np.stack([1.0 - np.linalg.norm(v[..., i, :] - v[..., j, :], axis=-1) for i, j in _SIDE_PAIRS], -1)


def _triangle_angles(mids: np.ndarray, label: str) -> np.ndarray:
    idx = [EDGE_LABELS.index(c) for c in label]
    return _corner_angles(mids[..., idx, :])


def choice_triangles(choice) -> tuple[str, ...]:
    return SINGLE_TRIANGLES + tuple(t for q, c in zip(QUAD_SPLITS, choice) for t in q[c])


def disk_angles(vertices, choice) -> np.ndarray:
    """All disk-triangle angles, shape (..., 30), for one triangulation choice."""
    mids = np.einsum("kv,...vi->...ki", _MID, np.asarray(vertices, dtype=np.float64))
    return np.concatenate([_triangle_angles(mids, t) for t in choice_triangles(choice)], axis=-1)


def choice_intervals(vertices) -> np.ndarray:
    """(..., 8, 2) array of (min, max) disk angle per triangulation choice."""
    mids = np.einsum("kv,...vi->...ki", _MID, np.asarray(vertices, dtype=np.float64))
    cache = {}

    def ang(t):
        if t not in cache:
            cache[t] = _triangle_angles(mids, t)
        return cache[t]

    base = np.concatenate([ang(t) for t in SINGLE_TRIANGLES], axis=-1)
    lo, hi = base.min(-1), base.max(-1)
    quad_lo = [[np.minimum(ang(s[0]).min(-1), ang(s[1]).min(-1)) for s in q] for q in QUAD_SPLITS]
    quad_hi = [[np.maximum(ang(s[0]).max(-1), ang(s[1]).max(-1)) for s in q] for q in QUAD_SPLITS]
    out = []
    for ch in CHOICES:
        mn, mx = lo, hi
        for q, c in enumerate(ch):
            mn = np.minimum(mn, quad_lo[q][c])
            mx = np.maximum(mx, quad_hi[q][c])
        out.append(np.stack([mn, mx], -1))
    return np.stack(out, axis=-2)


def goldberg_choice(a: float) -> tuple[int, int, int]:
    """Triangulation choice matching the tiling mesher's splits for ``a``."""
    return (0, 0, 0) if diagonal_for(a) == "KP" else (0, 0, 1)


@dataclass(frozen=True)
class ShapeSearchResult:
    objective: str
    point: ShapePoint
    choice: tuple[int, int, int]
    interval: tuple[float, float]

    @property
    def value(self) -> float:
        return self.interval[0] if self.objective == "maximin" else self.interval[1]


def score_tetrahedron(vertices, objective: str = "maximin") -> tuple[tuple[int, int, int], tuple[float, float]]:
    """Best triangulation choice and its angle interval for any tetrahedron."""
    iv = choice_intervals(np.asarray(vertices, dtype=np.float64))
    k = int(np.argmax(iv[:, 0])) if objective == "maximin" else int(np.argmin(iv[:, 1]))
    return CHOICES[k], (float(iv[k, 0]), float(iv[k, 1]))


def _grid(density, region):
    axes = [np.linspace(lo, hi, density) for lo, hi in REGIONS[region]]
    g = np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, 5)
    return g[_side_slack(g).min(-1) >= 0.0]


def _polish(x0, choice, objective, bounds):
    """Epigraph form: push a common bound on every angle, keeping sides <= 1."""
    maximin = objective == "maximin"

    def angles(y):
        return disk_angles(shape_vertices(y[:5]), choice)

    a0 = angles(np.r_[x0, 0.0])
    y0 = np.r_[x0, a0.min() if maximin else a0.max()]
    cons = [
        {"type": "ineq", "fun": (lambda y: angles(y) - y[5]) if maximin else (lambda y: y[5] - angles(y))},
        {"type": "ineq", "fun": lambda y: _side_slack(y[None, :5])[0]},
    ]
    r = minimize((lambda y: -y[5]) if maximin else (lambda y: y[5]), y0, method="SLSQP",
                 bounds=bounds + [(None, None)], constraints=cons,
                 options={"maxiter": 500, "ftol": 1e-12})
    return r.x[:5]


def shape_space_search(objective: str = "maximin", grid_density: int = 12, refine_starts: int = 4,
                       region: str = "full") -> ShapeSearchResult:
    """Grid scan of the shape region, then local refinement of the best cells.

    For each triangulation choice the ``refine_starts`` best grid points
    seed an SLSQP run.  Polished points are accepted only when they stay
    inside the region; the grid optimum is always a fallback.
    """
    if objective not in ("maximin", "minimax"):
        raise ValueError(f"objective must be 'maximin' or 'minimax', got {objective!r}")
    if grid_density < 8:
        raise ValueError("grid_density must be at least 8")
    if region not in REGIONS:
        raise ValueError(f"region must be one of {sorted(REGIONS)}, got {region!r}")
    maximin = objective == "maximin"
    g = _grid(grid_density, region)
    iv = choice_intervals(shape_vertices(g))  # (n, 8, 2)
    key = iv[..., 0] if maximin else -iv[..., 1]
    key = np.nan_to_num(key, nan=-np.inf)

    def better(cand, best):
        if best is None:
            return True
        return cand[0] > best[0] if maximin else cand[0] < best[0]

    best = None
    for k, ch in enumerate(CHOICES):
        order = np.argsort(-key[:, k], kind="stable")
        seeds = [g[i] for i in order[:refine_starts]]
        for x in [g[order[0]]] + [_polish(s, ch, objective, REGIONS[region]) for s in seeds]:
            pt = ShapePoint(*map(float, x))
            if not pt.in_region(region):
                continue
            ang = disk_angles(pt.vertices(), ch)
            if not np.all(np.isfinite(ang)):
                continue
            cand = (float(ang.min()) if maximin else float(ang.max()), pt, ch, (float(ang.min()), float(ang.max())))
            if better(cand, best):
                best = cand
    _, pt, ch, interval = best
    return ShapeSearchResult(objective, pt, ch, interval)


def normalize_tetrahedron(vertices) -> ShapePoint:
    """Congruent copy of a tetrahedron in the search coordinates.

    The longest edge becomes ``AB`` of unit length; the result is a
    relabelling, so its disk triangles are those of the input up to scale.
    """
    v = np.asarray(vertices, dtype=np.float64)
    best = None
    for perm in itertools.permutations(range(4)):
        p = v[list(perm)]
        ab = np.linalg.norm(p[1] - p[0])
        sides = [np.linalg.norm(p[i] - p[j]) for i, j in _SIDE_PAIRS]
        if max(sides) > ab * (1 + 1e-12):
            continue
        q = (p - p[0]) / ab
        ex = q[1] / np.linalg.norm(q[1])
        c = q[2] - (q[2] @ ex) * ex
        ey = c / np.linalg.norm(c)
        ez = np.cross(ex, ey)
        local = q @ np.stack([ex, ey, ez], 1)
        if local[3, 2] < 0:
            local[:, 2] *= -1.0
        x = np.array([local[2, 0], local[2, 1], local[3, 0], local[3, 1], local[3, 2]])
        if x[2] < 0.5 - 1e-12:
            continue
        cand = (-x[3], tuple(perm), x)
        if best is None or cand[:2] < best[:2]:
            best = cand
    if best is None:
        raise ValueError("tetrahedron cannot be normalized")
    return ShapePoint(*map(float, best[2]))
