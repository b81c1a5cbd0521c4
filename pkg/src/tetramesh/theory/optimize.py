"""One-dimensional optimization of the shape parameter."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .profile import NONOBTUSE_A, SQUARE_A, angle_profile

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
GOLDEN_ITERATIONS = 80
GRID_POINTS = 257

BRANCHES = {"KP": (SQUARE_A, NONOBTUSE_A), "LQ": (0.01, SQUARE_A)}
_SHARED = ("kml", "klm", "lpn", "nlp", "lnp")
_BRANCH_ANGLES = {"KP": _SHARED + ("klp", "lkp"), "LQ": _SHARED + ("lkq", "klq")}


def golden_section(f, lo: float, hi: float, iterations: int = GOLDEN_ITERATIONS) -> float:
    """Minimizer of a unimodal ``f`` on ``[lo, hi]`` after a fixed number of steps."""
    a, b = lo, hi
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iterations):
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
    return (a + b) / 2.0


def branch_angles(a: float, branch: str) -> np.ndarray:
    """The seven distinct angles the mesher produces on one branch."""
    p = angle_profile(a, branch)
    return np.array([getattr(p, name) for name in _BRANCH_ANGLES[branch]])


@dataclass(frozen=True)
class ShapeOptimum:
    objective: str
    branch: str
    a: float
    interval: tuple[float, float]

    @property
    def value(self) -> float:
        return self.interval[0] if self.objective == "maximin" else self.interval[1]


def _check(objective, branch):
    if objective not in ("maximin", "minimax"):
        raise ValueError(f"objective must be 'maximin' or 'minimax', got {objective!r}")
    if branch not in BRANCHES:
        raise ValueError(f"branch must be 'KP' or 'LQ', got {branch!r}")


def optimize_shape_param(objective: str = "maximin", branch: str = "KP") -> ShapeOptimum:
    """Best shape parameter on one diagonal branch.

    The envelope ``min`` (or ``max``) of the branch angles is piecewise
    smooth, so its optimum is an endpoint, a crossing of two angle curves,
    or an interior extremum of a single curve.  Each candidate is located
    on a fixed grid and polished by golden-section search; the best
    envelope value wins, ties going to the smaller ``a``.
    """
    branch = branch.upper()
    _check(objective, branch)
    lo, hi = BRANCHES[branch]
    maximin = objective == "maximin"

    def envelope(a):
        g = branch_angles(a, branch)
        return g.min() if maximin else g.max()

    grid = np.linspace(lo, hi, GRID_POINTS)
    curves = np.array([branch_angles(a, branch) for a in grid])  # (grid, 7)
    cands = [lo, hi]
    n = curves.shape[1]
    for i in range(n):
        for j in range(i + 1, n):
            d = curves[:, i] - curves[:, j]
            for m in np.flatnonzero(np.sign(d[:-1]) * np.sign(d[1:]) < 0):
                cands.append(golden_section(
                    lambda a: abs(branch_angles(a, branch)[i] - branch_angles(a, branch)[j]),
                    grid[m], grid[m + 1]))
        y = curves[:, i] if maximin else -curves[:, i]
        for m in np.flatnonzero((y[1:-1] > y[:-2]) & (y[1:-1] > y[2:])) + 1:
            sign = -1.0 if maximin else 1.0
            cands.append(golden_section(lambda a: sign * branch_angles(a, branch)[i],
                                        grid[m - 1], grid[m + 1]))
    scored = sorted(((-envelope(a) if maximin else envelope(a), a) for a in cands))
    best = scored[0][1]
    g = branch_angles(best, branch)
    return ShapeOptimum(objective, branch, float(best), (float(g.min()), float(g.max())))


def angle_curves(lo: float = 0.05, hi: float = NONOBTUSE_A, samples: int = 200) -> list[dict]:
    """Every named angle sampled over ``[lo, hi]``, with the mesher's interval."""
    rows = []
    for a in np.linspace(lo, hi, samples):
        p = angle_profile(float(a))
        row = {"a": float(a), **p.named()}
        row["min"], row["max"] = p.interval
        rows.append(row)
    return rows


def curves_csv(rows: list[dict]) -> str:
    """CSV text for a list of equal-keyed rows, floats written with repr."""
    if not rows:
        return ""
    out = io.StringIO()
    writer = csv.DictWriter(out, fieldnames=list(rows[0]), lineterminator="\n")
    writer.writeheader()
    writer.writerows({k: repr(float(v)) if isinstance(v, float) else v for k, v in r.items()} for r in rows)
    return out.getvalue()
