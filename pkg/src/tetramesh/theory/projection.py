"""Angles between plane vectors after tilting the plane about the x axis.

Tilting by ``theta`` and projecting back sends ``(x, y)`` to
``(x, y cos theta)``.  Two closed-form curves in the shape parameter
bound the smallest angle reachable after gradient projection; both are
written out here.
"""
from __future__ import annotations

import math

import numpy as np

from .optimize import golden_section
from .profile import NONOBTUSE_A


class DegenerateProjectionError(ValueError):
    """A projected vector has zero length, so its angle is undefined."""


def projected_angle(v, w, theta: float) -> float:
    """Angle in degrees between ``v`` and ``w`` after tilting by ``theta``.

    Parameters
    ----------
    v, w : 2-vectors
    theta : tilt in radians, in ``[0, pi/2]``
    """
    if not 0.0 <= theta <= math.pi / 2.0 + 1e-15:
        raise ValueError(f"theta must lie in [0, pi/2], got {theta}")
    c = 0.0 if theta >= math.pi / 2.0 else math.cos(theta)
    p = np.array([v[0], v[1] * c], dtype=np.float64)
    q = np.array([w[0], w[1] * c], dtype=np.float64)
    if not (np.hypot(*p) > 0 and np.hypot(*q) > 0):
        raise DegenerateProjectionError(f"projection of {tuple(v)} or {tuple(w)} at theta={theta} has zero length")
    cross = p[0] * q[1] - p[1] * q[0]
    return math.degrees(math.atan2(abs(cross), float(p @ q)))


def projected_cos_derivative(v1: float, w1: float, theta: float) -> float:
    """d/dtheta of cos(angle) for ``v = (v1, 1)`` and ``w = (w1, 1)``."""
    c2 = math.cos(theta) ** 2
    num = math.sin(theta) * math.cos(theta) * (v1 - w1) ** 2 * (v1 * w1 - c2)
    return num / ((v1 * v1 + c2) ** 1.5 * (w1 * w1 + c2) ** 1.5)


def _tilt_denominator(a: float) -> float:
    a2 = a * a
    inner = 172.0 * a2 * a2 + (59.0 - 36.0 * math.sqrt(12.0 * a2 + 3.0)) * a2 + 4.0
    return math.sqrt((a2 + 1.0) * inner / (4.0 * a2 + 1.0))


def tilt_curve_one(a: float) -> float:
    """First of the two projected-angle curves bounding tilted meshes, in degrees."""
    return math.degrees(math.acos((4.0 * a * a + 1.0) / _tilt_denominator(a)))


def tilt_curve_two(a: float) -> float:
    """Second projected-angle curve; it meets the first at a = sqrt(2)/4."""
    return math.degrees(math.acos((2.0 - 4.0 * a * a) / _tilt_denominator(a)))


def projection_crossing(lo: float = 0.2, hi: float = 0.5) -> tuple[float, float]:
    """Shape parameter where the two projected angles agree, and their common value."""
    a = golden_section(lambda x: abs(tilt_curve_one(x) - tilt_curve_two(x)), lo, hi)
    return a, tilt_curve_one(a)


def projection_curves(lo: float = 0.05, hi: float = NONOBTUSE_A, samples: int = 200) -> list[dict]:
    rows = []
    for a in np.linspace(lo, hi, samples):
        x, y = tilt_curve_one(float(a)), tilt_curve_two(float(a))
        rows.append({"a": float(a), "curve_one": x, "curve_two": y, "min": min(x, y)})
    return rows
