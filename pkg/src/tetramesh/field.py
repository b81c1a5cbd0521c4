"""Implicit scalar fields f: R^3 -> R whose zero set is the surface to mesh.

All fields evaluate on arrays of points with shape ``(..., 3)``.
"""
from __future__ import annotations

import math

import numpy as np

from . import expr as _expr
from .errors import FieldError, VanishingGradientError

GRADIENT_FLOOR = 1e-12


class ScalarField:
    """Base class.  Subclasses implement ``_value`` and ``_gradient``."""

    kind = "builtin"
    name = "field"

    def __call__(self, points):
        return self.value(points)

    def value(self, points):
        p = np.asarray(points, dtype=np.float64)
        return self._value(p)

    def gradient(self, points):
        p = np.asarray(points, dtype=np.float64)
        return self._gradient(p)

    @property
    def params(self) -> dict:
        return {}

    @property
    def max_curvature(self) -> float | None:
        """Largest absolute principal curvature of the zero set, when known."""
        return None

    def describe(self) -> str:
        inner = ", ".join(f"{k}={v:g}" if isinstance(v, float) else f"{k}={v}"
                          for k, v in self.params.items())
        return f"{self.name}({inner})"

    def _value(self, p):
        raise NotImplementedError

    def _gradient(self, p):
        raise NotImplementedError


def _center(center):
    c = np.asarray((0.0, 0.0, 0.0) if center is None else center, dtype=np.float64)
    if c.shape != (3,) or not np.all(np.isfinite(c)):
        raise FieldError(f"center must be three finite numbers, got {center!r}")
    return c


class Sphere(ScalarField):
    name = "sphere"

    def __init__(self, r, center=None):
        if not r > 0:
            raise FieldError(f"sphere radius must be positive, got {r}")
        self.r = float(r)
        self.center = _center(center)

    @property
    def params(self):
        return {"r": self.r, "center": self.center.tolist()}

    @property
    def max_curvature(self):
        return 1.0 / self.r

    def _value(self, p):
        q = p - self.center
        return np.einsum("...i,...i->...", q, q) - self.r ** 2

    def _gradient(self, p):
        return 2.0 * (p - self.center)


class Torus(ScalarField):
    """Torus of revolution about the z axis through ``center``."""

    name = "torus"

    def __init__(self, R, r, center=None):
        if not (r > 0 and R > r):
            raise FieldError(f"torus needs R > r > 0, got R={R}, r={r}")
        self.R = float(R)
        self.r = float(r)
        self.center = _center(center)

    @property
    def params(self):
        return {"R": self.R, "r": self.r, "center": self.center.tolist()}

    @property
    def max_curvature(self):
        return max(1.0 / self.r, 1.0 / (self.R - self.r))

    def _value(self, p):
        q = p - self.center
        rho = np.hypot(q[..., 0], q[..., 1])
        return (rho - self.R) ** 2 + q[..., 2] ** 2 - self.r ** 2

    def _gradient(self, p):
        q = p - self.center
        rho = np.hypot(q[..., 0], q[..., 1])
        safe = np.where(rho > 0, rho, 1.0)
        s = np.where(rho > 0, 2.0 * (rho - self.R) / safe, 0.0)
        return np.stack([s * q[..., 0], s * q[..., 1], 2.0 * q[..., 2]], axis=-1)


class Genus2(ScalarField):
    """((x^2+y^2)^2 - x^2 + y^2)^2 + z^2 - level in coordinates (p - center)/scale."""

    name = "genus2"

    def __init__(self, level=0.028, center=None, scale=1.0):
        if not level > 0:
            raise FieldError(f"genus2 level must be positive, got {level}")
        if not scale > 0:
            raise FieldError(f"genus2 scale must be positive, got {scale}")
        self.level = float(level)
        self.scale = float(scale)
        self.center = _center(center)

    @property
    def params(self):
        return {"level": self.level, "scale": self.scale, "center": self.center.tolist()}

    def _parts(self, p):
        q = (p - self.center) / self.scale
        x, y, z = q[..., 0], q[..., 1], q[..., 2]
        u = x * x + y * y
        g = u * u - x * x + y * y
        return x, y, z, u, g

    def _value(self, p):
        _, _, z, _, g = self._parts(p)
        return g * g + z * z - self.level

    def _gradient(self, p):
        x, y, z, u, g = self._parts(p)
        gx = 4.0 * u * x - 2.0 * x
        gy = 4.0 * u * y + 2.0 * y
        return np.stack([2.0 * g * gx, 2.0 * g * gy, 2.0 * z], axis=-1) / self.scale


class Linear(ScalarField):
    """f(p) = normal . p - offset."""

    name = "linear"

    def __init__(self, normal, offset=0.0):
        n = np.asarray(normal, dtype=np.float64)
        if n.shape != (3,) or not np.linalg.norm(n) > 0:
            raise FieldError("linear field needs a nonzero normal")
        self.normal = n
        self.offset = float(offset)

    @property
    def params(self):
        return {"normal": self.normal.tolist(), "offset": self.offset}

    @property
    def max_curvature(self):
        return 0.0

    def _value(self, p):
        return p @ self.normal - self.offset

    def _gradient(self, p):
        return np.broadcast_to(self.normal, p.shape).copy()


class ExprField(ScalarField):
    """Field given by an expression in x, y, z.

    The gradient uses central differences with step ``1e-6 * box_diagonal``.
    """

    kind = "expression"
    name = "expr"

    def __init__(self, text, box_diagonal=math.sqrt(3.0)):
        self.text = text
        self.tree = _expr.parse_expr(text)
        self.step = 1e-6 * float(box_diagonal)

    @property
    def params(self):
        return {"expr": _expr.to_text(self.tree)}

    def describe(self):
        return f"expr({_expr.to_text(self.tree)})"

    def _value(self, p):
        v = _expr.evaluate(self.tree, p[..., 0], p[..., 1], p[..., 2])
        return np.broadcast_to(v, p.shape[:-1]).astype(np.float64)

    def _gradient(self, p):
        h = self.step
        cols = []
        for axis in range(3):
            d = np.zeros(3)
            d[axis] = h
            cols.append((self._value(p + d) - self._value(p - d)) / (2.0 * h))
        return np.stack(cols, axis=-1)


BUILTINS = ("sphere", "torus", "genus2")


def builtin_field(name: str, center=None, **params) -> ScalarField:
    """Construct a named surface.

    ``sphere(r)``, ``torus(R, r)`` and ``genus2(level, scale)``.
    """
    if name == "sphere":
        return Sphere(params.get("r", 1.0), center)
    if name == "torus":
        return Torus(params.get("R", 2.0), params.get("r", 1.0), center)
    if name == "genus2":
        return Genus2(params.get("level", 0.028), center, params.get("scale", 1.0))
    raise FieldError(f"unknown surface {name!r}; expected one of {', '.join(BUILTINS)}")


def grad_of(field: ScalarField, p) -> np.ndarray:
    """Gradient at ``p`` (a point or an array of points).

    Raises :class:`VanishingGradientError` when the gradient norm falls
    below 1e-12; ``.vertex`` holds the index of the first offending point.
    """
    p = np.asarray(p, dtype=np.float64)
    g = field.gradient(p)
    norm = np.linalg.norm(g, axis=-1)
    if not np.all(np.isfinite(g)):
        raise FieldError("gradient is not finite")
    small = norm < GRADIENT_FLOOR
    if np.any(small):
        idx = int(np.flatnonzero(np.ravel(small))[0]) if np.ndim(small) else None
        where = f" at point #{idx}" if idx is not None else ""
        raise VanishingGradientError(f"gradient vanishes{where} (|grad f| < {GRADIENT_FLOOR:g})", vertex=idx)
    return g


def finite_values(field: ScalarField, points) -> np.ndarray:
    """Evaluate and insist on finite output."""
    v = field.value(points)
    if not np.all(np.isfinite(v)):
        raise FieldError(f"{field.describe()} is not finite on the requested points")
    return v
