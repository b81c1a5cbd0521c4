"""Goldberg tetrahedra and the space-filling tiling they generate.

The plane is cut into unit equilateral triangles with corners

    (i, j) -> ((i + j/2) e, j (sqrt(3)/2) e).

Corners get a colour ``(i - j) mod 3``, and a corner of colour ``c`` carries
lattice vertices at heights ``(c + 3m) a e``.  Over every triangle the
vertices of its prism, sorted by height, form a helix ``h_0, h_1, ...`` and
four consecutive helix vertices ``h_k .. h_{k+3}`` span one tetrahedron with

    A = h_k,  C = h_{k+1},  D = h_{k+2},  B = h_{k+3}.

Over "up" triangles this is a translate of the canonical tetrahedron
A(0,0,0), B(0,0,3a), C(1,0,a), D(1/2, sqrt(3)/2, 2a); over "down" triangles
it is a mirror image.

Points are indexed by integer *lattice keys* in units of
``(e/4, sqrt(3) e/4, a e/2)``.  Tetrahedron vertices and edge midpoints all
have integer keys, so coincident points always get identical keys.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, NamedTuple

import numpy as np

SQRT3 = math.sqrt(3.0)

VERTEX_LABELS = "ABCD"
EDGE_LABELS = "KLMNPQ"
# midpoint label -> (vertex index, vertex index), vertices ordered A, B, C, D
EDGE_VERTICES = ((0, 1), (0, 2), (0, 3), (1, 2), (2, 3), (1, 3))

# plane-triangle corners ordered by colour offset 0, 1, 2 from (i - j) mod 3
_CORNERS = np.array([
    [[0, 0], [1, 0], [0, 1]],  # up
    [[1, 1], [1, 0], [0, 1]],  # down (mirrored)
], dtype=np.int64)
# helix offsets of A, B, C, D relative to k
_HELIX = np.array([0, 3, 1, 2], dtype=np.int64)


@dataclass(frozen=True)
class Box:
    """Axis-aligned box ``[lo, hi]``."""

    lo: tuple
    hi: tuple

    def __post_init__(self):
        lo = tuple(float(v) for v in self.lo)
        hi = tuple(float(v) for v in self.hi)
        if len(lo) != 3 or len(hi) != 3:
            raise ValueError("box corners need three coordinates")
        if not all(math.isfinite(v) for v in lo + hi) or not all(h > l for l, h in zip(lo, hi)):
            raise ValueError(f"degenerate box {lo} .. {hi}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def unit(cls) -> "Box":
        return cls((0.0, 0.0, 0.0), (1.0, 1.0, 1.0))

    @property
    def extent(self) -> np.ndarray:
        return np.subtract(self.hi, self.lo)

    @property
    def center(self) -> np.ndarray:
        return (np.asarray(self.lo) + np.asarray(self.hi)) / 2.0

    @property
    def diagonal(self) -> float:
        return float(np.linalg.norm(self.extent))

    def padded(self, d: float) -> "Box":
        return Box(tuple(v - d for v in self.lo), tuple(v + d for v in self.hi))

    def contains(self, points) -> np.ndarray:
        p = np.asarray(points)
        return np.all((p >= self.lo) & (p <= self.hi), axis=-1)


@dataclass(frozen=True)
class GoldbergShape:
    """Shape parameter ``a`` and scale ``e`` of the tiling tetrahedron."""

    a: float
    e: float = 1.0

    def __post_init__(self):
        if not (self.a > 0 and math.isfinite(self.a)):
            raise ValueError(f"shape parameter a must be positive, got {self.a}")
        if not (self.e > 0 and math.isfinite(self.e)):
            raise ValueError(f"scale e must be positive, got {self.e}")

    @property
    def key_unit(self) -> np.ndarray:
        """Length of one lattice-key step along x, y, z."""
        return np.array([self.e / 4.0, SQRT3 * self.e / 4.0, self.a * self.e / 2.0])

    def key_points(self, keys) -> np.ndarray:
        """Positions of integer lattice keys; the one place keys become floats."""
        return np.asarray(keys, dtype=np.float64) * self.key_unit

    @property
    def short_edge(self) -> float:
        """Length of AC, CD and BD."""
        return math.sqrt(self.a ** 2 + 1.0) * self.e

    @property
    def long_edge(self) -> float:
        """Length of AD and BC."""
        return math.sqrt(4.0 * self.a ** 2 + 1.0) * self.e

    @property
    def vertical_edge(self) -> float:
        """Length of AB."""
        return 3.0 * self.a * self.e

    @property
    def diameter(self) -> float:
        return max(self.short_edge, self.long_edge, self.vertical_edge)

    @property
    def volume(self) -> float:
        return self.a * SQRT3 / 4.0 * self.e ** 3

    @property
    def quad_diagonal(self) -> str:
        """Diagonal used to split the KLPQ quadrilateral."""
        return "LQ" if self.a <= math.sqrt(2.0) / 4.0 else "KP"

    def canonical_vertices(self) -> np.ndarray:
        a = self.a
        v = np.array([[0, 0, 0], [0, 0, 3 * a], [1, 0, a], [0.5, SQRT3 / 2, 2 * a]])
        return v * self.e

    def canonical_midpoints(self) -> np.ndarray:
        """K, L, M, N, P, Q of the canonical tetrahedron."""
        v = self.canonical_vertices()
        return np.array([(v[p] + v[q]) / 2.0 for p, q in EDGE_VERTICES])


class TetraId(NamedTuple):
    """Index of one tiling tetrahedron; tuples sort in enumeration order."""

    i: int
    j: int
    parity: int  # 0 over up triangles, 1 over down (mirrored) triangles
    level: int  # k // 3
    slot: int  # k % 3

    @property
    def k(self) -> int:
        return 3 * self.level + self.slot

    @property
    def mirror(self) -> bool:
        return self.parity == 1

    @classmethod
    def from_k(cls, i, j, parity, k) -> "TetraId":
        return cls(int(i), int(j), int(parity), int(k) // 3, int(k) % 3)

    def keys(self) -> np.ndarray:
        """Lattice keys of A, B, C, D."""
        col = np.array([[self.i, self.j, self.parity]], dtype=np.int64)
        return tetra_keys(col, np.array([self.k]))[0]


@dataclass(frozen=True)
class ColumnSet:
    """Prism columns meeting a box, all sharing the helix range ``k_lo..k_hi``."""

    columns: np.ndarray  # (n, 3) rows (i, j, parity), lexicographically sorted
    k_lo: int
    k_hi: int

    @property
    def n_levels(self) -> int:
        return max(0, self.k_hi - self.k_lo + 1)

    def __len__(self):
        return len(self.columns) * self.n_levels


def columns_for_box(shape: GoldbergShape, box: Box) -> ColumnSet:
    """Columns whose tetrahedra can meet ``box``.

    A tetrahedron is kept when its bounding box overlaps ``box`` with
    positive volume.
    """
    e, h = shape.e, SQRT3 / 2.0 * shape.e
    x0, y0, z0 = box.lo
    x1, y1, z1 = box.hi
    j_lo = math.floor(y0 / h - 1.0) + 1
    j_hi = math.ceil(y1 / h) - 1
    rows = []
    for j in range(j_lo, j_hi + 1):
        for p in (0, 1):
            shift = (j + p) / 2.0
            i_lo = math.floor(x0 / e - 1.0 - shift) + 1
            i_hi = math.ceil(x1 / e - shift) - 1
            if i_hi < i_lo:
                continue
            i = np.arange(i_lo, i_hi + 1, dtype=np.int64)
            rows.append(np.stack([i, np.full_like(i, j), np.full_like(i, p)], axis=1))
    cols = np.concatenate(rows) if rows else np.zeros((0, 3), dtype=np.int64)
    cols = cols[np.lexsort((cols[:, 2], cols[:, 1], cols[:, 0]))]
    step = shape.a * shape.e
    k_lo = math.floor(z0 / step - 3.0) + 1
    k_hi = math.ceil(z1 / step) - 1
    return ColumnSet(cols, k_lo, k_hi)


def tetra_lattice(columns: np.ndarray, ks: np.ndarray) -> np.ndarray:
    """Corner indices and helix heights of A, B, C, D.

    Parameters
    ----------
    columns : (n, 3) int array of (i, j, parity)
    ks : (n,) int array of helix starts

    Returns
    -------
    (n, 4, 3) int array of (corner i, corner j, height index)
    """
    columns = np.asarray(columns, dtype=np.int64).reshape(-1, 3)
    ks = np.asarray(ks, dtype=np.int64).reshape(-1)
    i, j, p = columns[:, 0], columns[:, 1], columns[:, 2]
    n = ks[:, None] + _HELIX[None, :]
    offset = (n - (i - j)[:, None]) % 3
    corner = _CORNERS[p[:, None], offset]
    out = np.empty((len(ks), 4, 3), dtype=np.int64)
    out[..., 0] = i[:, None] + corner[..., 0]
    out[..., 1] = j[:, None] + corner[..., 1]
    out[..., 2] = n
    return out


def lattice_keys(lattice: np.ndarray) -> np.ndarray:
    """Map (corner i, corner j, height) to lattice keys."""
    lattice = np.asarray(lattice, dtype=np.int64)
    out = np.empty_like(lattice)
    out[..., 0] = 4 * lattice[..., 0] + 2 * lattice[..., 1]
    out[..., 1] = 2 * lattice[..., 1]
    out[..., 2] = 2 * lattice[..., 2]
    return out


def tetra_keys(columns, ks) -> np.ndarray:
    return lattice_keys(tetra_lattice(columns, ks))


def midpoint_keys(vertex_keys: np.ndarray) -> np.ndarray:
    """Keys of K, L, M, N, P, Q from the (..., 4, 3) keys of A, B, C, D."""
    vk = np.asarray(vertex_keys, dtype=np.int64)
    pairs = np.array(EDGE_VERTICES)
    return (vk[..., pairs[:, 0], :] + vk[..., pairs[:, 1], :]) // 2


def enumerate_tiling(shape: GoldbergShape, box: Box) -> Iterator[tuple[TetraId, np.ndarray]]:
    """Yield ``(TetraId, vertices)`` for every tetrahedron meeting ``box``.

    Vertices are a (4, 3) array ordered A, B, C, D.  Order is lexicographic
    in :class:`TetraId`.
    """
    cs = columns_for_box(shape, box)
    ks = np.arange(cs.k_lo, cs.k_hi + 1, dtype=np.int64)
    for col in cs.columns:
        pts = shape.key_points(tetra_keys(np.repeat(col[None], len(ks), 0), ks))
        for k, v in zip(ks.tolist(), pts):
            yield TetraId.from_k(col[0], col[1], col[2], k), v


def tetra_count(shape: GoldbergShape, box: Box) -> int:
    """Number of tetrahedra :func:`enumerate_tiling` would yield."""
    return len(columns_for_box(shape, box))
