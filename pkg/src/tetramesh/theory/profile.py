"""Closed-form mesh and dihedral angles of a Goldberg tetrahedron.

All angles are in degrees.  With ``b = sqrt(a^2 + 1)`` and
``c = sqrt(4a^2 + 1)`` the disk triangles have the cosines

    KLM:  cos KML = (1 - 2a^2) / (2a^2 + 2),   cos KLM = cos LKM = c / 2b
    LNP:  cos LPN = (1 - 2a^2) / bc,  cos NLP = 2a / c,  cos LNP = a / b
    KLP:  cos KLP = (8a^2 - 1) / (8a^2 + 2),   cos LKP = cos LPK = sqrt(3) / 2c
    KLQ:  cos LKQ = (1 - 8a^2) / (8a^2 + 2),   cos KLQ = cos KQL = sqrt(16a^2 + 1) / 2c

Every other disk triangle is congruent to one of these four.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

SQUARE_A = math.sqrt(2.0) / 4.0
NONOBTUSE_A = math.sqrt(2.0) / 2.0

ANGLE_NAMES = ("KML", "KLM", "LPN", "NLP", "LNP", "KLP", "LKP", "LKQ", "KLQ")


def _deg(c: float) -> float:
    return math.degrees(math.acos(max(-1.0, min(1.0, c))))


def diagonal_for(a: float) -> str:
    """Quad diagonal used by the tiling mesher for shape ``a``."""
    return "LQ" if a <= SQUARE_A else "KP"


@dataclass(frozen=True)
class AngleProfile:
    """Named disk-triangle angles for one shape parameter."""

    a: float
    diagonal: str
    kml: float
    klm: float
    lpn: float
    nlp: float
    lnp: float
    klp: float
    lkp: float
    lkq: float
    klq: float

    def named(self) -> dict:
        return {name: getattr(self, name.lower()) for name in ANGLE_NAMES}

    def triangles(self) -> dict:
        """Angles of each disk triangle type, listed at its three corners."""
        return {
            "KLM": (self.klm, self.klm, self.kml),  # at K, L, M
            "LNP": (self.nlp, self.lnp, self.lpn),  # at L, N, P
            "KLP": (self.lkp, self.klp, self.lkp),  # at K, L, P
            "KLQ": (self.lkq, self.klq, self.klq),  # at K, L, Q
        }

    def used_triangles(self) -> dict:
        tris = self.triangles()
        drop = "KLQ" if self.diagonal == "KP" else "KLP"
        return {k: v for k, v in tris.items() if k != drop}

    @property
    def interval(self) -> tuple[float, float]:
        """Smallest and largest angle over the triangles the mesher emits."""
        used = [x for t in self.used_triangles().values() for x in t]
        return min(used), max(used)

    @property
    def square_quad(self) -> bool:
        """True when KLPQ is a square (``a`` within 1e-5 of sqrt(2)/4), so both
        diagonals give the same angles."""
        return abs(self.a - SQUARE_A) <= 1e-5


def angle_profile(a: float, diagonal: str | None = None) -> AngleProfile:
    """Evaluate the disk-triangle angle formulas at ``a``.

    ``diagonal`` picks the split of KLPQ ("KP" or "LQ"); by default it
    follows the mesher's rule.
    """
    if not a > 0:
        raise ValueError(f"shape parameter a must be positive, got {a}")
    if diagonal is None:
        diagonal = diagonal_for(a)
    if diagonal not in ("KP", "LQ"):
        raise ValueError(f"diagonal must be 'KP' or 'LQ', got {diagonal!r}")
    a2 = a * a
    b = math.sqrt(a2 + 1.0)
    c = math.sqrt(4.0 * a2 + 1.0)
    return AngleProfile(
        a=a,
        diagonal=diagonal,
        kml=_deg((1.0 - 2.0 * a2) / (2.0 * a2 + 2.0)),
        klm=_deg(c / (2.0 * b)),
        lpn=_deg((1.0 - 2.0 * a2) / (b * c)),
        nlp=_deg(2.0 * a / c),
        lnp=_deg(a / b),
        klp=_deg((8.0 * a2 - 1.0) / (8.0 * a2 + 2.0)),
        lkp=_deg(math.sqrt(3.0) / (2.0 * c)),
        lkq=_deg((1.0 - 8.0 * a2) / (8.0 * a2 + 2.0)),
        klq=_deg(math.sqrt(16.0 * a2 + 1.0) / (2.0 * c)),
    )


def dihedral_profile(a: float) -> dict:
    """Interior dihedral angle along each edge of the tetrahedron, in degrees."""
    if not a > 0:
        raise ValueError(f"shape parameter a must be positive, got {a}")
    side = _deg(3.0 * a / math.sqrt(3.0 + 12.0 * a * a))
    return {
        "AB": 60.0,
        "AC": side,
        "AD": 90.0,
        "BC": 90.0,
        "BD": side,
        "CD": _deg((1.0 - 2.0 * a * a) / (1.0 + 4.0 * a * a)),
    }
