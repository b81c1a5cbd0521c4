"""Closed-form angle functions and the numerical searches built on them."""
from .optimize import (ShapeOptimum, angle_curves, branch_angles, curves_csv, golden_section,
                       optimize_shape_param)
from .profile import (SQUARE_A, AngleProfile, angle_profile, diagonal_for, dihedral_profile)
from .projection import (DegenerateProjectionError, projected_angle, projected_cos_derivative,
                         projection_crossing, projection_curves, tilt_curve_one, tilt_curve_two)
from .shapes import (ShapePoint, ShapeSearchResult, choice_intervals, normalize_tetrahedron,
                     score_tetrahedron, shape_space_search)
from .slide import SlideBounds, slid_worst_case

__all__ = [
    "AngleProfile", "DegenerateProjectionError", "SQUARE_A", "ShapeOptimum", "ShapePoint",
    "ShapeSearchResult", "SlideBounds", "angle_curves", "angle_profile", "branch_angles",
    "choice_intervals", "curves_csv", "diagonal_for", "dihedral_profile", "golden_section",
    "normalize_tetrahedron", "optimize_shape_param", "projected_angle", "projected_cos_derivative",
    "projection_crossing", "projection_curves", "score_tetrahedron", "shape_space_search",
    "slid_worst_case", "tilt_curve_one", "tilt_curve_two",
]
