"""Triangle meshes of implicit surfaces with guaranteed angle bounds."""
from .errors import TetrameshError
from .field import ExprField, Genus2, Linear, ScalarField, Sphere, Torus, builtin_field
from .mesh import IndexedMesh, TopologyReport, analyze_topology, build_mesh, write_mesh
from .midnormal import extract, mid_normal
from .pyramid import build_pyramids, pyramid_mesh
from .quality import QualityReport, measure, write_report
from .refine import collapse_valence4, grad_normal, grad_project, slid_normal
from .tiling import Box, GoldbergShape, enumerate_tiling

__version__ = "0.1.0"

__all__ = [
    "Box", "ExprField", "Genus2", "GoldbergShape", "IndexedMesh", "Linear", "QualityReport",
    "ScalarField", "Sphere", "TetrameshError", "TopologyReport", "Torus", "analyze_topology",
    "build_mesh", "build_pyramids", "builtin_field", "collapse_valence4", "enumerate_tiling",
    "extract", "grad_normal", "grad_project", "measure", "mid_normal", "pyramid_mesh",
    "slid_normal", "write_mesh", "write_report",
]
