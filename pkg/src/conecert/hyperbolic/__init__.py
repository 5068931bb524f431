"""Hyperboloid-model geometry for the angled prism and its constants."""

from .constants import GeometricConstants, choose_b_R, compute_constants, prism_constants, sigma_margin
from .lorentz import mdot
from .plane import develop_3kgon, face_polygon, segment_distance_h2
from .polyhedron import (
    AndreevViolation,
    AngledPolyhedron,
    DomainError,
    RealizationError,
    RealizedPolyhedron,
    edge_length,
    face_distance,
    prism_combinatorics,
    realize_polyhedron,
)

__all__ = [
    "AndreevViolation",
    "AngledPolyhedron",
    "DomainError",
    "GeometricConstants",
    "RealizationError",
    "RealizedPolyhedron",
    "choose_b_R",
    "compute_constants",
    "develop_3kgon",
    "edge_length",
    "face_distance",
    "face_polygon",
    "mdot",
    "prism_combinatorics",
    "prism_constants",
    "realize_polyhedron",
    "segment_distance_h2",
    "sigma_margin",
]
