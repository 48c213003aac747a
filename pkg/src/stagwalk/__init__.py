"""Staggered quantum walks on spatial networks."""

__version__ = "0.1.0"

from .graph import BoundaryMode, SpatialGraph, critical_radius, distance, generate_rgg, is_connected
from .tessellation import Mode, TessellationCover, complete_cover, tessellate, validate_cover
from .walk import apply_generalized, apply_reflection, clique_states, walk_step

__all__ = [
    "BoundaryMode",
    "Mode",
    "SpatialGraph",
    "TessellationCover",
    "apply_generalized",
    "apply_reflection",
    "clique_states",
    "complete_cover",
    "critical_radius",
    "distance",
    "generate_rgg",
    "is_connected",
    "tessellate",
    "validate_cover",
    "walk_step",
]
