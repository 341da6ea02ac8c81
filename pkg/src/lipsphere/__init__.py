"""Lipschitz maps to the 2-sphere, level-set widths and systoles of surface meshes."""
from .surface import (
    MeshParseError,
    TopologyError,
    TriSurface,
    load_surface,
    refine_surface,
    save_surface,
    scale_metric,
    validate_surface,
)

__version__ = "0.1.0"

__all__ = [
    "MeshParseError",
    "TopologyError",
    "TriSurface",
    "__version__",
    "load_surface",
    "refine_surface",
    "save_surface",
    "scale_metric",
    "validate_surface",
]
