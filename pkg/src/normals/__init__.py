"""
Analytic surface normals from depth maps
"""
from .estimate import (
    SIX_NEIGHBORS,
    NormalCache,
    normals_cross_baseline,
    normals_six_neighbor,
    six_neighbor_forward,
    six_neighbor_vjp,
)

__all__ = [
    'SIX_NEIGHBORS',
    'NormalCache',
    'normals_cross_baseline',
    'normals_six_neighbor',
    'six_neighbor_forward',
    'six_neighbor_vjp',
]
