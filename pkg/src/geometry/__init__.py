"""
Camera model and pixel-grid conventions shared by every other package
"""
from .camera import (
    CameraModel,
    RayField,
    build_ray_field,
    check_positive_depth,
    inverse_project,
    normalize,
    project,
    surface_point,
    surface_points,
)

__all__ = [
    'CameraModel',
    'RayField',
    'build_ray_field',
    'check_positive_depth',
    'inverse_project',
    'normalize',
    'project',
    'surface_point',
    'surface_points',
]
