"""
Synthetic scene generation: analytic ray casting with exact ground truth
"""
from .scene import PlaneSpec, SceneSpec, SphereSpec, TextureSpec, TubeSpec, load_scene
from .cast import GroundTruthBundle, cast, intersect, perturb_depth, texture_albedo

__all__ = [
    'GroundTruthBundle',
    'PlaneSpec',
    'SceneSpec',
    'SphereSpec',
    'TextureSpec',
    'TubeSpec',
    'cast',
    'intersect',
    'load_scene',
    'perturb_depth',
    'texture_albedo',
]
