"""
Surface normals from a depth map

The six-neighbour estimator back-projects each interior pixel and its N, NE,
E, S, SW and W neighbours, builds the triangle fan (N,NE) (NE,E) (E,S) (S,SW)
(SW,W) (W,N) around the centre and averages the triangle normals weighted by
their area. Area weighting of unit normals is the same as summing the raw
cross products, which is what the code does. Border pixels copy the nearest
interior normal. Normals point toward the camera (n . r < 0).
"""
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from src.geometry import RayField, check_positive_depth, surface_points
from src.utils.errors import DomainError, check_same_shape

# (dv, du) offsets in fan order
SIX_NEIGHBORS: Tuple[Tuple[int, int], ...] = (
    (-1, 0),   # N
    (-1, 1),   # NE
    (0, 1),    # E
    (1, 0),    # S
    (1, -1),   # SW
    (0, -1),   # W
)

_TINY = np.finfo(np.float64).tiny


@dataclass
class NormalCache:
    """Forward intermediates of the six-neighbour estimator"""
    diffs: List[np.ndarray]
    raw: np.ndarray
    norm: np.ndarray
    unit: np.ndarray
    sign: np.ndarray
    fallback: np.ndarray
    shape: Tuple[int, int]


def _shifted(field: np.ndarray, dv: int, du: int) -> np.ndarray:
    height, width = field.shape[:2]
    return field[1 + dv:height - 1 + dv, 1 + du:width - 1 + du]


def _border_index(height: int, width: int):
    rows = np.clip(np.arange(height), 1, height - 2) - 1
    cols = np.clip(np.arange(width), 1, width - 2) - 1
    return np.ix_(rows, cols)


def _orient(raw: np.ndarray, rays: np.ndarray):
    norm = np.sqrt(np.sum(raw * raw, axis=-1))
    fallback = norm <= _TINY
    unit = raw / np.where(fallback, 1.0, norm)[..., None]
    sign = np.where(np.sum(unit * rays, axis=-1) > 0.0, -1.0, 1.0)
    normals = np.where(fallback[..., None], -rays, sign[..., None] * unit)
    return normals, norm, unit, sign, fallback


def _validate(depth: np.ndarray, rays: RayField) -> np.ndarray:
    depth = np.asarray(depth, dtype=np.float64)
    check_same_shape("depth", depth, "rays", rays.directions)
    if depth.shape[0] < 3 or depth.shape[1] < 3:
        raise DomainError(f"normals need at least a 3x3 depth map, got {depth.shape}")
    check_positive_depth(depth)
    return depth


def six_neighbor_forward(points: np.ndarray, rays: np.ndarray):
    """
    Six-neighbour normals from back-projected points

    Args:
        points: (H, W, 3) surface points
        rays: (H, W, 3) unit rays

    Returns:
        (normals, cache) with normals of shape (H, W, 3)
    """
    height, width = points.shape[:2]
    centre = _shifted(points, 0, 0)
    diffs = [_shifted(points, dv, du) - centre for dv, du in SIX_NEIGHBORS]
    raw = np.zeros_like(centre)
    for k in range(6):
        raw += np.cross(diffs[(k + 1) % 6], diffs[k])

    interior, norm, unit, sign, fallback = _orient(raw, _shifted(rays, 0, 0))
    normals = interior[_border_index(height, width)]
    cache = NormalCache(
        diffs=diffs, raw=raw, norm=norm, unit=unit, sign=sign,
        fallback=fallback, shape=(height, width),
    )
    return normals, cache


def six_neighbor_vjp(cache: NormalCache, g_normals: np.ndarray) -> np.ndarray:
    """Gradient with respect to the back-projected points, shape (H, W, 3)"""
    height, width = cache.shape
    g_interior = np.zeros_like(cache.raw)
    rows, cols = _border_index(height, width)
    rows = np.broadcast_to(rows, (height, width))
    cols = np.broadcast_to(cols, (height, width))
    np.add.at(g_interior, (rows, cols), g_normals)

    g_unit = np.where(cache.fallback[..., None], 0.0, cache.sign[..., None] * g_interior)
    norm = np.where(cache.fallback, 1.0, cache.norm)[..., None]
    g_raw = (g_unit - np.sum(g_unit * cache.unit, axis=-1, keepdims=True) * cache.unit) / norm

    g_diffs = [np.zeros_like(cache.raw) for _ in range(6)]
    for k in range(6):
        a = cache.diffs[(k + 1) % 6]
        b = cache.diffs[k]
        g_diffs[(k + 1) % 6] += np.cross(b, g_raw)
        g_diffs[k] += np.cross(g_raw, a)

    g_points = np.zeros((height, width, 3))
    g_centre = np.zeros_like(cache.raw)
    for (dv, du), g_d in zip(SIX_NEIGHBORS, g_diffs):
        g_points[1 + dv:height - 1 + dv, 1 + du:width - 1 + du] += g_d
        g_centre -= g_d
    g_points[1:-1, 1:-1] += g_centre
    return g_points


def normals_six_neighbor(depth: np.ndarray, rays: RayField) -> np.ndarray:
    """Area-weighted six-neighbour normal map, shape (H, W, 3)"""
    depth = _validate(depth, rays)
    normals, _ = six_neighbor_forward(surface_points(rays, depth), rays.directions)
    return normals


def normals_cross_baseline(depth: np.ndarray, rays: RayField) -> np.ndarray:
    """Central-difference cross-product normals, the comparison baseline"""
    depth = _validate(depth, rays)
    points = surface_points(rays, depth)
    height, width = depth.shape
    d_u = points[1:-1, 2:] - points[1:-1, :-2]
    d_v = points[2:, 1:-1] - points[:-2, 1:-1]
    interior, _, _, _, _ = _orient(np.cross(d_v, d_u), _shifted(rays.directions, 0, 0))
    return interior[_border_index(height, width)]
