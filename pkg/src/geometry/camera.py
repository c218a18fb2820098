"""
Pinhole camera model and per-pixel ray generation

Pixel centres sit at integer coordinates (u, v) with the origin at the top-left
corner, u to the right and v downward. The camera frame is right-handed with
y down and z forward. Depth is the Euclidean distance along the unit ray, so a
surface point is x = d * r.
"""
from dataclasses import dataclass
from typing import Dict, Sequence, Tuple

import numpy as np

from src.utils.errors import ConfigError, DomainError

_CAMERA_KEYS = ("fx", "fy", "cx", "cy", "width", "height")


def normalize(vectors: np.ndarray) -> np.ndarray:
    """Normalise along the last axis (shared by every ray/normal computation)"""
    vectors = np.asarray(vectors, dtype=np.float64)
    return vectors / np.sqrt(np.sum(vectors * vectors, axis=-1, keepdims=True))


@dataclass(frozen=True)
class CameraModel:
    """Pinhole intrinsics in pixels"""
    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int

    def __post_init__(self):
        if not (self.fx > 0 and self.fy > 0):
            raise DomainError(f"focal lengths must be positive, got fx={self.fx}, fy={self.fy}")
        if self.width < 3 or self.height < 3:
            raise DomainError(
                f"camera must be at least 3x3 pixels, got {self.width}x{self.height}",
                width=self.width, height=self.height,
            )

    @property
    def shape(self) -> Tuple[int, int]:
        """(height, width) as used by every field array"""
        return (self.height, self.width)

    @classmethod
    def from_dict(cls, data: Dict) -> "CameraModel":
        unknown = set(data) - set(_CAMERA_KEYS)
        missing = set(_CAMERA_KEYS) - set(data)
        if unknown or missing:
            raise ConfigError(
                "camera JSON must have exactly the keys fx, fy, cx, cy, width, height",
                unknown=sorted(unknown), missing=sorted(missing),
            )
        return cls(
            fx=float(data["fx"]), fy=float(data["fy"]),
            cx=float(data["cx"]), cy=float(data["cy"]),
            width=int(data["width"]), height=int(data["height"]),
        )

    def to_dict(self) -> Dict:
        return {
            "fx": self.fx, "fy": self.fy, "cx": self.cx, "cy": self.cy,
            "width": self.width, "height": self.height,
        }


@dataclass(frozen=True)
class RayField:
    """Unit camera rays r_i for every pixel, shape (height, width, 3)"""
    directions: np.ndarray

    @property
    def shape(self) -> Tuple[int, int]:
        return self.directions.shape[:2]


def _back_project(cam: CameraModel, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    raw = np.stack(
        [(u - cam.cx) / cam.fx, (v - cam.cy) / cam.fy, np.ones_like(u)],
        axis=-1,
    )
    return normalize(raw)


def inverse_project(cam: CameraModel, u: Sequence[float]) -> np.ndarray:
    """
    Back-project a (sub-)pixel coordinate to a unit ray

    Args:
        cam: Camera intrinsics
        u: Pixel coordinate (x, y)

    Returns:
        Unit 3-vector in the camera frame
    """
    x, y = float(u[0]), float(u[1])
    if not (0 <= x < cam.width and 0 <= y < cam.height):
        raise DomainError(
            f"pixel ({x}, {y}) outside the {cam.width}x{cam.height} image",
            pixel=[x, y],
        )
    return _back_project(cam, np.array(x), np.array(y))


def build_ray_field(cam: CameraModel) -> RayField:
    """Precompute the unit ray of every integer pixel centre"""
    v, u = np.meshgrid(
        np.arange(cam.height, dtype=np.float64),
        np.arange(cam.width, dtype=np.float64),
        indexing="ij",
    )
    return RayField(directions=_back_project(cam, u, v))


def project(cam: CameraModel, x: np.ndarray) -> np.ndarray:
    """Forward pinhole projection of camera-frame points to pixel coordinates"""
    x = np.asarray(x, dtype=np.float64)
    return np.stack(
        [x[..., 0] / x[..., 2] * cam.fx + cam.cx, x[..., 1] / x[..., 2] * cam.fy + cam.cy],
        axis=-1,
    )


def surface_point(ray: np.ndarray, d: float) -> np.ndarray:
    """x = d * r for one ray"""
    if not d > 0:
        raise DomainError(f"depth must be positive, got {d}", depth=float(d))
    return float(d) * np.asarray(ray, dtype=np.float64)


def surface_points(rays: RayField, depth: np.ndarray) -> np.ndarray:
    """Back-project a whole depth map, shape (height, width, 3)"""
    depth = np.asarray(depth, dtype=np.float64)
    check_positive_depth(depth)
    return depth[..., None] * rays.directions


def check_positive_depth(depth: np.ndarray) -> None:
    """Raise DomainError naming the first non-positive (or non-finite) pixel"""
    bad = ~(np.asarray(depth) > 0)
    if bad.any():
        v, u = np.argwhere(bad)[0]
        raise DomainError(
            f"depth must be strictly positive, got {depth[v, u]} at pixel (u={u}, v={v})",
            pixel=[int(u), int(v)],
        )
