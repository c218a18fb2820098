"""
Ray casting of synthetic scenes with exact ground truth

Every camera ray is intersected in closed form with the scene surface; the
image is produced by the library renderer from the analytic depth, normals
and albedo, so a bundle always re-renders to itself bit for bit.
"""
from dataclasses import dataclass
from typing import Optional, Tuple
import logging

import numpy as np
from scipy.ndimage import gaussian_filter

from src.geometry import CameraModel, RayField, build_ray_field
from src.photometry import LightModel, render_image
from src.utils.errors import CoverageError, DomainError, NumericError

from .scene import PlaneSpec, SceneSpec, SphereSpec, TextureSpec, TubeSpec, tube_segments

logger = logging.getLogger(__name__)

_EPS = 1e-9
_SPECULAR_TH = 0.98


@dataclass
class GroundTruthBundle:
    """Rendered image plus the fields it was rendered from"""
    image: np.ndarray
    depth: np.ndarray
    normals: np.ndarray
    albedo: np.ndarray
    camera: CameraModel
    light: LightModel
    scene: Optional[SceneSpec] = None

    def check_consistent(self, rays: Optional[RayField] = None) -> None:
        """Raise NumericError unless the image re-renders bitwise"""
        rays = rays if rays is not None else build_ray_field(self.camera)
        again = render_image(self.light, rays, self.depth, self.albedo, self.normals)
        if not np.array_equal(again, self.image):
            raise NumericError("bundle image differs from its re-render")


def _hits_plane(rays: np.ndarray, plane: PlaneSpec):
    normal = np.asarray(plane.normal)
    denom = rays @ normal
    safe = np.where(np.abs(denom) > _EPS, denom, 1.0)
    t = np.where(np.abs(denom) > _EPS, np.dot(plane.point, normal) / safe, np.inf)
    t = np.where(t > _EPS, t, np.inf)
    return t, np.broadcast_to(normal, rays.shape)


def _hits_sphere(rays: np.ndarray, sphere: SphereSpec):
    center = np.asarray(sphere.center)
    b = rays @ center
    disc = b * b - (center @ center - sphere.radius ** 2)
    root = np.sqrt(np.maximum(disc, 0.0))
    near, far = b - root, b + root
    t = np.where(near > _EPS, near, far)
    t = np.where((disc >= 0) & (t > _EPS), t, np.inf)
    points = np.where(np.isfinite(t), t, 0.0)[..., None] * rays
    return t, (points - center) / sphere.radius


def _inside_segment(points: np.ndarray, start: np.ndarray, axis: np.ndarray, length: float,
                    radius: float) -> np.ndarray:
    rel = points - start
    s = rel @ axis
    radial = rel - s[..., None] * axis
    return (s > _EPS) & (s < length - _EPS) & (np.sum(radial * radial, axis=-1) < (radius - 1e-7) ** 2)


def _hits_tube(rays: np.ndarray, tube: TubeSpec):
    segments = tube_segments(tube)
    radius = tube.radius
    best_t = np.full(rays.shape[:-1], np.inf)
    best_n = np.zeros(rays.shape)
    candidates = []

    for k, (start, axis, length) in enumerate(segments):
        q = -start
        q_perp = q - (q @ axis) * axis
        r_perp = rays - (rays @ axis)[..., None] * axis
        a = np.sum(r_perp * r_perp, axis=-1)
        b = 2.0 * (r_perp @ q_perp)
        c = q_perp @ q_perp - radius ** 2
        disc = b * b - 4.0 * a * c
        root = np.sqrt(np.maximum(disc, 0.0))
        safe_a = np.where(a > _EPS, a, 1.0)
        for sign in (-1.0, 1.0):
            t = (-b + sign * root) / (2.0 * safe_a)
            points = t[..., None] * rays
            s = (points - start) @ axis
            ok = (a > _EPS) & (disc >= 0) & (t > _EPS) & (s >= 0) & (s <= length)
            radial = points - start - s[..., None] * axis
            candidates.append((k, np.where(ok, t, np.inf), radial / radius))

    # far cap
    end_start, end_axis, end_length = segments[-1]
    end = end_start + end_length * end_axis
    denom = rays @ end_axis
    t = np.where(np.abs(denom) > _EPS, (end @ end_axis) / np.where(np.abs(denom) > _EPS, denom, 1.0), np.inf)
    points = np.where(np.isfinite(t), t, 0.0)[..., None] * rays
    on_disk = np.sum((points - end) ** 2, axis=-1) <= radius ** 2
    candidates.append((len(segments), np.where((t > _EPS) & on_disk, t, np.inf),
                       np.broadcast_to(end_axis, rays.shape)))

    for k, t, normal in candidates:
        points = np.where(np.isfinite(t), t, 0.0)[..., None] * rays
        for j, (start, axis, length) in enumerate(segments):
            if j != k and len(segments) > 1:
                t = np.where(_inside_segment(points, start, axis, length, radius), np.inf, t)
        closer = t < best_t
        best_t = np.where(closer, t, best_t)
        best_n = np.where(closer[..., None], normal, best_n)
    return best_t, best_n


def _texture_direction(scene: SceneSpec) -> np.ndarray:
    if scene.albedo.direction is not None:
        return np.asarray(scene.albedo.direction)
    if isinstance(scene.surface, TubeSpec):
        return tube_segments(scene.surface)[0][1]
    return np.array([1.0, 0.0, 0.0])


def texture_albedo(texture: TextureSpec, points: np.ndarray, direction: np.ndarray) -> np.ndarray:
    """(h, s) albedo at surface points"""
    albedo = np.empty(points.shape[:-1] + (2,))
    albedo[..., 0] = texture.base.h
    albedo[..., 1] = texture.base.s
    if texture.kind == "stripes":
        phase = np.mod(texture.frequency * (points @ direction), 1.0)
        stripe = phase < texture.width
        albedo[stripe, 0] = texture.stripe.h
        albedo[stripe, 1] = texture.stripe.s
    return albedo


def intersect(scene: SceneSpec, rays: RayField) -> Tuple[np.ndarray, np.ndarray]:
    """
    Nearest hit of every ray

    Returns:
        (depth, normals) with camera-facing unit normals

    Raises:
        CoverageError: naming the first pixel whose ray misses the surface
    """
    directions = rays.directions
    if isinstance(scene.surface, PlaneSpec):
        depth, normals = _hits_plane(directions, scene.surface)
    elif isinstance(scene.surface, SphereSpec):
        depth, normals = _hits_sphere(directions, scene.surface)
    else:
        depth, normals = _hits_tube(directions, scene.surface)

    missed = ~np.isfinite(depth)
    if missed.any():
        v, u = np.argwhere(missed)[0]
        raise CoverageError(
            f"ray of pixel (u={u}, v={v}) misses the {scene.kind}",
            pixel=[int(u), int(v)],
        )
    normals = np.array(normals, dtype=np.float64)
    facing = np.sum(normals * directions, axis=-1) > 0
    normals[facing] *= -1.0
    return depth, normals


def cast(scene: SceneSpec) -> GroundTruthBundle:
    """
    Ray-cast a scene into a ground-truth bundle

    Args:
        scene: Scene description

    Returns:
        GroundTruthBundle whose image is render_image of its own fields
    """
    rays = build_ray_field(scene.camera)
    depth, normals = intersect(scene, rays)
    points = depth[..., None] * rays.directions
    albedo = texture_albedo(scene.albedo, points, _texture_direction(scene))
    image = render_image(scene.light, rays, depth, albedo, normals)

    saturated = int(np.count_nonzero(np.max(image, axis=-1) > _SPECULAR_TH))
    if saturated:
        logger.warning(f"⚠️  {saturated} pixel(s) above the specular threshold; "
                       f"lower the light gain for Lambertian-only ground truth")
    bundle = GroundTruthBundle(
        image=image, depth=depth, normals=normals, albedo=albedo,
        camera=scene.camera, light=scene.light, scene=scene,
    )
    bundle.check_consistent(rays)
    return bundle


def perturb_depth(depth: np.ndarray, amplitude: float, smoothness: float, seed: int) -> np.ndarray:
    """
    Multiply depth by (1 + amplitude * B)

    B is seeded Gaussian noise blurred over `smoothness` pixels, shifted to
    zero mean and scaled so that max |B| = 1.
    """
    if amplitude < 0:
        raise DomainError(f"amplitude must be >= 0, got {amplitude}")
    if amplitude >= 1:
        raise DomainError(f"amplitude must be < 1 to keep depth positive, got {amplitude}")
    depth = np.asarray(depth, dtype=np.float64)
    rng = np.random.default_rng(seed)
    field = gaussian_filter(rng.standard_normal(depth.shape), sigma=smoothness, mode="nearest")
    field = field - field.mean()
    peak = np.max(np.abs(field))
    if peak > 0:
        field = field / peak
    return depth * (1.0 + amplitude * field)
