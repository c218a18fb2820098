"""
Self-supervision losses

    L = L_p + lambda_s * L_s + lambda_sp * L_sp

All reductions are means, so the weights do not depend on image resolution.
The photometric term compares the observed image with the render, the
smoothness term penalises depth gradients except across colour edges of the
observed image, and the specular term asks saturated pixels to be mirror
reflections of the light into the camera.
"""
from dataclasses import dataclass, asdict
from typing import Dict, Optional, Tuple

import numpy as np

from src.geometry import RayField, check_positive_depth, surface_points
from src.normals import six_neighbor_forward, six_neighbor_vjp
from src.photometry import LightModel, hsv_jacobian, hsv_to_rgb_field, shade, shade_vjp, to_light
from src.utils.errors import ConfigError, DomainError, check_same_shape

ABLATIONS = ("no_smoothness", "no_specular", "photometric_only")


@dataclass(frozen=True)
class LossWeights:
    """Scalar loss weights and the saturation threshold of the specular mask"""
    lambda_s: float = 0.1
    lambda_sp: float = 1.0
    th: float = 0.98

    def __post_init__(self):
        if self.lambda_s < 0 or self.lambda_sp < 0:
            raise DomainError(f"loss weights must be >= 0, got {self.lambda_s}, {self.lambda_sp}")
        if not 0 <= self.th <= 1:
            raise DomainError(f"saturation threshold must lie in [0, 1], got {self.th}")

    def ablate(self, ablation: Optional[str]) -> "LossWeights":
        """Switch loss terms off by name"""
        if ablation is None:
            return self
        if ablation not in ABLATIONS:
            raise ConfigError(f"unknown ablation {ablation!r}", allowed=list(ABLATIONS))
        lambda_s = 0.0 if ablation in ("no_smoothness", "photometric_only") else self.lambda_s
        lambda_sp = 0.0 if ablation in ("no_specular", "photometric_only") else self.lambda_sp
        return LossWeights(lambda_s=lambda_s, lambda_sp=lambda_sp, th=self.th)

    @classmethod
    def from_dict(cls, data: Dict) -> "LossWeights":
        unknown = set(data) - {"lambda_s", "lambda_sp", "th"}
        if unknown:
            raise ConfigError("unknown loss weight keys", unknown=sorted(unknown))
        return cls(**{key: float(value) for key, value in data.items()})

    def to_dict(self) -> Dict:
        return asdict(self)


@dataclass(frozen=True)
class LossBreakdown:
    """The three loss terms and their weighted total"""
    photometric: float
    smoothness: float
    specular: float
    total: float

    @classmethod
    def compose(cls, photometric: float, smoothness: float, specular: float,
                weights: LossWeights) -> "LossBreakdown":
        total = photometric + weights.lambda_s * smoothness + weights.lambda_sp * specular
        return cls(float(photometric), float(smoothness), float(specular), float(total))

    def to_dict(self) -> Dict:
        return asdict(self)


@dataclass
class LossGradient:
    """Gradient of the total loss with respect to depth and (h, s) albedo"""
    depth: np.ndarray
    albedo: np.ndarray


def photometric_loss(observed: np.ndarray, rendered: np.ndarray) -> float:
    """Mean squared difference over pixels and channels"""
    check_same_shape("observed", observed, "rendered", rendered, leading=3)
    diff = np.asarray(observed, dtype=np.float64) - np.asarray(rendered, dtype=np.float64)
    return float(np.mean(diff * diff))


def _edge_weights(image: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    image = np.asarray(image, dtype=np.float64)
    if image.ndim == 2:
        image = image[..., None]
    w_x = np.exp(-np.mean(np.abs(image[:, 1:] - image[:, :-1]), axis=-1))
    w_y = np.exp(-np.mean(np.abs(image[1:] - image[:-1]), axis=-1))
    return w_x, w_y


def _smoothness(depth: np.ndarray, image: np.ndarray) -> Tuple[float, np.ndarray]:
    w_x, w_y = _edge_weights(image)
    d_x = depth[:, 1:] - depth[:, :-1]
    d_y = depth[1:] - depth[:-1]
    loss = np.mean(np.abs(d_x) * w_x) + np.mean(np.abs(d_y) * w_y)

    grad = np.zeros_like(depth)
    g_x = np.sign(d_x) * w_x / d_x.size
    g_y = np.sign(d_y) * w_y / d_y.size
    grad[:, 1:] += g_x
    grad[:, :-1] -= g_x
    grad[1:] += g_y
    grad[:-1] -= g_y
    return float(loss), grad


def smoothness_loss(depth: np.ndarray, image: np.ndarray) -> float:
    """
    Edge-aware depth smoothness

    Mean of |dx d| exp(-|dx I|) over the (H, W-1) forward differences plus the
    same term along y over (H-1, W); image gradients are averaged over channels.
    """
    depth = np.asarray(depth, dtype=np.float64)
    check_same_shape("depth", depth, "image", image)
    check_positive_depth(depth)
    return _smoothness(depth, image)[0]


def specular_direction(l: np.ndarray, n: np.ndarray) -> np.ndarray:
    """Mirror reflection s = 2 n (n . l) - l of the surface-to-light direction"""
    l = np.asarray(l, dtype=np.float64)
    n = np.asarray(n, dtype=np.float64)
    for name, vector in (("l", l), ("n", n)):
        if np.any(np.abs(np.linalg.norm(vector, axis=-1) - 1.0) > 1e-6):
            raise DomainError(f"{name} must be a unit vector, got {vector.tolist()}")
    return 2.0 * n * np.sum(n * l, axis=-1, keepdims=True) - l


def saturation_mask(image: np.ndarray, th: float) -> np.ndarray:
    """Pixels whose brightest channel exceeds th"""
    image = np.asarray(image, dtype=np.float64)
    if image.ndim == 2:
        return image > th
    return np.max(image, axis=-1) > th


def _specular(mask: np.ndarray, l: np.ndarray, normals: np.ndarray, rays: np.ndarray):
    count = int(mask.sum())
    if count == 0:
        return 0.0, np.zeros_like(normals), np.zeros_like(l)
    n_dot_l = np.sum(normals * l, axis=-1, keepdims=True)
    s = 2.0 * normals * n_dot_l - l
    residual = -np.sum(s * rays, axis=-1) - 1.0
    loss = float(np.sum(np.where(mask, residual * residual, 0.0)) / count)

    g_residual = np.where(mask, 2.0 * residual / count, 0.0)
    g_s = -g_residual[..., None] * rays
    g_s_dot_n = np.sum(g_s * normals, axis=-1, keepdims=True)
    g_normals = 2.0 * n_dot_l * g_s + 2.0 * g_s_dot_n * l
    g_l = 2.0 * g_s_dot_n * normals - g_s
    return loss, g_normals, g_l


def specular_loss(image: np.ndarray, normals: np.ndarray, rays: RayField, light: LightModel,
                  th: float, depth: np.ndarray) -> float:
    """
    Mean of (s . (-r) - 1)^2 over saturated pixels, 0 when none is saturated

    Args:
        image: Observed colours deciding the mask
        normals: (H, W, 3) normal map
        rays: Per-pixel unit rays
        light: Spotlight (its position defines l)
        th: Saturation threshold
        depth: (H, W) depth used to place the surface points
    """
    depth = np.asarray(depth, dtype=np.float64)
    check_same_shape("image", image, "normals", normals)
    check_same_shape("normals", normals, "rays", rays.directions)
    check_same_shape("depth", depth, "rays", rays.directions)
    _, _, l = to_light(light, surface_points(rays, depth))
    return _specular(saturation_mask(image, th), l, np.asarray(normals, dtype=np.float64), rays.directions)[0]


def total_loss_and_gradient(observed: np.ndarray, depth: np.ndarray, albedo: np.ndarray,
                            light: LightModel, rays: RayField, weights: LossWeights,
                            with_gradient: bool = True):
    """
    Total loss through render -> normals -> losses, with its exact gradient

    The normals are recomputed from depth, so the depth gradient carries the
    six-neighbour stencil of the normal estimator on top of the per-pixel
    shading term and the smoothness coupling.

    Returns:
        (LossBreakdown, LossGradient or None, rendered image)
    """
    observed = np.asarray(observed, dtype=np.float64)
    depth = np.asarray(depth, dtype=np.float64)
    albedo = np.asarray(albedo, dtype=np.float64)
    check_same_shape("observed", observed, "rays", rays.directions)
    check_same_shape("depth", depth, "rays", rays.directions)
    check_same_shape("albedo", albedo, "rays", rays.directions)

    points = surface_points(rays, depth)
    normals, normal_cache = six_neighbor_forward(points, rays.directions)
    albedo_rgb = hsv_to_rgb_field(albedo)
    terms = shade(light, points, normals, albedo_rgb)

    diff = terms.color - observed
    photometric = float(np.mean(diff * diff))
    smoothness, g_depth_smooth = _smoothness(depth, observed)
    specular, g_normals_spec, g_l_spec = _specular(
        saturation_mask(observed, weights.th), terms.l, normals, rays.directions,
    )
    breakdown = LossBreakdown.compose(photometric, smoothness, specular, weights)
    if not with_gradient:
        return breakdown, None, terms.color

    g_color = 2.0 * diff / diff.size
    shading = shade_vjp(light, terms, g_color, g_l_extra=weights.lambda_sp * g_l_spec)
    g_normals = shading.normals + weights.lambda_sp * g_normals_spec
    g_points = shading.points + six_neighbor_vjp(normal_cache, g_normals)
    g_depth = np.sum(g_points * rays.directions, axis=-1) + weights.lambda_s * g_depth_smooth

    d_h, d_s = hsv_jacobian(albedo)
    g_albedo = np.stack(
        [np.sum(shading.albedo_rgb * d_h, axis=-1), np.sum(shading.albedo_rgb * d_s, axis=-1)],
        axis=-1,
    )
    return breakdown, LossGradient(depth=g_depth, albedo=g_albedo), terms.color


def total_loss(observed: np.ndarray, depth: np.ndarray, albedo: np.ndarray, light: LightModel,
               rays: RayField, weights: LossWeights) -> LossBreakdown:
    """Render with six-neighbour normals and evaluate all three terms"""
    return total_loss_and_gradient(observed, depth, albedo, light, rays, weights, with_gradient=False)[0]
