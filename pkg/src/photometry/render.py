"""
Forward rendering equation and its vector-Jacobian product

    radiance_c = sigma0 / |x - x_l|^2 * R(psi) * max(0, l . n) * rho_c * g
    color_c    = min(1, max(radiance_c, 0) ** (1 / gamma))

Every function works on whole fields with numpy broadcasting; pixels never
interact, so results do not depend on evaluation order.
"""
from dataclasses import dataclass
from typing import Optional

import numpy as np

from src.geometry import RayField, check_positive_depth, surface_points
from src.utils.errors import DomainError, check_same_shape

from .albedo import check_albedo_field, hsv_to_rgb_field
from .light import LightModel, irradiance_field


@dataclass(frozen=True)
class ShadingSample:
    """Pre-gamma radiance and post-gamma camera colour of one pixel"""
    radiance_rgb: np.ndarray
    color_rgb: np.ndarray


@dataclass
class ShadingTerms:
    """Intermediate values of one forward pass, kept for the backward pass"""
    L: np.ndarray
    dist2: np.ndarray
    l: np.ndarray
    cos_psi: np.ndarray
    attenuation: np.ndarray
    cos_theta: np.ndarray
    irradiance: np.ndarray
    albedo_rgb: np.ndarray
    normals: np.ndarray
    radiance: np.ndarray
    color: np.ndarray


@dataclass
class ShadingGrads:
    """Gradients of a scalar objective with respect to the shading inputs"""
    points: np.ndarray
    normals: np.ndarray
    albedo_rgb: np.ndarray
    position: np.ndarray
    mu: float


def shade(light: LightModel, points: np.ndarray, normals: np.ndarray,
          albedo_rgb: np.ndarray) -> ShadingTerms:
    """Evaluate the rendering equation at camera-frame surface points"""
    geo = irradiance_field(light, points, normals)
    radiance = geo.irradiance[..., None] * albedo_rgb * light.gain
    color = np.minimum(1.0, np.maximum(radiance, 0.0) ** (1.0 / light.gamma))
    return ShadingTerms(
        L=geo.L, dist2=geo.dist2, l=geo.l, cos_psi=geo.cos_psi, attenuation=geo.attenuation,
        cos_theta=geo.cos_theta, irradiance=geo.irradiance, albedo_rgb=albedo_rgb,
        normals=normals, radiance=radiance, color=color,
    )


def shade_vjp(light: LightModel, terms: ShadingTerms, g_color: np.ndarray,
              g_l_extra: Optional[np.ndarray] = None) -> ShadingGrads:
    """
    Back-propagate dObjective/dcolor through the rendering equation

    Args:
        light: Light used in the forward pass
        terms: Forward intermediates from shade()
        g_color: Gradient with respect to the post-gamma colours
        g_l_extra: Additional gradient with respect to the unit light
            direction l (the specular term depends on l as well)

    Returns:
        ShadingGrads; the saturation clamp and the cosine clamp contribute zero
    """
    radiance = terms.radiance
    active = (radiance > 0.0) & (radiance < 1.0)
    safe = np.where(active, radiance, 1.0)
    d_color = np.where(active, safe ** (1.0 / light.gamma - 1.0) / light.gamma, 0.0)
    g_rad = g_color * d_color

    g_albedo = g_rad * terms.irradiance[..., None] * light.gain
    g_irr = np.sum(g_rad * terms.albedo_rgb, axis=-1) * light.gain

    lit = terms.cos_theta > 0.0
    cos_pos = np.where(lit, terms.cos_theta, 0.0)
    g_att = g_irr * light.sigma0 * cos_pos / terms.dist2
    g_cos_theta = np.where(lit, g_irr * light.sigma0 * terms.attenuation / terms.dist2, 0.0)
    g_dist2 = -g_irr * terms.irradiance / terms.dist2

    g_cos_psi = g_att * terms.attenuation * light.mu
    g_mu = float(np.sum(g_att * terms.attenuation * (terms.cos_psi - 1.0)))

    g_l = g_cos_theta[..., None] * terms.normals - g_cos_psi[..., None] * light.axis_vector
    if g_l_extra is not None:
        g_l = g_l + g_l_extra
    g_normals = g_cos_theta[..., None] * terms.l

    dist = np.sqrt(terms.dist2)[..., None]
    g_L = (g_l - np.sum(g_l * terms.l, axis=-1, keepdims=True) * terms.l) / dist
    g_L = g_L + 2.0 * g_dist2[..., None] * terms.L

    return ShadingGrads(
        points=-g_L,
        normals=g_normals,
        albedo_rgb=g_albedo,
        position=np.sum(g_L.reshape(-1, 3), axis=0),
        mu=g_mu,
    )


def render_pixel(light: LightModel, ray: np.ndarray, d: float, albedo_rgb: np.ndarray,
                 n: np.ndarray) -> ShadingSample:
    """Render one pixel from its ray, depth, RGB albedo and normal"""
    if not d > 0:
        raise DomainError(f"depth must be positive, got {d}", depth=float(d))
    albedo_rgb = np.asarray(albedo_rgb, dtype=np.float64)
    if np.any(albedo_rgb < 0) or np.any(albedo_rgb > 1):
        raise DomainError(f"albedo must lie in [0, 1], got {albedo_rgb.tolist()}")
    point = float(d) * np.asarray(ray, dtype=np.float64)
    terms = shade(light, point, np.asarray(n, dtype=np.float64), albedo_rgb)
    return ShadingSample(radiance_rgb=terms.radiance, color_rgb=terms.color)


def render_fields(light: LightModel, rays: RayField, depth: np.ndarray,
                  albedo_rgb: np.ndarray, normals: np.ndarray) -> ShadingTerms:
    """Shade whole fields; returns the intermediates for gradient work"""
    check_same_shape("depth", depth, "rays", rays.directions)
    check_same_shape("albedo", albedo_rgb, "rays", rays.directions)
    check_same_shape("normals", normals, "rays", rays.directions)
    points = surface_points(rays, depth)
    return shade(light, points, normals, albedo_rgb)


def render_image(light: LightModel, rays: RayField, depth: np.ndarray,
                 albedo: np.ndarray, normals: np.ndarray) -> np.ndarray:
    """
    Render a colour image in [0, 1]

    Args:
        light: Spotlight model
        rays: Per-pixel unit rays
        depth: (H, W) ray distances, strictly positive
        albedo: (H, W, 2) hue/saturation field
        normals: (H, W, 3) unit normals

    Returns:
        (H, W, 3) post-gamma colours
    """
    depth = np.asarray(depth, dtype=np.float64)
    albedo = np.asarray(albedo, dtype=np.float64)
    check_same_shape("depth", depth, "rays", rays.directions)
    check_same_shape("albedo", albedo, "depth", depth)
    check_same_shape("normals", normals, "depth", depth)
    check_positive_depth(depth)
    check_albedo_field(albedo)
    return render_fields(light, rays, depth, hsv_to_rgb_field(albedo), np.asarray(normals, dtype=np.float64)).color
