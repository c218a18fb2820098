"""
Spotlight illumination model and the forward rendering equation
"""
from .albedo import AlbedoHS, check_albedo_field, hsv_jacobian, hsv_to_rgb, hsv_to_rgb_field
from .light import (
    IrradianceTerms,
    LightModel,
    irradiance_field,
    irradiance_geometry,
    off_axis_angle,
    radial_attenuation,
    to_light,
)
from .render import (
    ShadingGrads,
    ShadingSample,
    ShadingTerms,
    render_fields,
    render_image,
    render_pixel,
    shade,
    shade_vjp,
)

__all__ = [
    'AlbedoHS',
    'IrradianceTerms',
    'LightModel',
    'ShadingGrads',
    'ShadingSample',
    'ShadingTerms',
    'check_albedo_field',
    'hsv_jacobian',
    'hsv_to_rgb',
    'hsv_to_rgb_field',
    'irradiance_field',
    'irradiance_geometry',
    'off_axis_angle',
    'radial_attenuation',
    'render_fields',
    'render_image',
    'render_pixel',
    'shade',
    'shade_vjp',
    'to_light',
]
