"""
Spotlight illumination model

A point source at x_l with radiance sigma0 along its principal axis, radial
attenuation R(psi) = exp(-mu (1 - cos psi)) away from the axis and an
inverse-square fall-off with distance. The camera applies a gain g and a
gamma 1/gamma to whatever radiance reaches it.
"""
from dataclasses import dataclass
from typing import Dict, Optional

import numpy as np

from src.config import RenderDefaults
from src.utils.errors import ConfigError, DegenerateGeometryError, DomainError

_LIGHT_KEYS = ("position", "axis", "mu", "sigma0", "gain", "gamma")
_COINCIDENT_TOL = 1e-12


@dataclass(frozen=True)
class LightModel:
    """Calibrated spotlight, positions in mm in the camera frame"""
    position: tuple = (0.0, 0.0, 0.0)
    axis: tuple = (0.0, 0.0, 1.0)
    mu: float = 0.0
    sigma0: float = 1.0
    gain: float = 1.0
    gamma: float = 2.2

    def __post_init__(self):
        object.__setattr__(self, "position", tuple(float(c) for c in self.position))
        object.__setattr__(self, "axis", tuple(float(c) for c in self.axis))
        if len(self.position) != 3 or len(self.axis) != 3:
            raise DomainError("light position and axis must be 3-vectors")
        if abs(np.linalg.norm(self.axis) - 1.0) > 1e-12:
            raise DomainError(f"light axis must be a unit vector, got {self.axis}")
        if self.mu < 0:
            raise DomainError(f"spread factor mu must be >= 0, got {self.mu}")
        if not self.sigma0 > 0:
            raise DomainError(f"sigma0 must be positive, got {self.sigma0}")
        if not self.gain > 0:
            raise DomainError(f"gain must be positive, got {self.gain}")
        if self.gamma < 1:
            raise DomainError(f"gamma must be >= 1, got {self.gamma}")

    @property
    def x_l(self) -> np.ndarray:
        return np.asarray(self.position, dtype=np.float64)

    @property
    def axis_vector(self) -> np.ndarray:
        return np.asarray(self.axis, dtype=np.float64)

    def replace(self, **changes) -> "LightModel":
        data = self.to_dict()
        data.update(changes)
        return LightModel(**data)

    @classmethod
    def from_dict(cls, data: Dict, defaults: Optional[RenderDefaults] = None) -> "LightModel":
        """Build from the JSON form; missing fields take the render defaults"""
        unknown = set(data) - set(_LIGHT_KEYS)
        if unknown:
            raise ConfigError("unknown light keys", unknown=sorted(unknown))
        defaults = defaults or RenderDefaults()
        axis = np.asarray(data.get("axis", defaults.axis), dtype=np.float64)
        norm = np.linalg.norm(axis)
        if norm == 0:
            raise ConfigError("light axis must be non-zero")
        return cls(
            position=tuple(data.get("position", (0.0, 0.0, 0.0))),
            axis=tuple(axis / norm),
            mu=float(data.get("mu", defaults.mu)),
            sigma0=float(data.get("sigma0", defaults.sigma0)),
            gain=float(data.get("gain", defaults.gain)),
            gamma=float(data.get("gamma", defaults.gamma)),
        )

    def to_dict(self) -> Dict:
        return {
            "position": list(self.position),
            "axis": list(self.axis),
            "mu": self.mu,
            "sigma0": self.sigma0,
            "gain": self.gain,
            "gamma": self.gamma,
        }


def radial_attenuation(light: LightModel, psi):
    """R(psi) = exp(-mu (1 - cos psi)) for psi in [0, pi]"""
    psi_arr = np.asarray(psi, dtype=np.float64)
    if np.any(psi_arr < 0) or np.any(psi_arr > np.pi) or np.any(np.isnan(psi_arr)):
        raise DomainError(f"off-axis angle must lie in [0, pi], got {psi}")
    result = np.exp(-light.mu * (1.0 - np.cos(psi_arr)))
    return float(result) if result.ndim == 0 else result


def to_light(light: LightModel, points: np.ndarray):
    """
    Surface-to-light geometry

    Returns:
        (L, dist2, l): vector x_l - x, its squared length and unit direction
    """
    L = light.x_l - np.asarray(points, dtype=np.float64)
    dist2 = np.sum(L * L, axis=-1)
    if np.any(dist2 <= _COINCIDENT_TOL ** 2):
        idx = np.argwhere(dist2 <= _COINCIDENT_TOL ** 2)[0].tolist()
        raise DegenerateGeometryError(
            "surface point coincides with the light position", index=idx,
        )
    l = L / np.sqrt(dist2)[..., None]
    return L, dist2, l


def off_axis_angle(light: LightModel, x: np.ndarray) -> float:
    """Angle between the spotlight axis and the light-to-point direction"""
    _, _, l = to_light(light, x)
    cos_psi = np.clip(-np.sum(l * light.axis_vector, axis=-1), -1.0, 1.0)
    result = np.arccos(cos_psi)
    return float(result) if result.ndim == 0 else result


@dataclass
class IrradianceTerms:
    """Light geometry at a field of surface points"""
    L: np.ndarray
    dist2: np.ndarray
    l: np.ndarray
    cos_psi: np.ndarray
    attenuation: np.ndarray
    cos_theta: np.ndarray
    irradiance: np.ndarray


def irradiance_field(light: LightModel, points: np.ndarray, normals: np.ndarray) -> IrradianceTerms:
    """
    sigma0 / |x - x_l|^2 * R(psi) * max(0, l . n) over whole fields

    cos_theta is kept unclamped so callers can tell lit from unlit points.
    """
    L, dist2, l = to_light(light, points)
    cos_psi = -np.sum(l * light.axis_vector, axis=-1)
    attenuation = np.exp(-light.mu * (1.0 - cos_psi))
    cos_theta = np.sum(l * normals, axis=-1)
    irradiance = light.sigma0 * attenuation * np.maximum(cos_theta, 0.0) / dist2
    return IrradianceTerms(
        L=L, dist2=dist2, l=l, cos_psi=cos_psi, attenuation=attenuation,
        cos_theta=cos_theta, irradiance=irradiance,
    )


def irradiance_geometry(light: LightModel, x: np.ndarray, n: np.ndarray) -> float:
    """Irradiance at a single point with unit normal n"""
    n = np.asarray(n, dtype=np.float64)
    if abs(np.linalg.norm(n) - 1.0) > 1e-9:
        raise DomainError(f"normal must be a unit vector, got {n.tolist()}")
    return float(irradiance_field(light, np.asarray(x, dtype=np.float64), n).irradiance)
