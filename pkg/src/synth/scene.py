"""
Synthetic scene descriptions and their JSON form
"""
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple
import hashlib
import json

import numpy as np

from src.geometry import CameraModel, normalize
from src.photometry import AlbedoHS, LightModel
from src.utils.errors import ConfigError, DomainError

SCENE_KINDS = ("plane", "sphere", "tube")
TEXTURE_TYPES = ("constant", "stripes")


def _vec3(value, name: str) -> Tuple[float, float, float]:
    arr = np.asarray(value, dtype=np.float64)
    if arr.shape != (3,) or not np.all(np.isfinite(arr)):
        raise ConfigError(f"{name} must be a finite 3-vector, got {value!r}")
    return tuple(float(c) for c in arr)


def _unit3(value, name: str) -> Tuple[float, float, float]:
    vec = np.asarray(_vec3(value, name))
    if np.linalg.norm(vec) == 0:
        raise ConfigError(f"{name} must be non-zero")
    return tuple(float(c) for c in normalize(vec))


def _check_keys(data: Dict, allowed, where: str) -> None:
    unknown = set(data) - set(allowed)
    if unknown:
        raise ConfigError(f"unknown {where} keys", unknown=sorted(unknown))


@dataclass(frozen=True)
class PlaneSpec:
    point: Tuple[float, float, float]
    normal: Tuple[float, float, float]

    @classmethod
    def from_dict(cls, data: Dict) -> "PlaneSpec":
        _check_keys(data, ("point", "normal"), "plane")
        return cls(point=_vec3(data["point"], "plane point"), normal=_unit3(data["normal"], "plane normal"))

    def to_dict(self) -> Dict:
        return {"point": list(self.point), "normal": list(self.normal)}


@dataclass(frozen=True)
class SphereSpec:
    center: Tuple[float, float, float]
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise DomainError(f"sphere radius must be positive, got {self.radius}")

    @classmethod
    def from_dict(cls, data: Dict) -> "SphereSpec":
        _check_keys(data, ("center", "radius"), "sphere")
        return cls(center=_vec3(data["center"], "sphere center"), radius=float(data["radius"]))

    def to_dict(self) -> Dict:
        return {"center": list(self.center), "radius": self.radius}


@dataclass(frozen=True)
class TubeSpec:
    """Piecewise-cylindrical tube along a polyline, closed by a cap at its far end"""
    polyline: Tuple[Tuple[float, float, float], ...]
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise DomainError(f"tube radius must be positive, got {self.radius}")
        if len(self.polyline) < 2:
            raise DomainError("tube polyline needs at least two points")
        for a, b in zip(self.polyline[:-1], self.polyline[1:]):
            if np.allclose(a, b):
                raise DomainError("tube polyline has a zero-length segment", point=list(a))

    @property
    def length(self) -> float:
        points = np.asarray(self.polyline)
        return float(np.sum(np.linalg.norm(np.diff(points, axis=0), axis=1)))

    @classmethod
    def straight(cls, radius: float, length: float, origin=(0.0, 0.0, 0.0),
                 direction=(0.0, 0.0, 1.0)) -> "TubeSpec":
        """Single-segment tube"""
        if not length > 0:
            raise DomainError(f"tube length must be positive, got {length}")
        start = np.asarray(origin, dtype=np.float64)
        end = start + length * normalize(np.asarray(direction, dtype=np.float64))
        return cls(polyline=(tuple(start.tolist()), tuple(end.tolist())), radius=float(radius))

    @classmethod
    def from_dict(cls, data: Dict) -> "TubeSpec":
        _check_keys(data, ("polyline", "radius", "length", "origin", "direction"), "tube")
        radius = float(data["radius"])
        if "polyline" in data:
            if "length" in data:
                raise ConfigError("tube takes either a polyline or a length, not both")
            return cls(polyline=tuple(_vec3(p, "tube point") for p in data["polyline"]), radius=radius)
        if "length" not in data:
            raise ConfigError("tube needs a polyline or a length")
        return cls.straight(
            radius=radius, length=float(data["length"]),
            origin=_vec3(data.get("origin", (0.0, 0.0, 0.0)), "tube origin"),
            direction=_unit3(data.get("direction", (0.0, 0.0, 1.0)), "tube direction"),
        )

    def to_dict(self) -> Dict:
        return {"polyline": [list(p) for p in self.polyline], "radius": self.radius}


@dataclass(frozen=True)
class TextureSpec:
    """Constant albedo, or two-tone stripes across `direction` ("vessels")"""
    kind: str = "constant"
    base: AlbedoHS = AlbedoHS(0.0, 0.0)
    stripe: Optional[AlbedoHS] = None
    frequency: float = 0.1  # stripes per mm
    width: float = 0.3  # stripe fraction of one period
    direction: Optional[Tuple[float, float, float]] = None  # None: along the surface axis

    def __post_init__(self):
        if self.kind not in TEXTURE_TYPES:
            raise ConfigError(f"unknown albedo texture {self.kind!r}", allowed=list(TEXTURE_TYPES))
        if self.kind == "stripes":
            if self.stripe is None:
                raise ConfigError("stripes texture needs a stripe albedo")
            if not self.frequency > 0 or not 0 < self.width < 1:
                raise DomainError("stripe frequency must be positive and width in (0, 1)",
                                  frequency=self.frequency, width=self.width)

    @classmethod
    def from_dict(cls, data: Dict) -> "TextureSpec":
        _check_keys(data, ("type", "hs", "stripe_hs", "frequency", "width", "direction"), "albedo")
        kind = data.get("type", "constant")
        stripe = data.get("stripe_hs")
        direction = data.get("direction")
        return cls(
            kind=kind,
            base=AlbedoHS(*[float(c) for c in data.get("hs", (0.0, 0.0))]),
            stripe=None if stripe is None else AlbedoHS(*[float(c) for c in stripe]),
            frequency=float(data.get("frequency", 0.1)),
            width=float(data.get("width", 0.3)),
            direction=None if direction is None else _unit3(direction, "stripe direction"),
        )

    def to_dict(self) -> Dict:
        data = {"type": self.kind, "hs": [self.base.h, self.base.s]}
        if self.kind == "stripes":
            data.update({
                "stripe_hs": [self.stripe.h, self.stripe.s],
                "frequency": self.frequency,
                "width": self.width,
            })
            if self.direction is not None:
                data["direction"] = list(self.direction)
        return data


@dataclass(frozen=True)
class SceneSpec:
    """Geometry, texture, camera, light and seed of one synthetic scene"""
    kind: str
    surface: object  # PlaneSpec | SphereSpec | TubeSpec
    camera: CameraModel
    light: LightModel
    albedo: TextureSpec = TextureSpec()
    seed: int = 0

    def __post_init__(self):
        expected = {"plane": PlaneSpec, "sphere": SphereSpec, "tube": TubeSpec}.get(self.kind)
        if expected is None:
            raise ConfigError(f"unknown scene kind {self.kind!r}", allowed=list(SCENE_KINDS))
        if not isinstance(self.surface, expected):
            raise ConfigError(f"{self.kind} scene needs a {expected.__name__}")

    @classmethod
    def from_dict(cls, data: Dict) -> "SceneSpec":
        _check_keys(data, ("kind", "plane", "sphere", "tube", "albedo", "camera", "light", "seed"), "scene")
        kind = data.get("kind")
        if kind not in SCENE_KINDS:
            raise ConfigError(f"unknown scene kind {kind!r}", allowed=list(SCENE_KINDS))
        if kind not in data:
            raise ConfigError(f"{kind} scene needs a {kind!r} section")
        parsers = {"plane": PlaneSpec, "sphere": SphereSpec, "tube": TubeSpec}
        try:
            return cls(
                kind=kind,
                surface=parsers[kind].from_dict(data[kind]),
                camera=CameraModel.from_dict(data["camera"]),
                light=LightModel.from_dict(data["light"]),
                albedo=TextureSpec.from_dict(data.get("albedo", {})),
                seed=int(data.get("seed", 0)),
            )
        except KeyError as e:
            raise ConfigError(f"scene is missing key {e.args[0]!r}")

    def to_dict(self) -> Dict:
        return {
            "kind": self.kind,
            self.kind: self.surface.to_dict(),
            "albedo": self.albedo.to_dict(),
            "camera": self.camera.to_dict(),
            "light": self.light.to_dict(),
            "seed": self.seed,
        }

    def spec_hash(self) -> str:
        """sha256 of the canonical JSON form"""
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def load_scene(path) -> SceneSpec:
    with open(path, 'r', encoding='utf-8') as f:
        try:
            data = json.load(f)
        except json.JSONDecodeError as e:
            raise ConfigError(f"scene file is not valid JSON: {e}", path=str(path))
    return SceneSpec.from_dict(data)


def tube_segments(tube: TubeSpec) -> List[Tuple[np.ndarray, np.ndarray, float]]:
    """(start, unit direction, length) of every polyline segment"""
    points = np.asarray(tube.polyline, dtype=np.float64)
    segments = []
    for a, b in zip(points[:-1], points[1:]):
        length = float(np.linalg.norm(b - a))
        segments.append((a, (b - a) / length, length))
    return segments
