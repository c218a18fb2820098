"""
Bundle directories: one scene or prediction per directory

    image.ppm    colour image
    depth.pfm    ray depth, 1 channel
    normals.pfm  camera-facing unit normals, 3 channels
    albedo.pfm   (h, s, 1) per pixel, 3 channels
    meta.json    camera, light, seed and spec hash
"""
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Optional
import json

import numpy as np

from src.geometry import CameraModel, RayField
from src.photometry import LightModel
from src.utils.errors import ConfigError, ShapeError

from .pfm import read_pfm, write_pfm
from .ppm import encode_8bit, read_ppm, write_ppm

BUNDLE_FILES = {
    "image": "image.ppm",
    "depth": "depth.pfm",
    "normals": "normals.pfm",
    "albedo": "albedo.pfm",
}
META_FILE = "meta.json"


def write_json(path: Path, data: Dict) -> Path:
    """Deterministic JSON (sorted keys, fixed indent, trailing newline)"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(data, f, indent=2, sort_keys=True)
        f.write('\n')
    return path


def read_json(path: Path) -> Dict:
    """Read a JSON object; missing files raise FileNotFoundError"""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(str(path))
    with open(path, 'r', encoding='utf-8') as f:
        try:
            data = json.load(f)
        except json.JSONDecodeError as e:
            raise ConfigError(f"invalid JSON: {e}", path=str(path))
    if not isinstance(data, dict):
        raise ConfigError("expected a JSON object", path=str(path))
    return data


@dataclass
class BundleManifest:
    """Contents of meta.json plus the bundle's file names"""
    camera: Dict
    light: Dict
    seed: Optional[int] = None
    spec_hash: Optional[str] = None
    files: Optional[Dict[str, str]] = None

    def __post_init__(self):
        if self.files is None:
            self.files = dict(BUNDLE_FILES)

    def to_dict(self) -> Dict:
        return {
            "camera": self.camera,
            "light": self.light,
            "seed": self.seed,
            "spec_hash": self.spec_hash,
            "files": self.files,
        }

    @classmethod
    def from_dict(cls, data: Dict) -> "BundleManifest":
        unknown = set(data) - {"camera", "light", "seed", "spec_hash", "files"}
        if unknown:
            raise ConfigError("unknown meta.json keys", unknown=sorted(unknown))
        if "camera" not in data or "light" not in data:
            raise ConfigError("meta.json needs camera and light")
        return cls(
            camera=data["camera"], light=data["light"], seed=data.get("seed"),
            spec_hash=data.get("spec_hash"), files=data.get("files"),
        )


@dataclass
class Bundle:
    """Fields of a bundle directory, decoded to float64"""
    image: np.ndarray
    depth: np.ndarray
    normals: np.ndarray
    albedo: np.ndarray
    camera: CameraModel
    light: LightModel
    manifest: BundleManifest


def write_bundle(directory: Path, image: np.ndarray, depth: np.ndarray, normals: np.ndarray,
                 albedo: np.ndarray, camera: CameraModel, light: LightModel,
                 seed: Optional[int] = None, spec_hash: Optional[str] = None) -> BundleManifest:
    """
    Write the five bundle files

    Args:
        directory: Output directory (created if missing)
        image: (H, W, 3) colours in [0, 1]
        depth: (H, W) depth
        normals: (H, W, 3) unit normals
        albedo: (H, W, 2) hue/saturation
        camera: Camera intrinsics
        light: Light model
        seed: Generator seed, if any
        spec_hash: Hash of the generating scene, if any

    Returns:
        BundleManifest
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    albedo = np.asarray(albedo, dtype=np.float64)
    albedo3 = np.concatenate([albedo, np.ones(albedo.shape[:2] + (1,))], axis=-1)

    manifest = BundleManifest(camera=camera.to_dict(), light=light.to_dict(), seed=seed, spec_hash=spec_hash)
    write_ppm(directory / manifest.files["image"], image)
    write_pfm(directory / manifest.files["depth"], depth)
    write_pfm(directory / manifest.files["normals"], normals)
    write_pfm(directory / manifest.files["albedo"], albedo3)
    write_json(directory / META_FILE, manifest.to_dict())
    return manifest


def _require(path: Path) -> Path:
    if not path.exists():
        raise FileNotFoundError(str(path))
    return path


def read_bundle(directory: Path) -> Bundle:
    """Read and cross-check a bundle directory"""
    directory = Path(directory)
    manifest = BundleManifest.from_dict(read_json(_require(directory / META_FILE)))
    files = manifest.files

    image = read_ppm(_require(directory / files["image"]))
    depth = read_pfm(_require(directory / files["depth"])).astype(np.float64)
    normals = read_pfm(_require(directory / files["normals"])).astype(np.float64)
    albedo3 = read_pfm(_require(directory / files["albedo"])).astype(np.float64)

    camera = CameraModel.from_dict(manifest.camera)
    for name, field, channels in (("image", image, 3), ("depth", depth, None),
                                  ("normals", normals, 3), ("albedo", albedo3, 3)):
        expected = camera.shape + ((channels,) if channels else ())
        if field.shape != expected:
            raise ShapeError(
                f"{name} has shape {field.shape} but the camera expects {expected}",
                shapes={name: list(field.shape), "camera": list(expected)},
            )

    hue = np.mod(albedo3[..., 0], 1.0)
    hue = np.where(hue >= 1.0, 0.0, hue)
    albedo = np.stack([hue, np.clip(albedo3[..., 1], 0.0, 1.0)], axis=-1)
    return Bundle(
        image=image, depth=depth, normals=normals, albedo=albedo,
        camera=camera, light=LightModel.from_dict(manifest.light), manifest=manifest,
    )


def write_ply(path: Path, depth: np.ndarray, rays: RayField, colors: np.ndarray) -> Path:
    """ASCII point cloud x = d * r with per-vertex 8-bit colour"""
    points = (np.asarray(depth, dtype=np.float64)[..., None] * rays.directions).reshape(-1, 3)
    rgb = encode_8bit(colors).reshape(-1, 3)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='ascii', newline='\n') as f:
        f.write("ply\nformat ascii 1.0\n")
        f.write(f"element vertex {len(points)}\n")
        f.write("property float x\nproperty float y\nproperty float z\n")
        f.write("property uchar red\nproperty uchar green\nproperty uchar blue\n")
        f.write("end_header\n")
        for (x, y, z), (r, g, b) in zip(points, rgb):
            f.write(f"{x:.6f} {y:.6f} {z:.6f} {r} {g} {b}\n")
    return path
