"""
Shared scenes for the test suite
"""
import numpy as np
import pytest

from src.geometry import CameraModel, build_ray_field
from src.normals import normals_six_neighbor
from src.photometry import AlbedoHS, LightModel, render_image
from src.synth import PlaneSpec, SceneSpec, SphereSpec, TextureSpec, TubeSpec, cast

TUBE_LIGHT = LightModel(position=(1.0, 0.0, 0.0), mu=2.0, gain=1500.0, gamma=1.0)


def tube_scene(size: int = 64, seed: int = 0) -> SceneSpec:
    """Straight tube of radius 20 mm seen down its axis, with vessel stripes"""
    focal = 40.0 * size / 64
    camera = CameraModel(fx=focal, fy=focal, cx=(size - 1) / 2, cy=(size - 1) / 2, width=size, height=size)
    texture = TextureSpec(
        kind="stripes", base=AlbedoHS(0.02, 0.35), stripe=AlbedoHS(0.97, 0.75),
        frequency=0.05, width=0.3,
    )
    return SceneSpec(
        kind="tube", surface=TubeSpec.straight(radius=20.0, length=120.0),
        camera=camera, light=TUBE_LIGHT, albedo=texture, seed=seed,
    )


def sphere_scene(size: int = 33) -> SceneSpec:
    focal = 3.0 * size
    camera = CameraModel(fx=focal, fy=focal, cx=(size - 1) / 2, cy=(size - 1) / 2, width=size, height=size)
    return SceneSpec(
        kind="sphere", surface=SphereSpec(center=(0.0, 0.0, 3.0), radius=1.0),
        camera=camera, light=LightModel(gamma=1.0),
    )


def plane_scene(size: int = 17, depth: float = 2.0) -> SceneSpec:
    camera = CameraModel(fx=float(size), fy=float(size), cx=(size - 1) / 2, cy=(size - 1) / 2,
                         width=size, height=size)
    return SceneSpec(
        kind="plane", surface=PlaneSpec(point=(0.0, 0.0, depth), normal=(0.0, 0.0, -1.0)),
        camera=camera, light=LightModel(gamma=1.0),
    )


def random_small_scene(seed: int, size: int = 8):
    """
    Random smooth-ish scene and a different observed image

    Returns:
        (camera, light, rays, depth, albedo, observed)
    """
    rng = np.random.default_rng(seed)
    camera = CameraModel(fx=8.0, fy=8.0, cx=(size - 1) / 2, cy=(size - 1) / 2, width=size, height=size)
    rays = build_ray_field(camera)
    light = LightModel(position=(0.5, -0.3, 0.0), mu=1.0, gain=30.0, gamma=2.2)

    depth = 10.0 + 0.3 * rng.uniform(-1.0, 1.0, size=(size, size))
    albedo = np.stack([rng.uniform(0.05, 0.95, (size, size)), rng.uniform(0.2, 0.8, (size, size))], axis=-1)

    other_depth = depth + 0.2 * rng.uniform(-1.0, 1.0, size=(size, size))
    other_albedo = np.stack([rng.uniform(0.05, 0.95, (size, size)), rng.uniform(0.2, 0.8, (size, size))], axis=-1)
    observed = render_image(light, rays, other_depth, other_albedo, normals_six_neighbor(other_depth, rays))
    observed[1, 2] = [0.99, 0.5, 0.5]
    observed[5, 4] = [0.3, 0.995, 0.2]
    return camera, light, rays, depth, albedo, observed


@pytest.fixture(scope="session")
def tube_bundle():
    return cast(tube_scene())


@pytest.fixture(scope="session")
def sphere_bundle():
    return cast(sphere_scene())


@pytest.fixture
def plane_bundle():
    return cast(plane_scene())


@pytest.fixture
def small_scene():
    return random_small_scene(seed=7)
