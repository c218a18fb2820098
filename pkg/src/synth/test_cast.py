"""
Tests for synthetic scene casting
"""
import json
from pathlib import Path

import numpy as np
import pytest

from conftest import plane_scene, sphere_scene, tube_scene
from src.geometry import build_ray_field
from src.photometry import AlbedoHS, LightModel
from src.synth import (
    PlaneSpec,
    SceneSpec,
    SphereSpec,
    TextureSpec,
    TubeSpec,
    cast,
    load_scene,
    perturb_depth,
    texture_albedo,
)
from src.utils.errors import ConfigError, CoverageError, DomainError, NumericError


def test_plane_principal_pixel(plane_bundle):
    assert plane_bundle.depth[8, 8] == 2.0
    assert np.allclose(plane_bundle.image[8, 8], [0.25, 0.25, 0.25], atol=1e-15)
    assert np.array_equal(plane_bundle.normals[8, 8], [0.0, 0.0, -1.0])


def test_sphere_principal_pixel(sphere_bundle):
    assert sphere_bundle.depth[16, 16] == pytest.approx(2.0, abs=1e-12)
    assert np.allclose(sphere_bundle.normals[16, 16], [0.0, 0.0, -1.0], atol=1e-12)


def test_sphere_normals_are_radial(sphere_bundle):
    rays = build_ray_field(sphere_bundle.camera).directions
    points = sphere_bundle.depth[..., None] * rays
    expected = points - np.array([0.0, 0.0, 3.0])
    assert np.allclose(sphere_bundle.normals, expected, atol=1e-12)
    assert np.all(np.sum(sphere_bundle.normals * rays, axis=-1) < 0)


def test_tube_matches_closed_form(tube_bundle):
    rays = build_ray_field(tube_bundle.camera).directions
    radial = np.hypot(rays[..., 0], rays[..., 1])
    wall = 20.0 / radial
    cap = 120.0 / rays[..., 2]
    expected = np.where(wall * rays[..., 2] <= 120.0, wall, cap)
    assert np.allclose(tube_bundle.depth, expected, rtol=1e-9)


def test_tube_depth_grows_toward_the_centre(tube_bundle):
    row = tube_bundle.depth[31, :32]
    on_wall = np.abs(tube_bundle.normals[31, :32, 2]) < 1e-9
    assert on_wall[:20].all()
    assert np.all(np.diff(row[on_wall]) > 0)
    assert tube_bundle.depth.max() > 100.0


def test_tube_has_both_stripe_albedos(tube_bundle):
    hues = set(np.unique(tube_bundle.albedo[..., 0]).tolist())
    assert hues == {0.02, 0.97}


def test_bundle_rerenders_bitwise(tube_bundle):
    tube_bundle.check_consistent()
    tampered = type(tube_bundle)(**{**tube_bundle.__dict__, "image": tube_bundle.image * 0.5})
    with pytest.raises(NumericError):
        tampered.check_consistent()


def test_cast_is_deterministic():
    first = cast(tube_scene(size=16, seed=4))
    second = cast(tube_scene(size=16, seed=4))
    for name in ("image", "depth", "normals", "albedo"):
        assert np.array_equal(getattr(first, name), getattr(second, name))
    assert tube_scene(seed=4).spec_hash() == tube_scene(seed=4).spec_hash()
    assert tube_scene(seed=4).spec_hash() != tube_scene(seed=5).spec_hash()


def test_missed_ray_names_pixel():
    base = sphere_scene(size=17)
    scene = SceneSpec(kind="sphere", surface=SphereSpec(center=(0.0, 0.0, 3.0), radius=0.05),
                      camera=base.camera, light=base.light)
    with pytest.raises(CoverageError) as info:
        cast(scene)
    assert info.value.context["pixel"] == [0, 0]


def test_plane_behind_camera_is_missed():
    base = plane_scene()
    scene = SceneSpec(kind="plane", surface=PlaneSpec(point=(0.0, 0.0, -2.0), normal=(0.0, 0.0, 1.0)),
                      camera=base.camera, light=base.light)
    with pytest.raises(CoverageError):
        cast(scene)


def test_stripes_texture():
    texture = TextureSpec(kind="stripes", base=AlbedoHS(0.1, 0.2), stripe=AlbedoHS(0.6, 0.9),
                          frequency=0.5, width=0.25)
    points = np.array([[0.1, 0.0, 0.0], [1.0, 0.0, 0.0], [2.2, 5.0, 5.0]])
    albedo = texture_albedo(texture, points, np.array([1.0, 0.0, 0.0]))
    # phases 0.05, 0.5, 0.1
    assert albedo.tolist() == [[0.6, 0.9], [0.1, 0.2], [0.6, 0.9]]


class TestPerturbDepth:

    def test_zero_amplitude(self, tube_bundle):
        assert np.array_equal(perturb_depth(tube_bundle.depth, 0.0, 3.0, seed=1), tube_bundle.depth)

    def test_reproducible(self, tube_bundle):
        a = perturb_depth(tube_bundle.depth, 0.05, 3.0, seed=11)
        b = perturb_depth(tube_bundle.depth, 0.05, 3.0, seed=11)
        assert np.array_equal(a, b)
        assert not np.array_equal(a, perturb_depth(tube_bundle.depth, 0.05, 3.0, seed=12))

    def test_bound(self, tube_bundle):
        noisy = perturb_depth(tube_bundle.depth, 0.05, 3.0, seed=2)
        relative = np.abs(noisy / tube_bundle.depth - 1.0)
        assert relative.max() <= 0.05 + 1e-12
        assert relative.max() > 0.04

    @pytest.mark.parametrize("amplitude", [-0.1, 1.0])
    def test_invalid_amplitude(self, amplitude):
        with pytest.raises(DomainError):
            perturb_depth(np.ones((4, 4)), amplitude, 1.0, seed=0)


class TestSceneJson:

    def test_round_trip(self, tmp_path):
        scene = tube_scene(size=16, seed=3)
        path = tmp_path / "scene.json"
        path.write_text(json.dumps(scene.to_dict()))
        loaded = load_scene(path)
        assert loaded == scene
        assert loaded.spec_hash() == scene.spec_hash()

    def test_shipped_tube_config(self):
        configs = Path(__file__).resolve().parents[2] / "configs"
        assert load_scene(configs / "tube_scene.json") == tube_scene()

    def test_straight_tube_shorthand(self):
        tube = TubeSpec.from_dict({"radius": 5, "length": 30, "direction": [0, 0, 2]})
        assert tube.polyline == ((0.0, 0.0, 0.0), (0.0, 0.0, 30.0))
        assert tube.length == pytest.approx(30.0)

    def test_polyline_tube(self):
        tube = TubeSpec.from_dict({"radius": 5, "polyline": [[0, 0, 0], [0, 0, 10], [3, 0, 14]]})
        assert tube.length == pytest.approx(15.0)

    @pytest.mark.parametrize("data", [
        {"kind": "cube"},
        {"kind": "tube"},
        {"kind": "plane", "plane": {"point": [0, 0, 1], "normal": [0, 0, -1]}, "colour": 1},
    ])
    def test_invalid_scenes(self, data):
        with pytest.raises(ConfigError):
            SceneSpec.from_dict(data)

    def test_invalid_geometry(self):
        with pytest.raises(DomainError):
            TubeSpec.straight(radius=-1.0, length=10.0)
        with pytest.raises(DomainError):
            SphereSpec(center=(0.0, 0.0, 3.0), radius=0.0)
        with pytest.raises(ConfigError):
            TextureSpec(kind="checker")
        with pytest.raises(ConfigError):
            LightModel.from_dict({"position": [0, 0, 0], "colour": 1})
