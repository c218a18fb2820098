"""
Tests for the photometric, smoothness and specular losses
"""
import numpy as np
import pytest

from conftest import tube_scene
from src.geometry import CameraModel, build_ray_field
from src.normals import normals_six_neighbor
from src.photometry import LightModel, render_image
from src.recovery import (
    LossBreakdown,
    LossWeights,
    photometric_loss,
    saturation_mask,
    smoothness_loss,
    specular_direction,
    specular_loss,
    total_loss,
    total_loss_and_gradient,
)
from src.synth import cast, perturb_depth
from src.utils.errors import ConfigError, DomainError, ShapeError

CAM3 = CameraModel(fx=1, fy=1, cx=1, cy=1, width=3, height=3)


class TestPhotometric:

    def test_identical_images(self):
        image = np.random.default_rng(0).uniform(0, 1, (4, 5, 3))
        assert photometric_loss(image, image) == 0.0

    def test_max_discrepancy(self):
        assert photometric_loss(np.zeros((3, 3, 3)), np.ones((3, 3, 3))) == 1.0

    def test_two_pixel_gray(self):
        observed = np.full((2, 1, 3), 0.2)
        rendered = np.array([[[0.5] * 3], [[0.3] * 3]])
        assert photometric_loss(observed, rendered) == pytest.approx((0.3 ** 2 + 0.1 ** 2) / 2, abs=1e-15)

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            photometric_loss(np.zeros((2, 2, 3)), np.zeros((2, 3, 3)))


class TestSmoothness:

    def test_constant_depth(self):
        image = np.random.default_rng(1).uniform(0, 1, (6, 6, 3))
        assert smoothness_loss(np.full((6, 6), 4.0), image) == 0.0

    def test_ramp_with_constant_image(self):
        slope = 0.37
        depth = 2.0 + slope * np.tile(np.arange(7.0), (5, 1))
        assert smoothness_loss(depth, np.full((5, 7, 3), 0.4)) == pytest.approx(slope, abs=1e-12)

    def test_image_edge_lowers_the_penalty(self):
        depth = 2.0 + 0.5 * np.tile(np.arange(6.0), (4, 1))
        edges = np.zeros((4, 6, 3))
        edges[:, ::2] = 1.0
        flat = smoothness_loss(depth, np.full((4, 6, 3), 0.5))
        assert smoothness_loss(depth, edges) < flat


class TestSpecular:

    def test_direction_examples(self):
        l = np.array([0.0, 0.6, 0.8])
        assert np.allclose(specular_direction(l, l), l, atol=1e-15)
        n = np.array([1.0, 0.0, 0.0])
        assert np.allclose(specular_direction(l, n), -l, atol=1e-15)
        frontal = np.array([0.0, 0.0, -1.0])
        s = specular_direction(frontal, frontal)
        assert np.allclose(s, frontal)
        assert np.dot(s, -np.array([0.0, 0.0, 1.0])) == pytest.approx(1.0, abs=1e-15)

    def test_direction_is_an_involution(self):
        rng = np.random.default_rng(4)
        l = rng.standard_normal((50, 3))
        n = rng.standard_normal((50, 3))
        l /= np.linalg.norm(l, axis=-1, keepdims=True)
        n /= np.linalg.norm(n, axis=-1, keepdims=True)
        s = specular_direction(l, n)
        assert np.allclose(np.linalg.norm(s, axis=-1), 1.0, atol=1e-12)
        assert np.allclose(specular_direction(s, n), l, atol=1e-12)

    def test_direction_rejects_non_unit(self):
        with pytest.raises(DomainError):
            specular_direction(np.array([0.0, 0.0, 1.1]), np.array([0.0, 0.0, 1.0]))

    def _single_saturated(self, tilt_deg: float) -> float:
        rays = build_ray_field(CAM3)
        image = np.full((3, 3, 3), 0.5)
        image[1, 1] = 1.0
        tilt = np.radians(tilt_deg)
        normals = np.tile([np.sin(tilt), 0.0, -np.cos(tilt)], (3, 3, 1))
        return specular_loss(image, normals, rays, LightModel(), 0.98, np.full((3, 3), 2.0))

    def test_mirror_aligned_pixel(self):
        assert self._single_saturated(0.0) == pytest.approx(0.0, abs=1e-12)

    def test_tilt_doubles_the_view_angle(self):
        assert self._single_saturated(30.0) == pytest.approx((np.cos(np.radians(60)) - 1) ** 2, abs=1e-12)

    def test_empty_mask(self):
        rays = build_ray_field(CAM3)
        normals = np.tile([0.3, 0.0, -np.sqrt(0.91)], (3, 3, 1))
        image = np.full((3, 3, 3), 0.9)
        assert specular_loss(image, normals, rays, LightModel(), 0.98, np.full((3, 3), 2.0)) == 0.0
        assert not saturation_mask(image, 0.98).any()


class TestTotalLoss:

    def test_self_render(self, small_scene):
        _, light, rays, depth, albedo, _ = small_scene
        observed = render_image(light, rays, depth, albedo, normals_six_neighbor(depth, rays))
        weights = LossWeights()
        breakdown = total_loss(observed, depth, albedo, light, rays, weights)
        assert breakdown.photometric == pytest.approx(0.0, abs=1e-12)
        assert breakdown.total == pytest.approx(
            weights.lambda_s * breakdown.smoothness + weights.lambda_sp * breakdown.specular, abs=1e-12,
        )

    def test_photometric_only_total(self, small_scene):
        _, light, rays, depth, albedo, observed = small_scene
        breakdown = total_loss(observed, depth, albedo, light, rays, LossWeights(lambda_s=0.0, lambda_sp=0.0))
        assert breakdown.total == breakdown.photometric
        assert breakdown.specular > 0

    def test_perturbed_tube_depth_costs_more(self):
        bundle = cast(tube_scene(size=24))
        rays = build_ray_field(bundle.camera)
        weights = LossWeights(lambda_sp=0.0)
        at_truth = total_loss(bundle.image, bundle.depth, bundle.albedo, bundle.light, rays, weights)
        noisy = perturb_depth(bundle.depth, 0.05, 2.0, seed=3)
        perturbed = total_loss(bundle.image, noisy, bundle.albedo, bundle.light, rays, weights)
        assert perturbed.total > at_truth.total

    def test_gradient_is_optional(self, small_scene):
        _, light, rays, depth, albedo, observed = small_scene
        breakdown, gradient, rendered = total_loss_and_gradient(
            observed, depth, albedo, light, rays, LossWeights(), with_gradient=False,
        )
        assert gradient is None
        assert rendered.shape == observed.shape
        assert breakdown == total_loss(observed, depth, albedo, light, rays, LossWeights())


class TestWeights:

    @pytest.mark.parametrize("name, lambda_s, lambda_sp", [
        (None, 0.1, 1.0),
        ("no_smoothness", 0.0, 1.0),
        ("no_specular", 0.1, 0.0),
        ("photometric_only", 0.0, 0.0),
    ])
    def test_ablations(self, name, lambda_s, lambda_sp):
        weights = LossWeights().ablate(name)
        assert (weights.lambda_s, weights.lambda_sp) == (lambda_s, lambda_sp)

    def test_unknown_ablation(self):
        with pytest.raises(ConfigError):
            LossWeights().ablate("no_photometric")

    def test_validation_and_json(self):
        with pytest.raises(DomainError):
            LossWeights(lambda_s=-1.0)
        with pytest.raises(DomainError):
            LossWeights(th=1.5)
        with pytest.raises(ConfigError):
            LossWeights.from_dict({"lambda_x": 1})
        weights = LossWeights(lambda_s=0.3, lambda_sp=0.5, th=0.9)
        assert LossWeights.from_dict(weights.to_dict()) == weights

    def test_compose(self):
        breakdown = LossBreakdown.compose(0.5, 2.0, 3.0, LossWeights(lambda_s=0.1, lambda_sp=0.2))
        assert breakdown.total == pytest.approx(0.5 + 0.2 + 0.6, abs=1e-15)
