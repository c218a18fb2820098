"""
Tests for the reparameterised recovery loop
"""
import json
from pathlib import Path

import numpy as np
import pytest

from conftest import random_small_scene, tube_scene
from src.evaluation import depth_metrics, image_mae
from src.geometry import build_ray_field
from src.normals import normals_six_neighbor
from src.photometry import render_image
from src.recovery import (
    AdamOptimizer,
    LossWeights,
    RecoveryConfig,
    RecoveryState,
    decode,
    initial_depth_guess,
    loss_gradient,
    recover,
)
from src.synth import cast, perturb_depth
from src.utils.errors import ConfigError, NumericError

STILL = LossWeights(lambda_s=0.0, lambda_sp=0.0)


def _self_render(scene):
    camera, light, rays, depth, albedo, _ = scene
    return render_image(light, rays, depth, albedo, normals_six_neighbor(depth, rays))


class TestDecode:

    def test_examples(self):
        state = RecoveryState(
            log_depth=np.zeros((3, 3)),
            albedo_logits=np.stack([np.full((3, 3), 1.25), np.zeros((3, 3))], axis=-1),
        )
        depth, albedo = decode(state)
        assert np.array_equal(depth, np.ones((3, 3)))
        assert np.allclose(albedo[..., 0], 0.25, atol=1e-15)
        assert np.array_equal(albedo[..., 1], np.full((3, 3), 0.5))

    def test_tiny_negative_hue_wraps_to_zero(self):
        state = RecoveryState(
            log_depth=np.zeros((3, 3)),
            albedo_logits=np.stack([np.full((3, 3), -1e-20), np.zeros((3, 3))], axis=-1),
        )
        hue = decode(state)[1][..., 0]
        assert np.all((hue >= 0) & (hue < 1))

    def test_extreme_parameters_stay_in_range(self):
        rng = np.random.default_rng(2)
        state = RecoveryState(
            log_depth=rng.uniform(-30, 30, (4, 4)),
            albedo_logits=rng.uniform(-1e3, 1e3, (4, 4, 2)),
        )
        depth, albedo = decode(state)
        assert np.all(depth > 0)
        assert np.all((albedo[..., 0] >= 0) & (albedo[..., 0] < 1))
        assert np.all((albedo[..., 1] >= 0) & (albedo[..., 1] <= 1))

    def test_encode_then_decode(self, small_scene):
        _, _, _, depth, albedo, _ = small_scene
        again_depth, again_albedo = decode(RecoveryState.from_fields(depth, albedo))
        assert np.allclose(again_depth, depth, rtol=1e-14)
        assert np.allclose(again_albedo, albedo, atol=1e-12)


def test_adam_first_step_moves_by_step_size():
    param = np.array([1.0, -2.0, 3.0])
    optimizer = AdamOptimizer([param], step_size=0.1)
    optimizer.step([np.array([5.0, -0.01, 0.0])])
    assert np.allclose(param, [0.9, -1.9, 3.0], atol=1e-6)
    assert optimizer.t == 1


def test_adam_decay_shrinks_learning_rate():
    optimizer = AdamOptimizer([np.zeros(2)], step_size=0.02, decay=0.5)
    optimizer.step([np.ones(2)])
    optimizer.step([np.ones(2)])
    assert optimizer.learning_rate == pytest.approx(0.005)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_analytic_gradient_matches_finite_differences(seed):
    """
    Relative error below 1e-4 on 100 random coordinates

    The denominator is floored at 1e-3 * max|analytic|, so coordinates whose
    gradient is near zero are held to an absolute 1e-7 * max|analytic| instead.
    This is looser than a plain relative error on those coordinates only.
    """
    camera, light, rays, depth, albedo, observed = random_small_scene(seed)
    state = RecoveryState.from_fields(depth, albedo)
    weights = LossWeights()
    analytic = loss_gradient(state, observed, light, camera, weights, rays=rays)
    numeric = loss_gradient(state, observed, light, camera, weights, mode="finite-difference", rays=rays)
    assert analytic.breakdown.specular > 0

    a = np.concatenate([analytic.log_depth.ravel(), analytic.albedo_logits.ravel()])
    f = np.concatenate([numeric.log_depth.ravel(), numeric.albedo_logits.ravel()])
    picks = np.random.default_rng(100 + seed).choice(a.size, size=100, replace=False)
    floor = 1e-3 * np.max(np.abs(a))
    relative = np.abs(a[picks] - f[picks]) / np.maximum(np.maximum(np.abs(a[picks]), np.abs(f[picks])), floor)
    assert np.max(relative) < 1e-4


def test_gradient_vanishes_at_self_render(small_scene):
    camera, light, rays, depth, albedo, _ = small_scene
    observed = _self_render(small_scene)
    grad = loss_gradient(RecoveryState.from_fields(depth, albedo), observed, light, camera, STILL, rays=rays)
    assert grad.breakdown.photometric == pytest.approx(0.0, abs=1e-12)
    assert np.max(np.abs(grad.log_depth)) < 1e-10
    assert np.max(np.abs(grad.albedo_logits)) < 1e-10


def test_gradient_is_nonzero_from_constant_depth():
    bundle = cast(tube_scene(size=24))
    state = RecoveryState.from_fields(np.full(bundle.depth.shape, 60.0), bundle.albedo)
    grad = loss_gradient(state, bundle.image, bundle.light, bundle.camera)
    assert grad.norm > 0


def test_non_finite_state_names_pixel(small_scene):
    camera, light, rays, depth, albedo, observed = small_scene
    state = RecoveryState.from_fields(depth, albedo)
    state.log_depth[3, 5] = np.nan
    with pytest.raises(NumericError) as info:
        loss_gradient(state, observed, light, camera, rays=rays)
    assert info.value.context["pixel"] == [5, 3]


def test_unknown_gradient_mode(small_scene):
    camera, light, rays, depth, albedo, observed = small_scene
    with pytest.raises(ConfigError):
        loss_gradient(RecoveryState.from_fields(depth, albedo), observed, light, camera, mode="adjoint")


class TestRecover:

    def test_fixed_point_is_stable(self, small_scene):
        camera, light, _, depth, albedo, _ = small_scene
        observed = _self_render(small_scene)
        config = RecoveryConfig(steps=5, step_size=1e-4, weights=STILL)
        result = recover(observed, light, camera, config, init_depth=depth, init_albedo=albedo)
        assert all(entry.photometric < 1e-8 for entry in result.history.entries)
        assert result.final.photometric < 1e-8
        # Adam normalises ulp-level gradients, depth drifts by about 1e-5 relative
        assert np.allclose(result.depth, depth, rtol=1e-3)

    def test_smoothness_pressure_stays_small(self, small_scene):
        camera, light, _, depth, albedo, _ = small_scene
        observed = _self_render(small_scene)
        config = RecoveryConfig.for_synthetic(steps=5, step_size=1e-4)
        result = recover(observed, light, camera, config, init_depth=depth, init_albedo=albedo)
        assert max(entry.photometric for entry in result.history.entries) < 1e-6
        assert len(result.history) == 5

    def test_refinement_improves_perturbed_depth(self):
        scene = tube_scene()
        bundle = cast(scene)
        init = perturb_depth(bundle.depth, 0.05, 4.0, seed=1)
        rays = build_ray_field(scene.camera)
        init_image = render_image(scene.light, rays, init, bundle.albedo, normals_six_neighbor(init, rays))

        config = RecoveryConfig(steps=20, method="conjugate-gradient", ablation="photometric_only",
                                freeze_albedo=True)
        result = recover(bundle.image, scene.light, scene.camera, config,
                         init_depth=init, init_albedo=bundle.albedo)

        assert len(result.history) == 20
        assert np.mean(np.abs(result.depth - bundle.depth)) < np.mean(np.abs(init - bundle.depth))
        assert image_mae(result.rendered, bundle.image) <= 0.5 * image_mae(init_image, bundle.image)
        assert result.final.total <= result.history.entries[0].total

    def test_frozen_albedo_is_left_unchanged(self, small_scene):
        camera, light, _, depth, albedo, observed = small_scene
        config = RecoveryConfig(steps=4, step_size=1e-2, freeze_albedo=True)
        result = recover(observed, light, camera, config, init_depth=depth, init_albedo=albedo)
        assert np.allclose(result.albedo, albedo, atol=1e-12)
        assert not np.allclose(result.depth, depth)

    def test_history_and_callback(self, small_scene):
        camera, light, _, _, _, observed = small_scene
        seen = []
        result = recover(observed, light, camera, RecoveryConfig(steps=3),
                         on_step=lambda step, total: seen.append((step, total)))
        assert seen == [(1, 3), (2, 3), (3, 3)]
        assert [entry.step for entry in result.history.entries] == [0, 1, 2]
        assert result.state.step == 3
        assert result.normals.shape == observed.shape

    def test_deterministic(self, small_scene):
        camera, light, _, _, _, observed = small_scene
        config = RecoveryConfig(steps=4, init_jitter=0.01, seed=5)
        first = recover(observed, light, camera, config)
        second = recover(observed, light, camera, config)
        assert np.array_equal(first.depth, second.depth)
        assert np.array_equal(first.albedo, second.albedo)
        assert first.history.totals == second.history.totals

    def test_initial_depth_guess_inverts_frontal_brightness(self, plane_bundle):
        guess = initial_depth_guess(plane_bundle.image, plane_bundle.light)
        # centre pixel sits at depth 2 with colour 0.25
        assert 2.0 <= guess < 2.5

    @pytest.mark.slow
    def test_tube_recovery_from_constant_depth(self):
        scene = tube_scene()
        bundle = cast(scene)
        shipped = Path(__file__).resolve().parents[2] / "configs" / "recovery.json"
        config = RecoveryConfig.from_dict(json.loads(shipped.read_text()))
        assert config.steps + config.polish_steps <= 2000
        result = recover(bundle.image, scene.light, scene.camera, config)
        metrics = depth_metrics(result.depth, bundle.depth)
        assert metrics["abs_rel"] < 0.05
        assert image_mae(result.rendered, bundle.image) < 0.01
        assert result.final.total <= result.history.entries[0].total


class TestRecoveryConfig:

    def test_json_round_trip(self):
        config = RecoveryConfig(steps=7, step_size=3e-3, weights=LossWeights(lambda_s=0.2),
                                init_depth=40.0, ablation="no_specular", seed=4)
        assert RecoveryConfig.from_dict(config.to_dict()) == config

    def test_conjugate_gradient_round_trip(self):
        config = RecoveryConfig(steps=5, method="conjugate-gradient", freeze_albedo=True, polish_steps=3)
        assert RecoveryConfig.from_dict(config.to_dict()) == config

    def test_for_synthetic_drops_specular(self):
        config = RecoveryConfig.for_synthetic(steps=3)
        assert config.weights.lambda_sp == 0.0
        assert config.weights.lambda_s == 0.1
        assert config.steps == 3

    @pytest.mark.parametrize("data", [
        {"steps": 0},
        {"step_size": -1},
        {"grad_mode": "adjoint"},
        {"ablation": "everything"},
        {"iterations": 5},
        {"init": {"albedo": 1}},
        {"method": "gauss-newton"},
        {"polish_steps": -1},
    ])
    def test_invalid(self, data):
        with pytest.raises(ConfigError):
            RecoveryConfig.from_dict(data)
