"""
Photometric calibration of the spotlight

Fits the light position x_l and spread mu to images of targets with known
depth, normals and albedo. sigma0 and g are fixed (radiance is only known up
to scale) and the axis stays on the optical axis.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.config import get_config
from src.geometry import CameraModel, RayField, build_ray_field, check_positive_depth, surface_points
from src.photometry import LightModel, check_albedo_field, hsv_to_rgb_field, shade, shade_vjp
from src.utils.errors import DomainError, check_same_shape
from src.utils.logger import LoggerMixin

from .optim import AdamOptimizer

CONDITION_WARNING = 1e8
DEFAULT_FIXED = {"sigma0": 1.0, "gain": 1.0}


@dataclass
class CalibObservation:
    """One image of a target with known geometry and albedo"""
    image: np.ndarray
    depth: np.ndarray
    normals: np.ndarray
    albedo: np.ndarray

    def __post_init__(self):
        self.image = np.asarray(self.image, dtype=np.float64)
        self.depth = np.asarray(self.depth, dtype=np.float64)
        self.normals = np.asarray(self.normals, dtype=np.float64)
        self.albedo = np.asarray(self.albedo, dtype=np.float64)
        check_same_shape("image", self.image, "depth", self.depth)
        check_same_shape("normals", self.normals, "depth", self.depth)
        check_same_shape("albedo", self.albedo, "depth", self.depth)
        check_positive_depth(self.depth)
        check_albedo_field(self.albedo)


@dataclass(frozen=True)
class CalibrationConfig:
    """Descent settings; the step size decays geometrically per iteration"""
    max_iterations: int = 4000
    step_size: float = 0.02
    decay: float = 0.9964
    tolerance: float = 1e-24  # mean squared residual counted as an exact fit
    step_tolerance: float = 1e-9  # largest parameter update counted as converged
    fit_mu: bool = True
    fit_position: bool = True
    log_every: int = 500


@dataclass
class CalibrationReport:
    """Outcome of one calibration"""
    converged: bool
    iterations: int
    initial_loss: float
    final_loss: float
    rms_gray_levels: List[float]
    condition_number: Optional[float]
    warnings: List[str] = field(default_factory=list)

    def to_dict(self) -> Dict:
        return {
            "converged": self.converged,
            "iterations": self.iterations,
            "initial_loss": self.initial_loss,
            "final_loss": self.final_loss,
            "rms_gray_levels": list(self.rms_gray_levels),
            "condition_number": self.condition_number,
            "warnings": list(self.warnings),
        }


@dataclass
class _Prepared:
    points: np.ndarray
    normals: np.ndarray
    albedo_rgb: np.ndarray
    image: np.ndarray


def _light_with(base: LightModel, params: np.ndarray) -> LightModel:
    return base.replace(position=tuple(params[:3]), mu=float(params[3]))


class LightCalibrator(LoggerMixin):
    """Adam fit of (x_l, mu) with best-so-far tracking"""

    def __init__(self, cam: CameraModel, config: Optional[CalibrationConfig] = None,
                 max_workers: Optional[int] = None):
        self.cam = cam
        self.config = config or CalibrationConfig()
        self.max_workers = max_workers or get_config().processing.max_workers
        self.rays: RayField = build_ray_field(cam)

    def _prepare(self, observations: Sequence[CalibObservation]) -> List[_Prepared]:
        prepared = []
        for obs in observations:
            check_same_shape("observation", obs.depth, "camera rays", self.rays.directions)
            prepared.append(_Prepared(
                points=surface_points(self.rays, obs.depth),
                normals=obs.normals,
                albedo_rgb=hsv_to_rgb_field(obs.albedo),
                image=obs.image,
            ))
        return prepared

    def _residuals(self, light: LightModel, prepared: List[_Prepared]) -> List[np.ndarray]:
        return [
            shade(light, obs.points, obs.normals, obs.albedo_rgb).color - obs.image
            for obs in prepared
        ]

    def _loss_and_gradient(self, light: LightModel, prepared: List[_Prepared],
                           pool: ThreadPoolExecutor) -> Tuple[float, np.ndarray]:
        count = sum(obs.image.size for obs in prepared)

        def one(obs: _Prepared):
            terms = shade(light, obs.points, obs.normals, obs.albedo_rgb)
            diff = terms.color - obs.image
            grads = shade_vjp(light, terms, 2.0 * diff / count)
            return float(np.sum(diff * diff)), grads.position, grads.mu

        loss, grad = 0.0, np.zeros(4)
        # map keeps observation order, so the sum is deterministic
        for sq, g_position, g_mu in pool.map(one, prepared):
            loss += sq
            grad[:3] += g_position
            grad[3] += g_mu
        return loss / count, grad

    def _condition_number(self, light: LightModel, prepared: List[_Prepared],
                          free: np.ndarray) -> Optional[float]:
        """Condition number of J^T J with a central-difference Jacobian of the residuals"""
        params = np.array(list(light.position) + [light.mu])
        columns = []
        for k in np.flatnonzero(free):
            h = 1e-6 * max(1.0, abs(params[k]))
            plus, minus = params.copy(), params.copy()
            plus[k] += h
            minus[k] = max(minus[k] - h, 0.0) if k == 3 else minus[k] - h
            r_plus = np.concatenate([r.ravel() for r in self._residuals(_light_with(light, plus), prepared)])
            r_minus = np.concatenate([r.ravel() for r in self._residuals(_light_with(light, minus), prepared)])
            columns.append((r_plus - r_minus) / (plus[k] - minus[k]))
        if not columns:
            return None
        jacobian = np.stack(columns, axis=1)
        return float(np.linalg.cond(jacobian.T @ jacobian))

    def _geometry_warnings(self, observations: Sequence[CalibObservation]) -> List[str]:
        depths = sorted(float(np.median(obs.depth)) for obs in observations)
        distinct = len(depths) > 1 and (depths[-1] - depths[0]) > 0.01 * depths[0]
        frontal = np.array([0.0, 0.0, -1.0])
        tilted = any(
            np.degrees(np.arccos(np.clip(np.mean(obs.normals.reshape(-1, 3) @ frontal), -1.0, 1.0))) > 1.0
            for obs in observations
        )
        if distinct or tilted:
            return []
        return ["all targets share one depth and face the camera; x_l and mu may not be separable"]

    def calibrate(self, observations: Sequence[CalibObservation], init: LightModel,
                  fixed: Optional[Dict] = None) -> Tuple[LightModel, CalibrationReport]:
        """
        Fit the light to the observations

        Args:
            observations: Targets with known geometry
            init: Starting guess (its axis and gamma are kept)
            fixed: Values held constant, default sigma0 = 1 and gain = 1

        Returns:
            (fitted LightModel, CalibrationReport)
        """
        if not observations:
            raise DomainError("calibration needs at least one observation")
        config = self.config
        light = init.replace(**(DEFAULT_FIXED if fixed is None else fixed))
        prepared = self._prepare(observations)

        free = np.array([config.fit_position] * 3 + [config.fit_mu])
        params = np.array(list(light.position) + [light.mu])
        optimizer = AdamOptimizer([params], step_size=config.step_size, decay=config.decay)

        self.logger.info(f"🔦 Calibrating light on {len(observations)} observation(s)")
        with ThreadPoolExecutor(max_workers=self.max_workers) as pool:
            loss, grad = self._loss_and_gradient(light, prepared, pool)
            initial_loss = loss
            best_loss, best_params = loss, params.copy()
            converged = loss <= config.tolerance
            iterations = 0
            while not converged and iterations < config.max_iterations:
                before = params.copy()
                optimizer.step([np.where(free, grad, 0.0)])
                params[3] = max(params[3], 0.0)
                iterations += 1

                light = _light_with(light, params)
                loss, grad = self._loss_and_gradient(light, prepared, pool)
                if loss < best_loss:
                    best_loss, best_params = loss, params.copy()
                if iterations % config.log_every == 0:
                    self.logger.info(f"  iteration {iterations:5d}  loss {loss:.6e}")
                converged = (loss <= config.tolerance
                             or np.max(np.abs(params - before)) < config.step_tolerance)

        light = _light_with(light, best_params)
        residuals = self._residuals(light, prepared)
        rms = [float(np.sqrt(np.mean(r * r)) * 255.0) for r in residuals]

        warnings = self._geometry_warnings(observations)
        condition = self._condition_number(light, prepared, free)
        if condition is not None and condition > CONDITION_WARNING:
            warnings.append(f"ill-conditioned fit, condition number {condition:.3e}")
        if not converged:
            warnings.append(f"not converged after {iterations} iterations, returning best-so-far")
        for warning in warnings:
            self.logger.warning(f"⚠️  {warning}")

        report = CalibrationReport(
            converged=bool(converged), iterations=iterations,
            initial_loss=float(initial_loss), final_loss=float(best_loss),
            rms_gray_levels=rms, condition_number=condition, warnings=warnings,
        )
        self.logger.info(f"✅ Light at {list(light.position)}, mu {light.mu:.6f}, "
                         f"RMS {max(rms):.3f} gray levels")
        return light, report


def calibrate_light(observations: Sequence[CalibObservation], cam: CameraModel, init: LightModel,
                    fixed: Optional[Dict] = None, config: Optional[CalibrationConfig] = None,
                    max_workers: Optional[int] = None) -> Tuple[LightModel, CalibrationReport]:
    """Fit (x_l, mu) with sigma0 and g held fixed"""
    return LightCalibrator(cam, config, max_workers).calibrate(observations, init, fixed)
