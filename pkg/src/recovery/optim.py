"""
Single-view recovery of depth and albedo

Adam descends the total loss over the unconstrained parameters of
RecoveryState. Nonlinear conjugate gradient can run instead of Adam, or as a
polish after it.
"""
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from src.geometry import CameraModel, RayField, build_ray_field
from src.normals import six_neighbor_forward
from src.photometry import LightModel
from src.utils.errors import ConfigError, DomainError, NumericError, ShapeError
from src.utils.history_tracker import LossHistory
from src.utils.logger import LoggerMixin

from .conjugate import ConjugateGradientRefiner
from .losses import ABLATIONS, LossBreakdown, LossWeights, total_loss_and_gradient
from .state import RecoveryState, check_decoded, check_finite_state, decode

GRAD_MODES = ("analytic", "finite-difference")
METHODS = ("adam", "conjugate-gradient")


class AdamOptimizer:
    """
    Adaptive-moment descent over a list of numpy arrays, updated in place

        m = b1 m + (1 - b1) g
        v = b2 v + (1 - b2) g^2
        theta -= lr_t * m_hat / (sqrt(v_hat) + eps),   lr_t = step_size * decay^t
    """

    def __init__(self, params: List[np.ndarray], step_size: float = 1e-2, beta1: float = 0.9,
                 beta2: float = 0.999, eps: float = 1e-8, decay: float = 1.0):
        if not step_size > 0:
            raise DomainError(f"step_size must be positive, got {step_size}")
        self.params = params
        self.step_size = step_size
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.decay = decay
        self.t = 0
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]

    @property
    def learning_rate(self) -> float:
        return self.step_size * self.decay ** self.t

    def step(self, grads: List[np.ndarray]) -> None:
        lr = self.learning_rate
        self.t += 1
        for i, (p, g) in enumerate(zip(self.params, grads)):
            self.m[i] = self.beta1 * self.m[i] + (1 - self.beta1) * g
            self.v[i] = self.beta2 * self.v[i] + (1 - self.beta2) * g * g
            m_hat = self.m[i] / (1 - self.beta1 ** self.t)
            v_hat = self.v[i] / (1 - self.beta2 ** self.t)
            p -= lr * m_hat / (np.sqrt(v_hat) + self.eps)


@dataclass(frozen=True)
class RecoveryConfig:
    """Settings of one recover() call"""
    steps: int = 20
    step_size: float = 1e-2
    weights: LossWeights = field(default_factory=LossWeights)
    grad_mode: str = "analytic"
    init_depth: Optional[float] = None  # None: guessed from image brightness
    init_hue: float = 0.0
    init_saturation: float = 0.05
    init_jitter: float = 0.0  # relative log-depth noise on the constant init
    seed: int = 0
    ablation: Optional[str] = None
    fd_step: float = 1e-5
    log_every: int = 50
    method: str = "adam"
    polish_steps: int = 0  # conjugate-gradient steps after the main loop
    freeze_albedo: bool = False

    def __post_init__(self):
        if self.steps < 1:
            raise ConfigError(f"steps must be >= 1, got {self.steps}")
        if not self.step_size > 0:
            raise ConfigError(f"step_size must be positive, got {self.step_size}")
        if self.grad_mode not in GRAD_MODES:
            raise ConfigError(f"unknown grad_mode {self.grad_mode!r}", allowed=list(GRAD_MODES))
        if self.ablation is not None and self.ablation not in ABLATIONS:
            raise ConfigError(f"unknown ablation {self.ablation!r}", allowed=list(ABLATIONS))
        if self.init_depth is not None and not self.init_depth > 0:
            raise ConfigError(f"init depth must be positive, got {self.init_depth}")
        if not 0 <= self.init_hue < 1 or not 0 <= self.init_saturation <= 1:
            raise ConfigError("init hue/saturation out of range",
                              hue=self.init_hue, saturation=self.init_saturation)
        if self.method not in METHODS:
            raise ConfigError(f"unknown method {self.method!r}", allowed=list(METHODS))
        if self.polish_steps < 0:
            raise ConfigError(f"polish_steps must be >= 0, got {self.polish_steps}")

    @property
    def effective_weights(self) -> LossWeights:
        return self.weights.ablate(self.ablation)

    @classmethod
    def for_synthetic(cls, **overrides) -> "RecoveryConfig":
        """Defaults for rendered scenes, which carry no specular highlights"""
        overrides.setdefault("weights", LossWeights(lambda_sp=0.0))
        return cls(**overrides)

    @classmethod
    def from_dict(cls, data: Dict) -> "RecoveryConfig":
        allowed = {"steps", "step_size", "weights", "grad_mode", "init", "seed", "ablation",
                   "fd_step", "log_every", "method", "polish_steps", "freeze_albedo"}
        unknown = set(data) - allowed
        if unknown:
            raise ConfigError("unknown recovery config keys", unknown=sorted(unknown))
        init = dict(data.get("init") or {})
        unknown_init = set(init) - {"depth", "hue", "saturation", "jitter"}
        if unknown_init:
            raise ConfigError("unknown init keys", unknown=sorted(unknown_init))
        return cls(
            steps=int(data.get("steps", 20)),
            step_size=float(data.get("step_size", 1e-2)),
            weights=LossWeights.from_dict(data.get("weights", {})),
            grad_mode=data.get("grad_mode", "analytic"),
            init_depth=None if init.get("depth") is None else float(init["depth"]),
            init_hue=float(init.get("hue", 0.0)),
            init_saturation=float(init.get("saturation", 0.05)),
            init_jitter=float(init.get("jitter", 0.0)),
            seed=int(data.get("seed", 0)),
            ablation=data.get("ablation"),
            fd_step=float(data.get("fd_step", 1e-5)),
            log_every=int(data.get("log_every", 50)),
            method=data.get("method", "adam"),
            polish_steps=int(data.get("polish_steps", 0)),
            freeze_albedo=bool(data.get("freeze_albedo", False)),
        )

    def to_dict(self) -> Dict:
        return {
            "steps": self.steps,
            "step_size": self.step_size,
            "weights": self.weights.to_dict(),
            "grad_mode": self.grad_mode,
            "init": {
                "depth": self.init_depth,
                "hue": self.init_hue,
                "saturation": self.init_saturation,
                "jitter": self.init_jitter,
            },
            "seed": self.seed,
            "ablation": self.ablation,
            "fd_step": self.fd_step,
            "log_every": self.log_every,
            "method": self.method,
            "polish_steps": self.polish_steps,
            "freeze_albedo": self.freeze_albedo,
        }



@dataclass
class StateGradient:
    """dL/dlog_depth and dL/dalbedo_logits, plus the losses they were taken at"""
    log_depth: np.ndarray
    albedo_logits: np.ndarray
    breakdown: LossBreakdown

    @property
    def norm(self) -> float:
        return float(np.sqrt(np.sum(self.log_depth ** 2) + np.sum(self.albedo_logits ** 2)))


@dataclass
class RecoveryResult:
    """Decoded output of recover()"""
    depth: np.ndarray
    albedo: np.ndarray
    normals: np.ndarray
    rendered: np.ndarray
    history: LossHistory
    final: LossBreakdown
    state: RecoveryState


def _breakdown(state: RecoveryState, observed: np.ndarray, light: LightModel, rays: RayField,
               weights: LossWeights) -> LossBreakdown:
    check_finite_state(state)
    depth, albedo = decode(state)
    return total_loss_and_gradient(observed, depth, albedo, light, rays, weights, with_gradient=False)[0]


def _total(state: RecoveryState, observed: np.ndarray, light: LightModel, rays: RayField,
           weights: LossWeights) -> float:
    return _breakdown(state, observed, light, rays, weights).total


def _finite_difference(state: RecoveryState, observed: np.ndarray, light: LightModel,
                       rays: RayField, weights: LossWeights, h: float) -> Tuple[np.ndarray, np.ndarray]:
    """Central differences over every parameter; for validating the analytic path only"""
    probe = state.copy()
    grads = []
    for param in (probe.log_depth, probe.albedo_logits):
        grad = np.zeros_like(param)
        flat, flat_grad = param.reshape(-1), grad.reshape(-1)
        for k in range(flat.size):
            original = flat[k]
            flat[k] = original + h
            plus = _total(probe, observed, light, rays, weights)
            flat[k] = original - h
            minus = _total(probe, observed, light, rays, weights)
            flat[k] = original
            flat_grad[k] = (plus - minus) / (2.0 * h)
        grads.append(grad)
    return grads[0], grads[1]


def loss_gradient(state: RecoveryState, observed: np.ndarray, light: LightModel, cam: CameraModel,
                  weights: Optional[LossWeights] = None, mode: str = "analytic",
                  fd_step: float = 1e-5, rays: Optional[RayField] = None) -> StateGradient:
    """
    Gradient of the total loss with respect to the unconstrained parameters

    Args:
        state: Current parameters
        observed: (H, W, 3) image in [0, 1]
        light: Calibrated spotlight
        cam: Camera intrinsics
        weights: Loss weights (defaults when None)
        mode: "analytic" or "finite-difference"
        fd_step: Central-difference step in parameter space
        rays: Precomputed ray field for cam

    Returns:
        StateGradient
    """
    if mode not in GRAD_MODES:
        raise ConfigError(f"unknown grad_mode {mode!r}", allowed=list(GRAD_MODES))
    weights = weights or LossWeights()
    if rays is None:
        rays = build_ray_field(cam)
    observed = np.asarray(observed, dtype=np.float64)
    if observed.shape != cam.shape + (3,):
        raise ShapeError(
            f"observed image has shape {observed.shape}, camera expects {cam.shape + (3,)}",
            shapes={"observed": list(observed.shape), "camera": list(cam.shape)},
        )
    check_finite_state(state)

    depth, albedo = decode(state)
    breakdown, grad, _ = total_loss_and_gradient(
        observed, depth, albedo, light, rays, weights, with_gradient=(mode == "analytic"),
    )
    if mode == "finite-difference":
        g_log_depth, g_logits = _finite_difference(state, observed, light, rays, weights, fd_step)
        return StateGradient(log_depth=g_log_depth, albedo_logits=g_logits, breakdown=breakdown)

    saturation = albedo[..., 1]
    g_logits = np.stack(
        [grad.albedo[..., 0], grad.albedo[..., 1] * saturation * (1.0 - saturation)],
        axis=-1,
    )
    return StateGradient(log_depth=grad.depth * depth, albedo_logits=g_logits, breakdown=breakdown)


def initial_depth_guess(observed: np.ndarray, light: LightModel) -> float:
    """
    Constant depth matching the median brightness

    Treats every pixel as a white, frontal, on-axis patch, for which the
    pre-gamma radiance is gain * sigma0 / d^2.
    """
    brightness = np.clip(np.max(observed, axis=-1), 1e-3, 1.0)
    radiance = brightness ** light.gamma
    return float(np.median(np.sqrt(light.gain * light.sigma0 / radiance)))


class Recoverer(LoggerMixin):
    """Runs the descent loop of one recovery"""

    def __init__(self, light: LightModel, cam: CameraModel, config: Optional[RecoveryConfig] = None):
        self.light = light
        self.cam = cam
        self.config = config or RecoveryConfig()
        self.rays = build_ray_field(cam)

    def initial_state(self, observed: np.ndarray, init_depth: Optional[np.ndarray] = None,
                      init_albedo: Optional[np.ndarray] = None) -> RecoveryState:
        """Provided fields, or a constant depth with a near-gray albedo"""
        config = self.config
        shape = self.cam.shape
        if init_depth is None:
            value = config.init_depth or initial_depth_guess(observed, self.light)
            depth = np.full(shape, value)
            if config.init_jitter > 0:
                rng = np.random.default_rng(config.seed)
                depth = depth * np.exp(config.init_jitter * rng.uniform(-1.0, 1.0, size=shape))
        else:
            depth = np.asarray(init_depth, dtype=np.float64)
        if init_albedo is None:
            albedo = np.empty(shape + (2,))
            albedo[..., 0] = config.init_hue
            albedo[..., 1] = config.init_saturation
        else:
            albedo = np.asarray(init_albedo, dtype=np.float64)
        if depth.shape != shape:
            raise ShapeError(
                f"init depth has shape {depth.shape}, camera expects {shape}",
                shapes={"depth": list(depth.shape), "camera": list(shape)},
            )
        return RecoveryState.from_fields(depth, albedo)

    def _log_step(self, step: int, total_steps: int, breakdown: LossBreakdown, tag: str) -> None:
        every = self.config.log_every
        if every and (step % every == 0 or step == total_steps - 1):
            self.logger.info(f"  {tag} {step:5d}  total {breakdown.total:.6e}  "
                             f"photometric {breakdown.photometric:.6e}")

    def _adam(self, state: RecoveryState, observed: np.ndarray, history: LossHistory,
              total_steps: int, on_step: Optional[Callable[[int, int], None]]) -> None:
        config = self.config
        weights = config.effective_weights
        params = [state.log_depth] if config.freeze_albedo else [state.log_depth, state.albedo_logits]
        optimizer = AdamOptimizer(params, step_size=config.step_size)
        for _ in range(config.steps):
            step = state.step
            grad = loss_gradient(state, observed, self.light, self.cam, weights,
                                 mode=config.grad_mode, fd_step=config.fd_step, rays=self.rays)
            total = grad.breakdown.total
            if not np.isfinite(total) or not np.isfinite(grad.norm):
                raise NumericError(f"loss diverged at step {step}", step=step, total=total)
            state.loss_history.append(grad.breakdown)
            history.track(step, grad.breakdown)

            grads = [grad.log_depth] if config.freeze_albedo else [grad.log_depth, grad.albedo_logits]
            optimizer.step(grads)
            state.step += 1
            check_decoded(*decode(state), step=state.step)

            self._log_step(step, total_steps, grad.breakdown, "step")
            if on_step:
                on_step(state.step, total_steps)

    def _conjugate(self, state: RecoveryState, observed: np.ndarray, history: LossHistory,
                   steps: int, total_steps: int,
                   on_step: Optional[Callable[[int, int], None]]) -> None:
        config = self.config
        weights = config.effective_weights

        def gradient_fn(current: RecoveryState):
            grad = loss_gradient(current, observed, self.light, self.cam, weights,
                                 mode=config.grad_mode, fd_step=config.fd_step, rays=self.rays)
            return grad.breakdown, grad.log_depth, grad.albedo_logits

        def loss_fn(current: RecoveryState) -> LossBreakdown:
            return _breakdown(current, observed, self.light, self.rays, weights)

        refiner = ConjugateGradientRefiner(gradient_fn, loss_fn, freeze_albedo=config.freeze_albedo)
        breakdown, grad = refiner.gradient(state)
        for _ in range(steps):
            step = state.step
            if not np.isfinite(breakdown.total) or not np.all(np.isfinite(grad)):
                raise NumericError(f"loss diverged at step {step}", step=step, total=breakdown.total)
            state.loss_history.append(breakdown)
            history.track(step, breakdown)

            breakdown, grad, _ = refiner.step(state, breakdown, grad)
            state.step += 1
            check_decoded(*decode(state), step=state.step)

            self._log_step(step, total_steps, state.loss_history[-1], "cg")
            if on_step:
                on_step(state.step, total_steps)

    def run(self, observed: np.ndarray, init_depth: Optional[np.ndarray] = None,
            init_albedo: Optional[np.ndarray] = None,
            on_step: Optional[Callable[[int, int], None]] = None) -> RecoveryResult:
        """
        Optimise for config.steps steps, then config.polish_steps conjugate-gradient steps

        Args:
            observed: (H, W, 3) image in [0, 1]
            init_depth: Optional starting depth
            init_albedo: Optional starting (h, s) albedo
            on_step: Called with (step, total_steps) after every step

        Returns:
            RecoveryResult with the decoded fields of the final state
        """
        config = self.config
        observed = np.asarray(observed, dtype=np.float64)
        if observed.shape != self.cam.shape + (3,):
            raise ShapeError(
                f"observed image has shape {observed.shape}, camera expects {self.cam.shape + (3,)}",
                shapes={"observed": list(observed.shape), "camera": list(self.cam.shape)},
            )
        state = self.initial_state(observed, init_depth, init_albedo)
        history = LossHistory()
        total_steps = config.steps + config.polish_steps

        self.logger.info(f"🔧 Recovering {self.cam.width}x{self.cam.height} image, "
                         f"{config.steps} {config.method} steps, step size {config.step_size}")
        if config.method == "adam":
            self._adam(state, observed, history, total_steps, on_step)
        else:
            self._conjugate(state, observed, history, config.steps, total_steps, on_step)
        if config.polish_steps:
            self.logger.info(f"🔍 Conjugate-gradient polish, {config.polish_steps} steps")
            self._conjugate(state, observed, history, config.polish_steps, total_steps, on_step)

        depth, albedo = decode(state)
        points = depth[..., None] * self.rays.directions
        normals, _ = six_neighbor_forward(points, self.rays.directions)
        final, _, rendered = total_loss_and_gradient(
            observed, depth, albedo, self.light, self.rays, config.effective_weights, with_gradient=False,
        )
        self.logger.info(f"✅ Final total {final.total:.6e} "
                         f"(initial {history.entries[0].total:.6e})")
        return RecoveryResult(
            depth=depth, albedo=albedo, normals=normals, rendered=rendered,
            history=history, final=final, state=state,
        )


def recover(observed: np.ndarray, light: LightModel, cam: CameraModel,
            config: Optional[RecoveryConfig] = None, init_depth: Optional[np.ndarray] = None,
            init_albedo: Optional[np.ndarray] = None,
            on_step: Optional[Callable[[int, int], None]] = None) -> RecoveryResult:
    """Recover depth, albedo and normals from one image"""
    return Recoverer(light, cam, config).run(observed, init_depth, init_albedo, on_step)
