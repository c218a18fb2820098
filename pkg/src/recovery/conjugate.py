"""
Nonlinear conjugate-gradient descent over a RecoveryState

Directions follow Polak-Ribiere with restarts (beta clipped at 0, steepest
descent whenever the direction stops descending). Each step length comes from
a secant estimate of the curvature along the direction, built from two
gradients, and must pass an Armijo test on the loss; it is halved until it
does. A step that never passes leaves the state unchanged and restarts the
direction, so the loss never increases from one step to the next.
"""
from typing import Callable, Optional, Tuple

import numpy as np

from src.utils.logger import LoggerMixin

from .losses import LossBreakdown
from .state import RecoveryState

# (breakdown, d loss / d log_depth, d loss / d albedo_logits)
GradientFn = Callable[[RecoveryState], Tuple[LossBreakdown, np.ndarray, np.ndarray]]
LossFn = Callable[[RecoveryState], LossBreakdown]

ARMIJO = 1e-4
SECANT_PROBE = 1e-4  # largest parameter change at the curvature point
MAX_STEP = 0.5  # largest parameter change of one step


class ConjugateGradientRefiner(LoggerMixin):
    """Stateful PR+ conjugate-gradient stepper"""

    def __init__(self, gradient_fn: GradientFn, loss_fn: LossFn, freeze_albedo: bool = False,
                 max_backtracks: int = 12):
        self.gradient_fn = gradient_fn
        self.loss_fn = loss_fn
        self.freeze_albedo = freeze_albedo
        self.max_backtracks = max_backtracks
        self.direction: Optional[np.ndarray] = None
        self.previous: Optional[np.ndarray] = None
        self.alpha: Optional[float] = None

    def gradient(self, state: RecoveryState) -> Tuple[LossBreakdown, np.ndarray]:
        """Loss breakdown and the flat gradient, albedo entries zeroed when frozen"""
        breakdown, g_depth, g_albedo = self.gradient_fn(state)
        if self.freeze_albedo:
            g_albedo = np.zeros_like(g_albedo)
        return breakdown, np.concatenate([g_depth.ravel(), g_albedo.ravel()])

    @staticmethod
    def moved(state: RecoveryState, delta: np.ndarray) -> RecoveryState:
        trial = state.copy()
        n_depth = state.log_depth.size
        trial.log_depth += delta[:n_depth].reshape(state.log_depth.shape)
        trial.albedo_logits += delta[n_depth:].reshape(state.albedo_logits.shape)
        return trial

    def restart(self) -> None:
        self.direction = None
        self.previous = None

    def _next_direction(self, grad: np.ndarray) -> np.ndarray:
        if self.direction is None or self.previous is None:
            return -grad
        beta = max(0.0, float(grad @ (grad - self.previous)) / float(self.previous @ self.previous))
        direction = -grad + beta * self.direction
        if float(grad @ direction) >= 0.0:
            return -grad
        return direction

    def _step_length(self, state: RecoveryState, grad: np.ndarray, direction: np.ndarray,
                     slope: float) -> float:
        peak = float(np.max(np.abs(direction)))
        probe = SECANT_PROBE / peak
        _, probe_grad = self.gradient(self.moved(state, probe * direction))
        curvature = (float(probe_grad @ direction) - slope) / probe
        if curvature > 0.0:
            alpha = -slope / curvature
        else:
            alpha = 2.0 * self.alpha if self.alpha else probe
        return min(alpha, MAX_STEP / peak)

    def step(self, state: RecoveryState, breakdown: LossBreakdown,
             grad: np.ndarray) -> Tuple[LossBreakdown, np.ndarray, bool]:
        """
        One line-searched step, applied to state in place when it passes

        Returns:
            (breakdown, gradient, accepted) at the resulting state
        """
        if not np.any(grad):
            return breakdown, grad, False
        direction = self._next_direction(grad)
        slope = float(grad @ direction)
        alpha = self._step_length(state, grad, direction, slope)

        for _ in range(self.max_backtracks):
            trial = self.moved(state, alpha * direction)
            trial_breakdown = self.loss_fn(trial)
            if (np.isfinite(trial_breakdown.total)
                    and trial_breakdown.total <= breakdown.total + ARMIJO * alpha * slope):
                state.log_depth[...] = trial.log_depth
                state.albedo_logits[...] = trial.albedo_logits
                self.direction, self.previous, self.alpha = direction, grad, alpha
                new_breakdown, new_grad = self.gradient(state)
                return new_breakdown, new_grad, True
            alpha *= 0.5

        self.logger.debug("line search failed, restarting from steepest descent")
        self.restart()
        return breakdown, grad, False
