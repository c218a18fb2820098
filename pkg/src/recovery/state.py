"""
Unconstrained recovery parameters

    depth      d = exp(log_depth)
    hue        h = raw_h mod 1
    saturation s = 1 / (1 + exp(-raw_s))

so any finite parameter vector decodes to a valid scene.
"""
from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np
from scipy.special import expit, logit

from src.geometry import check_positive_depth
from src.photometry import check_albedo_field
from src.utils.errors import NumericError, ShapeError

from .losses import LossBreakdown

_SATURATION_CLIP = 1e-6


@dataclass
class RecoveryState:
    """Unconstrained optimisation parameters"""
    log_depth: np.ndarray
    albedo_logits: np.ndarray  # (..., 0) raw hue, (..., 1) saturation logit
    step: int = 0
    loss_history: List[LossBreakdown] = field(default_factory=list)

    @classmethod
    def from_fields(cls, depth: np.ndarray, albedo: np.ndarray) -> "RecoveryState":
        """Encode decoded fields; saturation is clipped away from 0 and 1 first"""
        depth = np.asarray(depth, dtype=np.float64)
        albedo = np.asarray(albedo, dtype=np.float64)
        check_positive_depth(depth)
        check_albedo_field(albedo)
        if albedo.shape != depth.shape + (2,):
            raise ShapeError(
                f"albedo has shape {albedo.shape}, expected {depth.shape + (2,)}",
                shapes={"depth": list(depth.shape), "albedo": list(albedo.shape)},
            )
        saturation = np.clip(albedo[..., 1], _SATURATION_CLIP, 1.0 - _SATURATION_CLIP)
        logits = np.stack([albedo[..., 0], logit(saturation)], axis=-1)
        return cls(log_depth=np.log(depth), albedo_logits=logits)

    def copy(self) -> "RecoveryState":
        return RecoveryState(
            log_depth=self.log_depth.copy(),
            albedo_logits=self.albedo_logits.copy(),
            step=self.step,
            loss_history=list(self.loss_history),
        )


def decode(state: RecoveryState) -> Tuple[np.ndarray, np.ndarray]:
    """Depth and (h, s) albedo fields of a state"""
    depth = np.exp(state.log_depth)
    hue = np.mod(state.albedo_logits[..., 0], 1.0)
    # mod of a tiny negative number rounds to exactly 1.0
    hue = np.where(hue >= 1.0, 0.0, hue)
    saturation = expit(state.albedo_logits[..., 1])
    return depth, np.stack([hue, saturation], axis=-1)


def _first_bad_pixel(mask: np.ndarray) -> List[int]:
    v, u = np.argwhere(mask)[0][:2]
    return [int(u), int(v)]


def check_finite_state(state: RecoveryState) -> None:
    """Raise NumericError naming the first pixel with a non-finite parameter"""
    bad = ~np.isfinite(state.log_depth) | ~np.all(np.isfinite(state.albedo_logits), axis=-1)
    if bad.any():
        pixel = _first_bad_pixel(bad)
        raise NumericError(
            f"non-finite parameter at pixel (u={pixel[0]}, v={pixel[1]})",
            pixel=pixel, step=state.step,
        )


def check_decoded(depth: np.ndarray, albedo: np.ndarray, step: int) -> None:
    """Raise NumericError when a decoded field leaves its valid range"""
    bad = ~(np.isfinite(depth) & (depth > 0))
    bad |= ~((albedo[..., 1] >= 0) & (albedo[..., 1] <= 1))
    if bad.any():
        pixel = _first_bad_pixel(bad)
        raise NumericError(
            f"decoded fields left their range at step {step}, pixel (u={pixel[0]}, v={pixel[1]})",
            pixel=pixel, step=step,
        )
