"""
Inverse rendering: self-supervision losses, depth/albedo recovery and light calibration
"""
from .losses import (
    LossBreakdown,
    LossGradient,
    LossWeights,
    photometric_loss,
    saturation_mask,
    smoothness_loss,
    specular_direction,
    specular_loss,
    total_loss,
    total_loss_and_gradient,
)
from .state import RecoveryState, decode
from .conjugate import ConjugateGradientRefiner
from .optim import (
    AdamOptimizer,
    RecoveryConfig,
    RecoveryResult,
    Recoverer,
    StateGradient,
    initial_depth_guess,
    loss_gradient,
    recover,
)
from .calib import (
    CalibObservation,
    CalibrationConfig,
    CalibrationReport,
    LightCalibrator,
    calibrate_light,
)

__all__ = [
    'AdamOptimizer',
    'CalibObservation',
    'CalibrationConfig',
    'CalibrationReport',
    'ConjugateGradientRefiner',
    'LightCalibrator',
    'LossBreakdown',
    'LossGradient',
    'LossWeights',
    'RecoveryConfig',
    'RecoveryResult',
    'RecoveryState',
    'Recoverer',
    'StateGradient',
    'calibrate_light',
    'decode',
    'initial_depth_guess',
    'loss_gradient',
    'photometric_loss',
    'recover',
    'saturation_mask',
    'smoothness_loss',
    'specular_direction',
    'specular_loss',
    'total_loss',
    'total_loss_and_gradient',
]
