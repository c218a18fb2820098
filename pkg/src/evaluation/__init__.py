"""
Evaluation suite: median-aligned depth errors, normal MAE, SSIM and image MAE
"""
from .metrics import (
    DEPTH_FIELDS,
    MetricsReport,
    depth_metrics,
    evaluate,
    image_mae,
    lower_median,
    median_align,
    normal_mae,
    ssim,
)

__all__ = [
    'DEPTH_FIELDS',
    'MetricsReport',
    'depth_metrics',
    'evaluate',
    'image_mae',
    'lower_median',
    'median_align',
    'normal_mae',
    'ssim',
]
