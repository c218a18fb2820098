"""
Depth, normal and image quality metrics

Depth errors are computed after median scale alignment unless explicitly
disabled. The median of an even count is the lower-middle element.
"""
from dataclasses import dataclass, asdict, fields
from typing import Dict, Optional, Tuple

import numpy as np
from scipy.ndimage import correlate1d

from src.geometry import RayField
from src.normals import normals_cross_baseline
from src.utils.errors import DomainError, check_same_shape

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_C1 = 0.01 ** 2
SSIM_C2 = 0.03 ** 2

DEPTH_FIELDS = ("mae", "medae", "rmse", "rmse_log", "abs_rel", "sq_rel", "delta1", "delta2", "delta3")

# (field, column title, format) in table order
_TABLE_COLUMNS = (
    ("mae", "MAE", "{:.4f}"),
    ("medae", "MedAE", "{:.4f}"),
    ("rmse", "RMSE", "{:.4f}"),
    ("rmse_log", "RMSE_log", "{:.4f}"),
    ("abs_rel", "Abs_Rel", "{:.4f}"),
    ("sq_rel", "Sq_Rel", "{:.4f}"),
    ("delta1", "d<1.25", "{:.4f}"),
    ("delta2", "d<1.25^2", "{:.4f}"),
    ("delta3", "d<1.25^3", "{:.4f}"),
    ("normal_mae_deg", "Normals[deg]", "{:.3f}"),
    ("ssim", "SSIM", "{:.4f}"),
    ("image_mae", "Img_MAE", "{:.5f}"),
)


@dataclass
class MetricsReport:
    """Depth, normal and image metrics of one prediction"""
    scale: float
    mae: float
    medae: float
    rmse: float
    rmse_log: float
    abs_rel: float
    sq_rel: float
    delta1: float
    delta2: float
    delta3: float
    normal_mae_deg: float
    ssim: float
    image_mae: float
    image_mae_255: float
    normal_mae_baseline_deg: Optional[float] = None

    def to_dict(self) -> Dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict) -> "MetricsReport":
        names = {f.name for f in fields(cls)}
        return cls(**{key: value for key, value in data.items() if key in names})

    def to_table(self) -> str:
        """Two aligned lines: column titles and values"""
        titles, values = [], []
        for name, title, fmt in _TABLE_COLUMNS:
            text = fmt.format(getattr(self, name))
            width = max(len(title), len(text))
            titles.append(title.rjust(width))
            values.append(text.rjust(width))
        return "  ".join(titles) + "\n" + "  ".join(values) + "\n"


def lower_median(values: np.ndarray) -> float:
    """Median with the lower-middle element for even counts"""
    flat = np.sort(np.asarray(values, dtype=np.float64).ravel())
    if flat.size == 0:
        raise DomainError("median of an empty field")
    return float(flat[(flat.size - 1) // 2])


def _check_depths(pred: np.ndarray, gt: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    pred = np.asarray(pred, dtype=np.float64)
    gt = np.asarray(gt, dtype=np.float64)
    check_same_shape("pred", pred, "gt", gt, leading=max(pred.ndim, gt.ndim))
    for name, field in (("pred", pred), ("gt", gt)):
        if not np.all(field > 0):
            raise DomainError(f"{name} depth must be strictly positive")
    return pred, gt


def median_align(pred: np.ndarray, gt: np.ndarray) -> Tuple[np.ndarray, float]:
    """Scale pred by median(gt) / median(pred)"""
    pred, gt = _check_depths(pred, gt)
    scale = lower_median(gt) / lower_median(pred)
    return pred * scale, scale


def depth_metrics(pred: np.ndarray, gt: np.ndarray, align: bool = True) -> Dict[str, float]:
    """
    The nine depth errors, plus the alignment scale under "scale"

    Args:
        pred: Predicted depth
        gt: Ground-truth depth
        align: Apply median_align first (disable only for raw comparisons)
    """
    pred, gt = _check_depths(pred, gt)
    scale = 1.0
    if align:
        pred, scale = median_align(pred, gt)

    err = pred - gt
    abs_err = np.abs(err)
    thresh = np.maximum(pred / gt, gt / pred)
    log_err = np.log(pred) - np.log(gt)
    return {
        "scale": float(scale),
        "mae": float(np.mean(abs_err)),
        "medae": lower_median(abs_err),
        "rmse": float(np.sqrt(np.mean(err * err))),
        "rmse_log": float(np.sqrt(np.mean(log_err * log_err))),
        "abs_rel": float(np.mean(abs_err / gt)),
        "sq_rel": float(np.mean(err * err / gt)),
        "delta1": float(np.mean(thresh < 1.25)),
        "delta2": float(np.mean(thresh < 1.25 ** 2)),
        "delta3": float(np.mean(thresh < 1.25 ** 3)),
    }


def normal_mae(pred: np.ndarray, gt: np.ndarray) -> float:
    """Mean angle between two unit normal maps, in degrees"""
    pred = np.asarray(pred, dtype=np.float64)
    gt = np.asarray(gt, dtype=np.float64)
    check_same_shape("pred normals", pred, "gt normals", gt, leading=pred.ndim)
    for name, field in (("pred", pred), ("gt", gt)):
        if np.any(np.abs(np.linalg.norm(field, axis=-1) - 1.0) > 1e-6):
            raise DomainError(f"{name} normals must be unit vectors")
    cos = np.clip(np.sum(pred * gt, axis=-1), -1.0, 1.0)
    return float(np.degrees(np.mean(np.arccos(cos))))


def gaussian_window(size: int = SSIM_WINDOW, sigma: float = SSIM_SIGMA) -> np.ndarray:
    x = np.arange(size, dtype=np.float64) - size // 2
    window = np.exp(-(x * x) / (2.0 * sigma * sigma))
    return window / window.sum()


def _filter_valid(image: np.ndarray, window: np.ndarray) -> np.ndarray:
    out = correlate1d(image, window, axis=0, mode="constant")
    out = correlate1d(out, window, axis=1, mode="constant")
    half = window.size // 2
    return out[half:-half, half:-half]


def _ssim_channel(a: np.ndarray, b: np.ndarray, window: np.ndarray) -> float:
    mu_a = _filter_valid(a, window)
    mu_b = _filter_valid(b, window)
    var_a = _filter_valid(a * a, window) - mu_a * mu_a
    var_b = _filter_valid(b * b, window) - mu_b * mu_b
    cov = _filter_valid(a * b, window) - mu_a * mu_b
    ssim_map = ((2 * mu_a * mu_b + SSIM_C1) * (2 * cov + SSIM_C2)) / (
        (mu_a * mu_a + mu_b * mu_b + SSIM_C1) * (var_a + var_b + SSIM_C2)
    )
    return float(np.mean(ssim_map))


def ssim(a: np.ndarray, b: np.ndarray) -> float:
    """
    Single-scale SSIM of two images in [0, 1]

    11-tap Gaussian window (sigma 1.5) evaluated only where it fits inside
    the image, per channel, averaged over channels.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    check_same_shape("a", a, "b", b, leading=a.ndim)
    if a.shape[0] < SSIM_WINDOW or a.shape[1] < SSIM_WINDOW:
        raise DomainError(f"SSIM needs images of at least {SSIM_WINDOW}x{SSIM_WINDOW}, got {a.shape[:2]}")
    if a.ndim == 2:
        a, b = a[..., None], b[..., None]
    window = gaussian_window()
    return float(np.mean([_ssim_channel(a[..., c], b[..., c], window) for c in range(a.shape[-1])]))


def image_mae(a: np.ndarray, b: np.ndarray) -> float:
    """Mean absolute difference on [0, 1] data"""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    check_same_shape("a", a, "b", b, leading=a.ndim)
    return float(np.mean(np.abs(a - b)))


def evaluate(pred_depth: np.ndarray, gt_depth: np.ndarray, pred_normals: np.ndarray,
             gt_normals: np.ndarray, pred_image: np.ndarray, gt_image: np.ndarray,
             rays: Optional[RayField] = None, align: bool = True) -> MetricsReport:
    """
    Full report for one prediction

    With rays, the cross-product baseline normals of the predicted depth are
    scored as well.
    """
    depth = depth_metrics(pred_depth, gt_depth, align=align)
    mae_image = image_mae(pred_image, gt_image)
    baseline = None
    if rays is not None:
        baseline = normal_mae(normals_cross_baseline(pred_depth, rays), gt_normals)
    return MetricsReport(
        **depth,
        normal_mae_deg=normal_mae(pred_normals, gt_normals),
        ssim=ssim(pred_image, gt_image),
        image_mae=mae_image,
        image_mae_255=mae_image * 255.0,
        normal_mae_baseline_deg=baseline,
    )
