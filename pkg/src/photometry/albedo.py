"""
Hue/saturation albedo with Value fixed at one

Albedo fields are arrays of shape (height, width, 2) holding (h, s).
"""
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from src.utils.errors import DomainError

# Hexcone sector tables: which of (1, p, q, t) feeds R, G and B in each sector
_ONE, _P, _Q, _T = 0, 1, 2, 3
_SECTOR_TABLE = np.array([
    [_ONE, _Q, _P, _P, _T, _ONE],  # R
    [_T, _ONE, _ONE, _Q, _P, _P],  # G
    [_P, _P, _T, _ONE, _ONE, _Q],  # B
])


@dataclass(frozen=True)
class AlbedoHS:
    """Per-point albedo as hue in [0, 1) and saturation in [0, 1]"""
    h: float
    s: float

    def __post_init__(self):
        if not 0 <= self.h < 1:
            raise DomainError(f"hue must lie in [0, 1), got {self.h}")
        if not 0 <= self.s <= 1:
            raise DomainError(f"saturation must lie in [0, 1], got {self.s}")


def _sector_terms(hs: np.ndarray):
    hs = np.asarray(hs, dtype=np.float64)
    h, s = hs[..., 0], hs[..., 1]
    h6 = h * 6.0
    floor = np.floor(h6)
    f = h6 - floor
    sector = floor.astype(np.int64) % 6
    return h, s, f, sector


def _gather(values: np.ndarray, sector: np.ndarray) -> np.ndarray:
    channels = [
        np.take_along_axis(values, _SECTOR_TABLE[c][sector][..., None], axis=-1)[..., 0]
        for c in range(3)
    ]
    return np.stack(channels, axis=-1)


def hsv_to_rgb_field(hs: np.ndarray) -> np.ndarray:
    """Hexcone HSV -> RGB with V = 1 for an (..., 2) array of (h, s)"""
    _, s, f, sector = _sector_terms(hs)
    values = np.stack([np.ones_like(s), 1.0 - s, 1.0 - s * f, 1.0 - s * (1.0 - f)], axis=-1)
    return _gather(values, sector)


def hsv_jacobian(hs: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Partial derivatives of the RGB albedo

    Returns:
        (d_rgb/dh, d_rgb/ds), each of shape (..., 3); piecewise constant in h
    """
    _, s, f, sector = _sector_terms(hs)
    zero = np.zeros_like(s)
    d_h = np.stack([zero, zero, -6.0 * s, 6.0 * s], axis=-1)
    d_s = np.stack([zero, -np.ones_like(s), -f, -(1.0 - f)], axis=-1)
    return _gather(d_h, sector), _gather(d_s, sector)


def hsv_to_rgb(albedo: AlbedoHS) -> np.ndarray:
    """RGB triplet in [0, 1] for a single albedo"""
    return hsv_to_rgb_field(np.array([albedo.h, albedo.s]))


def check_albedo_field(hs: np.ndarray) -> None:
    """Raise DomainError if any (h, s) pair leaves [0, 1) x [0, 1]"""
    hs = np.asarray(hs)
    h, s = hs[..., 0], hs[..., 1]
    bad = ~((h >= 0) & (h < 1) & (s >= 0) & (s <= 1))
    if bad.any():
        idx = np.argwhere(bad)[0].tolist()
        raise DomainError("albedo (h, s) out of range", index=idx)
