"""
Binary PPM (P6, maxval 255) reader/writer for [0, 1] colour images
"""
from pathlib import Path
from typing import List, Tuple

import numpy as np

from src.utils.errors import DomainError, UnsupportedFormatError

MAXVAL = 255


def encode_8bit(image: np.ndarray) -> np.ndarray:
    """c -> round(c * 255), halves rounding up"""
    image = np.asarray(image, dtype=np.float64)
    if np.any(~np.isfinite(image)) or np.any(image < 0) or np.any(image > 1):
        raise DomainError("image values must lie in [0, 1]")
    return np.floor(image * MAXVAL + 0.5).astype(np.uint8)


def write_ppm(path: Path, image: np.ndarray) -> Path:
    """Write an (H, W, 3) image as binary P6"""
    image = np.asarray(image)
    if image.ndim != 3 or image.shape[2] != 3:
        raise UnsupportedFormatError(f"PPM stores (H, W, 3) images, got shape {image.shape}")
    height, width = image.shape[:2]
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'wb') as f:
        f.write(f"P6\n{width} {height}\n{MAXVAL}\n".encode('ascii'))
        f.write(encode_8bit(image).tobytes())
    return path


def _header_tokens(data: bytes, count: int, path: Path) -> Tuple[List[bytes], int]:
    """First `count` whitespace-separated tokens, skipping # comments"""
    tokens, pos = [], 0
    while len(tokens) < count:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos:pos + 1] == b'#':
            while pos < len(data) and data[pos:pos + 1] not in (b'\n', b'\r'):
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace():
            pos += 1
        if start == pos:
            raise UnsupportedFormatError("truncated PPM header", path=str(path))
        tokens.append(data[start:pos])
    # exactly one whitespace byte separates the header from the raster
    if pos >= len(data) or not data[pos:pos + 1].isspace():
        raise UnsupportedFormatError("malformed PPM header", path=str(path))
    return tokens, pos + 1


def read_ppm(path: Path) -> np.ndarray:
    """Read a binary P6 file into float64 values v / 255"""
    path = Path(path)
    data = path.read_bytes()
    tokens, offset = _header_tokens(data, 4, path)
    magic, width, height, maxval = tokens
    if magic != b'P6':
        raise UnsupportedFormatError("not a binary PPM (P6) file", path=str(path))
    try:
        width, height, maxval = int(width), int(height), int(maxval)
    except ValueError:
        raise UnsupportedFormatError("malformed PPM header", path=str(path))
    if maxval != MAXVAL:
        raise UnsupportedFormatError(f"unsupported PPM maxval {maxval}", path=str(path))

    expected = width * height * 3
    payload = data[offset:]
    if len(payload) < expected:
        raise UnsupportedFormatError(
            f"PPM payload has {len(payload)} bytes, expected {expected}",
            path=str(path),
        )
    raster = np.frombuffer(payload[:expected], dtype=np.uint8).reshape(height, width, 3)
    return raster.astype(np.float64) / MAXVAL
