"""
Portable Float Map reader/writer

Only little-endian files are produced or accepted: "PF" (3 channels) or "Pf"
(1 channel), ASCII width/height, scale line "-1.0", rows stored bottom to
top as 32-bit floats.
"""
from pathlib import Path
import re

import numpy as np

from src.utils.errors import UnsupportedFormatError

_DIMS = re.compile(rb'^(\d+)\s+(\d+)$')


def write_pfm(path: Path, field: np.ndarray) -> Path:
    """
    Write an (H, W) or (H, W, 3) field as little-endian float32

    Args:
        path: Destination file
        field: Values; float64 input is rounded to float32

    Returns:
        The path written
    """
    field = np.asarray(field)
    if field.ndim == 2:
        header = b'Pf'
    elif field.ndim == 3 and field.shape[2] == 3:
        header = b'PF'
    else:
        raise UnsupportedFormatError(f"PFM stores 1 or 3 channels, got shape {field.shape}")
    height, width = field.shape[:2]
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'wb') as f:
        f.write(header + b'\n')
        f.write(f"{width} {height}\n".encode('ascii'))
        f.write(b'-1.0\n')
        f.write(np.ascontiguousarray(np.flipud(field), dtype='<f4').tobytes())
    return path


def read_pfm(path: Path) -> np.ndarray:
    """Read a little-endian PFM into a float32 array with row 0 at the top"""
    path = Path(path)
    with open(path, 'rb') as f:
        header = f.readline().rstrip()
        if header == b'PF':
            channels = 3
        elif header == b'Pf':
            channels = 1
        else:
            raise UnsupportedFormatError("not a PFM file", path=str(path), header=header.decode('latin-1'))

        dim_match = _DIMS.match(f.readline().strip())
        if not dim_match:
            raise UnsupportedFormatError("malformed PFM header", path=str(path))
        width, height = map(int, dim_match.groups())

        try:
            scale = float(f.readline().strip())
        except ValueError:
            raise UnsupportedFormatError("malformed PFM scale line", path=str(path))
        if not scale < 0:
            raise UnsupportedFormatError(
                f"unsupported PFM scale {scale} (only little-endian, negative scale)",
                path=str(path),
            )

        payload = f.read()

    expected = width * height * channels * 4
    if len(payload) != expected:
        raise UnsupportedFormatError(
            f"PFM payload has {len(payload)} bytes, expected {expected}",
            path=str(path),
        )
    data = np.frombuffer(payload, dtype='<f4')
    shape = (height, width, 3) if channels == 3 else (height, width)
    return np.flipud(data.reshape(shape)).astype(np.float32)
