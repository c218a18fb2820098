"""
Error hierarchy shared by every lumedepth package
"""
from typing import Any, Dict


class LumeDepthError(Exception):
    """Base class for all lumedepth errors"""

    def __init__(self, message: str, **context: Any):
        super().__init__(message)
        self.message = message
        self.context = context

    def to_dict(self) -> Dict[str, Any]:
        """Structured form printed by the CLI on stderr"""
        data = {"error": self.__class__.__name__, "message": self.message}
        data.update({key: _jsonable(value) for key, value in self.context.items()})
        return data


class DomainError(LumeDepthError, ValueError):
    """Input outside the domain of an operation"""


class DegenerateGeometryError(DomainError):
    """Geometry with no defined direction (coincident points, zero vectors)"""


class CoverageError(DomainError):
    """A camera ray misses the synthetic surface"""


class ShapeError(LumeDepthError, ValueError):
    """Fields of mismatched resolution"""


class NumericError(LumeDepthError, ArithmeticError):
    """Non-finite parameters or a diverging optimisation"""


class UnsupportedFormatError(LumeDepthError, ValueError):
    """Malformed or unsupported PFM/PPM file"""


class ConfigError(LumeDepthError, ValueError):
    """Invalid JSON configuration"""


def _jsonable(value: Any) -> Any:
    if isinstance(value, (str, int, float, bool)) or value is None:
        return value
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    try:
        return value.tolist()
    except AttributeError:
        return str(value)


def check_same_shape(name_a: str, a, name_b: str, b, leading: int = 2) -> None:
    """Raise ShapeError unless the first `leading` dimensions agree"""
    shape_a = tuple(a.shape[:leading])
    shape_b = tuple(b.shape[:leading])
    if shape_a != shape_b:
        raise ShapeError(
            f"{name_a} has shape {shape_a} but {name_b} has shape {shape_b}",
            shapes={name_a: list(shape_a), name_b: list(shape_b)},
        )
