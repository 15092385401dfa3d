"""Small input-validation helpers used across the package."""
from __future__ import annotations

import math
from numbers import Real

import numpy as np

from .exceptions import ConfigurationError


def as_point(z) -> complex:
    """Coerce ``z`` to a finite complex number.

    Accepts complex or real scalars and length-2 sequences ``(x, y)``.
    """
    if isinstance(z, (complex, Real, np.number)):
        w = complex(z)
    else:
        seq = list(z)
        if len(seq) != 2:
            raise ConfigurationError(f"a planar point needs two coordinates, got {seq!r}")
        w = complex(float(seq[0]), float(seq[1]))
    if not (math.isfinite(w.real) and math.isfinite(w.imag)):
        raise ConfigurationError(f"point {z!r} has non-finite coordinates")
    return w


def as_points(z) -> np.ndarray:
    """Coerce a scalar or array-like of points to a 1-D complex array."""
    arr = np.asarray(z)
    if arr.dtype.kind in "fiu" and arr.ndim == 2 and arr.shape[-1] == 2:
        arr = arr[:, 0] + 1j * arr[:, 1]
    arr = np.atleast_1d(arr.astype(complex))
    if not np.all(np.isfinite(arr)):
        raise ConfigurationError("points must be finite")
    return arr.ravel()


def check_positive(value, name: str, *, strict: bool = True) -> float:
    value = float(value)
    if not math.isfinite(value) or value < 0 or (strict and value == 0):
        kind = "positive" if strict else "non-negative"
        raise ConfigurationError(f"{name} must be {kind} and finite, got {value}")
    return value


def check_open_unit(value, name: str) -> float:
    """Check that ``value`` lies in the open interval (0, 1)."""
    value = float(value)
    if not 0.0 < value < 1.0:
        raise ConfigurationError(f"{name} must lie in (0, 1), got {value}")
    return value


def check_int(value, name: str, minimum: int) -> int:
    if isinstance(value, bool) or int(value) != value:
        raise ConfigurationError(f"{name} must be an integer, got {value!r}")
    value = int(value)
    if value < minimum:
        raise ConfigurationError(f"{name} must be at least {minimum}, got {value}")
    return value
