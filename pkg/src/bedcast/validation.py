"""Input validation helpers shared across the package.

Small `check_*` utilities in the scikit-learn spirit: they coerce to numpy,
verify the documented domain, and raise ``ValueError`` with a message naming
the offending argument.
"""

from __future__ import annotations

import numpy as np


def check_1d(name, values, dtype=float):
    """Coerce to a 1-d numpy array of the given dtype."""
    arr = np.asarray(values, dtype=dtype)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {arr.shape}")
    return arr


def check_nonnegative(name, values):
    """1-d array of finite, non-negative reals."""
    arr = check_1d(name, values)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    if np.any(arr < 0):
        raise ValueError(f"{name} contains negative entries")
    return arr


def check_counts(name, values):
    """1-d array of non-negative integer counts (stored as int64)."""
    arr = check_nonnegative(name, values)
    rounded = np.rint(arr)
    if np.any(np.abs(arr - rounded) > 0):
        raise ValueError(f"{name} must contain integers")
    return rounded.astype(np.int64)


def check_positive_scalar(name, value):
    value = float(value)
    if not np.isfinite(value) or value <= 0:
        raise ValueError(f"{name} must be a positive finite number, got {value!r}")
    return value


def check_nonnegative_scalar(name, value):
    value = float(value)
    if not np.isfinite(value) or value < 0:
        raise ValueError(f"{name} must be a non-negative finite number, got {value!r}")
    return value


def check_survival_tail(name, tail, atol=1e-9):
    """Validate a discrete survival tail: starts at 1, in [0, 1], non-increasing."""
    arr = check_1d(name, tail)
    if arr.size == 0:
        raise ValueError(f"{name} is empty")
    if abs(arr[0] - 1.0) > atol:
        raise ValueError(f"{name}[0] must equal 1, got {arr[0]!r}")
    if np.any(arr < -atol) or np.any(arr > 1 + atol):
        raise ValueError(f"{name} has entries outside [0, 1]")
    if np.any(np.diff(arr) > atol):
        raise ValueError(f"{name} must be non-increasing")
    return arr


def check_same_length(**named_arrays):
    lengths = {name: len(arr) for name, arr in named_arrays.items()}
    if len(set(lengths.values())) > 1:
        raise ValueError(f"length mismatch: {lengths}")
