"""Compute-precision switch for the layer arithmetic.

Parameters always live in float64 master copies (exact masking, stable
optimizer math); the heavy layer arithmetic casts to the compute dtype.
Float32 is the training default; verification code that compares against
finite differences switches to float64 via precision().
"""

from __future__ import annotations

from contextlib import contextmanager

import numpy as np

_DTYPE = np.dtype(np.float32)


def compute_dtype() -> np.dtype:
    return _DTYPE


def set_compute_dtype(dtype) -> np.dtype:
    global _DTYPE
    old = _DTYPE
    _DTYPE = np.dtype(dtype)
    if _DTYPE not in (np.dtype(np.float32), np.dtype(np.float64)):
        _DTYPE = old
        raise ValueError("compute dtype must be float32 or float64")
    return old


@contextmanager
def precision(dtype):
    """Temporarily switch the compute dtype (e.g. precision(np.float64))."""
    old = set_compute_dtype(dtype)
    try:
        yield
    finally:
        set_compute_dtype(old)
