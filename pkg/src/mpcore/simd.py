"""Lane-path configuration and planar storage helpers.

Multi-component matrices and vectors are stored as planar float64 arrays of
shape (k, *dims): plane c holds component c of every element. The arithmetic
kernels in mcfloat are written against the arithmetic operators only, so
applying one to the planes executes the exact same rounding sequence as the
scalar loop, one lane per element, and the two paths agree bit for bit.

The vectorized path is on by default; it can be disabled per call or through
the MPCORE_SIMD environment variable (0/off/false/no).
"""

import os

import numpy as np

ENV_VAR = "MPCORE_SIMD"
_FALSY = frozenset(("0", "off", "false", "no"))

__all__ = ["ENV_VAR", "resolve_simd", "simd_enabled",
           "planes_zeros", "planes_from_rows", "planes_finite"]


def resolve_simd(flag=None):
    """Resolve a per-call lane flag: None defers to MPCORE_SIMD (default on)."""
    if flag is None:
        return os.environ.get(ENV_VAR, "on").strip().lower() not in _FALSY
    return bool(flag)


def simd_enabled():
    """Current default lane setting (environment only)."""
    return resolve_simd(None)


def planes_zeros(k, shape):
    """Planar zero storage for k components of the given element shape."""
    if isinstance(shape, int):
        shape = (shape,)
    return np.zeros((k,) + tuple(shape), dtype=np.float64)


def planes_from_rows(k, rows):
    """Pack nested lists of k-tuples (row major) into planes."""
    arr = np.asarray(rows, dtype=np.float64)
    if arr.shape[-1] != k:
        raise ValueError("expected trailing component axis of length %d" % k)
    return np.ascontiguousarray(np.moveaxis(arr, -1, 0))


def planes_finite(planes):
    """True when every component of every element is finite."""
    return bool(np.isfinite(planes).all())
