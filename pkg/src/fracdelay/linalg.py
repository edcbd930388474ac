"""Dense real matrix helpers.

Matrices are plain two-dimensional ``float64`` numpy arrays.  The helpers
below add the validation the rest of the package relies on (finite entries,
compatible shapes) and fix the operator norm used everywhere: the induced
1-norm, i.e. the maximum absolute column sum.
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionError, DomainError

__all__ = [
    "as_matrix",
    "as_vector",
    "identity",
    "zeros",
    "mat_mul",
    "mat_axpy",
    "norm_ind1",
    "vec_norm1",
    "commutator",
]


def as_matrix(a, name="matrix"):
    """Return ``a`` as a read-only 2-D float array, rejecting NaN/Inf."""
    m = np.array(a, dtype=float, copy=True)
    if m.ndim == 0:
        m = m.reshape(1, 1)
    if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
        raise DimensionError(f"{name} must be a non-empty 2-D array, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise DomainError(f"{name} has non-finite entries")
    m.flags.writeable = False
    return m


def as_vector(v, d=None, name="vector"):
    x = np.array(v, dtype=float, copy=True).reshape(-1)
    if d is not None and x.shape[0] != d:
        raise DimensionError(f"{name} must have length {d}, got {x.shape[0]}")
    if not np.all(np.isfinite(x)):
        raise DomainError(f"{name} has non-finite entries")
    return x


def identity(d):
    return np.eye(d)


def zeros(d, cols=None):
    return np.zeros((d, d if cols is None else cols))


def mat_mul(a, b):
    """Matrix product ``a @ b`` with an explicit shape check."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise DimensionError(f"cannot multiply {a.shape} by {b.shape}")
    return a @ b


def mat_axpy(alpha, a, b):
    """Return ``alpha * a + b``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise DimensionError(f"shape mismatch {a.shape} vs {b.shape}")
    return alpha * a + b


def norm_ind1(a):
    """Induced 1-norm (maximum absolute column sum).

    Works on a single matrix or on a stack ``(..., r, c)``; for a stack the
    norm of each trailing matrix is returned.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim < 2:
        raise DimensionError("norm_ind1 expects a matrix")
    return np.abs(a).sum(axis=-2).max(axis=-1)


def vec_norm1(v):
    """Vector 1-norm, the norm compatible with :func:`norm_ind1`."""
    return np.abs(np.asarray(v, dtype=float)).sum(axis=-1)


def commutator(a, b):
    return mat_mul(a, b) - mat_mul(b, a)
