"""Input checks shared by the estimator classes and the command line."""

from __future__ import annotations

import numbers

import numpy as np
import scipy.sparse as sp

from .linop import JordanWielandtOperator, SparseCsr, as_operator

__all__ = ["check_operator", "check_vector", "check_vectors", "check_count", "check_finite_scalar"]


def check_operator(X, jordan_wielandt=False):
    """Return an operator for ``X``.

    Square symmetric arrays and sparse matrices are wrapped. With
    ``jordan_wielandt=True`` a rectangular input is read as the block ``B``
    of ``[[0, B], [B^T, 0]]``.
    """
    if isinstance(X, JordanWielandtOperator):
        return X
    if jordan_wielandt:
        if isinstance(X, SparseCsr) or sp.issparse(X):
            return JordanWielandtOperator(X)
        arr = np.asarray(X, dtype=float)
        if arr.ndim != 2:
            raise ValueError(f"expected a 2-D block, got shape {arr.shape}")
        _require_finite(arr)
        return JordanWielandtOperator(arr)
    if isinstance(X, np.ndarray) or isinstance(X, (list, tuple)):
        arr = np.asarray(X, dtype=float)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {arr.shape}")
        _require_finite(arr)
        return as_operator(arr)
    op = as_operator(X)
    if op.dimension < 1:
        raise ValueError("operator must have positive dimension")
    return op


def _require_finite(arr):
    if not np.all(np.isfinite(arr)):
        raise ValueError("input contains NaN or infinity")


def check_vector(v, n):
    v = np.asarray(v, dtype=float)
    if v.ndim != 1 or v.shape[0] != n:
        raise ValueError(f"expected a vector of length {n}, got shape {v.shape}")
    _require_finite(v)
    if not np.any(v != 0):
        raise ValueError("vector must be nonzero")
    return v


def check_vectors(V, n):
    """Rows of a 2-D array (or a single 1-D vector) as an ``n x k`` column block."""
    V = np.asarray(V, dtype=float)
    if V.ndim == 1:
        V = V[None, :]
    if V.ndim != 2 or V.shape[1] != n:
        raise ValueError(f"expected vectors of length {n} as rows, got shape {V.shape}")
    _require_finite(V)
    if np.any(~np.any(V != 0, axis=1)):
        raise ValueError("every vector must be nonzero")
    return V.T


def check_count(value, name, minimum=1):
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise TypeError(f"{name} must be an integer, got {type(value).__name__}")
    if value < minimum:
        raise ValueError(f"{name} must be >= {minimum}, got {value}")
    return int(value)


def check_finite_scalar(value, name):
    if isinstance(value, bool) or not isinstance(value, numbers.Real) or not np.isfinite(value):
        raise ValueError(f"{name} must be a finite real number, got {value!r}")
    return float(value)
