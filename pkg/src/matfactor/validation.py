"""Input validation helpers shared across estimators.

These are deliberately strict: estimators assume float64 contiguous arrays
and fail early on NaN/inf rather than propagating garbage.
"""

from __future__ import annotations

import numpy as np

from .errors import ContractError, DomainError

__all__ = [
    "as_float_array",
    "check_finite",
    "check_orthonormal",
    "fix_column_signs",
    "projector_distance",
]


def as_float_array(x, name: str = "array", ndim: int | None = None) -> np.ndarray:
    """Coerce to a float64 ndarray, optionally enforcing dimensionality."""
    arr = np.asarray(x, dtype=np.float64)
    if ndim is not None and arr.ndim != ndim:
        raise DomainError(f"{name} must be {ndim}-dimensional, got shape {arr.shape}")
    return arr


def check_finite(arr: np.ndarray, name: str = "array") -> np.ndarray:
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} contains non-finite values")
    return arr


def check_orthonormal(mat: np.ndarray, name: str = "matrix", tol: float = 1e-8) -> np.ndarray:
    """Raise ContractError unless mat has orthonormal columns within tol."""
    mat = as_float_array(mat, name, ndim=2)
    gram = mat.T @ mat
    err = np.max(np.abs(gram - np.eye(mat.shape[1])))
    if err > tol:
        raise ContractError(f"{name} is not orthonormal (max Gram deviation {err:.3e})")
    return mat


def fix_column_signs(mat: np.ndarray) -> np.ndarray:
    """Flip column signs so each column's largest-magnitude entry is positive.

    Ties resolve to the first index via argmax, which keeps the convention
    deterministic for bit-identical reruns.
    """
    mat = np.array(mat, dtype=np.float64, copy=True)
    for j in range(mat.shape[1]):
        pivot = np.argmax(np.abs(mat[:, j]))
        if mat[pivot, j] < 0:
            mat[:, j] = -mat[:, j]
    return mat


def projector_distance(u: np.ndarray, v: np.ndarray) -> float:
    """Spectral norm of uu' - vv' for matrices with orthonormal columns.

    Callers are responsible for orthonormality; see synth.subspace_distance
    for the checked public wrapper.
    """
    diff = u @ u.T - v @ v.T
    return float(np.linalg.norm(diff, 2))
