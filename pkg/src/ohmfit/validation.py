"""Small validation helpers shared by the estimator entry points.

These are deliberately lean: the recursive estimators call them once per
block on a hot path, so they avoid the copying and dtype gymnastics of the
heavyweight library validators.
"""

from __future__ import annotations

import numpy as np

from .exceptions import SingularMatrixError


def as_float_vector(x, name: str) -> np.ndarray:
    """Coerce to a 1-D float64 array and require every entry finite."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be 1-D, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite")
    return arr


def as_float_matrix(x, name: str) -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite")
    return arr


def check_symmetric(a: np.ndarray, name: str = "matrix") -> np.ndarray:
    """Require a square symmetric matrix.

    Tolerance scales with the largest absolute entry: |A - A^T| entries must
    stay under 1e-12 * max(1, max|A|).
    """
    a = as_float_matrix(a, name)
    if a.shape[0] != a.shape[1]:
        raise ValueError(f"{name} must be square, got shape {a.shape}")
    tol = 1e-12 * max(1.0, float(np.max(np.abs(a))) if a.size else 1.0)
    if a.size and float(np.max(np.abs(a - a.T))) > tol:
        raise ValueError(f"{name} is not symmetric within tolerance {tol:g}")
    # exact symmetry downstream; averaging is a no-op when already symmetric
    return 0.5 * (a + a.T)


def check_positive_scalar(x, name: str) -> float:
    x = float(x)
    if not np.isfinite(x) or x <= 0.0:
        raise ValueError(f"{name} must be a finite positive number, got {x!r}")
    return x


def check_nonnegative_scalar(x, name: str) -> float:
    x = float(x)
    if not np.isfinite(x) or x < 0.0:
        raise ValueError(f"{name} must be finite and >= 0, got {x!r}")
    return x


def check_min_eigenvalue(eigenvalues: np.ndarray, frob: float, name: str = "matrix") -> None:
    """Reject inversion when the smallest eigenvalue is below the SPD floor.

    The floor is 1e-12 * ||A||_F; the error message names the offending
    eigenvalue so callers can see how singular the matrix actually was.
    """
    floor = 1e-12 * max(frob, np.finfo(np.float64).tiny)
    lam_min = float(eigenvalues[-1])
    if lam_min <= floor:
        raise SingularMatrixError(
            f"{name} is singular or indefinite: smallest eigenvalue "
            f"{lam_min:.6g} is below the floor {floor:.6g}"
        )
