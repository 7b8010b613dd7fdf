"""Symmetric eigendecomposition and SPD inversion.

The estimators only ever need eigenpairs of small symmetric matrices (2x2 in
the scalar-resistance case, a few more columns for multi-parameter models),
so this module carries a closed form for n = 2 and a cyclic Jacobi sweep for
n >= 3 rather than pulling in a general-purpose decomposition. Conventions:

- eigenvalues are returned in descending order;
- eigenvectors are columns of an orthonormal matrix;
- each eigenvector is signed so its largest-magnitude entry is positive
  (ties broken toward the lowest index), which makes results reproducible
  across code paths.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import NumericalFailureError, SingularMatrixError
from .validation import check_min_eigenvalue, check_symmetric

_TINY = np.finfo(np.float64).tiny

# relative eigengap below which the smallest eigenvector is not identifiable
DEGENERATE_GAP_REL = 1e-10


@dataclass(frozen=True)
class EigenPair:
    """Eigenvalues (descending) and matching orthonormal eigenvector columns.

    n_clamped counts eigenvalues of a declared-PSD matrix that came out
    slightly negative from roundoff and were clamped to zero.
    """

    values: np.ndarray
    vectors: np.ndarray
    n_clamped: int = 0


def _fix_signs(vectors: np.ndarray) -> np.ndarray:
    for j in range(vectors.shape[1]):
        col = vectors[:, j]
        k = int(np.argmax(np.abs(col)))  # first index wins ties
        if col[k] < 0.0:
            vectors[:, j] = -col
    return vectors


def eig2_closed(a11: float, a12: float, a22: float):
    """Closed-form eigenpairs of [[a11, a12], [a12, a22]].

    Returns (lam1, lam2, v1, v2) with lam1 >= lam2 and v1, v2 unit tuples.
    Written in plain floats: the recursive estimators call this per block.
    """
    if a12 == 0.0:
        if a11 >= a22:
            return a11, a22, (1.0, 0.0), (0.0, 1.0)
        return a22, a11, (0.0, 1.0), (1.0, 0.0)
    tr = a11 + a22
    h = math.hypot(a11 - a22, 2.0 * a12)
    lam1 = 0.5 * (tr + h)
    lam2 = 0.5 * (tr - h)
    # two algebraically equivalent eigenvector candidates; the larger one
    # avoids catastrophic cancellation when lam1 is close to a11 or a22
    ux, uy = a12, lam1 - a11
    wx, wy = lam1 - a22, a12
    if ux * ux + uy * uy >= wx * wx + wy * wy:
        vx, vy = ux, uy
    else:
        vx, vy = wx, wy
    norm = math.hypot(vx, vy)
    v1 = (vx / norm, vy / norm)
    v2 = (-v1[1], v1[0])
    return lam1, lam2, v1, v2


def _jacobi(a: np.ndarray):
    """Cyclic Jacobi diagonalization for n >= 3. Mutates a copy."""
    a = a.copy()
    n = a.shape[0]
    v = np.eye(n)
    frob = float(np.linalg.norm(a, "fro"))
    thresh = 1e-14 * max(frob, _TINY)
    for _ in range(100):
        rotated = False
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= thresh:
                    continue
                rotated = True
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                app, aqq = a[p, p], a[q, q]
                a[p, p] = app - t * apq
                a[q, q] = aqq + t * apq
                a[p, q] = a[q, p] = 0.0
                for k in range(n):
                    if k == p or k == q:
                        continue
                    akp, akq = a[k, p], a[k, q]
                    a[k, p] = a[p, k] = c * akp - s * akq
                    a[k, q] = a[q, k] = s * akp + c * akq
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
        if not rotated:
            break
    else:
        raise NumericalFailureError("Jacobi sweep did not converge within 100 sweeps")
    return np.diag(a).copy(), v


def eig_sym(a, psd: bool = False) -> EigenPair:
    """Eigendecomposition of a symmetric matrix.

    With psd=True the matrix is asserted positive semidefinite up to
    roundoff: eigenvalues in [-1e-10 * ||A||_F, 0) are clamped to zero and
    counted, anything more negative raises ValueError.
    """
    a = check_symmetric(a, "matrix")
    n = a.shape[0]
    if n == 0:
        raise ValueError("matrix must be nonempty")
    if n == 1:
        values = np.array([a[0, 0]])
        vectors = np.array([[1.0]])
    elif n == 2:
        lam1, lam2, v1, v2 = eig2_closed(a[0, 0], a[0, 1], a[1, 1])
        values = np.array([lam1, lam2])
        vectors = np.array([[v1[0], v2[0]], [v1[1], v2[1]]])
    else:
        values, vectors = _jacobi(a)
        order = np.argsort(values)[::-1]  # descending, stable enough for distinct values
        values = values[order]
        vectors = vectors[:, order]
    n_clamped = 0
    if psd:
        frob = float(np.linalg.norm(a, "fro"))
        tol = 1e-10 * max(frob, _TINY)
        for j in range(n):
            if values[j] < 0.0:
                if values[j] < -tol:
                    raise ValueError(
                        f"matrix declared PSD has eigenvalue {values[j]:.6g} "
                        f"below -{tol:.6g}"
                    )
                values[j] = 0.0
                n_clamped += 1
    return EigenPair(values=values, vectors=_fix_signs(vectors), n_clamped=n_clamped)


def invert_spd(a) -> np.ndarray:
    """Inverse of a symmetric positive definite matrix via its eigenpairs.

    Raises SingularMatrixError (naming the offending eigenvalue) when the
    smallest eigenvalue is at or below 1e-12 * ||A||_F.
    """
    a = check_symmetric(a, "matrix")
    pair = eig_sym(a)
    frob = float(np.linalg.norm(a, "fro"))
    check_min_eigenvalue(pair.values, frob, "matrix")
    v = pair.vectors
    return (v / pair.values) @ v.T


def eigengap_relative(values: np.ndarray) -> float:
    """Gap between the two smallest eigenvalues, relative to the largest."""
    if len(values) < 2:
        raise ValueError("need at least two eigenvalues")
    scale = max(float(values[0]), _TINY)
    return (float(values[-2]) - float(values[-1])) / scale
