"""Batch estimators: weighted least squares and total least squares.

Model: z_v = A b + noise, with A built from the measured current. In the
scalar resistance case A is the current column and b the resistance. LS
treats the current as exact; TLS accounts for noise in both channels by
minimizing orthogonal distance, which is the consistent choice when both
sensors carry noise of the same size.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.exceptions import NotFittedError

from .exceptions import (
    DegenerateEigengapError,
    SingularMatrixError,
    SingularModelError,
    VerticalSolutionError,
)
from .linalg import DEGENERATE_GAP_REL, eig_sym, eigengap_relative, invert_spd
from .validation import as_float_matrix, as_float_vector, check_positive_scalar

_TINY = np.finfo(np.float64).tiny

# covariance eigenvalues are floored at this fraction of ||A^T A||_F
COV_CLAMP_REL = 1e-12


class Method(str, Enum):
    LS = "LS"
    TLS = "TLS"
    RLS = "RLS"
    RTLS = "RTLS"
    TKF = "TKF"


@dataclass(frozen=True)
class Estimate:
    """A parameter estimate with covariance and diagnostics.

    value and covariance are floats in the scalar case, arrays otherwise.
    Flags: clamped (covariance eigenvalue floored), gated (block refused for
    lack of excitation, previous estimate re-issued), degenerate (eigengap
    too small to identify a solution, previous estimate re-issued).
    """

    value: float | np.ndarray
    covariance: float | np.ndarray
    method: Method
    batch_index: int | None = None
    clamped: bool = False
    gated: bool = False
    degenerate: bool = False
    lambda_min: float | None = None


class NoiseCovariance:
    """Measurement noise covariance: isotropic sigma^2 I or a full SPD matrix."""

    def __init__(self, sigma: float | None = None, matrix: np.ndarray | None = None):
        if (sigma is None) == (matrix is None):
            raise ValueError("give exactly one of sigma or matrix")
        if sigma is not None:
            self.sigma = check_positive_scalar(sigma, "sigma")
            self.matrix = None
        else:
            self.sigma = None
            self.matrix = as_float_matrix(matrix, "noise covariance")
            if self.matrix.shape[0] != self.matrix.shape[1]:
                raise ValueError("noise covariance must be square")
            # SPD check happens on first solve via the eigen route
            self._inv = invert_spd(self.matrix)

    def solve(self, x: np.ndarray) -> np.ndarray:
        """Sigma^-1 x."""
        if self.sigma is not None:
            return x / (self.sigma * self.sigma)
        return self._inv @ x


def _model_matrix(a) -> np.ndarray:
    arr = np.asarray(a, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[:, None]
    return as_float_matrix(arr, "model matrix")


def _scalarize(est_value: np.ndarray, cov: np.ndarray, n: int):
    if n == 1:
        return float(est_value[0]), float(cov[0, 0])
    return est_value, cov


def ls_estimate(a, z, noise: NoiseCovariance | None = None) -> Estimate:
    """Weighted least squares b = (A^T S^-1 A)^-1 A^T S^-1 z.

    noise=None means unit weights (covariance is then (A^T A)^-1, i.e. in
    units of the noise variance). Raises SingularModelError when the model
    matrix carries no information, e.g. an all-zero current record.
    """
    a = _model_matrix(a)
    z = as_float_vector(z, "z")
    m, n = a.shape
    if len(z) != m:
        raise ValueError("z length must match the model matrix rows")
    if m < n or n < 1:
        raise ValueError(f"need at least as many rows as parameters, got {a.shape}")
    wa = noise.solve(a) if noise is not None else a
    info = a.T @ wa
    if not np.any(info):
        raise SingularModelError("model matrix is all zeros; the parameter is unobservable")
    try:
        cov = invert_spd(info)
    except SingularMatrixError as exc:
        raise SingularModelError(f"model is unidentifiable: {exc}") from exc
    wz = noise.solve(z) if noise is not None else z
    b = cov @ (a.T @ wz)
    value, covariance = _scalarize(b, cov, n)
    return Estimate(value=value, covariance=covariance, method=Method.LS)


def tls_estimate(a, z) -> Estimate:
    """Total least squares via the smallest eigenvector of [A z]^T [A z].

    The estimate is b = -v[:n] / v[n] for the eigenvector v of the smallest
    eigenvalue. Covariance is (A^T A - lambda_min I)^-1 with eigenvalues
    floored at 1e-12 * ||A^T A||_F (the `clamped` flag reports flooring).
    """
    a = _model_matrix(a)
    z = as_float_vector(z, "z")
    m, n = a.shape
    if len(z) != m:
        raise ValueError("z length must match the model matrix rows")
    if m < n + 1:
        raise ValueError(f"total least squares needs m >= n+1 rows, got {a.shape}")
    h = np.column_stack([a, z])
    g = h.T @ h
    pair = eig_sym(g, psd=True)
    gap = eigengap_relative(pair.values)
    if gap <= DEGENERATE_GAP_REL:
        raise DegenerateEigengapError(
            f"two smallest eigenvalues coincide (relative gap {gap:.3e}); "
            "the solution direction is not identifiable"
        )
    v = pair.vectors[:, -1]
    v22 = float(v[-1])
    if abs(v22) <= 1e-12:
        raise VerticalSolutionError(
            "smallest eigenvector has zero measurement component; "
            "the data admit no finite parameter"
        )
    b = -v[:-1] / v22
    lam_min = float(pair.values[-1])
    ata = g[:n, :n]
    c = ata - lam_min * np.eye(n)
    cpair = eig_sym(0.5 * (c + c.T))
    floor = COV_CLAMP_REL * max(float(np.linalg.norm(ata, "fro")), _TINY)
    clamped = bool(np.any(cpair.values < floor))
    vals = np.maximum(cpair.values, floor)
    cov = (cpair.vectors / vals) @ cpair.vectors.T
    value, covariance = _scalarize(b, cov, n)
    return Estimate(
        value=value,
        covariance=covariance,
        method=Method.TLS,
        clamped=clamped,
        lambda_min=lam_min,
    )


def crlb_batch(sigma_v: float, true_current) -> float:
    """Single-parameter lower bound sigma_v^2 / sum(i^2); +inf at zero excitation."""
    i = as_float_vector(true_current, "true_current")
    g = float(np.dot(i, i))
    if g == 0.0:
        return math.inf
    return float(sigma_v) ** 2 / g


def _fit_xy(X, y):
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    y = as_float_vector(y, "y")
    return X, y


class LeastSquaresRegressor(RegressorMixin, BaseEstimator):
    """Least squares resistance fit with the usual fit/predict surface.

    Parameters
    ----------
    noise_sigma : float or None
        Isotropic measurement noise level for weighting and covariance
        scaling; None fits with unit weights.
    """

    def __init__(self, noise_sigma: float | None = None):
        self.noise_sigma = noise_sigma

    def fit(self, X, y):
        X, y = _fit_xy(X, y)
        noise = NoiseCovariance(sigma=self.noise_sigma) if self.noise_sigma else None
        est = ls_estimate(X, y, noise)
        self.estimate_ = est
        self.coef_ = np.atleast_1d(np.asarray(est.value, dtype=np.float64))
        self.covariance_ = est.covariance
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X):
        if not hasattr(self, "coef_"):
            raise NotFittedError("call fit before predict")
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = X[:, None]
        return X @ self.coef_


class TotalLeastSquaresRegressor(RegressorMixin, BaseEstimator):
    """Orthogonal-distance resistance fit; consistent under noise on X and y."""

    def fit(self, X, y):
        X, y = _fit_xy(X, y)
        est = tls_estimate(X, y)
        self.estimate_ = est
        self.coef_ = np.atleast_1d(np.asarray(est.value, dtype=np.float64))
        self.covariance_ = est.covariance
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X):
        if not hasattr(self, "coef_"):
            raise NotFittedError("call fit before predict")
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = X[:, None]
        return X @ self.coef_
