"""Streaming estimators that consume measurement blocks one at a time.

All of them hold mutable state across blocks; each step mutates the state
and returns an Estimate for that block, so a trace has no holes. Inputs to
the step functions are trusted arrays (validated once at synthesis or by the
caller); the constructors validate their parameters.

The scalar-resistance case (n = 1) is the hot path and runs in plain floats.
"""

from __future__ import annotations

import math
from bisect import insort
from dataclasses import dataclass, field, replace

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .batch import COV_CLAMP_REL, Estimate, Method
from .exceptions import (
    ColdStartError,
    NumericalFailureError,
    VerticalSolutionError,
)
from .linalg import DEGENERATE_GAP_REL, eig2_closed, eig_sym, eigengap_relative, invert_spd
from .validation import check_nonnegative_scalar, check_positive_scalar

_TINY = np.finfo(np.float64).tiny

# Zero measurement noise degenerates the weighted recursions to an exact
# fit. Flooring the weight denominator keeps the information finite while
# making the prior contribution negligible (~1e-300 relative).
_S2_FLOOR = 1e-300


def _weight_denominator(sigma_v: float) -> float:
    s2 = sigma_v * sigma_v
    return s2 if s2 > 0.0 else _S2_FLOOR


# ---------------------------------------------------------------------------
# recursive least squares

@dataclass
class RlsState:
    n: int
    b: float | np.ndarray
    info: float | np.ndarray
    kappa: int = 0


def rls_init(n: int = 1, p0: float = 1e6) -> RlsState:
    """Start from estimate 0 with prior covariance p0 * I (diffuse for large p0)."""
    p0 = check_positive_scalar(p0, "p0")
    n = int(n)
    if n < 1:
        raise ValueError("n must be >= 1")
    if n == 1:
        return RlsState(n=1, b=0.0, info=1.0 / p0)
    return RlsState(n=n, b=np.zeros(n), info=np.eye(n) / p0)


def rls_step(state: RlsState, a, z, sigma_v: float = 1.0) -> Estimate:
    """Fold one block into the information recursion.

    info' = info + A^T A / sigma_v^2
    b'    = b + (A^T (z - A b) / sigma_v^2) / info'      (scalar form)

    which reproduces the batch weighted-LS posterior exactly at every step.
    """
    state.kappa += 1
    s2 = _weight_denominator(sigma_v)
    if state.n == 1:
        zi = np.asarray(a, dtype=np.float64)
        zv = np.asarray(z, dtype=np.float64)
        g = float(zi @ zi) / s2
        c = float(zi @ zv) / s2
        info_new = state.info + g
        b_new = state.b + (c - g * state.b) / info_new
        state.info = info_new
        state.b = b_new
        return Estimate(
            value=b_new, covariance=1.0 / info_new, method=Method.RLS,
            batch_index=state.kappa,
        )
    a = np.asarray(a, dtype=np.float64)
    z = np.asarray(z, dtype=np.float64)
    info_new = state.info + (a.T @ a) / s2
    p_new = invert_spd(info_new)
    b_new = state.b + p_new @ (a.T @ (z - a @ state.b)) / s2
    state.info = info_new
    state.b = b_new
    return Estimate(
        value=b_new, covariance=p_new, method=Method.RLS, batch_index=state.kappa
    )


# ---------------------------------------------------------------------------
# recursive total least squares

@dataclass
class RtlsState:
    """Exponentially discounted augmented moment matrix plus gating state.

    For n == 1 the 2x2 augmented matrix is held as three floats (s_ii, s_iv,
    s_vv); otherwise info_aug is an (n+1)x(n+1) array. The gate keeps a
    sorted list of accepted block information values for its running median.
    """

    n: int
    lam: float
    gate_rel: float | None = None
    gate_abs: float | None = None
    s_ii: float = 0.0
    s_iv: float = 0.0
    s_vv: float = 0.0
    info_aug: np.ndarray | None = None
    kappa: int = 0
    last: Estimate | None = None
    accepted_info: list = field(default_factory=list, repr=False)

    @property
    def gating_enabled(self) -> bool:
        return self.gate_rel is not None or self.gate_abs is not None

    def augmented_matrix(self) -> np.ndarray:
        if self.n == 1:
            return np.array([[self.s_ii, self.s_iv], [self.s_iv, self.s_vv]])
        return self.info_aug.copy()


def rtls_init(
    n: int = 1,
    lam: float = 0.99,
    gate_rel: float | None = None,
    gate_abs: float | None = None,
    prior_estimate: float | None = None,
    prior_weight: float = 0.0,
) -> RtlsState:
    """Cold start by default.

    A nonzero prior_weight seeds the augmented matrix with w * p p^T where
    p is the unit direction of (1, prior_estimate). That anisotropic seed
    decays like lam^kappa and gives the estimator a visible, forgetting-
    factor-controlled convergence transient; an isotropic seed would shift
    both eigenvalues equally and leave every estimate unchanged, which is
    why plain epsilon * I initialization is pointless here.
    """
    n = int(n)
    if n < 1:
        raise ValueError("n must be >= 1")
    lam = float(lam)
    if not 0.0 < lam <= 1.0:
        raise ValueError("lambda must be in (0, 1]")
    if gate_rel is not None:
        check_nonnegative_scalar(gate_rel, "gate_rel")
    if gate_abs is not None:
        check_nonnegative_scalar(gate_abs, "gate_abs")
    prior_weight = check_nonnegative_scalar(prior_weight, "prior_weight")
    if prior_weight > 0.0 and prior_estimate is None:
        raise ValueError("prior_weight needs a prior_estimate")
    state = RtlsState(n=n, lam=lam, gate_rel=gate_rel, gate_abs=gate_abs)
    if n > 1:
        state.info_aug = np.zeros((n + 1, n + 1))
    if prior_weight > 0.0:
        b0 = float(prior_estimate)
        if n == 1:
            norm2 = 1.0 + b0 * b0
            state.s_ii = prior_weight * 1.0 / norm2
            state.s_iv = prior_weight * b0 / norm2
            state.s_vv = prior_weight * b0 * b0 / norm2
        else:
            p = np.zeros(n + 1)
            p[0] = 1.0
            p[n] = b0
            p /= math.sqrt(1.0 + b0 * b0)
            state.info_aug += prior_weight * np.outer(p, p)
    return state


def info_content(z_i, sigma_v: float) -> float:
    """Information a block carries about the parameter, from measured current."""
    zi = np.asarray(z_i, dtype=np.float64)
    return float(zi @ zi) / _weight_denominator(sigma_v)


def _running_median(sorted_values: list) -> float:
    k = len(sorted_values)
    mid = k // 2
    if k % 2:
        return sorted_values[mid]
    return 0.5 * (sorted_values[mid - 1] + sorted_values[mid])


def _hold(state: RtlsState, **flags) -> Estimate:
    if state.last is None:
        raise ColdStartError(
            "block refused before any estimate exists; nothing to hold"
        )
    return replace(state.last, batch_index=state.kappa, **flags)


def rtls_step(
    state: RtlsState, z_i, z_v, sigma_v: float = 1.0, sigma_i: float = 0.0
) -> Estimate:
    """Discount, accumulate, gate, and re-solve the orthogonal fit.

    The augmented moment matrix is discounted and updated on every block,
    gated or not; gating only withholds the estimate refresh. A gated or
    degenerate block re-issues the previous estimate with the matching flag,
    or raises ColdStartError when there is none yet.

    Gating (when enabled): a block is refused if its information content is
    at or below the absolute threshold (gate_abs if given, else the noise
    floor 3 m sigma_i^2 / sigma_v^2), or at or below gate_rel times the
    running median information of previously accepted blocks.
    """
    zi = np.asarray(z_i, dtype=np.float64)
    zv = np.asarray(z_v, dtype=np.float64)
    m = len(zi)
    if m < 2:
        raise ValueError("a block needs at least 2 samples")
    state.kappa += 1
    scale = 1.0 / (m - 1.0)
    lam = state.lam

    if state.n == 1:
        g_ii = float(zi @ zi)
        g_iv = float(zi @ zv)
        g_vv = float(zv @ zv)
        state.s_ii = lam * state.s_ii + g_ii * scale
        state.s_iv = lam * state.s_iv + g_iv * scale
        state.s_vv = lam * state.s_vv + g_vv * scale
    else:
        h = np.column_stack([np.asarray(z_i, dtype=np.float64), zv])
        state.info_aug = lam * state.info_aug + (h.T @ h) * scale
        g_ii = None  # computed below only if gating is on

    if state.gating_enabled:
        if g_ii is None:
            g_ii = float(np.sum(np.square(np.asarray(z_i, dtype=np.float64))))
        s2 = _weight_denominator(sigma_v)
        info = g_ii / s2
        floor = state.gate_abs
        if floor is None:
            floor = 3.0 * m * sigma_i * sigma_i / s2
        gated = info <= floor
        if not gated and state.gate_rel is not None and state.accepted_info:
            gated = info <= state.gate_rel * _running_median(state.accepted_info)
        if gated:
            return _hold(state, gated=True)
    else:
        info = None

    if state.n == 1:
        lam1, lam2, _, vmin = eig2_closed(state.s_ii, state.s_iv, state.s_vv)
        gap = (lam1 - lam2) / max(lam1, _TINY)
        if gap <= DEGENERATE_GAP_REL:
            return _hold(state, degenerate=True)
        v_last = vmin[1]
        if abs(v_last) <= 1e-12:
            raise VerticalSolutionError(
                "smallest eigenvector has zero measurement component"
            )
        b = -vmin[0] / v_last
        lam_min = max(lam2, 0.0)
        top = state.s_ii
        c = top - lam_min
        cov_floor = COV_CLAMP_REL * max(abs(top), _TINY)
        clamped = c < cov_floor
        cov = 1.0 / max(c, cov_floor)
        est = Estimate(
            value=b, covariance=cov, method=Method.RTLS,
            batch_index=state.kappa, clamped=clamped, lambda_min=lam_min,
        )
    else:
        pair = eig_sym(state.info_aug, psd=True)
        if eigengap_relative(pair.values) <= DEGENERATE_GAP_REL:
            return _hold(state, degenerate=True)
        v = pair.vectors[:, -1]
        v_last = float(v[-1])
        if abs(v_last) <= 1e-12:
            raise VerticalSolutionError(
                "smallest eigenvector has zero measurement component"
            )
        b = -v[:-1] / v_last
        lam_min = float(pair.values[-1])
        top = state.info_aug[: state.n, : state.n]
        cmat = top - lam_min * np.eye(state.n)
        cpair = eig_sym(0.5 * (cmat + cmat.T))
        cov_floor = COV_CLAMP_REL * max(float(np.linalg.norm(top, "fro")), _TINY)
        clamped = bool(np.any(cpair.values < cov_floor))
        vals = np.maximum(cpair.values, cov_floor)
        cov = (cpair.vectors / vals) @ cpair.vectors.T
        est = Estimate(
            value=b, covariance=cov, method=Method.RTLS,
            batch_index=state.kappa, clamped=clamped, lambda_min=lam_min,
        )

    if state.gating_enabled:
        insort(state.accepted_info, info)
    state.last = est
    return est


# ---------------------------------------------------------------------------
# Kalman-smoothed total least squares

@dataclass
class TkfState:
    b: float
    p: float
    q: float
    inner: RtlsState
    kappa: int = 0


def tkf_init(
    q: float = 1e-8,
    p0: float = 1e6,
    lam: float = 0.99,
    gate_rel: float | None = None,
    gate_abs: float | None = None,
    prior_estimate: float | None = None,
    prior_weight: float = 0.0,
) -> TkfState:
    """Random-walk Kalman filter over the recursive orthogonal-fit output.

    The inner estimator supplies the per-block measurement (value and
    covariance); q is the random-walk variance added per block. Scalar only.
    """
    check_nonnegative_scalar(q, "q")
    check_positive_scalar(p0, "p0")
    inner = rtls_init(
        n=1, lam=lam, gate_rel=gate_rel, gate_abs=gate_abs,
        prior_estimate=prior_estimate, prior_weight=prior_weight,
    )
    return TkfState(b=0.0, p=float(p0), q=float(q), inner=inner)


def tkf_step(
    state: TkfState, z_i, z_v, sigma_v: float = 1.0, sigma_i: float = 0.0
) -> Estimate:
    """Predict, take the inner estimate as a measurement, and fuse.

    A gated or degenerate inner block yields prediction only (the stale held
    value is not fused twice). A cold inner estimator propagates its
    ColdStartError after time has been advanced.
    """
    state.kappa += 1
    b_pred = state.b
    p_pred = state.p + state.q
    try:
        inner_est = rtls_step(state.inner, z_i, z_v, sigma_v, sigma_i)
    except ColdStartError:
        state.b = b_pred
        state.p = p_pred
        raise
    if inner_est.gated or inner_est.degenerate:
        state.b = b_pred
        state.p = p_pred
        return Estimate(
            value=b_pred, covariance=p_pred, method=Method.TKF,
            batch_index=state.kappa, gated=inner_est.gated,
            degenerate=inner_est.degenerate,
        )
    s = inner_est.covariance + p_pred
    if not s > 0.0:
        raise NumericalFailureError(
            "innovation covariance is not positive", batch_index=state.kappa
        )
    w = p_pred / s
    state.b = b_pred + w * (inner_est.value - b_pred)
    state.p = (1.0 - w) * p_pred
    return Estimate(
        value=state.b, covariance=state.p, method=Method.TKF,
        batch_index=state.kappa, clamped=inner_est.clamped,
    )


# ---------------------------------------------------------------------------
# posterior bound recursion

@dataclass
class PcrlbState:
    n: int
    p: float | np.ndarray
    kappa: int = 0


def pcrlb_init(n: int = 1, p0: float = math.inf) -> PcrlbState:
    """Diffuse by default: the first informative block sets the bound exactly."""
    n = int(n)
    if n < 1:
        raise ValueError("n must be >= 1")
    if n == 1:
        return PcrlbState(n=1, p=float(p0))
    if math.isinf(p0):
        return PcrlbState(n=n, p=math.inf)
    return PcrlbState(n=n, p=np.eye(n) * float(p0))


def pcrlb_step(state: PcrlbState, true_current, sigma_v: float):
    """Fold one block of TRUE current into the bound; returns the new bound.

    Scalar case: p' = p sigma^2 / (sigma^2 + p g) with g = sum(i^2), the
    exact reduction of the block update. Zero-excitation blocks return p
    bitwise unchanged, so the bound can never move without information.
    """
    state.kappa += 1
    if state.n == 1:
        i = np.asarray(true_current, dtype=np.float64)
        g = float(i @ i)
        p = state.p
        if g == 0.0 or p == 0.0:
            return p
        s2 = sigma_v * sigma_v
        p_new = s2 / g if math.isinf(p) else p * s2 / (s2 + p * g)
        state.p = p_new
        return p_new
    a = np.asarray(true_current, dtype=np.float64)
    if a.ndim == 1:
        a = a[:, None]
    if not a.any():
        return state.p
    s2 = sigma_v * sigma_v
    if isinstance(state.p, float) and math.isinf(state.p):
        state.p = invert_spd((a.T @ a) / s2)
        return state.p
    p = state.p
    mmat = s2 * np.eye(a.shape[0]) + a @ p @ a.T
    k = np.linalg.solve(mmat, a @ p)
    p_new = p - p @ a.T @ k
    state.p = 0.5 * (p_new + p_new.T)
    return state.p


def pcrlb_update_covariance_form(p: float, true_current, sigma_v: float) -> float:
    """One literal covariance-form bound update (scalar parameter).

    P' = P - P A^T (sigma^2 I_m + A P A^T)^-1 A P with the full m x m
    inversion spelled out. Exists so tests can check it agrees with the
    information-form update and with the reduced production path.
    """
    a = np.asarray(true_current, dtype=np.float64)[:, None]
    m = a.shape[0]
    pm = np.array([[float(p)]])
    mid = sigma_v * sigma_v * np.eye(m) + a @ pm @ a.T
    k = np.linalg.solve(mid, a @ pm)
    p_new = pm - pm @ a.T @ k
    return float(p_new[0, 0])


def pcrlb_update_information_form(p: float, true_current, sigma_v: float) -> float:
    """One information-form bound update: invert, add block information, invert."""
    i = np.asarray(true_current, dtype=np.float64)
    g = float(i @ i)
    s2 = sigma_v * sigma_v
    j = (1.0 / p) + g / s2
    return 1.0 / j


# ---------------------------------------------------------------------------
# streaming estimator wrappers

class _StreamingMixin:
    """Shared partial_fit plumbing for the block-streaming estimators."""

    def partial_fit(self, X, y):
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 2:
            if X.shape[1] != 1:
                raise ValueError("streaming estimators handle a single feature")
            X = X[:, 0]
        y = np.asarray(y, dtype=np.float64)
        if not hasattr(self, "_state"):
            self._state = self._make_state()
        est = self._step(self._state, X, y)
        self.estimate_ = est
        self.coef_ = np.array([float(est.value)])
        self.covariance_ = est.covariance
        self.n_blocks_seen_ = self._state.kappa
        return self

    fit = partial_fit

    def predict(self, X):
        if not hasattr(self, "coef_"):
            raise NotFittedError("call partial_fit before predict")
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = X[:, None]
        return X @ self.coef_


class RecursiveLeastSquares(_StreamingMixin, BaseEstimator):
    """Block-streaming least squares for a single resistance parameter."""

    def __init__(self, p0: float = 1e6, noise_sigma: float = 1.0):
        self.p0 = p0
        self.noise_sigma = noise_sigma

    def _make_state(self):
        return rls_init(n=1, p0=self.p0)

    def _step(self, state, zi, zv):
        return rls_step(state, zi, zv, self.noise_sigma)


class RecursiveTotalLeastSquares(_StreamingMixin, BaseEstimator):
    """Block-streaming orthogonal fit with forgetting and excitation gating."""

    def __init__(
        self,
        lam: float = 0.99,
        gate_rel: float | None = None,
        gate_abs: float | None = None,
        prior_estimate: float | None = None,
        prior_weight: float = 0.0,
        noise_sigma: float = 1.0,
        noise_sigma_i: float = 0.0,
    ):
        self.lam = lam
        self.gate_rel = gate_rel
        self.gate_abs = gate_abs
        self.prior_estimate = prior_estimate
        self.prior_weight = prior_weight
        self.noise_sigma = noise_sigma
        self.noise_sigma_i = noise_sigma_i

    def _make_state(self):
        return rtls_init(
            n=1, lam=self.lam, gate_rel=self.gate_rel, gate_abs=self.gate_abs,
            prior_estimate=self.prior_estimate, prior_weight=self.prior_weight,
        )

    def _step(self, state, zi, zv):
        return rtls_step(state, zi, zv, self.noise_sigma, self.noise_sigma_i)


class TrackingKalmanFilter(_StreamingMixin, BaseEstimator):
    """Kalman smoothing over the streaming orthogonal fit."""

    def __init__(
        self,
        q: float = 1e-8,
        p0: float = 1e6,
        lam: float = 0.99,
        gate_rel: float | None = None,
        gate_abs: float | None = None,
        prior_estimate: float | None = None,
        prior_weight: float = 0.0,
        noise_sigma: float = 1.0,
        noise_sigma_i: float = 0.0,
    ):
        self.q = q
        self.p0 = p0
        self.lam = lam
        self.gate_rel = gate_rel
        self.gate_abs = gate_abs
        self.prior_estimate = prior_estimate
        self.prior_weight = prior_weight
        self.noise_sigma = noise_sigma
        self.noise_sigma_i = noise_sigma_i

    def _make_state(self):
        return tkf_init(
            q=self.q, p0=self.p0, lam=self.lam, gate_rel=self.gate_rel,
            gate_abs=self.gate_abs, prior_estimate=self.prior_estimate,
            prior_weight=self.prior_weight,
        )

    def _step(self, state, zi, zv):
        return tkf_step(state, zi, zv, self.noise_sigma, self.noise_sigma_i)
