"""Normalized error metrics used across all experiment tables.

Both metrics are taken about the TRUE resistance, not the ensemble mean:
for biased estimators a mean-centered spread would hide exactly the effect
under study.
"""

from __future__ import annotations

import math

import numpy as np

from .validation import check_positive_scalar


def _as_estimates(estimates) -> np.ndarray:
    arr = np.asarray(estimates, dtype=np.float64)
    if arr.ndim != 1 or len(arr) == 0:
        raise ValueError("estimates must be a nonempty 1-D sequence")
    return arr


def normalized_bias(estimates, r_true: float) -> float:
    """((mean of estimates) - R) / R in percent."""
    arr = _as_estimates(estimates)
    r_true = check_positive_scalar(r_true, "r_true")
    return (float(np.mean(arr)) - r_true) / r_true * 100.0


def normalized_sde(estimates, r_true: float) -> float:
    """Root-mean-square deviation from the true R, as a percent of R."""
    arr = _as_estimates(estimates)
    r_true = check_positive_scalar(r_true, "r_true")
    return math.sqrt(float(np.mean((arr - r_true) ** 2))) / r_true * 100.0


def normalized_sqrt_bound(bound_var: float, r_true: float) -> float:
    """sqrt of a variance bound as a percent of R, for plotting next to SDE."""
    r_true = check_positive_scalar(r_true, "r_true")
    if bound_var < 0.0:
        raise ValueError("variance bound must be >= 0")
    return math.sqrt(bound_var) / r_true * 100.0
