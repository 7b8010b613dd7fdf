"""Estimators and experiment tooling for ohmic resistance identification.

The measurement model is v(k) = R i(k) with additive white Gaussian noise on
both the current and the voltage channel. The package provides batch fits
(least squares, total least squares), streaming fits (recursive LS, a
forgetting-factor recursive orthogonal fit with excitation gating, and a
Kalman smoothing layer on top), the matching posterior lower bound, and a
Monte-Carlo harness plus CLI for reproducible experiment tables.
"""

__version__ = "0.1.0"

from .batch import (
    Estimate,
    LeastSquaresRegressor,
    Method,
    NoiseCovariance,
    TotalLeastSquaresRegressor,
    crlb_batch,
    ls_estimate,
    tls_estimate,
)
from .exceptions import (
    ColdStartError,
    ConfigError,
    DegenerateEigengapError,
    NumericalFailureError,
    OhmfitError,
    ProfileFormatError,
    SingularMatrixError,
    SingularModelError,
    UndefinedSnrError,
    VerticalSolutionError,
)
from .linalg import EigenPair, eig_sym, invert_spd
from .metrics import normalized_bias, normalized_sde, normalized_sqrt_bound
from .recursive import (
    PcrlbState,
    RecursiveLeastSquares,
    RecursiveTotalLeastSquares,
    RlsState,
    RtlsState,
    TkfState,
    TrackingKalmanFilter,
    info_content,
    pcrlb_init,
    pcrlb_step,
    rls_init,
    rls_step,
    rtls_init,
    rtls_step,
    tkf_init,
    tkf_step,
)
from .signals import (
    CurrentProfile,
    MeasurementBlock,
    MeasurementSet,
    NoiseSpec,
    gen_constant_profile,
    gen_pulse_profile,
    load_profile_csv,
    sigma_for_snr,
    snr_dynamic,
    snr_static,
    synthesize_measurements,
    write_profile_csv,
)

__all__ = [
    "__version__",
    # batch
    "Estimate", "Method", "NoiseCovariance", "ls_estimate", "tls_estimate",
    "crlb_batch", "LeastSquaresRegressor", "TotalLeastSquaresRegressor",
    # linalg
    "EigenPair", "eig_sym", "invert_spd",
    # metrics
    "normalized_bias", "normalized_sde", "normalized_sqrt_bound",
    # recursive
    "RlsState", "RtlsState", "TkfState", "PcrlbState",
    "rls_init", "rls_step", "rtls_init", "rtls_step", "tkf_init", "tkf_step",
    "pcrlb_init", "pcrlb_step", "info_content",
    "RecursiveLeastSquares", "RecursiveTotalLeastSquares", "TrackingKalmanFilter",
    # signals
    "CurrentProfile", "NoiseSpec", "MeasurementBlock", "MeasurementSet",
    "gen_constant_profile", "gen_pulse_profile", "load_profile_csv",
    "write_profile_csv", "synthesize_measurements",
    "snr_static", "sigma_for_snr", "snr_dynamic",
    # exceptions
    "OhmfitError", "ProfileFormatError", "UndefinedSnrError", "ConfigError",
    "SingularModelError", "SingularMatrixError", "DegenerateEigengapError",
    "VerticalSolutionError", "ColdStartError", "NumericalFailureError",
]
