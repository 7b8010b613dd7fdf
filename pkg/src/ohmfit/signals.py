"""Excitation profiles, measurement synthesis, and SNR conversions.

A profile is the true current waveform on a uniform time grid. Synthetic
measurements add white Gaussian noise to both the current and the voltage
channel; estimators only ever see the noisy channels, while the true current
is carried along for bounds and diagnostics.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import ProfileFormatError, UndefinedSnrError
from .validation import (
    as_float_vector,
    check_nonnegative_scalar,
    check_positive_scalar,
)

# time stamps are accepted as uniform when successive spacings agree to this
SPACING_TOL_S = 1e-9

KNOWN_RNGS = ("numpy-pcg64",)

PROFILE_HEADER = ("time_s", "current_A")


@dataclass(frozen=True)
class CurrentProfile:
    """True current samples on a uniform time grid. Zero current is allowed."""

    times: np.ndarray
    current: np.ndarray

    def __post_init__(self):
        times = as_float_vector(self.times, "times")
        current = as_float_vector(self.current, "current")
        if len(times) != len(current):
            raise ValueError("times and current must have equal length")
        if len(times) == 0:
            raise ValueError("profile must contain at least one sample")
        if len(times) >= 2:
            diffs = np.diff(times)
            dt = float(diffs[0])
            if dt <= 0.0:
                raise ValueError("time stamps must be strictly increasing")
            if float(np.max(np.abs(diffs - dt))) > SPACING_TOL_S:
                raise ValueError(
                    f"time stamps are not uniformly spaced within {SPACING_TOL_S} s"
                )
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "current", current)

    @property
    def n_samples(self) -> int:
        return len(self.times)

    @property
    def dt(self) -> float:
        if len(self.times) < 2:
            raise ValueError("spacing undefined for a single-sample profile")
        return float(self.times[1] - self.times[0])


def _n_steps(duration_s: float, dt: float, what: str) -> int:
    n = round(duration_s / dt)
    if n < 1 or abs(n * dt - duration_s) > SPACING_TOL_S:
        raise ValueError(f"{what} ({duration_s} s) must be a positive multiple of dt ({dt} s)")
    return int(n)


def gen_constant_profile(i_c: float, duration_s: float, dt: float = 1.0) -> CurrentProfile:
    """Constant excitation of i_c amperes for duration_s seconds."""
    dt = check_positive_scalar(dt, "dt")
    n = _n_steps(check_positive_scalar(duration_s, "duration_s"), dt, "duration_s")
    times = np.arange(n) * dt
    return CurrentProfile(times=times, current=np.full(n, float(i_c)))


def gen_pulse_profile(segments, dt: float = 1.0) -> CurrentProfile:
    """Piecewise-constant profile from (duration_s, amps) segments.

    Every segment duration must be a positive multiple of dt.
    """
    dt = check_positive_scalar(dt, "dt")
    if not segments:
        raise ValueError("segments must be nonempty")
    chunks = []
    for k, (duration_s, amps) in enumerate(segments):
        n = _n_steps(float(duration_s), dt, f"segment {k} duration")
        chunks.append(np.full(n, float(amps)))
    current = np.concatenate(chunks)
    times = np.arange(len(current)) * dt
    return CurrentProfile(times=times, current=current)


def load_profile_csv(path) -> CurrentProfile:
    """Read a profile from CSV with header ``time_s,current_A``.

    Errors carry the 1-based line number of the offending row.
    """
    times, current = [], []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ProfileFormatError("file is empty", line_number=1)
        if [h.strip() for h in header] != list(PROFILE_HEADER):
            raise ProfileFormatError(
                f"expected header {','.join(PROFILE_HEADER)!r}, got {','.join(header)!r}",
                line_number=1,
            )
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 2:
                raise ProfileFormatError(
                    f"expected 2 fields, got {len(row)}", line_number=lineno
                )
            try:
                t = float(row[0])
                i = float(row[1])
            except ValueError:
                raise ProfileFormatError(
                    f"could not parse row {row!r} as numbers", line_number=lineno
                ) from None
            if not (math.isfinite(t) and math.isfinite(i)):
                raise ProfileFormatError("non-finite value", line_number=lineno)
            times.append(t)
            current.append(i)
    if not times:
        raise ProfileFormatError("no data rows", line_number=2)
    try:
        return CurrentProfile(times=np.array(times), current=np.array(current))
    except ValueError as exc:
        raise ProfileFormatError(str(exc)) from exc


def write_profile_csv(profile: CurrentProfile, path) -> None:
    from .io import format_number

    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(PROFILE_HEADER) + "\n")
        for t, i in zip(profile.times, profile.current):
            fh.write(f"{format_number(t)},{format_number(i)}\n")


@dataclass(frozen=True)
class NoiseSpec:
    """White Gaussian sensor noise levels and the RNG that realizes them."""

    sigma_v: float
    sigma_i: float = 0.0
    seed: int = 0
    rng_name: str = "numpy-pcg64"

    def __post_init__(self):
        check_nonnegative_scalar(self.sigma_v, "sigma_v")
        check_nonnegative_scalar(self.sigma_i, "sigma_i")
        if self.rng_name not in KNOWN_RNGS:
            raise ValueError(f"unknown rng_name {self.rng_name!r}; known: {KNOWN_RNGS}")
        if int(self.seed) != self.seed or self.seed < 0:
            raise ValueError("seed must be a nonnegative integer")


@dataclass(frozen=True)
class MeasurementBlock:
    """One block of m samples as the estimators see it.

    true_current is carried for bounds and diagnostics only; estimators must
    not read it.
    """

    index: int  # 1-based block counter
    z_i: np.ndarray  # measured current
    z_v: np.ndarray  # measured voltage
    true_current: np.ndarray


@dataclass(frozen=True)
class MeasurementSet:
    """Synthesized measurement blocks plus the metadata to reproduce them."""

    rng_name: str
    seed: int
    sigma_v: float
    sigma_i: float
    r_true: float
    m: int
    blocks: list = field(repr=False)


def synthesize_measurements(
    profile: CurrentProfile, noise: NoiseSpec, m: int, r_true: float
) -> MeasurementSet:
    """Simulate noisy current/voltage readings over the profile in blocks of m.

    Draw order is fixed: one standard-normal vector for the current channel
    over the whole profile, then one for the voltage channel. Trailing samples
    that do not fill a block are dropped.
    """
    r_true = check_positive_scalar(r_true, "r_true")
    m = int(m)
    if m < 1:
        raise ValueError("m must be >= 1")
    n_blocks = profile.n_samples // m
    if n_blocks < 1:
        raise ValueError(f"profile has {profile.n_samples} samples, fewer than m={m}")
    rng = np.random.default_rng(noise.seed)
    e_i = rng.standard_normal(profile.n_samples)
    e_v = rng.standard_normal(profile.n_samples)
    z_i = profile.current + noise.sigma_i * e_i
    z_v = r_true * profile.current + noise.sigma_v * e_v
    blocks = []
    for k in range(n_blocks):
        sl = slice(k * m, (k + 1) * m)
        blocks.append(
            MeasurementBlock(
                index=k + 1,
                z_i=z_i[sl],
                z_v=z_v[sl],
                true_current=profile.current[sl],
            )
        )
    return MeasurementSet(
        rng_name=noise.rng_name,
        seed=noise.seed,
        sigma_v=noise.sigma_v,
        sigma_i=noise.sigma_i,
        r_true=r_true,
        m=m,
        blocks=blocks,
    )


def _amplitude(i_c: float, r_true: float, convention: str) -> float:
    if convention == "eq14":
        amp = i_c * r_true
    elif convention == "table2":
        amp = i_c
    else:
        raise ValueError(f"unknown snr convention {convention!r}")
    if amp <= 0.0:
        raise UndefinedSnrError(
            f"SNR undefined for nonpositive signal amplitude {amp:g}"
        )
    return amp


def snr_static(i_c: float, r_true: float, sigma_v: float, convention: str = "eq14") -> float:
    """SNR in dB of a constant excitation against the voltage noise floor.

    convention "eq14" measures the voltage amplitude i_c * R; "table2"
    measures the current amplitude i_c in the same decibel form.
    """
    amp = _amplitude(i_c, r_true, convention)
    sigma_v = check_nonnegative_scalar(sigma_v, "sigma_v")
    if sigma_v == 0.0:
        return math.inf
    return 20.0 * math.log10(amp / sigma_v)


def sigma_for_snr(i_c: float, r_true: float, snr_db: float, convention: str = "eq14") -> float:
    """Voltage noise level that realizes snr_db under the chosen convention."""
    amp = _amplitude(i_c, r_true, convention)
    return amp / 10.0 ** (float(snr_db) / 20.0)


def snr_dynamic(i_k: float, r_true: float, sigma_v: float, sigma_i: float) -> float:
    """Instantaneous SNR in dB at current i_k with noise in both channels.

    Returns -inf at zero current and +inf when both noise levels are zero.
    """
    r_true = check_positive_scalar(r_true, "r_true")
    sigma_v = check_nonnegative_scalar(sigma_v, "sigma_v")
    sigma_i = check_nonnegative_scalar(sigma_i, "sigma_i")
    if i_k == 0.0:
        return -math.inf
    denom = math.sqrt(sigma_v * sigma_v + sigma_i * sigma_i * r_true * r_true)
    if denom == 0.0:
        return math.inf
    return 20.0 * math.log10(abs(i_k) * r_true / denom)
