"""Monte-Carlo experiment harness.

Experiments are described by a flat, JSON-compatible config (unknown keys are
rejected so recipe typos fail loudly). Each run draws its own RNG stream from
the base seed and a global run counter, and results are reduced in run order,
so a table is reproducible regardless of how the runs would be scheduled.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field

import numpy as np

from .batch import crlb_batch, ls_estimate, tls_estimate
from .exceptions import ColdStartError, ConfigError
from .metrics import normalized_bias, normalized_sde, normalized_sqrt_bound
from .recursive import (
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
    NoiseSpec,
    gen_constant_profile,
    gen_pulse_profile,
    load_profile_csv,
    sigma_for_snr,
    snr_dynamic,
    synthesize_measurements,
)

SWEEP_ESTIMATORS = ("LS", "TLS")
RECURSIVE_ESTIMATORS = ("RLS", "RTLS", "TKF")

_MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    """Standard 64-bit splitmix hash; stable across platforms and versions."""
    z = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def derive_seed(base_seed: int, counter: int) -> int:
    """Per-run seed: base XOR a hash of the run counter, never sequential."""
    return (int(base_seed) ^ splitmix64(int(counter))) & _MASK64


@dataclass
class ExperimentConfig:
    """Validated experiment description. Built via from_dict."""

    experiment: str
    r_true: float
    m: int
    n_runs: int
    seed: int
    estimators: list
    i_c: float | None = None
    dt: float = 1.0
    n_blocks: int | None = None
    snr_grid_db: list = field(default_factory=list)
    m_grid: list = field(default_factory=list)
    snr_convention: str = "eq14"
    sigma_coupling: str = "v_over_r"
    sigma_v: float | None = None
    sigma_i: float | None = None
    profile: str = "constant"
    profile_path: str | None = None
    pulse_high_s: float | None = None
    pulse_high_a: float | None = None
    pulse_low_s: float | None = None
    pulse_low_a: float | None = None
    pulse_cycles: int = 1
    lam: float = 0.99
    gamma: float = 1e-8
    rls_p0: float = 1e6
    tkf_p0: float = 1e6
    rtls_prior_estimate: float | None = None
    rtls_prior_weight: float = 0.0
    gate_rel: float | None = None
    gate_abs: float | None = None

    # JSON key -> dataclass field for names that cannot be identifiers
    _ALIASES = {"lambda": "lam"}

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
        fields = {f for f in cls.__dataclass_fields__}
        data = {}
        for key, value in raw.items():
            name = cls._ALIASES.get(key, key)
            if name not in fields or name.startswith("_"):
                raise ConfigError(f"unknown config key {key!r}")
            data[name] = value
        missing = [k for k in ("experiment", "r_true", "m", "n_runs", "seed", "estimators") if k not in data]
        if missing:
            raise ConfigError(f"missing required config keys: {', '.join(missing)}")
        cfg = cls(**data)
        cfg._validate()
        return cfg

    def to_dict(self) -> dict:
        out = {}
        reverse = {v: k for k, v in self._ALIASES.items()}
        for name in self.__dataclass_fields__:
            if name.startswith("_"):
                continue
            out[reverse.get(name, name)] = getattr(self, name)
        return out

    def _validate(self):
        if self.experiment not in ("sweep_snr", "recursive", "dynamic"):
            raise ConfigError(f"unknown experiment {self.experiment!r}")
        try:
            self.r_true = float(self.r_true)
            self.m = int(self.m)
            self.n_runs = int(self.n_runs)
            self.seed = int(self.seed)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"malformed numeric field: {exc}") from exc
        if self.r_true <= 0:
            raise ConfigError("r_true must be > 0")
        if self.m < 2:
            raise ConfigError("m must be >= 2")
        if self.n_runs < 1:
            raise ConfigError("n_runs must be >= 1")
        if self.seed < 0:
            raise ConfigError("seed must be >= 0")
        if not isinstance(self.estimators, (list, tuple)) or not self.estimators:
            raise ConfigError("estimators must be a nonempty list")
        self.estimators = [str(e) for e in self.estimators]
        allowed = SWEEP_ESTIMATORS if self.experiment == "sweep_snr" else RECURSIVE_ESTIMATORS
        for e in self.estimators:
            if e not in allowed:
                raise ConfigError(
                    f"estimator {e!r} not valid for {self.experiment} "
                    f"(allowed: {', '.join(allowed)})"
                )
        if len(set(self.estimators)) != len(self.estimators):
            raise ConfigError("estimators must be unique")
        self.dt = float(self.dt)
        if self.dt <= 0:
            raise ConfigError("dt must be > 0")
        if not 0.0 < float(self.lam) <= 1.0:
            raise ConfigError("lambda must be in (0, 1]")
        self.lam = float(self.lam)
        self.gamma = float(self.gamma)
        if self.gamma < 0:
            raise ConfigError("gamma must be >= 0")
        self.rls_p0 = float(self.rls_p0)
        self.tkf_p0 = float(self.tkf_p0)
        if self.rls_p0 <= 0 or self.tkf_p0 <= 0:
            raise ConfigError("prior variances must be > 0")
        if self.gate_rel is not None:
            self.gate_rel = float(self.gate_rel)
            if self.gate_rel < 0:
                raise ConfigError("gate_rel must be >= 0")
        if self.gate_abs is not None:
            self.gate_abs = float(self.gate_abs)
            if self.gate_abs < 0:
                raise ConfigError("gate_abs must be >= 0")
        self.rtls_prior_weight = float(self.rtls_prior_weight)
        if self.rtls_prior_estimate is not None:
            self.rtls_prior_estimate = float(self.rtls_prior_estimate)
        if self.snr_convention not in ("eq14", "table2"):
            raise ConfigError(f"unknown snr_convention {self.snr_convention!r}")
        if self.sigma_coupling not in ("equal", "v_over_r", "none"):
            raise ConfigError(f"unknown sigma_coupling {self.sigma_coupling!r}")

        if self.experiment == "sweep_snr":
            if not self.snr_grid_db:
                raise ConfigError("sweep_snr needs a nonempty snr_grid_db")
            self.snr_grid_db = [float(s) for s in self.snr_grid_db]
            if self.i_c is None:
                raise ConfigError("sweep_snr needs i_c")
            self.i_c = float(self.i_c)
            if self.i_c <= 0:
                raise ConfigError("i_c must be > 0")
            if self.sigma_v is not None or self.sigma_i is not None:
                raise ConfigError("sweep_snr derives sigma_v from the grid; do not set it")
            self.m_grid = [int(v) for v in self.m_grid]
            if any(v < 2 for v in self.m_grid):
                raise ConfigError("m_grid entries must be >= 2")
        else:
            if self.sigma_v is None or self.sigma_i is None:
                raise ConfigError(f"{self.experiment} needs sigma_v and sigma_i")
            self.sigma_v = float(self.sigma_v)
            self.sigma_i = float(self.sigma_i)
            if self.sigma_v < 0 or self.sigma_i < 0:
                raise ConfigError("noise levels must be >= 0")
            if self.m_grid:
                raise ConfigError("m_grid applies to sweep_snr only")

        if self.experiment == "recursive":
            if self.n_blocks is None:
                raise ConfigError("recursive needs n_blocks")
            self.n_blocks = int(self.n_blocks)
            if self.n_blocks < 1:
                raise ConfigError("n_blocks must be >= 1")
            if self.i_c is None:
                raise ConfigError("recursive needs i_c")
            self.i_c = float(self.i_c)
            if self.i_c <= 0:
                raise ConfigError("i_c must be > 0")
            if self.profile != "constant":
                raise ConfigError("recursive uses the constant profile")

        if self.experiment == "dynamic":
            if self.n_blocks is not None:
                raise ConfigError("dynamic derives n_blocks from the profile")
            if self.profile == "pulse":
                for key in ("pulse_high_s", "pulse_high_a", "pulse_low_s", "pulse_low_a"):
                    if getattr(self, key) is None:
                        raise ConfigError(f"pulse profile needs {key}")
                if int(self.pulse_cycles) < 1:
                    raise ConfigError("pulse_cycles must be >= 1")
                self.pulse_cycles = int(self.pulse_cycles)
            elif self.profile == "file":
                if not self.profile_path:
                    raise ConfigError("file profile needs profile_path")
            else:
                raise ConfigError("dynamic needs profile 'pulse' or 'file'")

        if self.rtls_prior_weight:
            if self.rtls_prior_weight < 0:
                raise ConfigError("rtls_prior_weight must be >= 0")
            if self.rtls_prior_estimate is None:
                raise ConfigError("rtls_prior_weight needs rtls_prior_estimate")


def _progress(quiet: bool, msg: str):
    if not quiet:
        print(msg, file=sys.stderr, flush=True)


def _sweep_sigmas(cfg: ExperimentConfig, snr_db: float):
    sigma_v = sigma_for_snr(cfg.i_c, cfg.r_true, snr_db, cfg.snr_convention)
    if cfg.sigma_coupling == "equal":
        sigma_i = sigma_v
    elif cfg.sigma_coupling == "v_over_r":
        sigma_i = sigma_v / cfg.r_true
    else:
        sigma_i = 0.0
    return sigma_v, sigma_i


@dataclass
class Table:
    """An ordered set of named columns, ready for CSV serialization."""

    names: list
    columns: dict

    def rows(self):
        cols = [self.columns[n] for n in self.names]
        for k in range(len(cols[0])):
            yield [c[k] for c in cols]


def run_snr_sweep(cfg: ExperimentConfig, quiet: bool = True) -> Table:
    """Batch estimators over an SNR grid (optionally crossed with m_grid)."""
    if cfg.experiment != "sweep_snr":
        raise ConfigError("config is not a sweep_snr experiment")
    m_values = cfg.m_grid or [cfg.m]
    out = {n: [] for n in ("snr_db", "estimator", "norm_bias_pct", "norm_sde_pct",
                           "norm_sqrt_crlb_pct", "n_runs")}
    counter = 0
    for snr_db in cfg.snr_grid_db:
        for m in m_values:
            sigma_v, sigma_i = _sweep_sigmas(cfg, snr_db)
            profile = gen_constant_profile(cfg.i_c, m * cfg.dt, cfg.dt)
            values = {e: np.empty(cfg.n_runs) for e in cfg.estimators}
            for j in range(cfg.n_runs):
                noise = NoiseSpec(
                    sigma_v=sigma_v, sigma_i=sigma_i,
                    seed=derive_seed(cfg.seed, counter),
                )
                counter += 1
                block = synthesize_measurements(profile, noise, m, cfg.r_true).blocks[0]
                for e in cfg.estimators:
                    if e == "LS":
                        values[e][j] = ls_estimate(block.z_i, block.z_v).value
                    else:
                        values[e][j] = tls_estimate(block.z_i, block.z_v).value
            crlb = crlb_batch(sigma_v, profile.current)
            bound_pct = normalized_sqrt_bound(crlb, cfg.r_true)
            for e in cfg.estimators:
                out["snr_db"].append(snr_db)
                out["estimator"].append(e)
                out["norm_bias_pct"].append(normalized_bias(values[e], cfg.r_true))
                out["norm_sde_pct"].append(normalized_sde(values[e], cfg.r_true))
                out["norm_sqrt_crlb_pct"].append(bound_pct)
                out["n_runs"].append(cfg.n_runs)
            _progress(quiet, f"[sweep] snr={snr_db:g} dB m={m} done")
    return Table(
        names=["snr_db", "estimator", "norm_bias_pct", "norm_sde_pct",
               "norm_sqrt_crlb_pct", "n_runs"],
        columns=out,
    )


def _build_profile(cfg: ExperimentConfig) -> CurrentProfile:
    if cfg.experiment == "recursive":
        return gen_constant_profile(cfg.i_c, cfg.m * cfg.n_blocks * cfg.dt, cfg.dt)
    if cfg.profile == "pulse":
        segments = [
            (cfg.pulse_high_s, cfg.pulse_high_a),
            (cfg.pulse_low_s, cfg.pulse_low_a),
        ] * cfg.pulse_cycles
        return gen_pulse_profile(segments, cfg.dt)
    return load_profile_csv(cfg.profile_path)


def _make_states(cfg: ExperimentConfig):
    states = {}
    for e in cfg.estimators:
        if e == "RLS":
            states[e] = rls_init(n=1, p0=cfg.rls_p0)
        elif e == "RTLS":
            states[e] = rtls_init(
                n=1, lam=cfg.lam, gate_rel=cfg.gate_rel, gate_abs=cfg.gate_abs,
                prior_estimate=cfg.rtls_prior_estimate,
                prior_weight=cfg.rtls_prior_weight,
            )
        else:
            states[e] = tkf_init(
                q=cfg.gamma, p0=cfg.tkf_p0, lam=cfg.lam,
                gate_rel=cfg.gate_rel, gate_abs=cfg.gate_abs,
                prior_estimate=cfg.rtls_prior_estimate,
                prior_weight=cfg.rtls_prior_weight,
            )
    return states


def _rls_step_adapter(state, zi, zv, sigma_v, sigma_i):
    return rls_step(state, zi, zv, sigma_v)


_STEPPERS = {"RLS": _rls_step_adapter, "RTLS": rtls_step, "TKF": tkf_step}


def _run_traces(cfg: ExperimentConfig, profile: CurrentProfile, quiet: bool):
    """Shared ensemble loop for the recursive and dynamic experiments.

    Aggregates, per estimator and batch: sum of estimates, sum of squared
    deviations from the true R, count of produced estimates, and count of
    gated blocks. Cold-start refusals produce no estimate and are counted
    as gated (the block was refused).
    """
    n_blocks = profile.n_samples // cfg.m
    r = cfg.r_true
    sums = {e: np.zeros(n_blocks) for e in cfg.estimators}
    sq = {e: np.zeros(n_blocks) for e in cfg.estimators}
    counts = {e: np.zeros(n_blocks, dtype=np.int64) for e in cfg.estimators}
    gated = {e: np.zeros(n_blocks, dtype=np.int64) for e in cfg.estimators}
    for j in range(cfg.n_runs):
        noise = NoiseSpec(
            sigma_v=cfg.sigma_v, sigma_i=cfg.sigma_i, seed=derive_seed(cfg.seed, j)
        )
        mset = synthesize_measurements(profile, noise, cfg.m, r)
        states = _make_states(cfg)
        for e in cfg.estimators:
            step = _STEPPERS[e]
            state = states[e]
            s_sum, s_sq, s_n, s_g = sums[e], sq[e], counts[e], gated[e]
            for k, block in enumerate(mset.blocks):
                try:
                    est = step(state, block.z_i, block.z_v, cfg.sigma_v, cfg.sigma_i)
                except ColdStartError:
                    s_g[k] += 1
                    continue
                if est.gated:
                    s_g[k] += 1
                v = est.value
                s_sum[k] += v
                s_sq[k] += (v - r) * (v - r)
                s_n[k] += 1
        if not quiet and (j + 1) % max(1, cfg.n_runs // 10) == 0:
            _progress(quiet, f"[trace] run {j + 1}/{cfg.n_runs}")

    batch_index = np.arange(1, n_blocks + 1)
    time_s = profile.times[np.arange(1, n_blocks + 1) * cfg.m - 1]
    pstate = pcrlb_init(n=1)
    pcrlb_pct = np.empty(n_blocks)
    for k in range(n_blocks):
        sl = slice(k * cfg.m, (k + 1) * cfg.m)
        bound = pcrlb_step(pstate, profile.current[sl], cfg.sigma_v)
        pcrlb_pct[k] = normalized_sqrt_bound(bound, r) if math.isfinite(bound) else math.inf

    names = ["batch_index", "time_s"]
    cols = {"batch_index": batch_index, "time_s": time_s}
    with np.errstate(invalid="ignore", divide="ignore"):
        for e in cfg.estimators:
            n = counts[e]
            mean = np.where(n > 0, sums[e] / np.maximum(n, 1), np.nan)
            sde = np.where(n > 0, np.sqrt(sq[e] / np.maximum(n, 1)) / r * 100.0, np.nan)
            suffix = e.lower()
            names += [f"mean_{suffix}", f"norm_sde_{suffix}"]
            cols[f"mean_{suffix}"] = mean
            cols[f"norm_sde_{suffix}"] = sde
            if cfg.experiment == "dynamic":
                names.append(f"gated_frac_{suffix}")
                cols[f"gated_frac_{suffix}"] = gated[e] / cfg.n_runs
    names.append("norm_sqrt_pcrlb_pct")
    cols["norm_sqrt_pcrlb_pct"] = pcrlb_pct
    return Table(names=names, columns=cols)


def run_recursive_compare(cfg: ExperimentConfig, quiet: bool = True) -> Table:
    """Ensemble traces of the streaming estimators on constant excitation."""
    if cfg.experiment != "recursive":
        raise ConfigError("config is not a recursive experiment")
    return _run_traces(cfg, _build_profile(cfg), quiet)


def run_dynamic_snr(cfg: ExperimentConfig, quiet: bool = True):
    """Streaming estimators over a time-varying profile, with SNR and bound tables.

    Returns (trace, snr, pcrlb) tables. The SNR table is per sample; the
    bound table repeats the trace's bound column for standalone plotting.
    """
    if cfg.experiment != "dynamic":
        raise ConfigError("config is not a dynamic experiment")
    profile = _build_profile(cfg)
    if profile.n_samples // cfg.m < 1:
        raise ConfigError("profile shorter than one block")
    trace = _run_traces(cfg, profile, quiet)
    snr_db = np.array([
        snr_dynamic(float(ik), cfg.r_true, cfg.sigma_v, cfg.sigma_i)
        for ik in profile.current
    ])
    snr = Table(
        names=["time_s", "snr_db"],
        columns={"time_s": profile.times, "snr_db": snr_db},
    )
    pcrlb = Table(
        names=["batch_index", "time_s", "norm_sqrt_pcrlb_pct"],
        columns={
            "batch_index": trace.columns["batch_index"],
            "time_s": trace.columns["time_s"],
            "norm_sqrt_pcrlb_pct": trace.columns["norm_sqrt_pcrlb_pct"],
        },
    )
    return trace, snr, pcrlb
