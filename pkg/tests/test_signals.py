import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ohmfit.exceptions import ProfileFormatError, UndefinedSnrError
from ohmfit.signals import (
    CurrentProfile,
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


# ---------------------------------------------------------------------------
# profiles

def test_constant_profile():
    p = gen_constant_profile(2.0, 6.0, 1.0)
    assert p.n_samples == 6
    assert p.dt == 1.0
    assert p.times[0] == 0.0
    assert np.all(p.current == 2.0)


def test_pulse_profile_segments():
    p = gen_pulse_profile([(2.0, 1.5), (1.0, 0.0)], dt=0.5)
    assert p.n_samples == 6
    assert p.current.tolist() == [1.5, 1.5, 1.5, 1.5, 0.0, 0.0]
    assert p.times.tolist() == [0.0, 0.5, 1.0, 1.5, 2.0, 2.5]


def test_duration_must_be_multiple_of_dt():
    with pytest.raises(ValueError, match="multiple of dt"):
        gen_constant_profile(1.0, 2.5, 1.0)
    with pytest.raises(ValueError, match="multiple of dt"):
        gen_pulse_profile([(1.0, 1.0), (0.7, 0.0)], dt=0.5)


def test_profile_rejects_nonuniform_spacing():
    with pytest.raises(ValueError, match="uniform"):
        CurrentProfile(times=np.array([0.0, 1.0, 2.5]), current=np.zeros(3))
    with pytest.raises(ValueError, match="increasing"):
        CurrentProfile(times=np.array([1.0, 0.0]), current=np.zeros(2))


def test_zero_current_profile_is_legal():
    p = gen_constant_profile(0.0, 3.0, 1.0)
    assert np.all(p.current == 0.0)


# ---------------------------------------------------------------------------
# profile CSV round trip and parse errors

def test_profile_csv_round_trip_is_exact(tmp_path):
    p = gen_pulse_profile([(3.0, 1.2345678901234567), (2.0, 0.0)], dt=1.0)
    path = tmp_path / "profile.csv"
    write_profile_csv(p, path)
    q = load_profile_csv(path)
    assert np.array_equal(p.times, q.times)
    assert np.array_equal(p.current, q.current)


@settings(max_examples=40, deadline=None)
@given(
    st.lists(
        st.floats(min_value=-1e6, max_value=1e6, allow_nan=False),
        min_size=2,
        max_size=20,
    )
)
def test_profile_csv_round_trip_property(tmp_path_factory, amps):
    p = CurrentProfile(times=np.arange(len(amps)) * 0.25, current=np.array(amps))
    path = tmp_path_factory.mktemp("prof") / "p.csv"
    write_profile_csv(p, path)
    q = load_profile_csv(path)
    assert np.array_equal(p.current, q.current)


def _load_text(tmp_path, text):
    path = tmp_path / "bad.csv"
    path.write_text(text, encoding="utf-8")
    return load_profile_csv(path)


def test_profile_csv_bad_header(tmp_path):
    with pytest.raises(ProfileFormatError, match="line 1") as exc:
        _load_text(tmp_path, "t,i\n0,1\n")
    assert exc.value.line_number == 1


def test_profile_csv_bad_number_names_line(tmp_path):
    with pytest.raises(ProfileFormatError, match="line 3") as exc:
        _load_text(tmp_path, "time_s,current_A\n0,1\n1,oops\n")
    assert exc.value.line_number == 3


def test_profile_csv_wrong_field_count(tmp_path):
    with pytest.raises(ProfileFormatError, match="line 2"):
        _load_text(tmp_path, "time_s,current_A\n0,1,2\n")


def test_profile_csv_nonfinite(tmp_path):
    with pytest.raises(ProfileFormatError, match="line 2"):
        _load_text(tmp_path, "time_s,current_A\nnan,1\n")


def test_profile_csv_empty_and_headerless(tmp_path):
    with pytest.raises(ProfileFormatError, match="line 1"):
        _load_text(tmp_path, "")
    with pytest.raises(ProfileFormatError, match="no data"):
        _load_text(tmp_path, "time_s,current_A\n")


def test_profile_csv_nonuniform_spacing(tmp_path):
    with pytest.raises(ProfileFormatError, match="uniform"):
        _load_text(tmp_path, "time_s,current_A\n0,1\n1,1\n2.5,1\n")


# ---------------------------------------------------------------------------
# noise spec and synthesis

def test_noise_spec_validation():
    with pytest.raises(ValueError):
        NoiseSpec(sigma_v=-0.1)
    with pytest.raises(ValueError, match="rng_name"):
        NoiseSpec(sigma_v=0.1, rng_name="mt19937")
    with pytest.raises(ValueError, match="seed"):
        NoiseSpec(sigma_v=0.1, seed=-1)


def test_synthesis_is_reproducible_and_blocked():
    p = gen_constant_profile(2.0, 7.0, 1.0)
    spec = NoiseSpec(sigma_v=0.1, sigma_i=0.05, seed=42)
    a = synthesize_measurements(p, spec, m=3, r_true=0.25)
    b = synthesize_measurements(p, spec, m=3, r_true=0.25)
    assert len(a.blocks) == 2  # 7 samples, blocks of 3, trailing sample dropped
    assert a.blocks[0].index == 1 and a.blocks[1].index == 2
    for x, y in zip(a.blocks, b.blocks):
        assert np.array_equal(x.z_i, y.z_i)
        assert np.array_equal(x.z_v, y.z_v)
        assert np.array_equal(x.true_current, y.true_current)


def test_synthesis_draw_order_current_channel_first():
    # the current channel consumes one normal per profile sample before the
    # voltage channel draws anything
    p = gen_constant_profile(2.0, 6.0, 1.0)
    ms = synthesize_measurements(p, NoiseSpec(sigma_v=0.1, sigma_i=0.05, seed=123), m=3, r_true=0.25)
    e = np.random.default_rng(123).standard_normal(12)
    assert np.array_equal(ms.blocks[0].z_i, 2.0 + 0.05 * e[:3])
    assert np.array_equal(ms.blocks[0].z_v, 0.5 + 0.1 * e[6:9])


def test_synthesis_regression_values():
    p = gen_constant_profile(2.0, 6.0, 1.0)
    ms = synthesize_measurements(p, NoiseSpec(sigma_v=0.1, sigma_i=0.05, seed=123), m=3, r_true=0.25)
    assert ms.blocks[0].z_i[0] == 1.9505439324826075
    assert ms.blocks[0].z_v[0] == 0.43635363536290195


def test_synthesis_rejects_short_profile():
    p = gen_constant_profile(1.0, 2.0, 1.0)
    with pytest.raises(ValueError, match="fewer than m"):
        synthesize_measurements(p, NoiseSpec(sigma_v=0.1), m=5, r_true=0.25)


def test_synthesis_noise_scales():
    p = gen_constant_profile(2.0, 20000.0, 1.0)
    ms = synthesize_measurements(p, NoiseSpec(sigma_v=0.3, sigma_i=0.1, seed=5), m=20000, r_true=0.25)
    blk = ms.blocks[0]
    assert np.std(blk.z_i - 2.0) == pytest.approx(0.1, rel=0.05)
    assert np.std(blk.z_v - 0.5) == pytest.approx(0.3, rel=0.05)


# ---------------------------------------------------------------------------
# SNR conversions

def test_snr_static_conventions():
    # voltage-amplitude convention: i_c * R = 0.5, so sigma_v = 0.5 is 0 dB
    assert snr_static(2.0, 0.25, 0.5, "eq14") == 0.0
    # current-amplitude convention measures i_c itself
    assert snr_static(2.0, 0.25, 2.0, "table2") == 0.0
    assert snr_static(2.0, 0.25, 0.0) == math.inf


def test_sigma_for_snr_ladder():
    got = [sigma_for_snr(2.0, 0.25, s, "table2") for s in (0, 10, 20, 30, 40, 50)]
    want = [2.0, 0.6324555320336759, 0.2, 0.06324555320336758, 0.02,
            0.006324555320336758]
    assert got == pytest.approx(want, rel=1e-15)
    assert sigma_for_snr(2.0, 0.25, 0.0, "eq14") == 0.5
    assert sigma_for_snr(2.0, 0.25, 40.0, "eq14") == pytest.approx(0.005)


@settings(max_examples=60, deadline=None)
@given(
    st.floats(min_value=-60.0, max_value=120.0, allow_nan=False),
    st.sampled_from(["eq14", "table2"]),
)
def test_snr_sigma_inverse_property(snr_db, convention):
    sigma = sigma_for_snr(2.0, 0.25, snr_db, convention)
    assert snr_static(2.0, 0.25, sigma, convention) == pytest.approx(snr_db, abs=1e-9)


def test_snr_undefined_for_nonpositive_amplitude():
    with pytest.raises(UndefinedSnrError):
        snr_static(0.0, 0.25, 0.1)
    with pytest.raises(UndefinedSnrError):
        sigma_for_snr(-1.0, 0.25, 10.0)


def test_snr_dynamic_value():
    assert snr_dynamic(1.5, 0.25, 0.2, 0.2) == pytest.approx(5.196736054051261, rel=1e-12)


def test_snr_dynamic_edges():
    assert snr_dynamic(0.0, 0.25, 0.2, 0.2) == -math.inf
    assert snr_dynamic(1.0, 0.25, 0.0, 0.0) == math.inf
    # sign of the current does not matter
    assert snr_dynamic(-1.5, 0.25, 0.2, 0.2) == snr_dynamic(1.5, 0.25, 0.2, 0.2)
