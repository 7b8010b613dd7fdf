import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import charpoly_eig_oracle
from ohmfit.exceptions import SingularMatrixError
from ohmfit.linalg import (
    DEGENERATE_GAP_REL,
    eig2_closed,
    eig_sym,
    eigengap_relative,
    invert_spd,
)


def test_diagonal_is_its_own_decomposition():
    pair = eig_sym(np.diag([2.0, 1.0]))
    assert pair.values.tolist() == [2.0, 1.0]
    assert np.array_equal(pair.vectors, np.eye(2))
    assert pair.n_clamped == 0


def test_rank_one_ones_matrix():
    pair = eig_sym(np.array([[1.0, 1.0], [1.0, 1.0]]))
    s = 1.0 / np.sqrt(2.0)
    assert pair.values == pytest.approx([2.0, 0.0], abs=1e-15)
    assert pair.vectors[:, 0] == pytest.approx([s, s], abs=1e-15)
    assert pair.vectors[:, 1] == pytest.approx([s, -s], abs=1e-15)


def test_sign_rule_breaks_magnitude_ties_at_first_index():
    # both entries of each eigenvector have magnitude 1/sqrt(2); the first
    # index must be the one forced positive
    pair = eig_sym(np.array([[0.0, 1.0], [1.0, 0.0]]))
    assert pair.values == pytest.approx([1.0, -1.0], abs=1e-15)
    assert pair.vectors[0, 0] > 0
    assert pair.vectors[0, 1] > 0


def test_one_by_one():
    pair = eig_sym(np.array([[3.0]]))
    assert pair.values.tolist() == [3.0]
    assert pair.vectors.tolist() == [[1.0]]


def test_closed_form_two_by_two():
    lam1, lam2, v1, v2 = eig2_closed(1.0, 1.0, 1.0)
    assert lam1 == pytest.approx(2.0, abs=1e-15)
    assert lam2 == pytest.approx(0.0, abs=1e-15)
    s = 1.0 / np.sqrt(2.0)
    assert v1 == pytest.approx((s, s), abs=1e-15)
    # v2 is produced perpendicular to v1, sign not normalized here
    assert abs(v1[0] * v2[0] + v1[1] * v2[1]) < 1e-15


@pytest.mark.parametrize("n", [2, 3, 4, 6])
def test_matches_library_eigensolver(n):
    rng = np.random.default_rng(100 + n)
    for _ in range(50):
        a = rng.standard_normal((n, n)) * rng.choice([1e-3, 1.0, 1e4])
        a = 0.5 * (a + a.T)
        pair = eig_sym(a)
        ref = np.sort(np.linalg.eigvalsh(a))[::-1]
        scale = max(1.0, float(np.linalg.norm(a)))
        assert np.max(np.abs(pair.values - ref)) < 1e-12 * scale
        # orthonormal and reconstructing
        v = pair.vectors
        assert np.max(np.abs(v.T @ v - np.eye(n))) < 1e-10
        assert np.max(np.abs(v @ np.diag(pair.values) @ v.T - a)) < 1e-10 * scale
        # largest-magnitude entry of every column is positive
        for k in range(n):
            assert v[np.argmax(np.abs(v[:, k])), k] > 0


@settings(max_examples=60, deadline=None)
@given(
    st.lists(
        st.floats(min_value=-1e3, max_value=1e3, allow_nan=False),
        min_size=6,
        max_size=6,
    )
)
def test_three_by_three_reconstruction_property(entries):
    a = np.zeros((3, 3))
    a[np.triu_indices(3)] = entries
    a = a + np.triu(a, 1).T
    pair = eig_sym(a)
    scale = max(1.0, float(np.linalg.norm(a)))
    assert np.all(np.diff(pair.values) <= 1e-12 * scale)
    assert np.max(np.abs(pair.vectors @ np.diag(pair.values) @ pair.vectors.T - a)) < 1e-9 * scale


def test_against_charpoly_oracle():
    rng = np.random.default_rng(7)
    for n in (2, 3):
        for _ in range(100):
            a = rng.uniform(-5, 5, (n, n))
            a = 0.5 * (a + a.T)
            values, _ = charpoly_eig_oracle(a)
            pair = eig_sym(a)
            scale = max(1.0, float(np.linalg.norm(a)))
            assert np.max(np.abs(pair.values - values)) < 1e-10 * scale


def test_rejects_nonsymmetric_and_nonfinite():
    with pytest.raises(ValueError):
        eig_sym(np.array([[0.0, 1.0], [0.0, 0.0]]))
    with pytest.raises(ValueError):
        eig_sym(np.array([[np.nan, 0.0], [0.0, 1.0]]))


def test_psd_clamp_zeroes_roundoff_negatives():
    # lam2 = 1 - (1 + 1e-13) = -1e-13, inside the clamp window
    a = np.array([[1.0, 1.0 + 1e-13], [1.0 + 1e-13, 1.0]])
    pair = eig_sym(a, psd=True)
    assert pair.values[-1] == 0.0
    assert pair.n_clamped == 1


def test_psd_rejects_genuinely_negative():
    with pytest.raises(ValueError):
        eig_sym(np.diag([1.0, -1.0]), psd=True)


def test_invert_spd_round_trip():
    rng = np.random.default_rng(3)
    a = rng.standard_normal((4, 4))
    a = a @ a.T + 4.0 * np.eye(4)
    assert np.max(np.abs(a @ invert_spd(a) - np.eye(4))) < 1e-8


def test_invert_spd_names_the_offending_eigenvalue():
    with pytest.raises(SingularMatrixError, match="eigenvalue"):
        invert_spd(np.diag([1.0, 1e-20]))


def test_eigengap_relative():
    assert eigengap_relative(np.array([2.0, 1.0])) == pytest.approx(0.5)
    assert eigengap_relative(np.array([1.0, 1.0])) == 0.0
    assert DEGENERATE_GAP_REL == 1e-10
