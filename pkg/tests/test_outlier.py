import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from muxq import ConfigError, DenseMatrix, OutlierSet, detect_outlier_channels

from conftest import philox


def mat(values):
    return DenseMatrix(np.array(values, dtype=np.float32))


def test_threshold_is_strict_and_default_is_six():
    m = mat([[5.9, 6.1, 3.0], [1.0, -2.0, 0.5]])
    assert detect_outlier_channels(m).indices == (1,)
    assert detect_outlier_channels(m).theta == 6.0


def test_no_channel_above_threshold():
    m = mat([[5.0, -6.0], [6.0, 0.0]])  # exactly 6 is not an outlier
    assert detect_outlier_channels(m, 6.0).indices == ()


def test_sign_insensitive_boundary():
    data = np.ones((3, 6), dtype=np.float32)
    data[2, 4] = -6.0001
    assert 4 in detect_outlier_channels(mat(data), 6.0).indices


def test_nonpositive_theta_rejected():
    with pytest.raises(ConfigError):
        detect_outlier_channels(mat([[1.0]]), 0.0)
    with pytest.raises(ConfigError):
        detect_outlier_channels(mat([[1.0]]), -3.0)


def test_outlier_set_invariants():
    with pytest.raises(ConfigError):
        OutlierSet((3, 3), 6.0)
    with pytest.raises(ConfigError):
        OutlierSet((5, 2), 6.0)
    with pytest.raises(ConfigError):
        OutlierSet((-1,), 6.0)
    assert len(OutlierSet((0, 2, 9), 1.0)) == 3


@given(st.integers(0, 2**32), st.floats(0.5, 4.0), st.floats(0.5, 4.0))
@settings(max_examples=40, deadline=None)
def test_monotone_in_theta(seed, t1, t2):
    m = DenseMatrix(philox(seed).standard_normal((20, 10), dtype=np.float32) * 3)
    lo, hi = sorted((t1, t2))
    assert set(detect_outlier_channels(m, hi).indices) <= set(
        detect_outlier_channels(m, lo).indices
    )


@given(st.integers(0, 2**32))
@settings(max_examples=25, deadline=None)
def test_permutation_equivariance(seed):
    g = philox(seed)
    m = DenseMatrix(g.standard_normal((15, 8), dtype=np.float32) * 4)
    perm = g.permutation(8)
    base = detect_outlier_channels(m, 3.0).indices
    permuted = detect_outlier_channels(DenseMatrix(m.data[:, perm]), 3.0).indices
    # channel c of the permuted matrix is channel perm[c] of the original
    assert sorted(perm[list(permuted)]) == sorted(base)


def test_theta_above_global_max_gives_empty_set():
    m = DenseMatrix(philox(5).standard_normal((10, 10), dtype=np.float32) * 100)
    theta = float(np.abs(m.data).max()) + 1.0
    assert detect_outlier_channels(m, theta).indices == ()
