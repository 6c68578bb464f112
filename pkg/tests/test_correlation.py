import numpy as np
import pytest

from mfitt.correlation import acf, ccf, log_lags
from mfitt.errors import DegenerateDataError, InsufficientDataError

from oracles import naive_acf


def test_log_lags():
    g = log_lags(1000, 25)
    assert g[0] == 1 and g[-1] == 1000
    assert np.all(np.diff(g) > 0)
    assert log_lags(1, 25).tolist() == [1]


def test_acf_matches_naive():
    x = np.random.default_rng(0).standard_normal(300)
    res = acf(x, lags=[1, 2, 5, 17])
    for k, c in zip(res.lags, res.c):
        assert c == pytest.approx(naive_acf(list(x), int(k)), rel=1e-12)


def test_acf_alternating_frozen():
    x = np.array([1.0, -1.0] * 4)
    res = acf(x, lags=[1, 2])
    np.testing.assert_allclose(res.c, [-7 / 8, 6 / 8])


def test_time_unit():
    res = acf(np.arange(10.0), lags=[1, 3], time_unit=2.5)
    np.testing.assert_array_equal(res.tau, [2.5, 7.5])


def test_raw_estimator_differs_with_mean():
    x = np.random.default_rng(1).standard_normal(200) + 3
    assert acf(x, lags=[1], estimator="raw").c[0] > acf(x, lags=[1]).c[0] + 1


def test_acf_errors():
    with pytest.raises(DegenerateDataError):
        acf(np.ones(10), lags=[1])
    with pytest.raises(InsufficientDataError):
        acf(np.arange(5.0), lags=[5])
    with pytest.raises(ValueError):
        acf(np.arange(5.0))
    with pytest.raises(ValueError):
        acf(np.arange(5.0), lags=[0])


def test_ccf_shift():
    rng = np.random.default_rng(2)
    y = rng.standard_normal(5000)
    x = np.roll(y, 3)
    c = ccf(x, y, [0, 3, -3])
    assert c[1] > 0.99 and abs(c[0]) < 0.05 and abs(c[2]) < 0.05
