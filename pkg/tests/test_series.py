import numpy as np
import pytest

from mfitt.errors import DegenerateDataError, InsufficientDataError
from mfitt.ingest import TickSeries
from mfitt.series import (DAY, bin_ticks, compute_stats, extract_itt, normalize_by_sigma,
                          rolling_stat)

from oracles import naive_stats


def ticks(t, p=None, v=None):
    n = len(t)
    return TickSeries(t, p if p is not None else np.ones(n), v if v is not None else np.ones(n))


def test_extract_itt():
    itt = extract_itt(ticks([0.0, 1.0, 1.0, 3.5]))
    np.testing.assert_array_equal(itt.values, [1.0, 0.0, 2.5])
    np.testing.assert_array_equal(itt.timestamps, [0.0, 1.0, 1.0])
    assert itt.end_time == 3.5


def test_itt_needs_two_trades():
    with pytest.raises(InsufficientDataError):
        extract_itt(ticks([1.0]))


def test_stats_frozen():
    st = compute_stats([0.0, 1.0, 0.0, 3.0])
    assert st.count == 4
    assert st.mean == 1.0
    assert st.std == np.sqrt(1.5)
    assert st.zero_fraction == 0.5


def test_stats_match_naive():
    v = np.random.default_rng(1).exponential(2.0, 1000)
    st = compute_stats(v)
    m, s, z = naive_stats(v)
    assert st.mean == pytest.approx(m, rel=1e-12)
    assert st.std == pytest.approx(s, rel=1e-12)


def test_stats_empty():
    with pytest.raises(InsufficientDataError):
        compute_stats([])


def test_bin_ticks_frozen():
    t = [3.0, 4.0, 12.0, 35.0]
    p = [100.0, 110.0, 121.0, 100.0]
    b = bin_ticks(ticks(t, p, [1.0, 2.0, 3.0, 4.0]), 10.0)
    assert b.start_time == 0.0
    np.testing.assert_array_equal(b.n, [2, 1, 0, 1])
    np.testing.assert_array_equal(b.v, [3.0, 3.0, 0.0, 4.0])
    expect = [np.log(110 / 100), np.log(121 / 110), 0.0, np.log(100 / 121)]
    np.testing.assert_allclose(b.r, expect, rtol=0, atol=1e-15)
    np.testing.assert_array_equal(b.bin_timestamps, [0, 10, 20, 30])
    assert b.end_time == 40.0


def test_bin_conservation():
    rng = np.random.default_rng(2)
    t = np.sort(rng.random(5000) * 1e4)
    p = np.exp(np.cumsum(rng.normal(0, 0.01, 5000)))
    v = rng.random(5000)
    b = bin_ticks(ticks(t, p, v), 7.0)
    assert b.n.sum() == 5000
    assert b.v.sum() == pytest.approx(v.sum())
    assert b.r.sum() == pytest.approx(np.log(p[-1] / p[0]))


def test_bin_bad_width():
    with pytest.raises(ValueError):
        bin_ticks(ticks([1.0, 2.0]), 0)


def test_rolling_mean_frozen():
    t = np.arange(10.0)
    x = np.arange(10.0)
    r = rolling_stat(x, t, window=4.0, step=2.0)
    np.testing.assert_array_equal(r.window_end_times, [4.0, 6.0, 8.0])
    np.testing.assert_array_equal(r.values, [1.5, 3.5, 5.5])
    # binned input covers one extra bin width past the last timestamp
    r = rolling_stat(x, t, window=4.0, step=2.0, resolution=1.0)
    np.testing.assert_array_equal(r.values, [1.5, 3.5, 5.5, 7.5])


def test_rolling_gap_is_nan_and_mean_abs():
    t = np.array([0.0, 1.0, 10.0, 11.0])
    x = np.array([-1.0, 1.0, -2.0, 2.0])
    r = rolling_stat(x, t, "mean-abs", window=2.0, step=3.0, end_time=12.0)
    np.testing.assert_array_equal(r.window_end_times, [2.0, 5.0, 8.0, 11.0])
    assert r.values[0] == 1.0 and np.isnan(r.values[1]) and np.isnan(r.values[2])
    assert r.values[3] == 2.0


def test_rolling_window_below_resolution():
    with pytest.raises(ValueError):
        rolling_stat([1.0, 2.0], [0.0, 10.0], window=5.0, step=DAY, resolution=10.0)


def test_normalize_by_sigma():
    x = normalize_by_sigma([1.0, 3.0])
    np.testing.assert_array_equal(x, [1.0, 3.0])
    with pytest.raises(DegenerateDataError):
        normalize_by_sigma([2.0, 2.0])
