import numpy as np
import pytest

from mfitt.deseason import (SeasonalPattern, day_of_week, deseasonalize, estimate_daily_pattern,
                            estimate_pattern, estimate_weekly_pattern, hour_of_day, read_pattern,
                            write_pattern)
from mfitt.errors import DegenerateDataError, InsufficientDataError

MONDAY = 1_699_833_600.0  # 2023-11-13 00:00 UTC


def test_calendar():
    assert day_of_week(np.array([0.0]))[0] == 3  # 1970-01-01 was a Thursday
    assert day_of_week(np.array([MONDAY]))[0] == 0
    assert hour_of_day(np.array([MONDAY + 3600 * 5 + 59]))[0] == 5
    assert hour_of_day(np.array([-1.0]))[0] == 23


def test_constant_pattern_recovered():
    t = MONDAY + np.arange(0, 14 * 86400, 600.0)
    daily = 1.0 + np.arange(24) / 10
    x = daily[hour_of_day(t)]
    p = estimate_daily_pattern(x, t)
    np.testing.assert_allclose(p, daily, rtol=1e-14)
    y = deseasonalize(x, t, SeasonalPattern(p), "daily")
    np.testing.assert_allclose(y, 1.0, rtol=1e-14)


def test_mean_of_daily_means():
    # hour 0 of day 1 has 1 sample, of day 2 has 3: bucket mean weights days equally
    t = np.array([MONDAY, MONDAY + 86400, MONDAY + 86400 + 1, MONDAY + 86400 + 2])
    x = np.array([1.0, 3.0, 3.0, 3.0])
    t = np.concatenate([t, MONDAY + 3600 * np.arange(1, 24), [MONDAY + 2 * 86400]])
    x = np.concatenate([x, np.ones(23), [1.0]])
    p = estimate_daily_pattern(x, t)
    assert p[0] == pytest.approx((1.0 + 3.0 + 1.0) / 3)


def test_weekly_factors_mean_one():
    t = MONDAY + np.arange(0, 21 * 86400, 900.0)
    weekly = np.array([2.0, 2.0, 2.0, 2.0, 2.0, 1.0, 1.0])
    x = weekly[day_of_week(t)]
    pat = estimate_pattern(x, t, "daily+weekly")
    assert pat.weekly_factors().mean() == pytest.approx(1.0)
    y = deseasonalize(x, t, pat, "daily+weekly")
    assert np.ptp(y) < 1e-12


def test_zero_positions_preserved():
    rng = np.random.default_rng(3)
    t = MONDAY + np.arange(0, 10 * 86400, 60.0)
    x = rng.exponential(1, t.size)
    x[rng.random(t.size) < 0.3] = 0
    y = deseasonalize(x, t, estimate_pattern(x, t), "daily+weekly")
    np.testing.assert_array_equal(x == 0, y == 0)


def test_errors():
    t = MONDAY + np.arange(0, 86400, 60.0)
    with pytest.raises(InsufficientDataError):
        estimate_daily_pattern(np.ones(t.size), t)
    t = MONDAY + np.arange(0, 3 * 86400, 3600.0)
    with pytest.raises(InsufficientDataError, match="weekday"):
        estimate_weekly_pattern(np.ones(t.size), t)
    p = SeasonalPattern(np.r_[np.zeros(1), np.ones(23)])
    with pytest.raises(DegenerateDataError):
        deseasonalize(np.ones(3), np.array([MONDAY, MONDAY + 1, MONDAY + 2]), p, "daily")
    with pytest.raises(DegenerateDataError):
        deseasonalize(np.ones(1), np.array([MONDAY]), SeasonalPattern(np.ones(24)), "daily+weekly")
    with pytest.raises(ValueError):
        estimate_pattern(np.ones(1), np.array([MONDAY]), "hourly")


def test_pattern_round_trip(tmp_path):
    pat = SeasonalPattern(np.linspace(0.5, 2, 24), np.linspace(0.9, 1.3, 7))
    write_pattern(pat, tmp_path / "p")
    back = read_pattern(tmp_path / "p")
    np.testing.assert_array_equal(back.daily, pat.daily)
    np.testing.assert_array_equal(back.weekly, pat.weekly)
