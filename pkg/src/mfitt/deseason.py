"""Removal of intraday and intraweek activity patterns.

Patterns are bucket means in UTC. Every bucket mean is built in two stages:
first the mean within each calendar cell (one hour of one day, or one whole
day), then the average of those cell means across all days, so that busy and
quiet days carry the same weight.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateDataError, InsufficientDataError

HOUR = 3600.0
DAY = 86400.0
WEEKDAYS = ("Mon", "Tue", "Wed", "Thu", "Fri", "Sat", "Sun")
MODES = ("daily", "daily+weekly")


@dataclass
class SeasonalPattern:
    daily: np.ndarray            # 24 hour-of-day means
    weekly: np.ndarray | None = None  # 7 day-of-week means, Monday first
    reference_timezone: str = "UTC"

    def weekly_factors(self):
        """Weekly pattern rescaled to mean 1."""
        if self.weekly is None:
            raise ValueError("pattern has no weekly component")
        w = np.asarray(self.weekly, dtype=np.float64)
        return w / w.mean()


def hour_of_day(timestamps):
    return (np.floor(np.asarray(timestamps, dtype=np.float64) / HOUR).astype(np.int64)) % 24


def day_of_week(timestamps):
    # 1970-01-01 was a Thursday
    days = np.floor(np.asarray(timestamps, dtype=np.float64) / DAY).astype(np.int64)
    return (days + 3) % 7


def _cell_then_bucket_means(values, cell, bucket, nbuckets):
    cells, inv = np.unique(cell, return_inverse=True)
    cell_sum = np.bincount(inv, weights=values, minlength=cells.size)
    cell_cnt = np.bincount(inv, minlength=cells.size)
    cell_mean = cell_sum / cell_cnt
    cell_bucket = np.zeros(cells.size, dtype=np.int64)
    cell_bucket[inv] = bucket
    tot = np.bincount(cell_bucket, weights=cell_mean, minlength=nbuckets)
    cnt = np.bincount(cell_bucket, minlength=nbuckets)
    return tot, cnt


def _prepare(values, timestamps):
    x = np.asarray(values, dtype=np.float64)
    t = np.asarray(timestamps, dtype=np.float64)
    if x.shape != t.shape:
        raise ValueError("values and timestamps must have equal length")
    if x.size == 0:
        raise InsufficientDataError("empty series")
    return x, t


def estimate_daily_pattern(values, timestamps):
    """24 hour-of-day means (UTC) averaged over all days."""
    x, t = _prepare(values, timestamps)
    if t.max() - t.min() < 2 * DAY:
        raise InsufficientDataError("daily pattern needs data spanning at least 2 days")
    hour_cell = np.floor(t / HOUR).astype(np.int64)
    tot, cnt = _cell_then_bucket_means(x, hour_cell, hour_cell % 24, 24)
    if np.any(cnt == 0):
        raise InsufficientDataError(f"no data in UTC hour(s) {np.flatnonzero(cnt == 0).tolist()}")
    return tot / cnt


def estimate_weekly_pattern(values, timestamps):
    """7 day-of-week means (UTC, Monday = 0) averaged over all weeks."""
    x, t = _prepare(values, timestamps)
    day_cell = np.floor(t / DAY).astype(np.int64)
    tot, cnt = _cell_then_bucket_means(x, day_cell, (day_cell + 3) % 7, 7)
    if np.any(cnt == 0):
        missing = [WEEKDAYS[i] for i in np.flatnonzero(cnt == 0)]
        raise InsufficientDataError(f"no data on weekday(s) {', '.join(missing)}")
    return tot / cnt


def _check_divisors(p, what):
    p = np.asarray(p, dtype=np.float64)
    if not np.all(np.isfinite(p)) or np.any(p <= 0):
        bad = np.flatnonzero(~(np.isfinite(p) & (p > 0)))
        raise DegenerateDataError(f"{what} pattern has zero or missing divisor at bucket(s) {bad.tolist()}")
    return p


def deseasonalize(values, timestamps, pattern: SeasonalPattern, mode="daily+weekly"):
    """Divide by the hour-of-day pattern, then (optionally) by the mean-1 weekly factors."""
    if mode not in MODES:
        raise ValueError(f"unknown deseasonalization mode {mode!r}")
    x, t = _prepare(values, timestamps)
    daily = _check_divisors(pattern.daily, "daily")
    if daily.shape != (24,):
        raise ValueError("daily pattern must have 24 entries")
    out = x / daily[hour_of_day(t)]
    if mode == "daily+weekly":
        weekly = _check_divisors(pattern.weekly if pattern.weekly is not None else [np.nan] * 7,
                                 "weekly")
        if weekly.shape != (7,):
            raise ValueError("weekly pattern must have 7 entries")
        out /= (weekly / weekly.mean())[day_of_week(t)]
    return out


def estimate_pattern(values, timestamps, mode="daily+weekly") -> SeasonalPattern:
    """Full-sample pattern: daily first, then weekly on the daily-corrected series."""
    if mode not in MODES:
        raise ValueError(f"unknown deseasonalization mode {mode!r}")
    daily = estimate_daily_pattern(values, timestamps)
    pattern = SeasonalPattern(daily)
    if mode == "daily+weekly":
        partial = deseasonalize(values, timestamps, pattern, mode="daily")
        pattern.weekly = estimate_weekly_pattern(partial, timestamps)
    return pattern


def write_pattern(pattern: SeasonalPattern, path_prefix):
    """Write ``<prefix>.daily.txt`` (24 lines) and, if present, ``<prefix>.weekly.txt`` (7 lines)."""
    paths = [f"{path_prefix}.daily.txt"]
    with open(paths[0], "w") as fh:
        for h, val in enumerate(pattern.daily):
            fh.write(f"{h},{float(val)!r}\n")
    if pattern.weekly is not None:
        paths.append(f"{path_prefix}.weekly.txt")
        with open(paths[1], "w") as fh:
            for d, val in enumerate(pattern.weekly):
                fh.write(f"{d},{float(val)!r}\n")
    return paths


def _read_table(path, expected):
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, val = line.split(",")
            rows.append((int(key), float(val)))
    if sorted(k for k, _ in rows) != list(range(expected)):
        raise ValueError(f"{path}: expected {expected} buckets numbered 0..{expected - 1}")
    return np.array([v for _, v in sorted(rows)])


def read_pattern(path_prefix) -> SeasonalPattern:
    daily = _read_table(f"{path_prefix}.daily.txt", 24)
    weekly_path = f"{path_prefix}.weekly.txt"
    weekly = _read_table(weekly_path, 7) if os.path.exists(weekly_path) else None
    return SeasonalPattern(daily, weekly)
