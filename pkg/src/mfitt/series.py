"""Derived series: inter-transaction times, binned activity, summary and rolling statistics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateDataError, InsufficientDataError
from .ingest import TickSeries

DAY = 86400.0
MONTH = 30 * DAY


@dataclass
class IttSeries:
    """Inter-transaction times ``dt_i = t_{i+1} - t_i`` in seconds.

    ``timestamps[i]`` is the start ``t_i`` of interval i, which is the time
    used for seasonal bucketing.
    """

    values: np.ndarray
    timestamps: np.ndarray
    asset_label: str = ""
    venue_label: str = ""

    def __len__(self):
        return self.values.shape[0]

    @property
    def end_time(self):
        return float(self.timestamps[-1] + self.values[-1]) if len(self) else np.nan


@dataclass(frozen=True)
class SeriesStats:
    mean: float
    std: float
    count: int
    zero_fraction: float

    def as_dict(self):
        return {"count": self.count, "mean": self.mean, "std": self.std,
                "zero_fraction": self.zero_fraction}


@dataclass
class BinnedSeries:
    bin_width: float
    start_time: float
    n: np.ndarray
    v: np.ndarray
    r: np.ndarray

    @property
    def bin_timestamps(self):
        return self.start_time + self.bin_width * np.arange(self.n.shape[0])

    @property
    def end_time(self):
        return self.start_time + self.bin_width * self.n.shape[0]

    @property
    def abs_r(self):
        return np.abs(self.r)

    def field(self, name):
        table = {"n": self.n, "v": self.v, "r": self.r, "absr": self.abs_r}
        try:
            return np.asarray(table[name], dtype=np.float64)
        except KeyError:
            raise ValueError(f"unknown binned quantity {name!r}; use one of {sorted(table)}") from None


@dataclass
class RollingSeries:
    statistic: str
    window_length: float
    step: float
    window_end_times: np.ndarray
    values: np.ndarray  # NaN marks an empty window


def extract_itt(series: TickSeries) -> IttSeries:
    series.require_length(2)
    ts = series.timestamps
    d = np.diff(ts)
    if np.any(d < 0):
        raise ValueError("tick series is not ordered; run validate_ordering first")
    return IttSeries(d, ts[:-1].copy(), series.asset_label, series.venue_label)


def compute_stats(values) -> SeriesStats:
    """Mean, population std, count and exact fraction of zero values."""
    x = np.asarray(values, dtype=np.float64)
    if x.size == 0:
        raise InsufficientDataError("cannot summarize an empty sequence")
    mean = float(np.mean(x))
    std = float(np.sqrt(np.mean((x - mean) ** 2)))
    return SeriesStats(mean, std, int(x.size), float(np.count_nonzero(x == 0)) / x.size)


def bin_ticks(series: TickSeries, dt: float) -> BinnedSeries:
    """Aggregate trades into contiguous half-open bins of width ``dt``.

    Bins are anchored at the first timestamp floored to a multiple of ``dt``
    and run through the bin holding the last trade. Returns are
    ``ln(close_i) - ln(close_{i-1})`` with last-trade-carried-forward closes;
    the first bin's reference price is the first trade's price.
    """
    if not dt > 0:
        raise ValueError(f"bin width must be positive, got {dt}")
    series.require_length(1)
    ts = series.timestamps
    if np.any(np.diff(ts) < 0):
        raise ValueError("tick series is not ordered; run validate_ordering first")
    anchor = np.floor(ts[0] / dt) * dt
    idx = np.floor((ts - anchor) / dt).astype(np.int64)
    nbins = int(idx[-1]) + 1
    n = np.bincount(idx, minlength=nbins)
    v = np.bincount(idx, weights=series.volumes, minlength=nbins)

    last_in_bin = np.flatnonzero(np.append(idx[1:] != idx[:-1], True))
    logp = np.full(nbins, np.nan)
    logp[idx[last_in_bin]] = np.log(series.prices[last_in_bin])
    filled = np.maximum.accumulate(np.where(np.isnan(logp), -1, np.arange(nbins)))
    close = logp[filled]
    r = np.diff(close, prepend=np.log(series.prices[0]))
    return BinnedSeries(float(dt), float(anchor), n, v, r)


def rolling_stat(values, timestamps, statistic="mean", window=MONTH, step=DAY,
                 end_time=None, resolution=None) -> RollingSeries:
    """Statistic over samples with ``end - window <= t < end`` for each window end.

    Window ends are ``t0 + window + j * step`` up to ``end_time`` (exclusive
    end of the data; defaults to just past the last timestamp, or the last
    timestamp plus ``resolution`` for binned input). Empty windows yield NaN.
    """
    if statistic not in ("mean", "mean-abs"):
        raise ValueError(f"unknown rolling statistic {statistic!r}")
    if not window > 0 or not step > 0:
        raise ValueError("window and step must be positive")
    if resolution is not None and window < resolution:
        raise ValueError(f"window {window} s is shorter than the input resolution {resolution} s")
    x = np.asarray(values, dtype=np.float64)
    t = np.asarray(timestamps, dtype=np.float64)
    if x.shape != t.shape or x.size == 0:
        raise ValueError("values and timestamps must be non-empty and of equal length")
    if statistic == "mean-abs":
        x = np.abs(x)
    if end_time is None:
        end_time = t[-1] + resolution if resolution else np.nextafter(t[-1], np.inf)
    t0 = t[0]
    nwin = int(np.floor((end_time - t0 - window) / step + 1e-9)) + 1
    if nwin < 1:
        ends = np.empty(0)
    else:
        ends = t0 + window + step * np.arange(nwin)
    csum = np.concatenate(([0.0], np.cumsum(x)))
    hi = np.searchsorted(t, ends, side="left")
    lo = np.searchsorted(t, ends - window, side="left")
    count = hi - lo
    with np.errstate(invalid="ignore", divide="ignore"):
        out = (csum[hi] - csum[lo]) / count
    out[count == 0] = np.nan
    return RollingSeries(statistic, float(window), float(step), ends, out)


def normalize_by_sigma(values):
    """Divide by the population standard deviation (the mean is kept)."""
    x = np.asarray(values, dtype=np.float64)
    sd = compute_stats(x).std
    if not sd > 0:
        raise DegenerateDataError("zero variance; cannot normalize by sigma")
    return x / sd
