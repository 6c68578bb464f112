"""Autocorrelation of (deseasonalised) series on a logarithmic lag grid."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateDataError, InsufficientDataError


@dataclass
class AcfResult:
    lags: np.ndarray
    tau: np.ndarray
    c: np.ndarray
    estimator: str = "standard"
    time_unit: float = 1.0


def log_lags(max_lag, per_decade=25, min_lag=1):
    """Distinct integer lags log-spaced from ``min_lag`` to ``max_lag`` inclusive."""
    if max_lag < min_lag:
        raise ValueError("max_lag must be >= min_lag")
    if max_lag == min_lag:
        return np.array([min_lag], dtype=np.int64)
    decades = np.log10(max_lag / min_lag)
    npts = max(2, int(np.ceil(decades * per_decade)) + 1)
    grid = np.round(min_lag * np.logspace(0, decades, npts)).astype(np.int64)
    return np.unique(np.clip(grid, min_lag, max_lag))


def _lagged_dot(a, b, k):
    # einsum keeps a fixed single-threaded reduction order (BLAS dot may not)
    return float(np.einsum("i,i->", a[k:], b[: a.shape[0] - k]))


def acf(values, max_lag=None, estimator="standard", lags=None, per_decade=25, time_unit=1.0):
    """Autocorrelation C(k) with biased (1/N) normalization.

    ``standard`` subtracts the mean; ``raw`` uses the un-centred products
    divided by the variance. ``time_unit`` maps lag k to tau_k = k * time_unit
    (pass the mean ITT when ``values`` are inter-transaction times).
    """
    if estimator not in ("standard", "raw"):
        raise ValueError(f"unknown estimator {estimator!r}")
    x = np.asarray(values, dtype=np.float64)
    n = x.shape[0]
    if lags is None:
        if max_lag is None:
            raise ValueError("give max_lag or an explicit lag list")
        lags = log_lags(int(max_lag), per_decade)
    lags = np.asarray(lags, dtype=np.int64)
    if lags.size == 0:
        raise ValueError("empty lag list")
    if lags.min() < 1:
        raise ValueError("lags start at 1")
    if lags.max() >= n:
        raise InsufficientDataError(f"max lag {lags.max()} must be < series length {n}")
    mu = float(np.mean(x))
    y = x - mu
    var = float(np.einsum("i,i->", y, y)) / n
    if not var > 0:
        raise DegenerateDataError("series has zero variance")
    z = y if estimator == "standard" else x
    c = np.array([_lagged_dot(z, z, int(k)) / n / var for k in lags])
    return AcfResult(lags, lags * float(time_unit), c, estimator, float(time_unit))


def ccf(x, y, lags):
    """Cross-correlation corr(x_{i+k}, y_i) for each k in ``lags`` (may be negative)."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise ValueError("series lengths differ")
    n = x.shape[0]
    a = x - x.mean()
    b = y - y.mean()
    norm = n * np.sqrt(np.mean(a * a) * np.mean(b * b))
    if not norm > 0:
        raise DegenerateDataError("zero variance")
    out = []
    for k in np.asarray(lags, dtype=np.int64):
        if abs(k) >= n:
            raise InsufficientDataError(f"lag {k} out of range")
        out.append(_lagged_dot(a, b, int(k)) / norm if k >= 0 else _lagged_dot(b, a, int(-k)) / norm)
    return np.array(out)
