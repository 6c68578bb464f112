"""Multifractal detrended cross-correlation and the rho_q(s) coefficient.

Two forms of rho_q are available:

``moment`` (default)
    ratio of the q-th order moments,
    sum sign(f2_xy)|f2_xy|^(q/2) / sqrt(sum f2_xx^(q/2) * sum f2_yy^(q/2)),
    which equals the DCCA coefficient at q = 2. In terms of the fluctuation
    functions this is sign(F_xy) (|F_xy| / sqrt(F_xx F_yy))^q.
``root``
    the plain ratio F_xy / sqrt(F_xx F_yy) of the q-th root fluctuation
    functions; at q = 2 it is sign * sqrt(|rho_DCCA|).

At q = 0 both use the ratio of logarithmic-mean fluctuation functions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import DegenerateDataError
from .mfdfa import (FluctuationSurface, MfdfaConfig, MfdfaError, _run_scales,
                    generalized_means, resolve_scales)
from .series import DAY, MONTH


@dataclass
class RhoResult:
    q: float
    s_grid: np.ndarray
    rho: np.ndarray
    window_end_times: np.ndarray | None = None
    out_of_bounds: bool = False  # some |rho| > 1 (possible for q <= 0)


def _pair(x, y):
    x = np.ascontiguousarray(x, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise ValueError(f"series lengths differ ({x.shape[0]} vs {y.shape[0]})")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ValueError("series contain non-finite values")
    return x, y


def _scale_grid_for_pair(x, y, config):
    if config.s_grid is not None:
        return resolve_scales(x, config)
    # the zero-run rule must hold for both series
    sx = resolve_scales(x, config)
    sy = resolve_scales(y, config)
    return sx if sx[0] >= sy[0] else sy


def _cross_surfaces(x, y, config):
    """(F_xy, F_xx, F_yy) surfaces from a single pass over each scale."""
    scales = _scale_grid_for_pair(x, y, config)
    q = config.q_grid

    def work(s):
        fxx, fyy, fxy = kernels.segment_covariances(x, y, s, config.m, config.threads, config.backend)
        return (generalized_means(fxy, q, config.eps, signed=True),
                generalized_means(fxx, q, config.eps),
                generalized_means(fyy, q, config.eps),
                fxy.size)

    results = _run_scales(work, scales, config)
    out = []
    for k in range(3):
        F = np.empty((q.size, scales.size))
        skipped = np.empty((q.size, scales.size), dtype=np.int64)
        counts = np.empty(scales.size, dtype=np.int64)
        for j, res in enumerate(results):
            (Fs, sk), ms = res[k], res[3]
            if sk == ms:
                which = ("cross", "x", "y")[k]
                raise MfdfaError(f"all {ms} {which} segments at scale s = {scales[j]} are below "
                                 f"{config.eps:g}")
            F[:, j] = Fs
            skipped[:, j] = sk
            counts[j] = ms
        out.append(FluctuationSurface(q.copy(), scales.copy(), F, counts, skipped, config.m))
    return out


def cross_fluctuation(x, y, config: MfdfaConfig | None = None) -> FluctuationSurface:
    """Signed-modulus fluctuation functions F_q^XY(s) of detrended covariances."""
    x, y = _pair(x, y)
    return _cross_surfaces(x, y, config or MfdfaConfig())[0]


RHO_FORMS = ("moment", "root")


def _rho_from(fxy, fxx, fyy, qi, form="moment"):
    if form not in RHO_FORMS:
        raise ValueError(f"unknown rho form {form!r}")
    den = np.sqrt(fxx.F[qi] * fyy.F[qi])
    if np.any(den == 0) or not np.all(np.isfinite(den)):
        raise DegenerateDataError("zero or undefined denominator in rho_q(s)")
    ratio = fxy.F[qi] / den
    q = fxy.q_grid[qi]
    if form == "root" or q == 0:
        return ratio
    return np.sign(ratio) * np.abs(ratio) ** q


def rho_q(x, y, config: MfdfaConfig | None = None, q=2.0, form="moment") -> RhoResult:
    """rho_q(s) at every scale of the config, in the chosen form (see module notes)."""
    x, y = _pair(x, y)
    config = config or MfdfaConfig()
    config = MfdfaConfig(np.array([q]), config.s_grid, config.m, config.fit_range, config.eps,
                         config.scales_per_decade, config.threads, config.backend)
    fxy, fxx, fyy = _cross_surfaces(x, y, config)
    rho = _rho_from(fxy, fxx, fyy, 0, form)
    return RhoResult(float(q), fxy.s_grid, rho, None, bool(np.any(np.abs(rho) > 1 + 1e-9)))


def rho_q_all(x, y, config: MfdfaConfig | None = None, form="moment"):
    """rho for every q of the config; returns (q_grid, s_grid, rho matrix)."""
    x, y = _pair(x, y)
    config = config or MfdfaConfig()
    fxy, fxx, fyy = _cross_surfaces(x, y, config)
    rho = np.vstack([_rho_from(fxy, fxx, fyy, i, form) for i in range(config.q_grid.size)])
    return fxy.q_grid, fxy.s_grid, rho


def rolling_rho(x, y, timestamps, q=2.0, s=60, window=MONTH, step=DAY, m=2, eps=1e-15,
                end_time=None, threads=1, backend=None, form="moment", resolution=None) -> RhoResult:
    """rho_q(s) on each window [end - window, end); NaN where a window has < 10 s samples.

    For binned input pass the bin width as ``resolution`` so the data are taken
    to end one bin after the last timestamp.
    """
    if not window > 0 or not step > 0:
        raise ValueError("window and step must be positive")
    x, y = _pair(x, y)
    t = np.asarray(timestamps, dtype=np.float64)
    if t.shape != x.shape:
        raise ValueError("timestamps must match the series length")
    if end_time is None:
        end_time = t[-1] + resolution if resolution else np.nextafter(t[-1], np.inf)
    nwin = int(np.floor((end_time - t[0] - window) / step + 1e-9)) + 1
    ends = t[0] + window + step * np.arange(max(nwin, 0))
    hi = np.searchsorted(t, ends, side="left")
    lo = np.searchsorted(t, ends - window, side="left")
    cfg = MfdfaConfig(np.array([q]), np.array([int(s)]), m, None, eps, threads=threads,
                      backend=backend)
    rho = np.full(ends.size, np.nan)
    for j in range(ends.size):
        if hi[j] - lo[j] < 10 * s:
            continue
        try:
            fxy, fxx, fyy = _cross_surfaces(x[lo[j]:hi[j]], y[lo[j]:hi[j]], cfg)
            rho[j] = _rho_from(fxy, fxx, fyy, 0, form)[0]
        except DegenerateDataError:
            continue
    oob = bool(np.any(np.abs(rho[np.isfinite(rho)]) > 1 + 1e-9))
    return RhoResult(float(q), np.array([int(s)]), rho, ends, oob)
