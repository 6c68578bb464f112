"""Multifractal detrended fluctuation analysis.

Pipeline: :func:`fluctuation_surface` -> :func:`fit_hurst` ->
:func:`singularity_spectrum` -> :func:`spectrum_asymmetry`.

Segments of length s are taken from both ends of the series, giving
``M_s = 2 * floor(N / s)`` segments. Inside each segment the values are
integrated and a degree-m least-squares polynomial is removed; the mean
squared residual is the segment variance f^2(s, v). Segments with
f^2 < eps are dropped for every q (so the generalized means stay ordered in
q) and counted.

Summation: each f^2(s, v) is a sequential sum inside the kernel; means over
segments use numpy's pairwise summation in segment order. Neither depends
on the thread count.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import kernels
from .errors import DegenerateDataError, InsufficientDataError

DEFAULT_Q = np.round(np.arange(-4.0, 4.0 + 1e-9, 0.25), 10)
DEFAULT_EPS = 1e-15
SCALES_PER_DECADE = 20


class MfdfaError(DegenerateDataError):
    pass


@dataclass
class MfdfaConfig:
    q_grid: np.ndarray = field(default_factory=lambda: DEFAULT_Q.copy())
    s_grid: np.ndarray | None = None
    m: int = 2
    fit_range: tuple[float, float] | None = None
    eps: float = DEFAULT_EPS
    scales_per_decade: int = SCALES_PER_DECADE
    threads: int = 1
    backend: str | None = None

    def __post_init__(self):
        self.q_grid = np.asarray(self.q_grid, dtype=np.float64).ravel()
        if self.q_grid.size == 0 or not np.all(np.isfinite(self.q_grid)):
            raise ValueError("q grid must be non-empty and finite")
        if self.m < 0:
            raise ValueError("detrending degree must be >= 0")
        if self.s_grid is not None:
            s = np.asarray(self.s_grid)
            if s.ndim != 1 or s.size == 0 or np.any(s != np.round(s)):
                raise ValueError("scale grid must be a 1-D list of integers")
            s = s.astype(np.int64)
            if np.any(np.diff(s) <= 0):
                raise ValueError("scale grid must be strictly increasing")
            if s[0] < self.m + 2:
                raise ValueError(f"smallest scale {s[0]} < m + 2 = {self.m + 2}")
            self.s_grid = s
        if self.fit_range is not None:
            lo, hi = self.fit_range
            if not 0 < lo <= hi:
                raise ValueError("fit range must satisfy 0 < lo <= hi")
        if not self.eps >= 0:
            raise ValueError("variance floor must be non-negative")


@dataclass
class FluctuationSurface:
    q_grid: np.ndarray
    s_grid: np.ndarray
    F: np.ndarray                 # shape (len(q_grid), len(s_grid))
    segment_counts: np.ndarray    # M_s per scale
    skipped_segments: np.ndarray  # per (q, s)
    m: int = 2

    def column(self, q):
        i = int(np.argmin(np.abs(self.q_grid - q)))
        if abs(self.q_grid[i] - q) > 1e-9:
            raise KeyError(f"q = {q} not on the grid")
        return self.F[i]


@dataclass
class GeneralizedHurst:
    q_grid: np.ndarray
    h: np.ndarray
    fit_r2: np.ndarray
    fit_range: tuple[float, float]
    intercept: np.ndarray | None = None

    def at(self, q):
        i = int(np.argmin(np.abs(self.q_grid - q)))
        if abs(self.q_grid[i] - q) > 1e-9:
            raise KeyError(f"q = {q} not on the grid")
        return float(self.h[i])


@dataclass
class SingularitySpectrum:
    q_grid: np.ndarray
    alpha: np.ndarray
    f_alpha: np.ndarray
    width: float
    alpha_at_zero: float
    asymmetry: float  # NaN when undefined (no q<0 or q>0 branch, or zero width)


def longest_zero_run(values):
    z = np.asarray(values) == 0
    if not z.any():
        return 0
    edges = np.diff(np.concatenate(([0], z.view(np.int8), [0])))
    starts = np.flatnonzero(edges == 1)
    stops = np.flatnonzero(edges == -1)
    return int(np.max(stops - starts))


def min_scale(values, m=2):
    """Longest run of zeros plus one, but at least m + 2."""
    x = np.asarray(values)
    if x.size == 0 or not np.any(x != 0):
        raise DegenerateDataError("series is empty or all zeros")
    return max(longest_zero_run(x) + 1, m + 2)


def max_scale(length, m=2):
    """One tenth of the series length."""
    if length < 10 * (m + 2):
        raise InsufficientDataError(f"series of length {length} too short; need >= {10 * (m + 2)}")
    return int(length) // 10


def scale_grid(s_min, s_max, per_decade=SCALES_PER_DECADE):
    """Log-spaced distinct integer scales from s_min to s_max inclusive."""
    s_min, s_max = int(s_min), int(s_max)
    if s_max < s_min:
        raise InsufficientDataError(f"infeasible scale range [{s_min}, {s_max}]")
    if s_max == s_min:
        return np.array([s_min], dtype=np.int64)
    decades = np.log10(s_max / s_min)
    npts = max(2, int(np.ceil(decades * per_decade)) + 1)
    s = np.round(s_min * np.logspace(0, decades, npts)).astype(np.int64)
    return np.unique(np.clip(s, s_min, s_max))


def resolve_scales(values, config: MfdfaConfig):
    x = np.asarray(values)
    n = x.shape[0]
    if config.s_grid is not None:
        s = config.s_grid
        if n < 10 * s[0]:
            raise InsufficientDataError(f"series length {n} < 10 * s_min = {10 * s[0]}")
        if s[-1] > n:
            raise InsufficientDataError(f"largest scale {s[-1]} exceeds series length {n}")
        return s
    lo = min_scale(x, config.m)
    hi = max_scale(n, config.m)
    return scale_grid(lo, hi, config.scales_per_decade)


def generalized_means(f2, q_grid, eps=DEFAULT_EPS, signed=False):
    """Order-q means {<sign(f2) |f2|^(q/2)>}^(1/q) over segments with |f2| >= eps.

    Returns (F per q, number of skipped segments). q = 0 uses the
    logarithmic mean exp(<ln |f2|> / 2); in the signed case its sign is the
    sign of the plain mean of f2. A negative mean for q != 0 is returned as
    -|mean|^(1/q).
    """
    f2 = np.asarray(f2, dtype=np.float64)
    mag = np.abs(f2) if signed else f2
    keep = mag >= eps
    skipped = int(f2.size - np.count_nonzero(keep))
    if not keep.any():
        return np.full(len(q_grid), np.nan), skipped
    kept = f2[keep]
    lnf = np.log(np.abs(kept) if signed else kept)
    sgn = np.sign(kept) if signed else None
    out = np.empty(len(q_grid))
    for i, q in enumerate(q_grid):
        if q == 0:
            val = np.exp(0.5 * np.mean(lnf))
            if signed and np.mean(kept) < 0:
                val = -val
            out[i] = val
            continue
        a = 0.5 * q * lnf
        amax = np.max(a)
        terms = np.exp(a - amax)
        if signed:
            terms = terms * sgn
        mean = np.mean(terms)
        if mean == 0:
            out[i] = 0.0
            continue
        out[i] = np.sign(mean) * np.exp((amax + np.log(abs(mean))) / q)
    return out, skipped


def _scale_worker(x, q_grid, config):
    def work(s):
        f2 = kernels.segment_variances(x, s, config.m, config.threads, config.backend)
        F, skipped = generalized_means(f2, q_grid, config.eps)
        return F, f2.size, skipped
    return work


def _run_scales(work, scales, config):
    impl = kernels.get_backend(config.backend)
    # compiled kernels parallelize inside a scale; the fallback across scales
    if config.threads > 1 and impl is kernels._kernels_py:
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            return list(pool.map(work, [int(s) for s in scales]))
    return [work(int(s)) for s in scales]


def fluctuation_surface(values, config: MfdfaConfig | None = None) -> FluctuationSurface:
    config = config or MfdfaConfig()
    x = np.ascontiguousarray(values, dtype=np.float64)
    if not np.all(np.isfinite(x)):
        raise ValueError("series contains non-finite values")
    scales = resolve_scales(x, config)
    q = config.q_grid
    results = _run_scales(_scale_worker(x, q, config), scales, config)
    F = np.empty((q.size, scales.size))
    counts = np.empty(scales.size, dtype=np.int64)
    skipped = np.empty((q.size, scales.size), dtype=np.int64)
    for j, (Fs, ms, sk) in enumerate(results):
        if sk == ms:
            raise MfdfaError(f"all {ms} segments at scale s = {scales[j]} have variance below "
                             f"{config.eps:g}")
        F[:, j] = Fs
        counts[j] = ms
        skipped[:, j] = sk
    return FluctuationSurface(q.copy(), scales.copy(), F, counts, skipped, config.m)


def fit_hurst(surface: FluctuationSurface, fit_range=None) -> GeneralizedHurst:
    """OLS slope of ln F_q(s) against ln s over scales inside ``fit_range``."""
    s = surface.s_grid.astype(np.float64)
    if fit_range is None:
        fit_range = (float(s[0]), float(s[-1]))
    lo, hi = fit_range
    sel = (s >= lo) & (s <= hi)
    if np.count_nonzero(sel) < 4:
        raise InsufficientDataError(f"fit range [{lo:g}, {hi:g}] contains {np.count_nonzero(sel)} "
                                    "scales; need at least 4")
    Fsel = surface.F[:, sel]
    if not np.all(np.isfinite(Fsel)) or np.any(Fsel <= 0):
        raise MfdfaError("undefined or non-positive F_q(s) inside the fit range")
    ls = np.log(s[sel])
    lF = np.log(Fsel)
    lsc = ls - ls.mean()
    slope = (lF - lF.mean(axis=1, keepdims=True)) @ lsc / (lsc @ lsc)
    intercept = lF.mean(axis=1) - slope * ls.mean()
    resid = lF - (intercept[:, None] + slope[:, None] * ls[None, :])
    ss_tot = np.sum((lF - lF.mean(axis=1, keepdims=True)) ** 2, axis=1)
    ss_res = np.sum(resid ** 2, axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        r2 = np.where(ss_tot > 0, 1.0 - ss_res / ss_tot, 1.0)
    used = (float(s[sel][0]), float(s[sel][-1]))
    return GeneralizedHurst(surface.q_grid.copy(), slope, r2, used, intercept)


def _value_at_zero(q, y):
    hit = np.flatnonzero(np.abs(q) < 1e-12)
    if hit.size:
        return float(y[hit[0]])
    if q.min() < 0 < q.max():
        order = np.argsort(q)
        return float(np.interp(0.0, q[order], y[order]))
    return float("nan")


def singularity_spectrum(hurst: GeneralizedHurst) -> SingularitySpectrum:
    """alpha = h + q h'(q), f = q (alpha - h) + 1 with finite-difference h'."""
    q = np.asarray(hurst.q_grid, dtype=np.float64)
    h = np.asarray(hurst.h, dtype=np.float64)
    if q.size < 3:
        raise InsufficientDataError("need at least 3 q values for a derivative")
    if np.any(np.diff(q) <= 0):
        raise ValueError("q grid must be strictly increasing")
    dh = np.gradient(h, q, edge_order=1)
    if not np.all(np.isfinite(dh)):
        raise MfdfaError("non-finite derivative of h(q)")
    alpha = h + q * dh
    f = q * (alpha - h) + 1.0
    width = float(alpha.max() - alpha.min())
    a0 = _value_at_zero(q, alpha)
    spec = SingularitySpectrum(q, alpha, f, width, a0, float("nan"))
    try:
        spec.asymmetry = spectrum_asymmetry(spec)
    except (MfdfaError, InsufficientDataError):
        pass
    return spec


def spectrum_asymmetry(spec: SingularitySpectrum) -> float:
    """A = (dL - dR) / (dL + dR); negative means a longer right (large-alpha) branch."""
    q = np.asarray(spec.q_grid)
    if not (np.any(q < 0) and np.any(q > 0)):
        raise InsufficientDataError("asymmetry needs both q < 0 and q > 0 branches")
    a0 = spec.alpha_at_zero
    left = a0 - float(np.min(spec.alpha))
    right = float(np.max(spec.alpha)) - a0
    if left + right <= 0:
        raise MfdfaError("zero spectrum width; asymmetry undefined")
    return (left - right) / (left + right)


def mfdfa(values, config: MfdfaConfig | None = None):
    """Full chain; returns (surface, hurst, spectrum)."""
    config = config or MfdfaConfig()
    surface = fluctuation_surface(values, config)
    hurst = fit_hurst(surface, config.fit_range)
    return surface, hurst, singularity_spectrum(hurst)


def with_options(config: MfdfaConfig, **changes) -> MfdfaConfig:
    return replace(config, **changes)
