"""Pure-numpy fallback for the segment detrending kernels.

Same contract as the compiled ``_kernels`` module. Segments are processed in
blocks so that peak memory stays bounded by ``_BLOCK_ELEMENTS`` doubles
instead of a full copy of the series.
"""

import numpy as np

_BLOCK_ELEMENTS = 1 << 20


def _segment_blocks(n, s):
    nseg = n // s
    rows = max(1, _BLOCK_ELEMENTS // s)
    for lo in range(0, 2 * nseg, rows):
        hi = min(2 * nseg, lo + rows)
        yield lo, hi


def _gather(x, s, lo, hi, nseg):
    n = x.shape[0]
    v = np.arange(lo, hi)
    starts = np.where(v < nseg, v * s, n - (v - nseg + 1) * s)
    return x[starts[:, None] + np.arange(s)[None, :]]


def _residuals(block, basis):
    prof = np.cumsum(block, axis=1)
    coef = prof @ basis.T
    prof -= coef @ basis
    return prof


def segment_variances(x, s, basis, nthreads=1):
    x = np.ascontiguousarray(x, dtype=np.float64)
    nseg = x.shape[0] // s
    out = np.empty(2 * nseg)
    for lo, hi in _segment_blocks(x.shape[0], s):
        r = _residuals(_gather(x, s, lo, hi, nseg), basis)
        out[lo:hi] = np.einsum("ij,ij->i", r, r) / s
    return out


def segment_covariances(x, z, s, basis, nthreads=1):
    x = np.ascontiguousarray(x, dtype=np.float64)
    z = np.ascontiguousarray(z, dtype=np.float64)
    if x.shape != z.shape:
        raise ValueError("series lengths differ")
    nseg = x.shape[0] // s
    fxx = np.empty(2 * nseg)
    fzz = np.empty(2 * nseg)
    fxz = np.empty(2 * nseg)
    for lo, hi in _segment_blocks(x.shape[0], s):
        rx = _residuals(_gather(x, s, lo, hi, nseg), basis)
        rz = _residuals(_gather(z, s, lo, hi, nseg), basis)
        fxx[lo:hi] = np.einsum("ij,ij->i", rx, rx) / s
        fzz[lo:hi] = np.einsum("ij,ij->i", rz, rz) / s
        fxz[lo:hi] = np.einsum("ij,ij->i", rx, rz) / s
    return fxx, fzz, fxz
