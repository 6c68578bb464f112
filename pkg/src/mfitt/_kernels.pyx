# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled per-segment detrending kernels.

Each segment of length ``s`` is integrated (segment-local cumulative sum),
projected onto an orthonormal polynomial basis and the squared residual is
averaged. Segments are independent, so the loop over segments runs under
``prange``; every segment's value is produced by the same sequential
arithmetic regardless of the thread that owns it, which keeps the output
bitwise independent of the thread count.
"""

import numpy as np
cimport numpy as cnp
from cython.parallel cimport prange, parallel
from libc.stdlib cimport malloc, free

cnp.import_array()


cdef inline Py_ssize_t _segment_start(Py_ssize_t v, Py_ssize_t nseg,
                                      Py_ssize_t s, Py_ssize_t n) nogil:
    if v < nseg:
        return v * s
    return n - (v - nseg + 1) * s


cdef void _residual(const double[::1] x, Py_ssize_t start, Py_ssize_t s,
                    const double[:, ::1] basis, Py_ssize_t nb,
                    double* y, double* c) noexcept nogil:
    cdef Py_ssize_t i, k
    cdef double acc = 0.0
    for i in range(s):
        acc = acc + x[start + i]
        y[i] = acc
    for k in range(nb):
        acc = 0.0
        for i in range(s):
            acc = acc + basis[k, i] * y[i]
        c[k] = acc
    for i in range(s):
        acc = y[i]
        for k in range(nb):
            acc = acc - c[k] * basis[k, i]
        y[i] = acc


def segment_variances(const double[::1] x, Py_ssize_t s,
                      const double[:, ::1] basis, int nthreads=1):
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t nseg = n // s
    cdef Py_ssize_t nb = basis.shape[0]
    cdef Py_ssize_t v, i, start
    cdef double acc
    cdef double* y
    cdef double* c
    out = np.empty(2 * nseg, dtype=np.float64)
    cdef double[::1] f2 = out
    if basis.shape[1] != s:
        raise ValueError("basis width does not match the scale")
    if nthreads < 1:
        nthreads = 1
    with nogil, parallel(num_threads=nthreads):
        y = <double*> malloc(s * sizeof(double))
        c = <double*> malloc(nb * sizeof(double))
        for v in prange(2 * nseg, schedule="static"):
            start = _segment_start(v, nseg, s, n)
            _residual(x, start, s, basis, nb, y, c)
            acc = 0.0
            for i in range(s):
                acc = acc + y[i] * y[i]
            f2[v] = acc / s
        free(y)
        free(c)
    return out


def segment_covariances(const double[::1] x, const double[::1] z, Py_ssize_t s,
                        const double[:, ::1] basis, int nthreads=1):
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t nseg = n // s
    cdef Py_ssize_t nb = basis.shape[0]
    cdef Py_ssize_t v, i, start
    cdef double axx, azz, axz
    cdef double* yx
    cdef double* yz
    cdef double* c
    if z.shape[0] != n:
        raise ValueError("series lengths differ")
    if basis.shape[1] != s:
        raise ValueError("basis width does not match the scale")
    out_xx = np.empty(2 * nseg, dtype=np.float64)
    out_zz = np.empty(2 * nseg, dtype=np.float64)
    out_xz = np.empty(2 * nseg, dtype=np.float64)
    cdef double[::1] fxx = out_xx
    cdef double[::1] fzz = out_zz
    cdef double[::1] fxz = out_xz
    if nthreads < 1:
        nthreads = 1
    with nogil, parallel(num_threads=nthreads):
        yx = <double*> malloc(s * sizeof(double))
        yz = <double*> malloc(s * sizeof(double))
        c = <double*> malloc(nb * sizeof(double))
        for v in prange(2 * nseg, schedule="static"):
            start = _segment_start(v, nseg, s, n)
            _residual(x, start, s, basis, nb, yx, c)
            _residual(z, start, s, basis, nb, yz, c)
            axx = 0.0
            azz = 0.0
            axz = 0.0
            for i in range(s):
                axx = axx + yx[i] * yx[i]
                azz = azz + yz[i] * yz[i]
                axz = axz + yx[i] * yz[i]
            fxx[v] = axx / s
            fzz[v] = azz / s
            fxz[v] = axz / s
        free(yx)
        free(yz)
        free(c)
    return out_xx, out_zz, out_xz
