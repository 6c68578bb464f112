"""Kernel backend selection.

The compiled extension is used when it imports; otherwise the numpy fallback.
Set ``MFITT_PURE_PYTHON=1`` to force the fallback.
"""

import functools
import os

import numpy as np

from . import _kernels_py

_compiled = None
if os.environ.get("MFITT_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled
    except ImportError:  # extension not built
        _compiled = None

BACKENDS = {"python": _kernels_py}
if _compiled is not None:
    BACKENDS["compiled"] = _compiled

BACKEND = "compiled" if _compiled is not None else "python"


def get_backend(name=None):
    if name is None:
        name = BACKEND
    try:
        return BACKENDS[name]
    except KeyError:
        raise ValueError(f"kernel backend {name!r} is not available "
                         f"(have: {', '.join(BACKENDS)})") from None


@functools.lru_cache(maxsize=256)
def _basis_cached(s, m):
    t = np.linspace(-1.0, 1.0, s) if s > 1 else np.zeros(1)
    vander = np.vander(t, m + 1, increasing=True)
    q, _ = np.linalg.qr(vander)
    basis = np.ascontiguousarray(q.T)
    basis.setflags(write=False)
    return basis


def polynomial_basis(s, m):
    """Orthonormal basis of degree-<=m polynomials sampled on ``s`` points.

    Returned as an ``(m + 1, s)`` array; rows are orthonormal.
    """
    if s < m + 1:
        raise ValueError(f"scale {s} too short for a degree-{m} fit")
    return _basis_cached(int(s), int(m))


def segment_variances(x, s, m, nthreads=1, backend=None):
    """Detrended variances f^2(s, v) for all 2*floor(N/s) segments.

    The first floor(N/s) entries are segments taken from the start of the
    series, the rest from the end (v-th entry counts back from the end).
    """
    impl = get_backend(backend)
    x = np.ascontiguousarray(x, dtype=np.float64)
    return impl.segment_variances(x, int(s), polynomial_basis(s, m), int(nthreads))


def segment_covariances(x, y, s, m, nthreads=1, backend=None):
    """Detrended (f2_xx, f2_yy, f2_xy) per segment, same layout as above."""
    impl = get_backend(backend)
    x = np.ascontiguousarray(x, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    return impl.segment_covariances(x, y, int(s), polynomial_basis(s, m), int(nthreads))
