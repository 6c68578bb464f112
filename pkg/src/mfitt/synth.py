"""Seeded synthetic signals with analytically known properties, and surrogates.

RNG: every generator draws from ``numpy.random.Generator(PCG64(seed))``.
Sub-streams for parallel work come from ``SeedSequence(seed).spawn(k)``
(see :func:`substreams`). This is the only place randomness is created.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.signal import lfilter

KINDS = ("fgn", "binomial-cascade", "weibull-renewal", "pareto", "ar1", "white")
_ALIASES = {"cascade": "binomial-cascade", "weibull": "weibull-renewal"}


def make_rng(seed):
    return np.random.Generator(np.random.PCG64(seed))


def substreams(seed, k):
    return [np.random.Generator(np.random.PCG64(ss)) for ss in np.random.SeedSequence(seed).spawn(k)]


@dataclass
class GeneratorSpec:
    kind: str
    length: int | None = None
    seed: int = 0
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        self.kind = _ALIASES.get(self.kind, self.kind)
        if self.kind not in KINDS:
            raise ValueError(f"unknown generator kind {self.kind!r}; choose from {', '.join(KINDS)}")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        p = self.params
        if self.kind == "binomial-cascade":
            levels = p.get("levels")
            if levels is None:
                if self.length is None or self.length < 1 or self.length & (self.length - 1):
                    raise ValueError("cascade length must be a power of two (or give levels)")
                p["levels"] = int(self.length).bit_length() - 1
            elif self.length is not None and self.length != 2 ** int(levels):
                raise ValueError(f"cascade length {self.length} != 2^levels = {2 ** int(levels)}")
            self.length = 2 ** int(p["levels"])
        if self.length is None or int(self.length) < 1:
            raise ValueError("length must be a positive integer")
        self.length = int(self.length)
        self._check()

    def _check(self):
        p = self.params
        k = self.kind
        if k == "fgn" and not 0 < p.get("H", 0.5) < 1:
            raise ValueError("H must lie in (0, 1)")
        if k == "binomial-cascade" and not 0 < p.get("p", 0.3) < 1:
            raise ValueError("p must lie in (0, 1)")
        if k == "ar1" and not -1 < p.get("phi", 0.5) < 1:
            raise ValueError("phi must lie in (-1, 1)")
        if k == "weibull-renewal" and not (p.get("alpha", 1.0) > 0 and p.get("x0", 1.0) > 0):
            raise ValueError("Weibull alpha and x0 must be positive")
        if k == "pareto" and not (p.get("beta", 3.0) > 0 and p.get("x_min", 1.0) > 0):
            raise ValueError("Pareto beta and x_min must be positive")

    def describe(self):
        kv = " ".join(f"{k}={v}" for k, v in sorted(self.params.items()))
        return f"kind={self.kind} length={self.length} seed={self.seed} {kv}".strip()


def fgn_autocovariance(H, k):
    k = np.abs(np.asarray(k, dtype=np.float64))
    return 0.5 * ((k + 1) ** (2 * H) - 2 * k ** (2 * H) + np.abs(k - 1) ** (2 * H))


def fgn(n, H, rng):
    """Unit-variance fractional Gaussian noise by circulant embedding (Davies-Harte).

    Exact in distribution: the embedding of the fGn autocovariance is
    non-negative definite for every H in (0, 1).
    """
    if n == 1:
        return rng.standard_normal(1)
    gamma = fgn_autocovariance(H, np.arange(n))
    row = np.concatenate([gamma, gamma[-2:0:-1]])
    lam = np.fft.rfft(row).real
    m = row.size
    if np.min(lam) < -1e-10 * np.max(lam):
        raise ValueError(f"circulant embedding not non-negative definite for H={H}, n={n}")
    lam = np.clip(lam, 0.0, None)
    # complex Gaussian vector with Hermitian symmetry via rfft layout
    k = lam.size
    z = rng.standard_normal(k) + 1j * rng.standard_normal(k)
    z[0] = z[0].real * np.sqrt(2.0)
    if m % 2 == 0:
        z[-1] = z[-1].real * np.sqrt(2.0)
    w = np.fft.irfft(np.sqrt(lam / (2.0 * m)) * z, n=m) * m
    return w[:n]


def binomial_cascade(levels, p):
    """Deterministic binomial multiplicative measure, rescaled to mean 1.

    Cell k (of 2^levels) carries p^(levels - n1(k)) (1 - p)^n1(k), where n1 is
    the number of set bits in k; multiplying by 2^levels gives a density.
    """
    n = 2 ** int(levels)
    k = np.arange(n, dtype=np.uint64)
    ones = np.zeros(n, dtype=np.int64)
    for b in range(int(levels)):
        ones += ((k >> np.uint64(b)) & np.uint64(1)).astype(np.int64)
    return p ** (levels - ones) * (1.0 - p) ** ones * 2.0 ** levels


def weibull_renewal(n, alpha, x0, rng):
    """i.i.d. Weibull waiting times by inverse-CDF sampling."""
    u = rng.random(n)
    return x0 * (-np.log1p(-u)) ** (1.0 / alpha)


def pareto(n, beta, x_min, rng):
    """Pareto draws with survival function (x / x_min)^(-beta) for x >= x_min."""
    u = rng.random(n)
    return x_min * (1.0 - u) ** (-1.0 / beta)


def ar1(n, phi, rng):
    """Stationary AR(1) with unit innovation variance."""
    e = rng.standard_normal(n)
    x0 = e[0] / np.sqrt(1.0 - phi * phi)
    out, _ = lfilter([1.0], [1.0, -phi], e[1:], zi=[phi * x0])
    return np.concatenate(([x0], out))


def generate(spec: GeneratorSpec) -> np.ndarray:
    p = spec.params
    rng = make_rng(int(spec.seed))
    n = spec.length
    if spec.kind == "fgn":
        return fgn(n, p.get("H", 0.5), rng)
    if spec.kind == "binomial-cascade":
        return binomial_cascade(p["levels"], p.get("p", 0.3))
    if spec.kind == "weibull-renewal":
        return weibull_renewal(n, p.get("alpha", 1.0), p.get("x0", 1.0), rng)
    if spec.kind == "pareto":
        return pareto(n, p.get("beta", 3.0), p.get("x_min", 1.0), rng)
    if spec.kind == "ar1":
        return ar1(n, p.get("phi", 0.5), rng)
    return rng.standard_normal(n)


def shuffle_surrogate(values, seed=0):
    """Uniform random permutation of ``values`` (Fisher-Yates via PCG64)."""
    x = np.asarray(values)
    return make_rng(int(seed)).permutation(x)


def cascade_tau(p, q):
    q = np.asarray(q, dtype=np.float64)
    return -np.log2(p ** q + (1.0 - p) ** q)


def cascade_alpha(p, q):
    """Analytic Hoelder exponent alpha(q) = tau'(q) of the binomial cascade."""
    q = np.asarray(q, dtype=np.float64)
    a, b = p ** q, (1.0 - p) ** q
    return -(a * np.log(p) + b * np.log1p(-p)) / ((a + b) * np.log(2.0))


def cascade_analytic_hq(p, q):
    """h(q) = (1 + tau(q)) / q; at q = 0 the limit tau'(0) = -(log2 p + log2(1-p)) / 2."""
    if not 0 < p < 1:
        raise ValueError("p must lie in (0, 1)")
    q = np.asarray(q, dtype=np.float64)
    with np.errstate(invalid="ignore", divide="ignore"):
        h = (1.0 + cascade_tau(p, q)) / q
    h0 = -(np.log2(p) + np.log2(1.0 - p)) / 2.0
    h = np.where(q == 0, h0, h)
    return float(h) if h.ndim == 0 else h
