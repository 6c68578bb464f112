"""Complementary CDFs and heavy-tail models.

Conventions
-----------
* All curves are survival functions P(X > x).
* The power-law ``beta`` is the tail exponent of the survival function,
  P(X > x) = (x / x_min)^(-beta), so beta = 3 is the inverse cubic law
  and plots with slope -3 on log-log axes.
* Zeros are excluded from the Weibull likelihood; the excluded fraction is
  reported with every fit.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import ConvergenceError, DegenerateDataError, InsufficientDataError

MIN_FIT_SAMPLES = 100

# guide-for-eye parameter sets used in the published figures
OVERLAY_SETS = {
    "itt-stocks": [("stretched-exponential", a) for a in (0.4, 0.5, 0.6, 1.0)],
    "itt-crypto": [("stretched-exponential", a) for a in (0.4, 0.5, 1.0)],
    "counts-semilog": [("stretched-exponential", a) for a in (0.3, 0.4, 1.0)],
    "volume-semilog": [("stretched-exponential", a) for a in (0.3, 0.4, 1.0)],
    "counts-loglog": [("stretched-exponential", 0.4), ("exponential", 1.0), ("power-law", 3.0)],
    "volume-loglog": [("stretched-exponential", 0.4), ("exponential", 1.0), ("power-law", 3.0)],
}


@dataclass
class EcdfCurve:
    x: np.ndarray
    p: np.ndarray
    n: int


@dataclass
class DistModel:
    kind: str
    alpha: float | None = None
    x0: float | None = None
    beta: float | None = None
    x_min: float | None = None
    log_likelihood: float | None = None
    ks_distance: float | None = None
    n_used: int | None = None
    n_tail: int | None = None
    excluded_fraction: float = 0.0
    converged: bool = True

    def __post_init__(self):
        kinds = ("exponential", "stretched-exponential", "weibull", "power-law")
        if self.kind not in kinds:
            raise ValueError(f"unknown model kind {self.kind!r}")
        if self.kind == "exponential" and self.alpha is None:
            self.alpha = 1.0
        if self.kind == "stretched-exponential" and self.alpha is not None and not 0 < self.alpha <= 1:
            raise ValueError("stretched exponential needs 0 < alpha <= 1")
        if self.kind == "weibull" and self.alpha is not None and not self.alpha > 0:
            raise ValueError("Weibull needs alpha > 0")
        if self.kind == "power-law" and self.beta is not None and not self.beta > 0:
            raise ValueError("power-law tail exponent must be positive")
        for name in ("x0", "x_min"):
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise ValueError(f"{name} must be positive")

    def ccdf(self, x):
        if self.kind == "power-law":
            return powerlaw_ccdf(x, self.beta, self.x_min)
        return weibull_ccdf(x, self.alpha, self.x0)

    def report(self):
        return {k: v for k, v in asdict(self).items() if v is not None}


def ecdf_complementary(values, downsample=None) -> EcdfCurve:
    """P(X > x) at each distinct value; the largest value uses P(X >= x).

    ``downsample`` keeps about that many points, log-spaced in p (first and
    last points always kept).
    """
    v = np.asarray(values, dtype=np.float64).ravel()
    n = v.size
    if n == 0:
        raise InsufficientDataError("empty sample")
    if np.any(np.isnan(v)):
        raise ValueError("sample contains NaN")
    x, counts = np.unique(v, return_counts=True)
    greater = n - np.cumsum(counts)
    greater[-1] = counts[-1]
    p = greater / n
    if downsample is not None and x.size > downsample:
        target = np.logspace(0, np.log10(p[-1]), int(downsample))
        idx = np.searchsorted(-p, -target, side="left")
        idx = np.unique(np.concatenate(([0], np.clip(idx, 0, x.size - 1), [x.size - 1])))
        x, p = x[idx], p[idx]
    return EcdfCurve(x, p, n)


def _check_shape_scale(alpha, x0, se=False):
    if not np.isfinite(alpha) or not alpha > 0 or (se and alpha > 1):
        raise ValueError(f"alpha = {alpha} outside the model domain")
    if not np.isfinite(x0) or not x0 > 0:
        raise ValueError(f"x0 = {x0} must be positive")


def weibull_ccdf(x, alpha, x0):
    _check_shape_scale(alpha, x0)
    x = np.asarray(x, dtype=np.float64)
    if np.any(x < 0):
        raise ValueError("x must be non-negative")
    return np.exp(-(x / x0) ** alpha)


def se_ccdf(x, alpha, x0):
    """Stretched-exponential survival function exp[-(x/x0)^alpha], 0 < alpha <= 1."""
    _check_shape_scale(alpha, x0, se=True)
    return weibull_ccdf(x, alpha, x0)


def weibull_pdf(x, alpha, x0):
    """Weibull density alpha x^(alpha-1) / x0^alpha exp[-(x/x0)^alpha], x > 0."""
    _check_shape_scale(alpha, x0)
    x = np.asarray(x, dtype=np.float64)
    if np.any(x <= 0):
        raise ValueError("Weibull density is defined for x > 0")
    z = x / x0
    return alpha / x0 * z ** (alpha - 1) * np.exp(-z ** alpha)


def powerlaw_ccdf(x, beta, x_min):
    """(x / x_min)^(-beta) for x >= x_min, 1 below."""
    if not beta > 0 or not x_min > 0:
        raise ValueError("power law needs beta > 0 and x_min > 0")
    x = np.asarray(x, dtype=np.float64)
    with np.errstate(divide="ignore"):
        return np.where(x >= x_min, (np.maximum(x, x_min) / x_min) ** (-beta), 1.0)


def _weibull_score(alpha, logx, lmax, mean_log):
    w = np.exp(alpha * (logx - lmax))
    return np.dot(w, logx) / w.sum() - 1.0 / alpha - mean_log


def fit_se_mle(values, xtol=1e-12, maxiter=200) -> DistModel:
    """Weibull / stretched-exponential maximum likelihood for (alpha, x0).

    Solves the profile-likelihood equation in alpha by bracketing + Brent;
    x0 follows in closed form. Zeros are dropped and reported.
    """
    v = np.asarray(values, dtype=np.float64).ravel()
    if np.any(v < 0) or not np.all(np.isfinite(v)):
        raise ValueError("values must be finite and non-negative")
    pos = v[v > 0]
    excluded = 1.0 - pos.size / v.size if v.size else 0.0
    if pos.size < MIN_FIT_SAMPLES:
        raise InsufficientDataError(f"{pos.size} positive samples; need {MIN_FIT_SAMPLES}")
    logx = np.log(pos)
    if np.ptp(logx) == 0:
        raise DegenerateDataError("all positive samples are identical")
    lmax = logx.max()
    mean_log = logx.mean()
    lo, hi = 0.05, 5.0
    f_lo = _weibull_score(lo, logx, lmax, mean_log)
    f_hi = _weibull_score(hi, logx, lmax, mean_log)
    for _ in range(60):
        if f_lo < 0:
            break
        lo /= 2
        f_lo = _weibull_score(lo, logx, lmax, mean_log)
    for _ in range(60):
        if f_hi > 0:
            break
        hi *= 2
        f_hi = _weibull_score(hi, logx, lmax, mean_log)
    if not (f_lo < 0 < f_hi):
        raise ConvergenceError("could not bracket the Weibull shape parameter")
    alpha, info = brentq(_weibull_score, lo, hi, args=(logx, lmax, mean_log), xtol=xtol,
                         maxiter=maxiter, full_output=True, disp=False)
    if not info.converged:
        raise ConvergenceError(f"shape solve did not converge in {maxiter} iterations")
    x0 = float(np.exp(lmax + np.log(np.mean(np.exp(alpha * (logx - lmax)))) / alpha))
    n = pos.size
    z = np.exp(alpha * (logx - np.log(x0)))
    loglik = n * np.log(alpha) - n * alpha * np.log(x0) + (alpha - 1) * logx.sum() - z.sum()
    kind = "stretched-exponential" if alpha <= 1 else "weibull"
    return DistModel(kind, alpha=float(alpha), x0=x0, log_likelihood=float(loglik), n_used=n,
                     excluded_fraction=float(excluded), converged=True)


def hill_estimate(tail, x_min):
    """Continuous MLE of the survival-function exponent for x > x_min."""
    tail = np.asarray(tail, dtype=np.float64)
    s = np.sum(np.log(tail / x_min))
    if not s > 0:
        raise DegenerateDataError("tail has no spread above x_min")
    return tail.size / s


def _ks_distance(tail_sorted, beta, x_min):
    n = tail_sorted.size
    cdf = 1.0 - (tail_sorted / x_min) ** (-beta)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - cdf), np.max(cdf - (i - 1) / n)))


def _tail_fit(v_sorted, x_min):
    start = np.searchsorted(v_sorted, x_min, side="right")
    tail = v_sorted[start:]
    if tail.size < MIN_FIT_SAMPLES:
        raise InsufficientDataError(f"{tail.size} samples above x_min = {x_min:g}; "
                                    f"need {MIN_FIT_SAMPLES}")
    if tail[0] == tail[-1]:
        raise DegenerateDataError("all tail values are equal")
    beta = hill_estimate(tail, x_min)
    return beta, _ks_distance(tail, beta, x_min), tail.size


def fit_powerlaw_tail(values, x_min=None, n_candidates=60) -> DistModel:
    """Power-law tail fit: Hill MLE above x_min, x_min by minimum KS distance if not given."""
    v = np.sort(np.asarray(values, dtype=np.float64).ravel())
    if not np.all(np.isfinite(v)):
        raise ValueError("values must be finite")
    if x_min is not None:
        if not x_min > 0:
            raise ValueError("x_min must be positive")
        beta, ks, nt = _tail_fit(v, float(x_min))
        return DistModel("power-law", beta=float(beta), x_min=float(x_min), ks_distance=ks,
                         n_tail=nt, n_used=v.size)
    uniq = np.unique(v[v > 0])
    if uniq.size == 0:
        raise InsufficientDataError("no positive values")
    # candidates must leave at least MIN_FIT_SAMPLES strictly above them
    limit = np.searchsorted(uniq, v[-MIN_FIT_SAMPLES] if v.size >= MIN_FIT_SAMPLES else np.inf) - 1
    if limit < 0:
        raise InsufficientDataError(f"fewer than {MIN_FIT_SAMPLES} tail samples for any x_min")
    pick = np.unique(np.round(np.geomspace(1, limit + 1, min(n_candidates, limit + 1))).astype(int) - 1)
    best = None
    for c in uniq[pick]:
        try:
            beta, ks, nt = _tail_fit(v, float(c))
        except (InsufficientDataError, DegenerateDataError):
            continue
        if best is None or ks < best[1]:
            best = (beta, ks, nt, float(c))
    if best is None:
        raise InsufficientDataError("no admissible x_min candidate")
    beta, ks, nt, c = best
    return DistModel("power-law", beta=float(beta), x_min=c, ks_distance=ks, n_tail=nt, n_used=v.size)


def anchor_point(curve: EcdfCurve, quantile=0.5):
    """(x, p) on the empirical curve at the given quantile of the sample."""
    if not 0 < quantile < 1:
        raise ValueError("anchor quantile must lie in (0, 1)")
    i = int(np.searchsorted(-curve.p, -(1.0 - quantile), side="left"))
    i = min(i, curve.x.size - 1)
    return float(curve.x[i]), float(curve.p[i])


def calibrate(model: DistModel, curve: EcdfCurve, quantile=0.5) -> DistModel:
    """Set the model's scale so its CCDF passes through the empirical anchor point."""
    xa, pa = anchor_point(curve, quantile)
    if not 0 < pa < 1 or not xa > 0:
        raise DegenerateDataError(f"anchor point ({xa}, {pa}) unusable for calibration")
    if model.kind == "power-law":
        return DistModel("power-law", beta=model.beta, x_min=xa * pa ** (1.0 / model.beta))
    x0 = xa / (-np.log(pa)) ** (1.0 / model.alpha)
    return DistModel(model.kind, alpha=model.alpha, x0=float(x0))


def model_overlay(model: DistModel, x_grid, curve: EcdfCurve | None = None, anchor_quantile=0.5):
    """Model CCDF on ``x_grid``; calibrated to ``curve`` when the scale is unset."""
    x = np.asarray(x_grid, dtype=np.float64)
    if x.size == 0:
        raise ValueError("empty grid")
    scale = model.x_min if model.kind == "power-law" else model.x0
    if scale is None:
        if curve is None:
            raise ValueError("model has no scale; pass an empirical curve for calibration")
        model = calibrate(model, curve, anchor_quantile)
    return model.ccdf(x), model


def overlay_models(set_name):
    """Unscaled guide-for-eye models for a named figure style."""
    try:
        entries = OVERLAY_SETS[set_name]
    except KeyError:
        raise ValueError(f"unknown overlay set {set_name!r}; choose from {sorted(OVERLAY_SETS)}") from None
    out = []
    for kind, par in entries:
        if kind == "power-law":
            out.append(DistModel(kind, beta=par))
        else:
            out.append(DistModel(kind, alpha=par))
    return out
