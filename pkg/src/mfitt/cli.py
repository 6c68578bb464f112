"""``mfitt`` command line.

Series-valued commands read a table (see :mod:`mfitt.textio`) from ``--in``,
or a raw trade file when ``--ticks`` is given, in which case ``--quantity``
picks the derived series (itt, or the binned n, v, r, absr at ``--dt``).
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import correlation, deseason, distfit, ingest, mfdcca, mfdfa, series, synth, textio
from .errors import MfittError

QUANTITIES = ("itt", "n", "v", "r", "absr")


class UsageError(Exception):
    pass


# ---------------------------------------------------------------- grid syntax

def parse_grid(text, integer=False):
    """``lo:hi:step`` (inclusive), ``lo:hi:xN`` (N log-spaced per decade) or ``a,b,c``."""
    text = text.strip()
    try:
        if ":" not in text:
            vals = np.array([float(v) for v in text.split(",") if v.strip()])
        else:
            parts = text.split(":")
            if len(parts) != 3:
                raise ValueError
            lo, hi = float(parts[0]), float(parts[1])
            if parts[2].startswith("x"):
                per = int(parts[2][1:])
                if integer:
                    vals = mfdfa.scale_grid(int(np.ceil(lo)), int(np.floor(hi)), per).astype(float)
                else:
                    if not 0 < lo <= hi or per < 1:
                        raise ValueError
                    k = int(np.floor(np.log10(hi / lo) * per + 1e-9))
                    vals = lo * 10.0 ** (np.arange(k + 1) / per)
            else:
                step = float(parts[2])
                if step <= 0 or hi < lo:
                    raise ValueError
                n = int(np.floor((hi - lo) / step + 1e-9))
                vals = np.round(lo + step * np.arange(n + 1), 12)
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"bad grid {text!r}: use lo:hi:step, lo:hi:xN or a comma list") from None
    if vals.size == 0:
        raise UsageError(f"grid {text!r} is empty")
    if integer:
        if np.any(vals != np.round(vals)):
            raise UsageError(f"grid {text!r} must contain integers")
        return np.unique(vals.astype(np.int64))
    return vals


def parse_range(text):
    try:
        lo, hi = (float(v) for v in text.split(":"))
    except ValueError:
        raise UsageError(f"bad range {text!r}: use lo:hi") from None
    return lo, hi


def parse_duration(text):
    """Seconds, with an optional unit suffix s, min, h, d, w or mo (30 days)."""
    units = {"mo": series.MONTH, "w": 7 * series.DAY, "d": series.DAY, "h": 3600.0,
             "min": 60.0, "s": 1.0}
    t = text.strip()
    for suffix, mult in units.items():
        if t.endswith(suffix):
            try:
                return float(t[: -len(suffix)]) * mult
            except ValueError:
                break
    try:
        return float(t)
    except ValueError:
        raise UsageError(f"bad duration {text!r}") from None


# ---------------------------------------------------------------- input

def _format_spec(a):
    return ingest.FormatSpec(delimiter=a.delim, columns=tuple(a.columns.split(",")),
                             ts_unit=a.ts_unit, header=a.header)


def _load_ticks(a, path=None):
    path = path or a.input
    if path == "-":
        path = sys.stdin
    elif not os.path.exists(path):
        raise UsageError(f"input file {path!r} not found")
    ticks = ingest.read_trades(path, _format_spec(a))
    return ingest.validate_ordering(ticks, a.order)


def _derive(ticks, quantity, dt):
    """(timestamps, values, meta) for a derived quantity of a trade series."""
    if quantity == "itt":
        itt = series.extract_itt(ticks)
        return itt.timestamps, itt.values, {"quantity": "itt", "mean_itt": float(np.mean(itt.values))}
    b = series.bin_ticks(ticks, dt)
    return b.bin_timestamps, b.field(quantity), {"quantity": quantity, "dt": dt}


def _load_series(a, path=None, column=None):
    """(timestamps or None, values, meta) from --in (table or --ticks)."""
    path = path or a.input
    column = column if column is not None else a.column
    if getattr(a, "ticks", False):
        return _derive(_load_ticks(a, path), a.quantity, a.dt)
    if path != "-" and not os.path.exists(path):
        raise UsageError(f"input file {path!r} not found")
    tab = textio.read_table(path)
    vals = tab.values(column)
    meta = {k: tab.meta[k] for k in ("quantity", "mean_itt", "dt") if k in tab.meta}
    return tab.timestamps(), vals, meta


def _maybe_deseason(a, ts, vals, meta):
    mode = getattr(a, "deseason", None)
    if not mode:
        return vals
    if ts is None:
        raise UsageError("--deseason needs a timestamp column in the input")
    pattern = (deseason.read_pattern(a.pattern) if getattr(a, "pattern", None)
               else deseason.estimate_pattern(vals, ts, mode))
    meta["deseasonalized"] = mode
    return deseason.deseasonalize(vals, ts, pattern, mode)


def _out_path(a, suffix):
    if a.out in (None, "-"):
        return "-"
    return f"{a.out}.{suffix}" if suffix else a.out


def _config(a, **extra):
    skip = {"func", "cmd"}
    cfg = {k: v for k, v in vars(a).items() if k not in skip and v is not None}
    cfg.update(extra)
    return cfg


def _mfdfa_config(a, default_q=None):
    q = parse_grid(a.q) if a.q else (default_q if default_q is not None else mfdfa.DEFAULT_Q)
    s = parse_grid(a.scales, integer=True) if a.scales else None
    fit = parse_range(a.fit) if a.fit else None
    return mfdfa.MfdfaConfig(q, s, a.m, fit, a.eps, a.per_decade, a.threads, a.backend)


# ---------------------------------------------------------------- commands

def cmd_stats(a):
    if a.ticks or a.input_kind == "ticks":
        ticks = _load_ticks(a)
        itt = series.extract_itt(ticks)
        st = series.compute_stats(itt.values)
        report = {"trades": len(ticks), "T": st.count, "mean_dt": st.mean, "std_dt": st.std,
                  "chi": st.zero_fraction, "first_timestamp": float(ticks.timestamps[0]),
                  "last_timestamp": float(ticks.timestamps[-1])}
    else:
        _, vals, _ = _load_series(a)
        st = series.compute_stats(vals)
        report = {"T": st.count, "mean": st.mean, "std": st.std, "zero_fraction": st.zero_fraction}
    textio.write_report(_out_path(a, ""), report, "stats", _config(a), a.json)


def cmd_itt(a):
    ts, vals, meta = _derive(_load_ticks(a), "itt", a.dt)
    textio.write_table(_out_path(a, ""), {"timestamp": ts, "itt_seconds": vals}, "itt",
                       _config(a, **meta), a.json)


def cmd_bin(a):
    b = series.bin_ticks(_load_ticks(a), a.dt)
    cols = {"timestamp": b.bin_timestamps, "n": b.n, "v": b.v, "r": b.r, "absr": b.abs_r}
    textio.write_table(_out_path(a, ""), cols, "bin", _config(a), a.json)


def cmd_rolling(a):
    if a.quantity == "price":
        ticks = _load_ticks(a)
        ts, vals, meta = ticks.timestamps, ticks.prices, {"quantity": "price"}
    else:
        ts, vals, meta = _derive(_load_ticks(a), a.quantity, a.dt)
    res = series.rolling_stat(vals, ts, a.statistic, a.window, a.step,
                              resolution=a.dt if a.quantity in QUANTITIES[1:] else None)
    cols = {"window_end": res.window_end_times, f"{a.statistic}_{meta['quantity']}": res.values}
    textio.write_table(_out_path(a, ""), cols, "rolling", _config(a, **meta), a.json)


def cmd_deseason(a):
    ts, vals, meta = _load_series(a)
    if ts is None:
        raise UsageError("deseason needs a timestamp column in the input")
    pattern = (deseason.read_pattern(a.pattern) if a.pattern
               else deseason.estimate_pattern(vals, ts, a.mode))
    out = deseason.deseasonalize(vals, ts, pattern, a.mode)
    if a.pattern_out:
        deseason.write_pattern(pattern, a.pattern_out)
    meta["deseasonalized"] = a.mode
    textio.write_table(_out_path(a, ""), {"timestamp": ts, "value": out}, "deseason",
                       _config(a, **meta), a.json)


def cmd_acf(a):
    ts, vals, meta = _load_series(a)
    vals = _maybe_deseason(a, ts, vals, meta)
    unit = a.time_unit
    if unit is None:
        if "mean_itt" in meta:
            unit = float(meta["mean_itt"])
        elif "dt" in meta:
            unit = float(meta["dt"])
        else:
            unit = 1.0
    lags = parse_grid(a.lags, integer=True) if a.lags else None
    if lags is None and a.max_lag is None:
        a.max_lag = max(1, vals.size // 10)
    res = correlation.acf(vals, a.max_lag, a.estimator, lags, a.per_decade, unit)
    cols = {"lag": res.lags, "tau_seconds": res.tau, "C": res.c}
    textio.write_table(_out_path(a, ""), cols, "acf", _config(a, time_unit=unit, **meta), a.json)


def _surface_columns(surface):
    nq, ns = surface.F.shape
    return {"q": np.repeat(surface.q_grid, ns), "s": np.tile(surface.s_grid, nq),
            "F": surface.F.ravel(), "segments": np.tile(surface.segment_counts, nq),
            "skipped": surface.skipped_segments.ravel()}


def cmd_mfdfa(a):
    ts, vals, meta = _load_series(a)
    vals = _maybe_deseason(a, ts, vals, meta)
    if a.shuffle is not None:
        vals = synth.shuffle_surrogate(vals, a.shuffle)
        meta["shuffled_seed"] = a.shuffle
    cfg = _mfdfa_config(a)
    surface, hurst, spec = mfdfa.mfdfa(vals, cfg)
    conf = _config(a, fit_range_used=hurst.fit_range, n=vals.size, **meta)
    textio.write_table(_out_path(a, "surface.txt"), _surface_columns(surface), "mfdfa surface",
                       conf, a.json)
    textio.write_table(_out_path(a, "hq.txt"), {"q": hurst.q_grid, "h": hurst.h, "r2": hurst.fit_r2},
                       "mfdfa h(q)", conf, a.json)
    textio.write_table(_out_path(a, "falpha.txt"), {"alpha": spec.alpha, "f_alpha": spec.f_alpha},
                       "mfdfa f(alpha)", conf, a.json)
    summary = {"n": vals.size, "h2": _h_at(hurst, 2.0), "alpha_at_zero": spec.alpha_at_zero,
               "width": spec.width, "asymmetry": spec.asymmetry}
    if a.out not in (None, "-"):
        textio.write_report(_out_path(a, "summary.txt"), summary, "mfdfa summary", conf, a.json)


def _h_at(hurst, q):
    try:
        return hurst.at(q)
    except KeyError:
        return float("nan")


def _load_pair(a):
    ts, x, mx = _load_series(a)
    ts2, y, my = _load_series(a, a.input2, a.column2 if a.column2 is not None else a.column)
    x = _maybe_deseason(a, ts, x, mx)
    y = _maybe_deseason(a, ts2, y, my)
    if x.shape != y.shape:
        raise UsageError(f"series lengths differ ({x.size} vs {y.size})")
    if ts is not None and ts2 is not None and not np.array_equal(ts, ts2):
        raise UsageError("the two series are not on the same time grid")
    return ts, x, y


def cmd_mfdcca(a):
    _, x, y = _load_pair(a)
    cfg = _mfdfa_config(a)
    surface = mfdcca.cross_fluctuation(x, y, cfg)
    textio.write_table(_out_path(a, ""), _surface_columns(surface), "mfdcca",
                       _config(a, n=x.size), a.json)


def cmd_rho(a):
    ts, x, y = _load_pair(a)
    if a.rolling:
        if ts is None:
            raise UsageError("--rolling needs timestamps in the input")
        res = mfdcca.rolling_rho(x, y, ts, a.rho_q, a.s, a.window, a.step, a.m, a.eps,
                                 threads=a.threads, backend=a.backend, form=a.form,
                                 resolution=_resolution(ts))
        cols = {"window_end": res.window_end_times, "rho": res.rho}
    else:
        cfg = _mfdfa_config(a)
        res = mfdcca.rho_q(x, y, cfg, a.rho_q, a.form)
        cols = {"s": res.s_grid, "rho": res.rho}
    if res.out_of_bounds:
        print(f"mfitt: warning: |rho_{a.rho_q:g}| exceeds 1 somewhere", file=sys.stderr)
    textio.write_table(_out_path(a, ""), cols, "rho", _config(a, out_of_bounds=res.out_of_bounds),
                       a.json)


def _resolution(ts):
    # binned series sit on a regular grid; report its spacing
    d = np.diff(ts)
    return float(d[0]) if d.size and np.all(d == d[0]) and d[0] > 0 else None


def cmd_cdf(a):
    _, vals, meta = _load_series(a)
    if a.normalize:
        vals = series.normalize_by_sigma(vals)
    curve = distfit.ecdf_complementary(vals, a.downsample)
    cols = {"x": curve.x, "ccdf": curve.p}
    models = []
    if a.overlay:
        for model in distfit.overlay_models(a.overlay):
            y, fitted = distfit.model_overlay(model, curve.x, curve, a.anchor)
            par = fitted.beta if fitted.kind == "power-law" else fitted.alpha
            cols[f"{fitted.kind}_{par:g}"] = y
            models.append(fitted.report())
    textio.write_table(_out_path(a, ""), cols, "cdf",
                       _config(a, n=curve.n, **meta, **{f"model{i}": _kv(m) for i, m in enumerate(models)}),
                       a.json)


def _kv(d):
    return " ".join(f"{k}:{v}" for k, v in d.items())


def cmd_fit(a):
    _, vals, meta = _load_series(a)
    if a.normalize:
        vals = series.normalize_by_sigma(vals)
    report = {}
    if a.model in ("se", "both"):
        for k, v in distfit.fit_se_mle(vals).report().items():
            report[f"se_{k}"] = v
    if a.model in ("powerlaw", "both"):
        for k, v in distfit.fit_powerlaw_tail(vals, a.xmin).report().items():
            report[f"powerlaw_{k}"] = v
    textio.write_report(_out_path(a, ""), report, "fit", _config(a, **meta), a.json)


_SYNTH_PARAMS = ("H", "p", "levels", "alpha", "x0", "beta", "x_min", "phi")


def cmd_synth(a):
    params = {k: getattr(a, k) for k in _SYNTH_PARAMS if getattr(a, k) is not None}
    if "levels" in params:
        params["levels"] = int(params["levels"])
    spec = synth.GeneratorSpec(a.kind, a.length, a.seed, params)
    x = synth.generate(spec)
    conf = {"spec": spec.describe()}
    textio.write_table(_out_path(a, ""), {"value": x}, "synth", conf, a.json)


def cmd_surrogate(a):
    ts, vals, meta = _load_series(a)
    out = synth.shuffle_surrogate(vals, a.seed)
    cols = {"value": out} if ts is None else {"timestamp": ts, "value": out}
    textio.write_table(_out_path(a, ""), cols, "surrogate", _config(a, **meta), a.json)


# ---------------------------------------------------------------- parser

def _add_io(p, ticks_default=False):
    p.add_argument("--in", dest="input", default="-", help="input path ('-' for stdin)")
    p.add_argument("--out", default="-", help="output path or prefix ('-' for stdout)")
    p.add_argument("--json", action="store_true", help="write JSON objects instead of text")
    g = p.add_argument_group("trade file format")
    g.add_argument("--delim", default=",")
    g.add_argument("--ts-unit", default="s", choices=("s", "ms", "us"))
    g.add_argument("--columns", default="timestamp,price,volume")
    g.add_argument("--header", action="store_true", help="first line of the trade file is a header")
    g.add_argument("--order", default="reject", choices=("reject", "sort"),
                   help="policy for out-of-order timestamps")
    g.add_argument("--dt", type=float, default=10.0, help="bin width in seconds (default 10)")
    if not ticks_default:
        g.add_argument("--ticks", action="store_true", help="--in is a trade file")
        g.add_argument("--quantity", default="itt", choices=QUANTITIES,
                       help="series derived from a trade file")
        p.add_argument("--column", default=None, help="column name or index of a table input")


def _add_mfdfa(p):
    p.add_argument("--q", default=None, help="q grid, e.g. -4:4:0.25")
    p.add_argument("--scales", default=None, help="scale grid, e.g. 10:1e4:x20")
    p.add_argument("--fit", default=None, help="fit range lo:hi in samples")
    p.add_argument("-m", type=int, default=2, help="detrending polynomial degree")
    p.add_argument("--eps", type=float, default=mfdfa.DEFAULT_EPS)
    p.add_argument("--per-decade", type=int, default=mfdfa.SCALES_PER_DECADE)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--backend", default=None, choices=("compiled", "python"))


def _add_deseason(p):
    p.add_argument("--deseason", default=None, choices=deseason.MODES)
    p.add_argument("--pattern", default=None, help="reuse a pattern saved with deseason --pattern-out")


def build_parser():
    ap = argparse.ArgumentParser(prog="mfitt", description="Inter-transaction time analysis toolkit")
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("stats", help="summary statistics (T, mean, std, null fraction)")
    _add_io(p)
    p.add_argument("--input-kind", default="ticks", choices=("ticks", "series"))
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("itt", help="inter-transaction times from a trade file")
    _add_io(p, ticks_default=True)
    p.set_defaults(func=cmd_itt)

    p = sub.add_parser("bin", help="trade counts, volume and log returns in fixed bins")
    _add_io(p, ticks_default=True)
    p.set_defaults(func=cmd_bin)

    p = sub.add_parser("rolling", help="rolling-window mean statistics")
    _add_io(p, ticks_default=True)
    p.add_argument("--quantity", default="itt", choices=("price",) + QUANTITIES)
    p.add_argument("--statistic", default="mean", choices=("mean", "mean-abs"))
    p.add_argument("--window", type=parse_duration, default=series.MONTH)
    p.add_argument("--step", type=parse_duration, default=series.DAY)
    p.set_defaults(func=cmd_rolling)

    p = sub.add_parser("deseason", help="remove intraday and weekly patterns")
    _add_io(p)
    p.add_argument("--mode", default="daily+weekly", choices=deseason.MODES)
    p.add_argument("--pattern", default=None, help="apply a saved pattern instead of estimating")
    p.add_argument("--pattern-out", default=None, help="save the pattern as PREFIX.daily/.weekly.txt")
    p.set_defaults(func=cmd_deseason)

    p = sub.add_parser("acf", help="autocorrelation on log-spaced lags")
    _add_io(p)
    _add_deseason(p)
    p.add_argument("--max-lag", type=int, default=None, help="largest lag (default N/10)")
    p.add_argument("--lags", default=None, help="explicit lag grid")
    p.add_argument("--per-decade", type=int, default=25)
    p.add_argument("--estimator", default="standard", choices=("standard", "raw"))
    p.add_argument("--time-unit", type=float, default=None,
                   help="seconds per lag (default: mean ITT for ITT input, dt for binned input)")
    p.set_defaults(func=cmd_acf)

    p = sub.add_parser("mfdfa", help="fluctuation functions, h(q) and f(alpha)")
    _add_io(p)
    _add_deseason(p)
    _add_mfdfa(p)
    p.add_argument("--shuffle", type=int, default=None, metavar="SEED",
                   help="analyse a shuffled surrogate")
    p.set_defaults(func=cmd_mfdfa)

    for name, fn, hlp in (("mfdcca", cmd_mfdcca, "cross fluctuation functions of two series"),
                          ("rho", cmd_rho, "q-dependent detrended cross-correlation coefficient")):
        p = sub.add_parser(name, help=hlp)
        _add_io(p)
        p.add_argument("--in2", dest="input2", required=True, help="second series")
        p.add_argument("--column2", default=None, help="column of the second series (default --column)")
        _add_deseason(p)
        _add_mfdfa(p)
        if name == "rho":
            p.add_argument("--rho-q", type=float, default=2.0)
            p.add_argument("--form", default="moment", choices=mfdcca.RHO_FORMS)
            p.add_argument("--rolling", action="store_true")
            p.add_argument("-s", type=int, default=60, help="scale in samples for --rolling")
            p.add_argument("--window", type=parse_duration, default=series.MONTH)
            p.add_argument("--step", type=parse_duration, default=series.DAY)
        p.set_defaults(func=fn)

    p = sub.add_parser("cdf", help="complementary empirical CDF with model overlays")
    _add_io(p)
    p.add_argument("--normalize", action="store_true", help="divide by the standard deviation")
    p.add_argument("--downsample", type=int, default=None)
    p.add_argument("--overlay", default=None, choices=sorted(distfit.OVERLAY_SETS))
    p.add_argument("--anchor", type=float, default=0.5, help="calibration quantile for overlays")
    p.set_defaults(func=cmd_cdf)

    p = sub.add_parser("fit", help="stretched-exponential MLE and power-law tail fit")
    _add_io(p)
    p.add_argument("--model", default="both", choices=("se", "powerlaw", "both"))
    p.add_argument("--xmin", type=float, default=None, help="fixed power-law threshold")
    p.add_argument("--normalize", action="store_true")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("synth", help="seeded synthetic series")
    p.add_argument("--kind", required=True)
    p.add_argument("--length", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="-")
    p.add_argument("--json", action="store_true")
    for k in _SYNTH_PARAMS:
        p.add_argument(f"--{k.replace('_', '-')}", dest=k, type=float, default=None)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("surrogate", help="shuffled surrogate of a series")
    _add_io(p)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_surrogate)
    return ap


_VALUE_FLAGS = ("--q", "--scales", "--lags", "--fit")


def _glue_negative_values(argv):
    # let "--q -4:4:0.25" through argparse, which would read -4:... as a flag
    out = []
    it = iter(argv)
    for tok in it:
        if tok in _VALUE_FLAGS:
            nxt = next(it, None)
            out.append(tok if nxt is None else f"{tok}={nxt}")
        else:
            out.append(tok)
    return out


def main(argv=None):
    ap = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        a = ap.parse_args(_glue_negative_values(argv))
    except SystemExit as e:
        return int(e.code or 0)
    try:
        a.func(a)
    except (MfittError, UsageError, ValueError, KeyError, OSError) as e:
        msg = e.args[0] if isinstance(e, KeyError) and e.args else e
        print(f"mfitt {a.cmd}: error: {msg}", file=sys.stderr)
        return 1
    except BrokenPipeError:
        return 0
    return 0


if __name__ == "__main__":
    sys.exit(main())
