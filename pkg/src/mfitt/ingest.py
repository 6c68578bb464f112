"""Parsing and validation of tick-by-tick trade files.

A trade file is delimited text with one trade per row. The column layout,
delimiter, header presence and timestamp unit are described by a
:class:`FormatSpec`. Timestamps are converted to float seconds since the Unix
epoch; float64 keeps sub-microsecond resolution for present-day epochs, and
no extra resolution is invented beyond what the file states.
"""

from __future__ import annotations

import io
import os
import re
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np
import pandas as pd

from .errors import InsufficientDataError, OrderingError, ParseError

TS_UNITS = {"s": 1, "ms": 1_000, "us": 1_000_000}
REQUIRED_COLUMNS = ("timestamp", "price", "volume")
_EXACT_INT_LIMIT = 2.0 ** 53
# year ~5138; anything larger almost always means a wrong --ts-unit
_MAX_EPOCH_SECONDS = 1e11


@dataclass(frozen=True)
class FormatSpec:
    delimiter: str = ","
    columns: tuple[str, ...] = REQUIRED_COLUMNS
    ts_unit: str = "s"
    header: bool = False

    def __post_init__(self):
        if self.ts_unit in ("µs", "μs"):
            object.__setattr__(self, "ts_unit", "us")
        if self.ts_unit not in TS_UNITS:
            raise ValueError(f"unknown timestamp unit {self.ts_unit!r}; use s, ms or us")
        cols = tuple(c.strip() for c in self.columns)
        object.__setattr__(self, "columns", cols)
        missing = [c for c in REQUIRED_COLUMNS if c not in cols]
        if missing:
            raise ValueError(f"column layout lacks {', '.join(missing)}")
        for c in REQUIRED_COLUMNS:
            if cols.count(c) > 1:
                raise ValueError(f"column {c!r} declared twice")
        if len(self.delimiter) != 1:
            raise ValueError("delimiter must be a single character")


@dataclass(frozen=True)
class TradeRecord:
    timestamp: float
    price: float
    volume: float


@dataclass
class TickSeries:
    """Columnar, ordered trade sequence."""

    timestamps: np.ndarray
    prices: np.ndarray
    volumes: np.ndarray
    asset_label: str = ""
    venue_label: str = ""
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.timestamps = np.asarray(self.timestamps, dtype=np.float64)
        self.prices = np.asarray(self.prices, dtype=np.float64)
        self.volumes = np.asarray(self.volumes, dtype=np.float64)
        n = self.timestamps.shape[0]
        if self.prices.shape != (n,) or self.volumes.shape != (n,):
            raise ValueError("timestamps, prices and volumes must be 1-D and equally long")

    def __len__(self):
        return self.timestamps.shape[0]

    def __iter__(self) -> Iterator[TradeRecord]:
        for t, p, v in zip(self.timestamps, self.prices, self.volumes):
            yield TradeRecord(float(t), float(p), float(v))

    def __getitem__(self, i) -> TradeRecord:
        return TradeRecord(float(self.timestamps[i]), float(self.prices[i]), float(self.volumes[i]))

    @property
    def records(self):
        return list(self)

    @classmethod
    def from_records(cls, records, asset_label="", venue_label=""):
        arr = np.array([(r.timestamp, r.price, r.volume) for r in records], dtype=np.float64)
        arr = arr.reshape(-1, 3)
        return cls(arr[:, 0], arr[:, 1], arr[:, 2], asset_label, venue_label)

    def is_ordered(self):
        return bool(np.all(np.diff(self.timestamps) >= 0))

    def require_length(self, minimum=2):
        if len(self) < minimum:
            raise InsufficientDataError(f"tick series has {len(self)} trades, need at least {minimum}")


def _open_text(source):
    if isinstance(source, (str, os.PathLike)):
        return open(source, "r", newline=""), True
    if isinstance(source, (bytes, bytearray)):
        return io.StringIO(bytes(source).decode("utf-8")), True
    if isinstance(source, io.TextIOBase):
        return source, False
    if hasattr(source, "read"):
        return io.TextIOWrapper(source, encoding="utf-8", newline=""), False
    raise TypeError(f"cannot read trades from {type(source).__name__}")


def _to_float(raw, name, line_of):
    try:
        return raw.to_numpy().astype(np.float64)
    except ValueError:
        pass
    bad = pd.to_numeric(raw, errors="coerce").isna().to_numpy()
    i = int(np.argmax(bad))
    raise ParseError(f"non-numeric {name} field {raw.iloc[i]!r}", line=int(line_of[i]))


def parse_trades(source, spec: FormatSpec | None = None, asset_label="", venue_label="",
                 chunksize=1_000_000) -> TickSeries:
    """Read a delimited trade file into a :class:`TickSeries`.

    ``source`` may be a path, raw bytes, or a text/binary stream. The input is
    consumed in a single pass in chunks of ``chunksize`` rows. Input order is
    preserved; use :func:`validate_ordering` afterwards.
    """
    spec = spec or FormatSpec()
    fh, owned = _open_text(source)
    scale = TS_UNITS[spec.ts_unit]
    positions = {c: spec.columns.index(c) for c in REQUIRED_COLUMNS}
    first_line = 2 if spec.header else 1
    ts_parts, px_parts, vol_parts = [], [], []
    rows_seen = 0
    try:
        reader = pd.read_csv(
            fh, sep=spec.delimiter, header=None, skiprows=1 if spec.header else 0,
            dtype=str, skip_blank_lines=False, chunksize=chunksize, engine="c",
        )
        try:
            for chunk in reader:
                if chunk.shape[1] != len(spec.columns):
                    raise ParseError(f"malformed row: {chunk.shape[1]} fields, "
                                     f"expected {len(spec.columns)}", line=first_line + rows_seen)
                ts_parts_c, px_c, vol_c = _convert_chunk(chunk, positions, first_line + rows_seen)
                ts_parts.append(ts_parts_c)
                px_parts.append(px_c)
                vol_parts.append(vol_c)
                rows_seen += len(chunk)
        except pd.errors.ParserError as exc:
            msg = str(exc).strip()
            m = re.search(r"Expected (\d+) fields in line (\d+), saw (\d+)", msg)
            if m:
                raise ParseError(f"malformed row: {m.group(3)} fields, expected {m.group(1)}",
                                 line=int(m.group(2))) from None
            raise ParseError(f"malformed row ({msg})") from None
    except pd.errors.EmptyDataError:
        pass
    finally:
        if owned:
            fh.close()

    if ts_parts:
        ts_raw = np.concatenate(ts_parts)
        prices = np.concatenate(px_parts)
        volumes = np.concatenate(vol_parts)
    else:
        ts_raw = prices = volumes = np.empty(0)
    timestamps = ts_raw / scale if scale != 1 else ts_raw
    series = TickSeries(timestamps, prices, volumes, asset_label, venue_label)
    series.meta["format"] = spec
    return series


def _convert_chunk(chunk, positions, line0):
    # fully blank rows are skipped; partially empty ones are malformed
    blank = chunk.isna().all(axis=1).to_numpy()
    if blank.any():
        chunk = chunk[~blank]
        line_of = np.flatnonzero(~blank) + line0
    else:
        line_of = np.arange(len(chunk)) + line0
    out = {}
    for name, pos in positions.items():
        col = chunk[pos]
        missing = col.isna().to_numpy()
        if missing.any():
            i = int(np.argmax(missing))
            raise ParseError(f"malformed row: missing {name} field", line=int(line_of[i]))
        out[name] = _to_float(col.str.strip(), name, line_of)

    ts, px, vol = out["timestamp"], out["price"], out["volume"]
    checks = (
        (~np.isfinite(ts), "non-finite timestamp"),
        (np.abs(ts) >= _EXACT_INT_LIMIT, "timestamp overflows the exact range of its unit"),
        (~(px > 0) | ~np.isfinite(px), "price must be positive and finite"),
        (~(vol >= 0) | ~np.isfinite(vol), "volume must be non-negative and finite"),
    )
    for mask, msg in checks:
        if mask.any():
            i = int(np.argmax(mask))
            raise ParseError(msg, line=int(line_of[i]))
    return ts, px, vol


def _check_epoch_range(series: TickSeries):
    ts = series.timestamps
    if ts.size and np.max(np.abs(ts)) >= _MAX_EPOCH_SECONDS:
        i = int(np.argmax(np.abs(ts) >= _MAX_EPOCH_SECONDS))
        raise ParseError(f"timestamp {ts[i]!r} s is out of range; check the timestamp unit",
                         line=i + 1)


def read_trades(source, spec: FormatSpec | None = None, **kwargs) -> TickSeries:
    """:func:`parse_trades` plus an epoch range check (catches unit mix-ups)."""
    series = parse_trades(source, spec, **kwargs)
    _check_epoch_range(series)
    return series


def _format_ts(t, scale):
    if scale == 1:
        return repr(float(t))
    return str(int(round(t * scale)))


def write_trades(series: TickSeries, dest, spec: FormatSpec | None = None):
    """Serialize ``series`` in the layout described by ``spec``.

    Seconds are written with ``repr`` precision (exact round trip); ms/us
    timestamps are written as integers, i.e. at the declared precision.
    Columns not in the required set are written empty.
    """
    spec = spec or FormatSpec()
    scale = TS_UNITS[spec.ts_unit]
    own = isinstance(dest, (str, os.PathLike))
    fh = open(dest, "w", newline="") if own else dest
    try:
        d = spec.delimiter
        if spec.header:
            fh.write(d.join(spec.columns) + "\n")
        for t, p, v in zip(series.timestamps, series.prices, series.volumes):
            fields = {"timestamp": _format_ts(t, scale), "price": repr(float(p)),
                      "volume": repr(float(v))}
            fh.write(d.join(fields.get(c, "") for c in spec.columns) + "\n")
    finally:
        if own:
            fh.close()


def validate_ordering(series: TickSeries, policy="reject") -> TickSeries:
    """Guarantee non-decreasing timestamps.

    ``reject`` raises :class:`OrderingError` at the first index whose timestamp
    is smaller than its predecessor; ``sort`` applies a stable sort.
    """
    if policy not in ("reject", "sort"):
        raise ValueError(f"unknown ordering policy {policy!r}")
    d = np.diff(series.timestamps)
    if np.all(d >= 0):
        return series
    if policy == "reject":
        raise OrderingError(int(np.argmax(d < 0)) + 1)
    order = np.argsort(series.timestamps, kind="stable")
    return TickSeries(series.timestamps[order], series.prices[order], series.volumes[order],
                      series.asset_label, series.venue_label, dict(series.meta))
