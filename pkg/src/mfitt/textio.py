"""Plot-ready delimited text with self-describing comment headers.

Layout of every table written here::

    # mfitt <command>
    # key=value            (one line per effective setting)
    col_a,col_b            (column names, with units where meaningful)
    1.0,2.0
    ...

Numbers are written with ``repr`` so re-reading is exact and reruns are
byte-identical.
"""

from __future__ import annotations

import io
import json
import sys

import numpy as np


def _fmt(v):
    if isinstance(v, (np.integer, int)) and not isinstance(v, bool):
        return str(int(v))
    f = float(v)
    return "nan" if np.isnan(f) else repr(f)


def _open_out(dest):
    if dest is None or dest == "-":
        return sys.stdout, False
    if hasattr(dest, "write"):
        return dest, False
    return open(dest, "w", newline=""), True


def _open_in(src):
    if src is None or src == "-":
        return sys.stdin, False
    if hasattr(src, "read"):
        return src, False
    return open(src, "r"), True


def header_lines(command, config):
    lines = [f"mfitt {command}"]
    for k in sorted(config):
        v = config[k]
        if isinstance(v, (list, tuple, np.ndarray)):
            v = ",".join(_fmt(x) if isinstance(x, (int, float, np.number)) else str(x) for x in v)
        lines.append(f"{k}={v}")
    return lines


def write_table(dest, columns, command="", config=None, as_json=False):
    """Write named columns (dict name -> 1-D array) with a config header."""
    config = dict(config or {})
    names = list(columns)
    arrays = [np.asarray(columns[n]) for n in names]
    if len({a.shape[0] for a in arrays}) > 1:
        raise ValueError("columns differ in length")
    fh, own = _open_out(dest)
    try:
        if as_json:
            obj = {"command": command, "config": _jsonable(config),
                   "columns": {n: _jsonable(a) for n, a in zip(names, arrays)}}
            fh.write(json.dumps(obj, sort_keys=False) + "\n")
            return
        for line in header_lines(command, config):
            fh.write(f"# {line}\n")
        fh.write(",".join(names) + "\n")
        for row in zip(*arrays):
            fh.write(",".join(_fmt(v) for v in row) + "\n")
    finally:
        if own:
            fh.close()


def write_report(dest, report, command="", config=None, as_json=False):
    """Key-value report (or a JSON object with the same keys)."""
    fh, own = _open_out(dest)
    try:
        if as_json:
            obj = {"command": command, "config": _jsonable(dict(config or {}))}
            obj.update(_jsonable(report))
            fh.write(json.dumps(obj) + "\n")
            return
        for line in header_lines(command, config or {}):
            fh.write(f"# {line}\n")
        for k, v in report.items():
            if isinstance(v, (float, np.floating)):
                v = repr(float(v))
            fh.write(f"{k}={v}\n")
    finally:
        if own:
            fh.close()


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return None if not np.isfinite(f) else f
    return obj


class SeriesFile:
    """A table read back from text: named float columns plus header settings."""

    def __init__(self, columns, meta):
        self.columns = columns
        self.meta = meta

    @property
    def names(self):
        return list(self.columns)

    def get(self, name):
        return self.columns[name]

    def values(self, name=None):
        if name is not None:
            if name not in self.columns:
                try:
                    return list(self.columns.values())[int(name)]
                except (ValueError, IndexError):
                    raise KeyError(f"no column {name!r}; have {', '.join(self.columns)}") from None
            return self.columns[name]
        for key in ("value", "values"):
            if key in self.columns:
                return self.columns[key]
        non_time = [n for n in self.columns if n not in ("timestamp", "t")]
        return self.columns[non_time[-1] if non_time else self.names[-1]]

    def timestamps(self):
        for key in ("timestamp", "t"):
            if key in self.columns:
                return self.columns[key]
        return None


def read_table(src) -> SeriesFile:
    """Read a table written by :func:`write_table`, or plain 1-2 column numbers."""
    fh, own = _open_in(src)
    try:
        text = fh.read()
    finally:
        if own:
            fh.close()
    meta = {}
    names = None
    rows = []
    for raw in io.StringIO(text):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if "=" in body:
                k, v = body.split("=", 1)
                meta[k.strip()] = v.strip()
            continue
        parts = [p.strip() for p in line.replace("\t", ",").split(",")] if ("," in line or "\t" in line) \
            else line.split()
        if names is None and not rows:
            try:
                [float(p) for p in parts]
            except ValueError:
                names = parts
                continue
        rows.append(parts)
    if not rows:
        raise ValueError("no numeric rows in input")
    arr = np.array(rows, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[:, None]
    if names is None:
        names = ["value"] if arr.shape[1] == 1 else (["timestamp", "value"] if arr.shape[1] == 2
                                                     else [f"c{i}" for i in range(arr.shape[1])])
    if len(names) != arr.shape[1]:
        raise ValueError(f"header names {len(names)} columns but rows have {arr.shape[1]}")
    return SeriesFile({n: arr[:, i].copy() for i, n in enumerate(names)}, meta)
