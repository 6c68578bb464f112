import io

import numpy as np
import pytest

from mfitt.errors import OrderingError, ParseError
from mfitt.ingest import (FormatSpec, TickSeries, TradeRecord, parse_trades, read_trades,
                          validate_ordering, write_trades)


def test_parse_basic():
    s = parse_trades(b"1.5,100.0,2\n2.5,101.0,0\n")
    assert len(s) == 2
    assert s[0] == TradeRecord(1.5, 100.0, 2.0)
    np.testing.assert_array_equal(s.volumes, [2.0, 0.0])


def test_units_and_layout():
    spec = FormatSpec(delimiter=";", columns=("price", "volume", "timestamp"), ts_unit="ms",
                      header=True)
    s = parse_trades(b"p;v;t\n100;1;1500\n101;2;2500\n", spec)
    np.testing.assert_array_equal(s.timestamps, [1.5, 2.5])
    np.testing.assert_array_equal(s.prices, [100.0, 101.0])


def test_microseconds_exact():
    s = parse_trades(b"1600000000123456,1,1\n", FormatSpec(ts_unit="us"))
    assert s.timestamps[0] == 1600000000123456 / 1e6


def test_blank_lines_skipped():
    s = parse_trades(b"1,1,1\n\n2,1,1\n")
    assert len(s) == 2


@pytest.mark.parametrize("text,line,needle", [
    (b"1,1,1\nx,1,1\n", 2, "non-numeric timestamp"),
    (b"1,1,1\n2,1\n", 2, "missing"),
    (b"1,1,1\n2,1,1,9\n", 2, "4 fields"),
    (b"1,-1,1\n", 1, "price"),
    (b"1,1,-2\n", 1, "volume"),
    (b"1,0,1\n", 1, "price"),
    (b"nan,1,1\n", 1, "timestamp"),
])
def test_parse_errors_report_line(text, line, needle):
    with pytest.raises(ParseError) as ei:
        parse_trades(text)
    assert ei.value.line == line
    assert needle in str(ei.value)


def test_header_shifts_line_numbers():
    with pytest.raises(ParseError) as ei:
        parse_trades(b"t,p,v\n1,1,1\n2,1,1,1\n", FormatSpec(header=True))
    assert ei.value.line == 3


def test_error_line_across_chunks():
    rows = "".join(f"{i},1,1\n" for i in range(10)) + "5,bad,1\n"
    with pytest.raises(ParseError) as ei:
        parse_trades(rows.encode(), chunksize=3)
    assert ei.value.line == 11


def test_epoch_check_catches_wrong_unit():
    with pytest.raises(ParseError, match="unit"):
        read_trades(b"1600000000000,1,1\n")
    assert len(read_trades(b"1600000000000,1,1\n", FormatSpec(ts_unit="ms"))) == 1


def test_bad_format_spec():
    with pytest.raises(ValueError):
        FormatSpec(ts_unit="ns")
    with pytest.raises(ValueError):
        FormatSpec(columns=("timestamp", "price"))


def test_equal_timestamps_kept():
    s = parse_trades(b"1,1,1\n1,2,1\n1,3,1\n")
    assert len(s) == 3 and s.is_ordered()


def test_round_trip_seconds(tmp_path):
    rng = np.random.default_rng(0)
    t = np.sort(1.6e9 + rng.random(50) * 1e5)
    s = TickSeries(t, rng.random(50) + 1, rng.random(50))
    path = tmp_path / "t.csv"
    write_trades(s, path)
    back = parse_trades(str(path))
    for name in ("timestamps", "prices", "volumes"):
        np.testing.assert_array_equal(getattr(back, name), getattr(s, name))


def test_round_trip_ms_with_header():
    spec = FormatSpec(ts_unit="ms", header=True, delimiter="\t")
    s = TickSeries([1.0, 1.001, 2.5], [1.0, 2.0, 3.0], [0.0, 1.0, 2.0])
    buf = io.StringIO()
    write_trades(s, buf, spec)
    back = parse_trades(io.StringIO(buf.getvalue()), spec)
    np.testing.assert_array_equal(back.timestamps, s.timestamps)


def test_ordering_reject_index():
    s = TickSeries([1, 2, 3, 2, 5], [1] * 5, [1] * 5)
    with pytest.raises(OrderingError) as ei:
        validate_ordering(s)
    assert ei.value.index == 3


def test_ordering_sort_is_stable():
    s = TickSeries([2, 1, 2, 1], [10, 20, 30, 40], [1, 1, 1, 1])
    out = validate_ordering(s, "sort")
    np.testing.assert_array_equal(out.timestamps, [1, 1, 2, 2])
    np.testing.assert_array_equal(out.prices, [20, 40, 10, 30])
    assert validate_ordering(out, "sort") is out


def test_from_records():
    recs = [TradeRecord(1.0, 2.0, 3.0), TradeRecord(2.0, 2.5, 0.0)]
    s = TickSeries.from_records(recs, "BTC", "kraken")
    assert s.records == recs and s.asset_label == "BTC"
