import io
import json

import numpy as np
import pytest

from mfitt import textio


def test_table_round_trip():
    buf = io.StringIO()
    x = np.random.default_rng(0).standard_normal(20)
    textio.write_table(buf, {"timestamp": np.arange(20.0), "value": x}, "demo",
                       {"q": [1.0, 2.0], "m": 2})
    text = buf.getvalue()
    assert text.startswith("# mfitt demo\n# m=2\n# q=1.0,2.0\ntimestamp,value\n")
    back = textio.read_table(io.StringIO(text))
    np.testing.assert_array_equal(back.values(), x)
    np.testing.assert_array_equal(back.timestamps(), np.arange(20.0))
    assert back.meta["m"] == "2"


def test_plain_numbers():
    t = textio.read_table(io.StringIO("1\n2\n3\n"))
    assert t.names == ["value"] and t.timestamps() is None
    t = textio.read_table(io.StringIO("1 5\n2 6\n"))
    np.testing.assert_array_equal(t.values(), [5, 6])


def test_column_selection():
    t = textio.read_table(io.StringIO("a,b,c\n1,2,3\n"))
    assert t.values("b")[0] == 2 and t.values("0")[0] == 1
    with pytest.raises(KeyError):
        t.values("z")


def test_json_mirror():
    buf = io.StringIO()
    textio.write_report(buf, {"h2": 0.5, "n": np.int64(3), "bad": float("nan")}, "x", {"a": 1},
                        as_json=True)
    obj = json.loads(buf.getvalue())
    assert obj["h2"] == 0.5 and obj["n"] == 3 and obj["bad"] is None and obj["config"] == {"a": 1}


def test_errors():
    with pytest.raises(ValueError):
        textio.read_table(io.StringIO("# only comments\n"))
    with pytest.raises(ValueError):
        textio.write_table(io.StringIO(), {"a": [1, 2], "b": [1]})
