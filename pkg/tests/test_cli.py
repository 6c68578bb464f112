import json

import numpy as np
import pytest

from mfitt import cli, synth, textio


def run(argv):
    return cli.main(argv)


@pytest.fixture
def tickfile(tmp_path):
    rng = np.random.default_rng(0)
    n = 40_000
    t = 1_699_833_600.0 + np.cumsum(np.floor(rng.exponential(30.0, n)))
    p = 100 * np.exp(np.cumsum(rng.normal(0, 1e-4, n)))
    v = rng.exponential(1, n)
    path = tmp_path / "ticks.csv"
    with open(path, "w") as fh:
        for a, b, c in zip(t.tolist(), p.tolist(), v.tolist()):
            fh.write(f"{a:.0f},{b!r},{c!r}\n")
    return path


def test_parse_grid():
    np.testing.assert_allclose(cli.parse_grid("-1:1:0.5"), [-1, -0.5, 0, 0.5, 1])
    assert cli.parse_grid("10:100:x10", integer=True)[[0, -1]].tolist() == [10, 100]
    np.testing.assert_allclose(cli.parse_grid("1:100:x2"), [1, 10 ** 0.5, 10, 10 ** 1.5, 100])
    assert cli.parse_grid("4,8,16", integer=True).tolist() == [4, 8, 16]
    with pytest.raises(cli.UsageError):
        cli.parse_grid("1:2")
    assert cli.parse_duration("30d") == 30 * 86400 and cli.parse_duration("1mo") == 30 * 86400
    assert cli.parse_duration("10min") == 600


def test_stats(tickfile, tmp_path, capsys):
    out = tmp_path / "s.json"
    assert run(["stats", "--in", str(tickfile), "--json", "--out", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert rep["T"] == 39_999 and 0 < rep["chi"] < 0.1
    assert set(rep) >= {"mean_dt", "std_dt", "chi", "config"}


def test_pipeline_itt_deseason_mfdfa(tickfile, tmp_path):
    itt = tmp_path / "itt.txt"
    assert run(["itt", "--in", str(tickfile), "--out", str(itt)]) == 0
    prefix = tmp_path / "m"
    argv = ["mfdfa", "--in", str(itt), "--deseason", "daily+weekly", "--q", "-4:4:0.25",
            "--fit", "1e2:3e3", "--out", str(prefix)]
    assert run(argv) == 0
    for suffix in ("surface.txt", "hq.txt", "falpha.txt"):
        text = (tmp_path / f"m.{suffix}").read_text()
        assert text.startswith("# mfitt mfdfa")
        assert "# deseason=daily+weekly" in text and "# q=-4:4:0.25" in text
    hq = textio.read_table(str(tmp_path / "m.hq.txt"))
    assert hq.get("q").size == 33
    surface = textio.read_table(str(tmp_path / "m.surface.txt"))
    assert surface.names == ["q", "s", "F", "segments", "skipped"]
    first = (tmp_path / "m.hq.txt").read_bytes()
    assert run(argv) == 0
    assert (tmp_path / "m.hq.txt").read_bytes() == first


def test_synth_cascade_to_mfdfa(tmp_path):
    series = tmp_path / "c.txt"
    assert run(["synth", "--kind", "cascade", "--p", "0.3", "--levels", "16", "--seed", "7",
                "--out", str(series)]) == 0
    assert "# spec=kind=binomial-cascade length=65536 seed=7" in series.read_text()
    assert run(["mfdfa", "--in", str(series), "--scales", "8,16,32,64,128,256,512,1024,2048,4096",
                "--fit", "256:4096", "--out", str(tmp_path / "c")]) == 0
    hq = textio.read_table(str(tmp_path / "c.hq.txt"))
    h2 = hq.get("h")[np.flatnonzero(hq.get("q") == 2.0)[0]]
    assert abs(h2 - synth.cascade_analytic_hq(0.3, 2.0)) < 0.05


def test_bin_acf_cdf_fit_rho(tickfile, tmp_path):
    b = tmp_path / "b.txt"
    assert run(["bin", "--in", str(tickfile), "--dt", "60", "--out", str(b)]) == 0
    tab = textio.read_table(str(b))
    assert tab.names == ["timestamp", "n", "v", "r", "absr"]
    assert tab.get("n").sum() == 40_000
    acf_out = tmp_path / "acf.txt"
    assert run(["acf", "--in", str(b), "--column", "n", "--max-lag", "100", "--out", str(acf_out)]) == 0
    acf = textio.read_table(str(acf_out))
    np.testing.assert_array_equal(acf.get("tau_seconds"), 60.0 * acf.get("lag"))
    assert run(["acf", "--in", str(b), "--column", "n", "--out", str(acf_out)]) == 0
    acf = textio.read_table(str(acf_out))
    assert acf.meta["max_lag"] == str(tab.get("n").size // 10)
    assert acf.get("lag")[-1] == tab.get("n").size // 10
    assert run(["cdf", "--in", str(b), "--column", "v", "--overlay", "volume-semilog",
                "--normalize", "--out", str(tmp_path / "cdf.txt")]) == 0
    cdf = textio.read_table(str(tmp_path / "cdf.txt"))
    assert len(cdf.names) == 5
    assert run(["fit", "--in", str(b), "--column", "v", "--model", "se",
                "--out", str(tmp_path / "fit.txt")]) == 0
    assert "se_alpha=" in (tmp_path / "fit.txt").read_text()
    assert run(["rho", "--in", str(b), "--column", "n", "--in2", str(b), "--column2", "n",
                "--scales", "10:100:x5", "--out", str(tmp_path / "rho.txt")]) == 0
    rho = textio.read_table(str(tmp_path / "rho.txt"))
    np.testing.assert_allclose(rho.get("rho"), 1.0, atol=1e-12)


def test_rolling_and_surrogate(tickfile, tmp_path):
    out = tmp_path / "r.txt"
    assert run(["rolling", "--in", str(tickfile), "--quantity", "n", "--window", "1d",
                "--step", "1d", "--out", str(out)]) == 0
    assert textio.read_table(str(out)).names == ["window_end", "mean_n"]
    itt = tmp_path / "itt.txt"
    run(["itt", "--in", str(tickfile), "--out", str(itt)])
    sur = tmp_path / "sur.txt"
    assert run(["surrogate", "--in", str(itt), "--seed", "1", "--out", str(sur)]) == 0
    a = np.sort(textio.read_table(str(itt)).values())
    np.testing.assert_array_equal(np.sort(textio.read_table(str(sur)).values()), a)


def test_errors_exit_nonzero(tmp_path, capsys):
    assert run(["mfdfa", "--in", str(tmp_path / "missing.txt")]) == 1
    assert "not found" in capsys.readouterr().err
    bad = tmp_path / "bad.csv"
    bad.write_text("1,100,1\n2,abc,1\n")
    assert run(["stats", "--in", str(bad)]) == 1
    assert "line 2" in capsys.readouterr().err
    assert run(["mfdfa", "--nope"]) == 2
    assert run(["mfdfa", "--in", str(bad), "--q", "1:2"]) == 1
