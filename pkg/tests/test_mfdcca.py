import numpy as np
import pytest

from mfitt import mfdcca, mfdfa, synth
from mfitt.errors import DegenerateDataError
from mfitt.mfdfa import MfdfaConfig
from mfitt.series import DAY

from oracles import naive_cross_surface


def pair(n=4000, seed=0):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(n)
    return x, 0.6 * x + rng.standard_normal(n)


def test_cross_matches_naive():
    x, y = pair(50, 1)
    q = np.array([-1.0, 0.0, 2.0])
    s = np.array([4, 5])
    F = mfdcca.cross_fluctuation(x, y, MfdfaConfig(q, s, m=1, eps=0)).F
    np.testing.assert_allclose(F, naive_cross_surface(x, y, q, s, 1), rtol=1e-10)


def test_rho_identities():
    x, _ = pair()
    cfg = MfdfaConfig(q_grid=[-2.0, 0.0, 1.0, 2.0])
    for form in mfdcca.RHO_FORMS:
        np.testing.assert_allclose(mfdcca.rho_q_all(x, x, cfg, form)[2], 1.0, atol=1e-12)
        np.testing.assert_allclose(mfdcca.rho_q_all(x, -x, cfg, form)[2], -1.0, atol=1e-12)


def test_rho2_moment_equals_dcca():
    x, y = pair()
    cfg = MfdfaConfig(s_grid=[20, 50])
    r = mfdcca.rho_q(x, y, cfg, q=2.0).rho
    from mfitt import kernels
    for j, s in enumerate(cfg.s_grid):
        fxx, fyy, fxy = kernels.segment_covariances(x, y, s, 2)
        assert r[j] == pytest.approx(fxy.mean() / np.sqrt(fxx.mean() * fyy.mean()), rel=1e-12)


def test_root_form_is_square_root_at_q2():
    x, y = pair()
    cfg = MfdfaConfig(s_grid=[20, 50])
    m = mfdcca.rho_q(x, y, cfg, 2.0, "moment").rho
    r = mfdcca.rho_q(x, y, cfg, 2.0, "root").rho
    np.testing.assert_allclose(r, np.sign(m) * np.sqrt(np.abs(m)), rtol=1e-12)


def test_rho_symmetry_and_correlated_value():
    x, y = pair(20_000, 2)
    cfg = MfdfaConfig(s_grid=[10, 100])
    a = mfdcca.rho_q(x, y, cfg).rho
    b = mfdcca.rho_q(y, x, cfg).rho
    np.testing.assert_allclose(a, b, rtol=1e-12)
    assert np.all(np.abs(a - 0.6 / np.sqrt(1.36)) < 0.05)


def test_length_mismatch():
    with pytest.raises(ValueError):
        mfdcca.rho_q(np.ones(100), np.ones(99))


def test_rolling_rho_windows():
    n = 6 * 8640
    t = 1_699_833_600.0 + 10.0 * np.arange(n)
    x, y = pair(n, 3)
    res = mfdcca.rolling_rho(x, y, t, s=60, window=DAY, step=DAY, resolution=10.0)
    assert res.rho.size == 6
    assert np.all(np.isfinite(res.rho))
    np.testing.assert_array_equal(np.diff(res.window_end_times), DAY)
    # a window with fewer than 10 s samples yields NaN
    res = mfdcca.rolling_rho(x, y, t, s=1000, window=DAY, step=DAY, resolution=10.0)
    assert np.all(np.isnan(res.rho))


def test_zero_denominator():
    x = np.random.default_rng(4).standard_normal(200)
    with pytest.raises(DegenerateDataError):
        mfdcca.rho_q(x, np.zeros(200), MfdfaConfig(s_grid=[10, 20]))


def test_cascade_self_cross_equals_auto():
    x = synth.binomial_cascade(10, 0.3)
    cfg = MfdfaConfig(s_grid=[8, 16, 32])
    np.testing.assert_allclose(mfdcca.cross_fluctuation(x, x, cfg).F,
                               mfdfa.fluctuation_surface(x, cfg).F, rtol=1e-12)
