import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from streetlink import link_metrics as lm
from streetlink.scenario import apply_overrides, default_scenario

unit = st.floats(0.0, 1.0)


def test_shot_noise_hand_value():
    s = default_scenario()
    n = lm.vlc_noise(1e-6, 0.29e-9, s.noise, s.vlc)
    assert n.shot == pytest.approx(2 * 1.6e-19 * 0.35 * (1e-6 + 2.9e-10) * 1e7, rel=1e-12)
    assert n.shot == pytest.approx(1.1203e-18, rel=1e-4)


def test_shot_noise_vanishes_without_light():
    s = default_scenario()
    assert lm.vlc_noise(0.0, 0.0, s.noise, s.vlc).shot == 0.0


def test_thermal_noise_hand_value():
    s = default_scenario()
    area = 1e-4
    cap = 112e-12 / 1e-4 * area
    expected = (8 * math.pi * 1.38e-23 * 300 / 10 * cap * 0.562 * 1e14
                + 16 * math.pi ** 2 * 1.38e-23 * 1.5 * 300 / 30e-3 * cap ** 2 * 0.868 * 1e21)
    n = lm.vlc_noise(1e-6, 0.0, s.noise, s.vlc, area_m2=area)
    assert n.thermal == pytest.approx(expected, rel=1e-12)


@given(p1=st.floats(0, 1e-3), p2=st.floats(0, 1e-3))
def test_thermal_independent_of_signal(p1, p2):
    s = default_scenario()
    assert lm.vlc_noise(p1, 0, s.noise, s.vlc).thermal == lm.vlc_noise(p2, 0, s.noise, s.vlc).thermal


def test_noise_total_is_sum():
    s = default_scenario()
    n = lm.vlc_noise(2e-6, 3e-9, s.noise, s.vlc)
    assert n.total == n.shot + n.thermal


def test_snr_zero_signal():
    assert lm.snr_vlc(0.0, 1e-18, 0.35) == 0.0
    assert lm.snr_thz(0.0, 27e-6) == 0.0


def test_vlc_snr_scales_with_responsivity_squared():
    assert lm.snr_vlc(1e-6, 1e-18, 0.7) == pytest.approx(4 * lm.snr_vlc(1e-6, 1e-18, 0.35))


def test_thz_snr_unity():
    assert lm.snr_thz(27e-6, 27e-6) == 1.0
    assert lm.to_db(lm.snr_thz(27e-6, 27e-6)) == 0.0


def test_sinr_equals_snr_without_interference():
    assert lm.sinr_vlc(1e-6, 0.0, 1e-18, 0.0, 0.35) == lm.snr_vlc(1e-6, 1e-18, 0.35)
    assert lm.sinr_thz(1e-5, 0.0, 27e-6) == lm.snr_thz(1e-5, 27e-6)


def test_bright_background_lowers_sinr():
    s = default_scenario()
    p = 2e-6
    dim = lm.vlc_noise(p, 0.29e-9, s.noise, s.vlc).total
    bright = lm.vlc_noise(p, 2.9e-6, s.noise, s.vlc).total
    assert lm.sinr_vlc(p, 0, bright, 2.9e-6, 0.35) < lm.sinr_vlc(p, 0, dim, 0.29e-9, 0.35)


@given(p=st.floats(1e-9, 1e-3), i1=st.floats(0, 1e-3), i2=st.floats(0, 1e-3),
       noise=st.floats(1e-20, 1e-12), pbs=st.floats(0, 1e-5))
def test_sinr_properties(p, i1, i2, noise, pbs):
    lo, hi = sorted((i1, i2))
    assert lm.sinr_vlc(p, hi, noise, pbs, 0.35) <= lm.sinr_vlc(p, lo, noise, pbs, 0.35)
    assert lm.sinr_thz(p, hi, 27e-6) <= lm.sinr_thz(p, lo, 27e-6)
    assert 0 <= lm.sinr_vlc(p, lo, noise, pbs, 0.35) <= lm.snr_vlc(p, noise, 0.35)
    assert 0 <= lm.sinr_thz(p, lo, 27e-6) <= lm.snr_thz(p, 27e-6)


def test_db_conversions():
    assert lm.to_db(0.0) == -np.inf
    assert lm.to_db(100.0) == pytest.approx(20.0)
    assert lm.from_db(lm.to_db(3.7)) == pytest.approx(3.7)


def test_q_function_values():
    assert lm.q_function(0.0) == 0.5
    assert lm.q_function(1.6449) == pytest.approx(0.05, abs=1e-4)
    assert lm.q_function(9.0) == 0.0 and lm.q_function(-9.0) == 1.0


def test_q_function_accuracy_on_range():
    xs = np.linspace(-8, 8, 3201)
    ref = np.array([0.5 * math.erfc(x / math.sqrt(2)) for x in xs])
    assert np.allclose(lm.q_function(xs), ref, rtol=1e-12, atol=1e-16)
    assert np.all(np.diff(lm.q_function(xs)) <= 0)


def test_cdf_median():
    assert lm.gaussian_cdf(3.0, 3.0, 0.7) == 0.5


@given(a=st.floats(-50, 50), b=st.floats(-50, 50), mean=st.floats(-10, 10),
       sigma=st.floats(0.01, 10))
def test_cdf_monotone(a, b, mean, sigma):
    lo, hi = sorted((a, b))
    assert lm.gaussian_cdf(lo, mean, sigma) <= lm.gaussian_cdf(hi, mean, sigma)


def test_upper_tail_form():
    assert lm.gaussian_cdf(1.0, 0.0, 1.0, printed_form=True) == pytest.approx(lm.q_function(1.0))
    assert lm.outage_single(0.0, 1.0, 1.0) == pytest.approx(1 - lm.q_function(1.0))


def test_psc_product():
    assert lm.outage_psc(0.1, 0.2) == pytest.approx(0.02)


def test_certain_outage():
    assert lm.outage_psc(1.0, 1.0) == 1.0
    assert lm.outage_gs(1.0, 1.0, 1.0, 1.0, 1.0) == 1.0


def test_gs_collapses_at_equal_thresholds():
    fv = lambda t: 0.3  # noqa: E731
    ft = lambda t: 0.6  # noqa: E731
    fco = lambda t: 0.9  # noqa: E731
    assert lm.outage_gs_thresholds(fv, ft, fco, 5.0, 5.0) == pytest.approx(0.18)


def test_gs_hand_value():
    # 0.2*0.3*(1 + 0.3*0.2 + 0.2*0.1 + 0.2^2*0.5)
    assert lm.outage_gs(0.2, 0.3, 0.4, 0.4, 0.5) == pytest.approx(0.06 * 1.1, rel=1e-12)


def test_invalid_thresholds():
    with pytest.raises(lm.InvalidThresholds):
        lm.outage_gs_thresholds(lambda t: 0, lambda t: 0, lambda t: 0, 6.0, 5.0)


def test_outage_bounds_on_1e5_tuples():
    rng = np.random.default_rng(99)
    u = rng.random((5, 100_000))
    fv_low, ft_low = u[0], u[2]
    # CDFs are non-decreasing, so high-threshold values dominate low ones
    fv_high = fv_low + (1 - fv_low) * u[1]
    ft_high = ft_low + (1 - ft_low) * u[3]
    gs = lm.outage_gs(fv_low, ft_low, fv_high, ft_high, u[4])
    psc = lm.outage_psc(fv_high, ft_high)
    for out in (gs, psc, lm.outage_psc(fv_low, ft_low)):
        assert np.all((out >= 0) & (out <= 1))
    assert np.all(psc <= np.minimum(fv_high, ft_high))
    same = lm.outage_gs(fv_high, ft_high, fv_high, ft_high, u[4])
    assert np.allclose(same, psc, rtol=0, atol=1e-15)


@given(fv=unit, ft=unit)
def test_psc_below_each_link(fv, ft):
    assert lm.outage_psc(fv, ft) <= min(fv, ft)


def test_gaussian_link_levels():
    vlc = lm.GaussianLink(np.float64(2.0), np.float64(0.5))
    assert vlc.level(10 * math.log10(4)) == pytest.approx(1.0)
    thz = lm.GaussianLink(np.float64(2.0), np.float64(0.5), power_form=True)
    assert thz.level(10 * math.log10(4)) == pytest.approx(1.0)


@given(p=st.floats(1e-8, 1e-4), i=st.floats(0, 1e-5), thr=st.floats(-5, 15))
def test_thz_outage_centred_on_sinr_threshold(p, i, thr):
    link = lm.thz_link(p, i, 27e-6)
    sinr_db = float(lm.to_db(lm.sinr_thz(p, i, 27e-6)))
    cdf = float(link.cdf(thr))
    if sinr_db > thr + 1e-9:
        assert cdf < 0.5
    elif sinr_db < thr - 1e-9:
        assert cdf > 0.5


def test_vlc_outage_centred_on_sinr_threshold():
    s = apply_overrides(default_scenario(), ["env.background_power_w=1e-7"])
    p = np.array([1e-7, 5e-7, 2e-6, 1e-5])
    noise = lm.vlc_noise(p, s.env.background_power_w, s.noise, s.vlc)
    sinr_db = lm.to_db(lm.sinr_vlc(p, 1e-8, noise.total, 1e-7, 0.35))
    link = lm.vlc_link(p, 1e-8, noise, 1e-7, 0.35)
    for k in range(len(p)):
        assert float(link.cdf(float(sinr_db[k]))[k]) == pytest.approx(0.5, abs=1e-12)


def test_combined_link_beats_either_alone():
    a = lm.GaussianLink(np.float64(3.0), np.float64(1.0))
    b = lm.GaussianLink(np.float64(3.0), np.float64(1.0))
    both = lm.combined_cdf(a, b, 5.0)
    assert both < a.cdf(5.0)
