import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

import oracles
from streetlink import coverage, presets
from streetlink import vlc_channel as vlc
from streetlink.geometry import LinkGeometry
from streetlink.scenario import apply_overrides, default_scenario


def boresight(length, polar=0.0, rx_polar=None):
    rp = polar if rx_polar is None else rx_polar
    return LinkGeometry(np.float64(length), np.float64(polar), np.float64(rp),
                        np.float64(0.0), np.float64(0.0))


def test_attenuation_clear_air():
    assert vlc.attenuation_coefficient(50.0) == pytest.approx(0.07824, rel=1e-12)


def test_attenuation_ten_km():
    assert vlc.attenuation_coefficient(10.0) == pytest.approx(0.3912, rel=1e-12)


@pytest.mark.parametrize("vi", [0.3, 0.7, 3.0, 10.0, 50.0, 80.0])
def test_attenuation_branch_irrelevant_at_reference_wavelength(vi):
    assert vlc.attenuation_coefficient(vi, 550.0) == pytest.approx(3.912 / vi, rel=1e-12)


@pytest.mark.parametrize("vi, delta", [
    (60.0, 1.6), (50.0, 1.3), (10.0, 1.3), (6.0, 0.16 * 6 + 0.34), (2.0, 0.16 * 2 + 0.34),
    (1.0, 0.5), (0.7, 0.2), (0.5, 0.0), (0.2, 0.0)])
def test_visibility_exponent_branches(vi, delta):
    assert vlc.visibility_exponent(vi) == pytest.approx(delta, abs=1e-12)


def test_attenuation_other_wavelength():
    assert vlc.attenuation_coefficient(10.0, 650.0) == pytest.approx(
        0.3912 * (650 / 550) ** 1.3, rel=1e-12)


def test_attenuation_rejects_nonpositive_visibility():
    with pytest.raises(ValueError):
        vlc.attenuation_coefficient(0.0)


def test_beer_lambert_no_attenuation():
    assert vlc.atmospheric_gain(0.0, 1234.0) == 1.0


def test_beer_lambert_fifty_metres():
    assert vlc.atmospheric_gain(0.07824, 50.0) == pytest.approx(0.996096, abs=1e-6)


@given(a=st.floats(0, 10), l1=st.floats(0, 500), l2=st.floats(0, 500))
def test_beer_lambert_monotone_and_multiplicative(a, l1, l2):
    g1, g2 = vlc.atmospheric_gain(a, l1), vlc.atmospheric_gain(a, l2)
    if l1 <= l2:
        assert g1 >= g2
    assert vlc.atmospheric_gain(a, l1 + l2) == pytest.approx(g1 * g2, rel=1e-12)


def test_pair_power_hand_value():
    s = default_scenario()
    p = vlc.pair_power(s.vlc, boresight(8.5), 1.0, area_m2=1e-4)
    assert p == pytest.approx(8.327e-7, rel=2e-4)
    assert p == pytest.approx(0.63e-4 * 6 / (2 * math.pi * 8.5 ** 2), rel=1e-12)


def test_pair_power_fov_gate():
    s = apply_overrides(default_scenario(), ["vlc.receiver.fov_deg=[60, 60]",
                                             "vlc.mount.fov_deg=[70, 70]"])
    eps = 1e-9
    assert vlc.pair_power(s.vlc, boresight(8.5, 0.0, math.radians(60) + eps)) == 0.0
    assert vlc.pair_power(s.vlc, boresight(8.5, 0.0, math.radians(60) - eps)) > 0.0
    assert vlc.pair_power(s.vlc, boresight(8.5, math.radians(70) + eps, 0.0)) == 0.0


@given(length=st.floats(0.5, 200), ps=st.floats(0, 1.5), pr=st.floats(0, 1.5))
def test_inverse_square_law(length, ps, pr):
    s = default_scenario()
    near = vlc.pair_power(s.vlc, boresight(length, ps, pr))
    far = vlc.pair_power(s.vlc, boresight(2 * length, ps, pr))
    assert far == pytest.approx(near / 4, rel=1e-12)


@given(length=st.floats(0.5, 200), vi=st.floats(0.3, 80))
def test_power_times_square_over_fog_is_constant(length, vi):
    s = default_scenario()
    a = vlc.attenuation_coefficient(vi)
    link = boresight(length, 0.4, 0.3)
    p = vlc.pair_power(s.vlc, link, vlc.atmospheric_gain(a, length))
    ref = vlc.pair_power(s.vlc, boresight(1.0, 0.4, 0.3))
    assert p * length ** 2 / vlc.atmospheric_gain(a, length) == pytest.approx(ref, rel=1e-10)


def test_pole_power_out_of_fov():
    s = apply_overrides(default_scenario(), ["vlc.mount.fov_deg=[1, 1]"])
    assert vlc.pole_power(s, 30.0, 8.0, 60.0).total == 0.0


def test_pole_power_symmetric_vehicle_under_fixture():
    s = default_scenario()
    pairs = vlc.pole_power(s, 30.0, 1.15, 30.0).pairs
    for k in (-1, 1):
        assert pairs[(-1, k)] == pytest.approx(pairs[(1, k)], rel=1e-12)


@pytest.mark.parametrize("preset", ["default", "optimal_sic", "hybrid", "single_vlc"])
@pytest.mark.parametrize("surface", [False, True])
@pytest.mark.parametrize("mirrored", [False, True])
def test_pole_power_matches_oracle(preset, surface, mirrored):
    s = presets.load_scenario_preset(preset)
    rng = np.random.default_rng(7)
    for x, y in zip(rng.uniform(0, 10, 8), rng.uniform(0, 120, 8)):
        got = vlc.pole_power(s, 50.0, x, y, surface=surface, mirrored=mirrored)
        ref = oracles.vlc_pole_pairs(s, 50.0, x, y, surface=surface, mirrored=mirrored)
        assert set(got.pairs) == set(ref)
        for key, value in ref.items():
            assert float(got.pairs[key]) == pytest.approx(value, rel=1e-10, abs=1e-30)
        assert float(got.total) == pytest.approx(sum(ref.values()), rel=1e-10, abs=1e-30)


def test_serving_power_cooperative_and_strongest():
    s = presets.load_scenario_preset("hybrid")
    x, y = np.array([3.0, 6.0]), np.array([62.0, 75.0])
    per = [vlc.pole_power(s, p, x, y).total for p in s.street.pole_positions()]
    assert np.allclose(vlc.serving_power(s, x, y), sum(per), rtol=1e-12)
    strongest = apply_overrides(s, ["street.cooperative_poles=false"])
    assert np.allclose(vlc.serving_power(strongest, x, y), np.maximum.reduce(per), rtol=1e-12)


def test_surface_power_adds_both_rows():
    s = presets.load_scenario_preset("optimal_lc")
    x, y = np.array([2.0, 8.0]), np.array([60.0, 100.0])
    own = sum(vlc.pole_power(s, p, x, y, surface=True).total for p in s.street.pole_positions())
    other = sum(vlc.pole_power(s, p, x, y, surface=True, mirrored=True).total
                for p in s.street.opposite_pole_positions())
    assert np.allclose(vlc.surface_power(s, x, y), own + other, rtol=1e-12)
    assert np.allclose(vlc.surface_power(s, x, y, include_opposite=False), own, rtol=1e-12)


def test_interference_out_of_fov_is_zero():
    s = apply_overrides(default_scenario(), ["vlc.receiver.fov_deg=[2, 2]"])
    assert vlc.interference_power(s, 5.0, 60.0) == 0.0


def test_interference_single_pole_street():
    s = apply_overrides(presets.load_scenario_preset("optimal_sic"), ["street.pole_count=1"])
    pole = s.street.opposite_pole_positions()
    assert len(pole) == 1
    ref = vlc.pole_power(s, pole[0], 4.0, 40.0, mirrored=True).total
    assert vlc.interference_power(s, 4.0, 40.0) == pytest.approx(float(ref), rel=1e-12)


def test_interference_shrinks_with_detector_fov():
    base = presets.load_scenario_preset("optimal_lc")
    x, y = np.meshgrid(np.linspace(1, 9, 9), np.linspace(50, 150, 21))
    previous = None
    for fov in (90, 80, 70, 60, 45, 30):
        s = apply_overrides(base, [f"vlc.receiver.fov_deg=[{fov}, {fov}]"])
        now = vlc.interference_power(s, x, y)
        if previous is not None:
            assert np.all(now <= previous)
        previous = now


def test_interference_additive_over_poles():
    s = presets.load_scenario_preset("optimal_lc")
    poles = s.street.opposite_pole_positions()
    x, y = np.array([3.0, 8.0]), np.array([70.0, 120.0])
    full = vlc.interference_power(s, x, y, poles)
    for drop in range(len(poles)):
        subset = poles[:drop] + poles[drop + 1:]
        assert np.all(vlc.interference_power(s, x, y, subset) <= full)


def test_lighting_area_shrinks_with_lambert_order():
    base = apply_overrides(default_scenario(), ["street.pole_count=1",
                                                "grid.served_segment_only=false"])
    grid = coverage.grid_for(base)
    x, y = grid.mesh()
    for threshold in (2e-6, 6e-7, 1e-7):
        areas = []
        for m in (1, 5, 6, 10):
            s = apply_overrides(base, [f"vlc.lambert_order={m}"])
            areas.append(np.mean(vlc.pole_power(s, 30.0, x, y, surface=True).total >= threshold))
        assert areas == sorted(areas, reverse=True)
