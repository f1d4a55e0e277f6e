"""Visible-light channel: Lambertian LoS power, fog attenuation, interference."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import LinkGeometry, pole_links
from .scenario import StreetScenario, VlcParams


def visibility_exponent(visibility_km: float) -> float:
    """Size-distribution exponent of the Kim visibility model.

    Branch edges are half-open from above: 50 km falls in the 6-50 km
    branch, 6 km in the 1-6 km branch and so on.
    """
    vi = visibility_km
    if vi > 50.0:
        return 1.6
    if vi > 6.0:
        return 1.3
    if vi > 1.0:
        return 0.16 * vi + 0.34
    if vi > 0.5:
        return vi - 0.5
    return 0.0


def attenuation_coefficient(visibility_km: float, wavelength_nm: float = 550.0) -> float:
    """Atmospheric attenuation coefficient in 1/km."""
    if visibility_km <= 0:
        raise ValueError("visibility must be positive")
    delta = visibility_exponent(visibility_km)
    return 3.912 / visibility_km * (wavelength_nm / 550.0) ** delta


def atmospheric_gain(alpha_per_km, length_m):
    """Beer-Lambert transmittance over ``length_m`` metres."""
    return np.exp(-np.asarray(alpha_per_km) * np.asarray(length_m) / 1000.0)


def pair_power(vlc: VlcParams, link: LinkGeometry, h_aa=1.0, *,
               area_m2: float | None = None, rx_fov_deg: float | None = None,
               tx_fov_deg: float | None = None):
    """Received optical power of one fixture-detector pair (W).

    FOV limits default to the configured values for the link's ``k``/``i``.
    """
    area = vlc.receiver.area_m2 if area_m2 is None else area_m2
    kk = 0 if link.k == -1 else 1
    ii = 0 if link.i == -1 else 1
    tx_fov = np.radians(vlc.mount.fov_deg[kk] if tx_fov_deg is None else tx_fov_deg)
    rx_fov = np.radians(vlc.receiver.fov_deg[ii] if rx_fov_deg is None else rx_fov_deg)
    m = vlc.lambert_order
    cos_s = np.cos(link.tx_polar)
    cos_r = np.cos(link.rx_polar)
    power = (vlc.tx_power_w * area * vlc.filter_gain * vlc.concentrator_gain
             * (m + 1.0) * h_aa * np.power(np.clip(cos_s, 0.0, None), m) * cos_r
             / (2.0 * np.pi * link.length ** 2))
    visible = (link.rx_polar <= rx_fov) & (link.tx_polar <= tx_fov)
    return np.where(visible, power, 0.0)


@dataclass(frozen=True)
class VlcLinkPower:
    pairs: dict[tuple[int, int], np.ndarray]

    @property
    def total(self) -> np.ndarray:
        return sum(self.pairs.values())


def pole_power(scenario: StreetScenario, pole_y: float, x, y, *,
               surface: bool = False, mirrored: bool = False) -> VlcLinkPower:
    """Power collected from both fixtures of one pole.

    ``surface`` evaluates a horizontal point detector on the asphalt
    (lighting); otherwise the two roof detectors of a vehicle centred at
    ``(x, y)`` are used.
    """
    st = scenario.street
    vlc = scenario.vlc
    height = st.pole_height_m if surface else st.pole_height_m - st.vehicle_height_m
    links = pole_links(vlc.mount, vlc.receiver, x, y, pole_y, height,
                       lane_width=st.lane_width_m, mirrored=mirrored, surface=surface)
    alpha = attenuation_coefficient(scenario.env.visibility_km, vlc.wavelength_nm)
    pairs = {}
    for key, link in links.items():
        h_aa = atmospheric_gain(alpha, link.length)
        if surface:
            pairs[key] = pair_power(vlc, link, h_aa, area_m2=vlc.surface_area_m2,
                                    rx_fov_deg=90.0)
        else:
            pairs[key] = pair_power(vlc, link, h_aa)
    return VlcLinkPower(pairs)


def surface_power(scenario: StreetScenario, x, y, *, include_opposite: bool = True):
    """Illumination power on the asphalt summed over all poles."""
    st = scenario.street
    total = np.zeros(np.broadcast(np.asarray(x), np.asarray(y)).shape)
    for pole_y in st.pole_positions():
        total = total + pole_power(scenario, pole_y, x, y, surface=True).total
    if include_opposite:
        for pole_y in st.opposite_pole_positions():
            total = total + pole_power(scenario, pole_y, x, y, surface=True,
                                       mirrored=True).total
    return total


def serving_power(scenario: StreetScenario, x, y):
    """Vehicle power from the serving-side poles.

    Powers add over poles when ``street.cooperative_poles`` is set,
    otherwise only the strongest pole counts.
    """
    per_pole = [pole_power(scenario, pole_y, x, y).total
                for pole_y in scenario.street.pole_positions()]
    if scenario.street.cooperative_poles:
        return sum(per_pole)
    return np.maximum.reduce(per_pole)


def interference_power(scenario: StreetScenario, x, y, poles=None):
    """Vehicle power from every pole across the street."""
    if poles is None:
        poles = scenario.street.opposite_pole_positions()
    total = np.zeros(np.broadcast(np.asarray(x), np.asarray(y)).shape)
    for pole_y in poles:
        total = total + pole_power(scenario, pole_y, x, y, mirrored=True).total
    return total
