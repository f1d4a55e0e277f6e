"""THz planar-array link: array factor, gains, water-vapour absorption."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .geometry import DegenerateLink, LinkGeometry, pole_links
from .scenario import SPEED_OF_LIGHT, StreetScenario, ThzParams

# Centres (cm^-1) of the six dominant water lines between 100 and 450 GHz.
LINE_CENTRES_PER_CM = (3.96, 6.11, 10.84, 12.68, 14.65, 14.94)


@dataclass(frozen=True)
class ArraySpec:
    nx: int
    ny: int
    dx: float
    dy: float
    steer_polar: float = 0.0
    steer_azimuth: float = 0.0
    wavenumber: float = 2.0 * np.pi / (SPEED_OF_LIGHT / 144e9)


def array_spec(thz: ThzParams, receive: bool = False) -> ArraySpec:
    nx, ny = thz.rx_elements if receive else thz.tx_elements
    steered = thz.steer_receiver or not receive
    return ArraySpec(nx, ny, thz.spacing_m, thz.spacing_m,
                     np.radians(thz.steering_polar_deg) if steered else 0.0,
                     np.radians(thz.steering_azimuth_deg) if steered else 0.0,
                     2.0 * np.pi / thz.wavelength_m)


def radiated_power(thz: ThzParams) -> float:
    """Total transmit power of one array."""
    if thz.power_per_element:
        return thz.tx_power_w * thz.tx_elements[0] * thz.tx_elements[1]
    return thz.tx_power_w


def _axis_factor(n: int, psi):
    """``sin(n psi/2) / (n sin(psi/2))`` with the removable poles filled in."""
    psi = np.asarray(psi, float)
    half = psi / 2.0
    den = n * np.sin(half)
    # sin(psi/2) vanishes at psi = 2 pi m; the limit there is (-1)^(m (n-1)).
    m = np.round(psi / (2.0 * np.pi))
    near = np.abs(psi - 2.0 * np.pi * m) < 1e-7
    limit = np.where(np.mod(m * (n - 1), 2) == 0, 1.0, -1.0)
    safe = np.where(near, 1.0, den)
    return np.where(near, limit, np.sin(n * half) / safe)


def array_factor(spec: ArraySpec, polar, azimuth):
    """Normalised planar array factor, 1 on the steered main lobe."""
    k = spec.wavenumber
    beta_x = -k * spec.dx * np.sin(spec.steer_polar) * np.cos(spec.steer_azimuth)
    beta_y = -k * spec.dy * np.sin(spec.steer_polar) * np.sin(spec.steer_azimuth)
    psi_x = k * spec.dx * np.sin(polar) * np.cos(azimuth) + beta_x
    psi_y = k * spec.dy * np.sin(polar) * np.sin(azimuth) + beta_y
    return _axis_factor(spec.nx, psi_x) * _axis_factor(spec.ny, psi_y)


def gains(tx: ArraySpec, rx: ArraySpec, link: LinkGeometry, symmetric: bool = False):
    """Transmit and receive antenna gains of a link.

    The receive gain squares the array factor before the outer square
    unless ``symmetric`` is set, in which case both ends share one form.
    """
    af_s = array_factor(tx, link.tx_polar, link.tx_azimuth)
    af_r = array_factor(rx, link.rx_polar, link.rx_azimuth)
    g_s = np.pi * (tx.nx * tx.ny * af_s) ** 2
    if symmetric:
        g_r = np.pi * (rx.nx * rx.ny * af_r) ** 2
    else:
        g_r = np.pi * (rx.nx * rx.ny * af_r ** 2) ** 2
    return g_s, g_r


def saturation_vapor_pressure(temperature_c, pressure_hpa):
    """Buck saturation vapour pressure over water (hPa)."""
    return (6.1121 * (1.0007 + 3.46e-6 * pressure_hpa)
            * np.exp(17.502 * temperature_c / (240.97 + temperature_c)))


def mixing_ratio(relative_humidity_pct, temperature_c, pressure_hpa):
    """Volumetric mixing ratio of water vapour."""
    return (relative_humidity_pct * saturation_vapor_pressure(temperature_c, pressure_hpa)
            / (100.0 * pressure_hpa))


def line_terms(carrier_hz: float, rho: float) -> np.ndarray:
    """Absorption of the six water lines at ``carrier_hz`` (1/m each)."""
    a = np.array([
        5.159e-5 * (1 - rho) * (-6.65e-5 * (1 - rho) + 0.0159),
        0.1925 * rho * (0.1350 * rho + 0.0318),
        0.2251 * rho * (0.1314 * rho + 0.0297),
        2.053 * rho * (0.1717 * rho + 0.0306),
        0.177 * rho * (0.0832 * rho + 0.0213),
        2.146 * rho * (0.1206 * rho + 0.0277),
    ])
    b = np.array([
        (-2.09e-4 * (1 - rho) + 0.05) ** 2,
        (0.4241 * rho + 0.0998) ** 2,
        (0.4127 * rho + 0.0932) ** 2,
        (0.5394 * rho + 0.0961) ** 2,
        (0.2615 * rho + 0.0668) ** 2,
        (0.3789 * rho + 0.0871) ** 2,
    ])
    # carrier expressed as a wavenumber in cm^-1
    nu = carrier_hz / (100.0 * SPEED_OF_LIGHT)
    return a / (b + (nu - np.array(LINE_CENTRES_PER_CM)) ** 2)


def continuum(carrier_hz: float, rho: float) -> float:
    return rho / 0.0157 * (2e-4 + 0.915e-112 * carrier_hz ** 9.42)


@lru_cache(maxsize=256)
def absorption(carrier_hz: float, rho: float) -> float:
    """Total molecular absorption coefficient (1/m)."""
    return float(line_terms(carrier_hz, rho).sum() + continuum(carrier_hz, rho))


def environment_absorption(scenario: StreetScenario) -> float:
    env = scenario.env
    rho = mixing_ratio(env.relative_humidity_pct, env.temperature_c, env.pressure_hpa)
    return absorption(scenario.thz.carrier_hz, float(rho))


def path_gain(carrier_hz: float, length_m, absorption_per_m: float = 0.0):
    """Free-space amplitude gain times molecular-absorption transmittance."""
    length_m = np.asarray(length_m, float)
    if np.any(length_m <= 0):
        raise DegenerateLink("link length must be positive")
    return (SPEED_OF_LIGHT / (4.0 * np.pi * carrier_hz * length_m)
            * np.exp(-0.5 * length_m * absorption_per_m))


def pair_power(thz: ThzParams, link: LinkGeometry, absorption_per_m: float = 0.0):
    """Received power of one array pair, zero outside either FOV."""
    kk = 0 if link.k == -1 else 1
    ii = 0 if link.i == -1 else 1
    tx_fov = np.radians(thz.mount.fov_deg[kk])
    rx_fov = np.radians(thz.receiver.fov_deg[ii])
    h = path_gain(thz.carrier_hz, link.length, absorption_per_m)
    g_s, g_r = gains(array_spec(thz), array_spec(thz, receive=True), link,
                     thz.symmetric_gains)
    power = radiated_power(thz) * h ** 2 * g_s * g_r
    visible = (link.rx_polar <= rx_fov) & (link.tx_polar <= tx_fov)
    return np.where(visible, power, 0.0)


def pole_power(scenario: StreetScenario, pole_y: float, x, y, *,
               mirrored: bool = False) -> dict[tuple[int, int], np.ndarray]:
    """Per-pair THz power at a vehicle from one pole."""
    st = scenario.street
    thz = scenario.thz
    links = pole_links(thz.mount, thz.receiver, x, y, pole_y,
                       st.pole_height_m - st.vehicle_height_m,
                       lane_width=st.lane_width_m, mirrored=mirrored)
    a = environment_absorption(scenario)
    return {key: pair_power(thz, link, a) for key, link in links.items()}


def received_power(scenario: StreetScenario, x, y, poles=None):
    """THz power from the serving-side poles (summed or strongest)."""
    if poles is None:
        poles = scenario.street.pole_positions()
    per_pole = [sum(pole_power(scenario, pole_y, x, y).values()) for pole_y in poles]
    if scenario.street.cooperative_poles:
        return sum(per_pole)
    return np.maximum.reduce(per_pole)


def interference_power(scenario: StreetScenario, x, y, poles=None):
    """THz power from every pole across the street."""
    if poles is None:
        poles = scenario.street.opposite_pole_positions()
    total = np.zeros(np.broadcast(np.asarray(x), np.asarray(y)).shape)
    for pole_y in poles:
        total = total + sum(pole_power(scenario, pole_y, x, y, mirrored=True).values())
    return total
