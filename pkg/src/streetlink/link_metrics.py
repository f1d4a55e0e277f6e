"""Noise, SNR/SINR and Gaussian outage probability for both link types."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import erfc

from .scenario import NoiseConstants, VlcParams


class InvalidThresholds(ValueError):
    pass


@dataclass(frozen=True)
class VlcNoise:
    shot: np.ndarray
    thermal: float

    @property
    def total(self):
        return self.shot + self.thermal


def vlc_noise(received_power, background_power: float, constants: NoiseConstants,
              vlc: VlcParams, area_m2: float | None = None) -> VlcNoise:
    """Shot plus thermal noise variance of the photodetector (A^2)."""
    q = constants.electron_charge_c
    kb = constants.boltzmann_j_per_k
    temp = constants.noise_temperature_k
    eta = vlc.oe_efficiency_a_per_w
    bw = vlc.bandwidth_hz
    area = vlc.receiver.area_m2 if area_m2 is None else area_m2
    cap = constants.capacitance_f_per_m2 * area
    shot = 2.0 * q * eta * np.asarray(received_power) * bw + 2.0 * q * eta * background_power * bw
    thermal = (8.0 * np.pi * kb * temp / constants.open_loop_gain * cap * constants.i2 * bw ** 2
               + 16.0 * np.pi ** 2 * kb * constants.fet_noise_factor * temp
               / constants.transconductance_s * cap ** 2 * constants.i3 * bw ** 3)
    return VlcNoise(shot, thermal)


def snr_vlc(received_power, noise_variance, eta: float):
    return (eta * np.asarray(received_power)) ** 2 / noise_variance


def snr_thz(received_power, noise_variance: float):
    return np.asarray(received_power) / noise_variance


def sinr_vlc(received_power, interference_power, noise_variance, background_power, eta):
    p = np.asarray(received_power)
    return (eta * p) ** 2 / (noise_variance
                             + (eta * (background_power + np.asarray(interference_power))) ** 2)


def sinr_thz(received_power, interference_power, noise_variance: float):
    return np.asarray(received_power) / (noise_variance + np.asarray(interference_power))


def to_db(linear):
    """10 log10 with zero mapped to -inf (no warnings)."""
    linear = np.asarray(linear, float)
    with np.errstate(divide="ignore"):
        return 10.0 * np.log10(linear)


def from_db(db):
    return 10.0 ** (np.asarray(db, float) / 10.0)


def q_function(x):
    """Gaussian tail probability ``Q(x) = P[Z > x]``, clamped outside [-8, 8]."""
    x = np.asarray(x, float)
    q = 0.5 * erfc(x / np.sqrt(2.0))
    return np.where(x > 8.0, 0.0, np.where(x < -8.0, 1.0, q))


def gaussian_cdf(y, mean, sigma, *, printed_form: bool = False):
    """``P[Y < y]`` for ``Y ~ N(mean, sigma^2)``.

    ``printed_form`` returns ``Q((y - mean)/sigma)`` instead, the upper tail,
    kept only for comparison runs.
    """
    z = (np.asarray(y, float) - mean) / sigma
    if printed_form:
        return q_function(z)
    return 1.0 - q_function(z)


def outage_single(mean_signal, sigma, threshold, *, printed_form: bool = False):
    return gaussian_cdf(threshold, mean_signal, sigma, printed_form=printed_form)


def outage_psc(f_vlc, f_thz):
    """Both links below threshold (independent links)."""
    return np.asarray(f_vlc) * np.asarray(f_thz)


def outage_gs(fv_low, ft_low, fv_high, ft_high, fco_high):
    """Dual-threshold general-switching outage.

    Arguments are CDF values of the VLC link (``fv_*``), THz link (``ft_*``)
    and combined link (``fco_high``) at the low and high thresholds. The last
    hysteresis term squares the VLC band probability as in the source model.
    """
    fv_low, ft_low = np.asarray(fv_low), np.asarray(ft_low)
    dv = np.asarray(fv_high) - fv_low
    dt = np.asarray(ft_high) - ft_low
    return fv_low * ft_low * (1.0 + ft_low * dv + fv_low * dt + dv * dv * np.asarray(fco_high))


def outage_gs_thresholds(cdf_vlc, cdf_thz, cdf_combined, low, high):
    """``outage_gs`` from CDF callables evaluated at the two thresholds."""
    if low > high:
        raise InvalidThresholds(f"low threshold {low} exceeds high threshold {high}")
    return outage_gs(cdf_vlc(low), cdf_thz(low), cdf_vlc(high), cdf_thz(high),
                     cdf_combined(high))


@dataclass(frozen=True)
class GaussianLink:
    """Received signal ``Y ~ N(mean, sigma^2)`` and how thresholds map onto it.

    ``power_form`` links (THz) compare ``Y`` against ``sigma^2 * gamma``;
    amplitude links (VLC photocurrent) against ``sigma * sqrt(gamma)``.
    """

    mean: np.ndarray
    sigma: np.ndarray
    power_form: bool = False

    def level(self, threshold_db):
        gamma = from_db(threshold_db)
        if self.power_form:
            return self.sigma ** 2 * gamma
        return self.sigma * np.sqrt(gamma)

    def cdf(self, threshold_db, *, printed_form: bool = False):
        return gaussian_cdf(self.level(threshold_db), self.mean, self.sigma,
                            printed_form=printed_form)


def vlc_link(received_power, interference_power, noise: VlcNoise, background_power, eta):
    """Photocurrent model whose threshold crossing matches the SINR."""
    var = noise.total + (eta * (background_power + np.asarray(interference_power))) ** 2
    return GaussianLink(eta * np.asarray(received_power, float), np.sqrt(var))


def thz_link(received_power, interference_power, noise_variance: float):
    var = noise_variance + np.asarray(interference_power, float)
    return GaussianLink(np.asarray(received_power, float), np.sqrt(var), power_form=True)


def combined_cdf(a: GaussianLink, b: GaussianLink, threshold_db, *, printed_form=False):
    """CDF of the sum of both links, each normalised by its own noise level.

    The normalised sum has unit-variance noise per branch (variance 2)
    and is compared against the sum of the normalised per-link levels.
    """
    mean = a.mean / a.sigma + b.mean / b.sigma
    level = a.level(threshold_db) / a.sigma + b.level(threshold_db) / b.sigma
    return gaussian_cdf(level, mean, np.sqrt(2.0), printed_form=printed_form)


@dataclass(frozen=True)
class LinkMetrics:
    snr: np.ndarray
    sinr: np.ndarray
    outage: np.ndarray
    technology: str
