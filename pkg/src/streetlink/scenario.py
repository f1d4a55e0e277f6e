"""Scenario configuration: street, fixtures, receivers, radios and environment.

Every physical quantity used by the channel models lives here. Field names
carry their unit as a suffix and double as the JSON config keys, so
``street.pole_spacing_m`` in a config file is ``StreetScenario.street.pole_spacing_m``.

Two-element tuples are ordered by side index ``[-1, +1]``: ``k`` for the two
fixtures on a pole (``-1`` right, ``+1`` left as seen from the pole centre)
and ``i`` for the two roof detectors (``-1`` back, ``+1`` front).
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field, fields, is_dataclass, replace
from pathlib import Path
from typing import Any

SPEED_OF_LIGHT = 299_792_458.0

Pair = tuple[float, float]


class ConfigError(ValueError):
    """Raised for malformed config files or ``--set`` overrides."""


def side_index(side: int) -> int:
    """Map a side label in {-1, +1} to a tuple index in {0, 1}."""
    if side not in (-1, 1):
        raise ValueError(f"side must be -1 or +1, got {side!r}")
    return 0 if side == -1 else 1


@dataclass(frozen=True)
class StreetLayout:
    lane_width_m: float = 10.0
    pole_height_m: float = 10.0
    vehicle_height_m: float = 1.5
    pole_count: int = 3
    pole_spacing_m: float = 30.0
    # None means half the pole spacing.
    opposite_offset_m: float | None = None
    admissible_band_m: Pair = (1.0, 9.0)
    # Sum the power of every serving-side pole (cooperative cells) rather
    # than keeping only the strongest one.
    cooperative_poles: bool = True

    @property
    def street_length_m(self) -> float:
        return (self.pole_count + 1) * self.pole_spacing_m

    @property
    def opposite_offset(self) -> float:
        if self.opposite_offset_m is None:
            return self.pole_spacing_m / 2.0
        return self.opposite_offset_m

    def pole_positions(self) -> list[float]:
        """Longitudinal positions of the poles on the serving side."""
        return [n * self.pole_spacing_m for n in range(1, self.pole_count + 1)]

    def opposite_pole_positions(self) -> list[float]:
        """Longitudinal positions of the poles across the street.

        The opposite row repeats the serving row, shifted towards the
        street origin by the offset.
        """
        first = self.pole_spacing_m - self.opposite_offset
        return [first + n * self.pole_spacing_m for n in range(self.pole_count)]


@dataclass(frozen=True)
class FixtureMount:
    """Two fixtures on rods at the top of a pole (one per side ``k``)."""

    rod_length_m: float = 1.0
    fixture_side_m: float = 0.3
    rod_angle_deg: Pair = (0.0, 0.0)
    fixture_rod_angle_deg: Pair = (0.0, 0.0)
    tilt_deg: float = 0.0
    side_rotation_deg: Pair = (0.0, 0.0)
    fov_deg: Pair = (90.0, 90.0)


@dataclass(frozen=True)
class ReceiverLayout:
    """Two detectors on the vehicle roof (one per side ``i``)."""

    d_rxf_m: float = 0.75
    d_rxb_m: float = 0.75
    d_ryf_m: float = 0.75
    d_ryb_m: float = 0.75
    d_cyb_m: float = 2.0
    d_cyf_m: float = 3.0
    d_cxr_m: float = 1.0
    d_cxl_m: float = 1.0
    tilt_deg: float = 0.0
    side_rotation_deg: Pair = (0.0, 0.0)
    fov_deg: Pair = (90.0, 90.0)
    area_m2: float = 1.0e-2
    # Positive side rotation turns each detector towards its own end of the
    # vehicle (front forwards, back backwards); False keeps the opposite sense.
    outward_rotation: bool = True

    def lateral_offset(self, i: int) -> float:
        return self.d_rxf_m if i == 1 else self.d_rxb_m

    def longitudinal_offset(self, i: int) -> float:
        return self.d_ryf_m if i == 1 else self.d_ryb_m


@dataclass(frozen=True)
class VlcParams:
    tx_power_w: float = 0.63
    lambert_order: float = 5.0
    wavelength_nm: float = 550.0
    filter_gain: float = 1.0
    concentrator_gain: float = 1.0
    oe_efficiency_a_per_w: float = 0.35
    bandwidth_hz: float = 10.0e6
    tx_area_m2: float = 0.09
    # Collecting area of one street-surface grid receiver (lighting mode).
    surface_area_m2: float = 2.5e-3
    mount: FixtureMount = field(default_factory=FixtureMount)
    receiver: ReceiverLayout = field(default_factory=ReceiverLayout)


@dataclass(frozen=True)
class ThzParams:
    tx_power_w: float = 0.63
    carrier_hz: float = 144.0e9
    tx_elements: tuple[int, int] = (10, 10)
    rx_elements: tuple[int, int] = (10, 10)
    # None means half a wavelength.
    element_spacing_m: float | None = None
    steering_polar_deg: float = 0.0
    steering_azimuth_deg: float = 0.0
    noise_variance_w: float = 27.0e-6
    symmetric_gains: bool = False
    # tx_power_w feeds every transmit element.
    power_per_element: bool = True
    # Apply the main-lobe steering to the vehicle array as well.
    steer_receiver: bool = False
    mount: FixtureMount = field(default_factory=FixtureMount)
    receiver: ReceiverLayout = field(default_factory=ReceiverLayout)

    @property
    def wavelength_m(self) -> float:
        return SPEED_OF_LIGHT / self.carrier_hz

    @property
    def spacing_m(self) -> float:
        if self.element_spacing_m is None:
            return self.wavelength_m / 2.0
        return self.element_spacing_m


@dataclass(frozen=True)
class Environment:
    visibility_km: float = 50.0
    background_power_w: float = 0.29e-9
    relative_humidity_pct: float = 50.0
    temperature_c: float = 25.0
    pressure_hpa: float = 1013.25


@dataclass(frozen=True)
class NoiseConstants:
    electron_charge_c: float = 1.6e-19
    boltzmann_j_per_k: float = 1.38e-23
    noise_temperature_k: float = 300.0
    i2: float = 0.562
    i3: float = 0.868
    fet_noise_factor: float = 1.5
    transconductance_s: float = 30.0e-3
    open_loop_gain: float = 10.0
    capacitance_pf_per_cm2: float = 112.0

    @property
    def capacitance_f_per_m2(self) -> float:
        # 1 pF/cm^2 = 1e-12 F / 1e-4 m^2
        return self.capacitance_pf_per_cm2 * 1.0e-8


@dataclass(frozen=True)
class HybridParams:
    low_threshold_db: float = 1.0
    high_threshold_db: float = 5.0
    # Use the upper-tail form Q((y - mean)/sigma) as the outage CDF.
    upper_tail_cdf: bool = False


@dataclass(frozen=True)
class GridSettings:
    resolution_m: float = 0.25
    # Restrict the longitudinal extent to [first pole, last pole].
    served_segment_only: bool = True


@dataclass(frozen=True)
class StreetScenario:
    street: StreetLayout = field(default_factory=StreetLayout)
    vlc: VlcParams = field(default_factory=VlcParams)
    thz: ThzParams = field(default_factory=ThzParams)
    env: Environment = field(default_factory=Environment)
    noise: NoiseConstants = field(default_factory=NoiseConstants)
    hybrid: HybridParams = field(default_factory=HybridParams)
    grid: GridSettings = field(default_factory=GridSettings)


def default_scenario() -> StreetScenario:
    """Scenario populated with the baseline parameter table."""
    return StreetScenario()


# --------------------------------------------------------------------------
# validation


def _check_pair_fov(name: str, values: Pair, out: list[str]) -> None:
    for v in values:
        if not 0.0 < v <= 90.0:
            out.append(f"{name} must lie in (0, 90] deg, got {v}")


def _check_mount(prefix: str, mount: FixtureMount, out: list[str]) -> None:
    if mount.fixture_side_m <= 0:
        out.append(f"{prefix}.fixture_side_m must be > 0")
    if mount.rod_length_m < 0:
        out.append(f"{prefix}.rod_length_m must be >= 0")
    _check_pair_fov(f"{prefix}.fov_deg", mount.fov_deg, out)


def _check_receiver(prefix: str, rx: ReceiverLayout, out: list[str]) -> None:
    for f in ("d_rxf_m", "d_rxb_m", "d_ryf_m", "d_ryb_m",
              "d_cyb_m", "d_cyf_m", "d_cxr_m", "d_cxl_m"):
        if getattr(rx, f) < 0:
            out.append(f"{prefix}.{f} must be >= 0")
    _check_pair_fov(f"{prefix}.fov_deg", rx.fov_deg, out)
    if rx.area_m2 <= 0:
        out.append(f"{prefix}.area_m2 must be > 0")


def validate(scenario: StreetScenario) -> list[str]:
    """Return a list of violated invariants; empty means usable."""
    out: list[str] = []
    st = scenario.street
    if st.lane_width_m <= 0:
        out.append("street.lane_width_m must be > 0")
    if st.pole_height_m <= st.vehicle_height_m:
        out.append("pole below receiver plane: pole_height_m must exceed vehicle_height_m")
    if st.vehicle_height_m < 0:
        out.append("street.vehicle_height_m must be >= 0")
    if int(st.pole_count) != st.pole_count or st.pole_count < 1:
        out.append("pole_count >= 1 (integer) required")
    if st.pole_spacing_m <= 0:
        out.append("street.pole_spacing_m must be > 0")
    if st.opposite_offset_m is not None and st.opposite_offset_m < 0:
        out.append("street.opposite_offset_m must be >= 0")
    lo, hi = st.admissible_band_m
    if not 0 <= lo < hi <= st.lane_width_m:
        out.append("street.admissible_band_m must satisfy 0 <= x_min < x_max <= lane_width_m")

    v = scenario.vlc
    if v.tx_power_w <= 0:
        out.append("vlc.tx_power_w must be > 0")
    if v.lambert_order < 1:
        out.append("vlc.lambert_order must be >= 1")
    if v.filter_gain <= 0 or v.concentrator_gain <= 0:
        out.append("vlc.filter_gain and vlc.concentrator_gain must be > 0")
    if not 0 < v.oe_efficiency_a_per_w <= 1:
        out.append("vlc.oe_efficiency_a_per_w must lie in (0, 1]")
    if v.bandwidth_hz <= 0:
        out.append("vlc.bandwidth_hz must be > 0")
    if v.wavelength_nm <= 0:
        out.append("vlc.wavelength_nm must be > 0")
    if v.surface_area_m2 <= 0:
        out.append("vlc.surface_area_m2 must be > 0")
    _check_mount("vlc.mount", v.mount, out)
    _check_receiver("vlc.receiver", v.receiver, out)

    t = scenario.thz
    if t.tx_power_w <= 0:
        out.append("thz.tx_power_w must be > 0")
    if t.carrier_hz <= 0:
        out.append("thz.carrier_hz must be > 0")
    if min(t.tx_elements) < 1 or min(t.rx_elements) < 1:
        out.append("thz element counts must be >= 1")
    if t.element_spacing_m is not None and t.element_spacing_m <= 0:
        out.append("thz.element_spacing_m must be > 0")
    if t.noise_variance_w <= 0:
        out.append("thz.noise_variance_w must be > 0")
    _check_mount("thz.mount", t.mount, out)
    _check_receiver("thz.receiver", t.receiver, out)

    e = scenario.env
    if e.visibility_km <= 0:
        out.append("env.visibility_km must be > 0")
    if e.background_power_w < 0:
        out.append("env.background_power_w must be >= 0")
    if not 0 <= e.relative_humidity_pct <= 100:
        out.append("env.relative_humidity_pct must lie in [0, 100]")
    if e.pressure_hpa <= 0:
        out.append("env.pressure_hpa must be > 0")
    if e.temperature_c <= -240.97:
        out.append("env.temperature_c must exceed -240.97 C")

    for f in fields(scenario.noise):
        if getattr(scenario.noise, f.name) <= 0:
            out.append(f"noise.{f.name} must be > 0")

    h = scenario.hybrid
    if h.low_threshold_db > h.high_threshold_db:
        out.append("hybrid.low_threshold_db must not exceed hybrid.high_threshold_db")
    if scenario.grid.resolution_m <= 0:
        out.append("grid.resolution_m must be > 0")
    return out


# --------------------------------------------------------------------------
# serialisation


def to_dict(obj: Any) -> dict[str, Any]:
    """Nested plain-dict view of a scenario (tuples become lists)."""
    out: dict[str, Any] = {}
    for f in fields(obj):
        value = getattr(obj, f.name)
        if is_dataclass(value):
            out[f.name] = to_dict(value)
        elif isinstance(value, tuple):
            out[f.name] = list(value)
        else:
            out[f.name] = value
    return out


def _coerce(target_type: Any, current: Any, value: Any, key: str) -> Any:
    if isinstance(current, tuple) or (isinstance(value, list) and current is None):
        if not isinstance(value, (list, tuple)) or len(value) != 2:
            raise ConfigError(f"{key}: expected a two-element list, got {value!r}")
        kind = int if current and isinstance(current[0], int) and not isinstance(current[0], bool) else float
        return tuple(kind(v) for v in value)
    if isinstance(current, bool):
        if not isinstance(value, bool):
            raise ConfigError(f"{key}: expected true/false, got {value!r}")
        return value
    if isinstance(current, int):
        if isinstance(value, float) and value.is_integer():
            value = int(value)
        if not isinstance(value, int) or isinstance(value, bool):
            raise ConfigError(f"{key}: expected an integer, got {value!r}")
        return value
    if value is None:
        if "None" not in str(target_type):
            raise ConfigError(f"{key}: null not allowed")
        return None
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise ConfigError(f"{key}: expected a number, got {value!r}")
    return float(value)


def from_dict(data: dict[str, Any], base: Any | None = None, prefix: str = "") -> Any:
    """Build a scenario from a (possibly partial) nested dict over ``base``."""
    if base is None:
        base = default_scenario()
    if not isinstance(data, dict):
        raise ConfigError(f"{prefix or 'config'}: expected an object")
    known = {f.name: f for f in fields(base)}
    changes = {}
    for key, value in data.items():
        dotted = f"{prefix}{key}"
        if key not in known:
            raise ConfigError(f"unknown config key {dotted!r}")
        current = getattr(base, key)
        if is_dataclass(current):
            changes[key] = from_dict(value, current, dotted + ".")
        else:
            changes[key] = _coerce(known[key].type, current, value, dotted)
    return replace(base, **changes)


def dumps(scenario: StreetScenario) -> str:
    return json.dumps(to_dict(scenario), indent=2, sort_keys=True) + "\n"


def load(path: str | Path, base: StreetScenario | None = None) -> StreetScenario:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    return from_dict(data, base)


def save(scenario: StreetScenario, path: str | Path) -> None:
    Path(path).write_text(dumps(scenario))


def get_path(scenario: Any, key: str) -> Any:
    obj = scenario
    for part in key.split("."):
        if not is_dataclass(obj) or part not in {f.name for f in fields(obj)}:
            raise ConfigError(f"unknown config key {key!r}")
        obj = getattr(obj, part)
    return obj


def set_path(scenario: Any, key: str, value: Any) -> Any:
    """Return a copy of ``scenario`` with the dotted ``key`` replaced."""
    get_path(scenario, key)
    nested: dict[str, Any] = {}
    node = nested
    parts = key.split(".")
    for part in parts[:-1]:
        node[part] = {}
        node = node[part]
    node[parts[-1]] = value
    return from_dict(nested, scenario)


def apply_overrides(scenario: StreetScenario, overrides: list[str]) -> StreetScenario:
    """Apply ``key=value`` strings; values are parsed as JSON when possible."""
    for item in overrides:
        key, sep, raw = item.partition("=")
        if not sep:
            raise ConfigError(f"override {item!r} is not of the form key=value")
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            raise ConfigError(f"override {item!r}: value is not valid JSON") from None
        scenario = set_path(scenario, key.strip(), value)
    return scenario


def flat_keys(obj: Any, prefix: str = "") -> list[str]:
    """All dotted leaf keys of a scenario, in declaration order."""
    keys = []
    for f in dataclasses.fields(obj):
        value = getattr(obj, f.name)
        if is_dataclass(value):
            keys.extend(flat_keys(value, f"{prefix}{f.name}."))
        else:
            keys.append(prefix + f.name)
    return keys

