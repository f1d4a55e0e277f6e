"""Street discretisation, per-point metric maps and coverage percentages.

Lighting (``LC``) is evaluated on the asphalt over the full lane width.
Communication metrics place a vehicle centre at each grid point; points
outside the admissible lateral band get no signal (0 W, -inf dB, outage 1).
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from . import link_metrics as lm
from . import thz_channel, vlc_channel
from .hybrid import static_coverage_metric
from .scenario import StreetScenario

METRICS = ("LC", "SNR_V", "SINR_V", "SNR_T", "SINR_T", "SIC_GS", "SIC_PSC",
           "OP_V", "OP_T", "OP_GS", "OP_PSC")

POWER, DB, OUTAGE = "power", "db", "outage"

KIND = {"LC": POWER, "OP_V": OUTAGE, "OP_T": OUTAGE, "OP_GS": OUTAGE, "OP_PSC": OUTAGE}

COVERAGE_THRESHOLD = {POWER: 2.0e-6, DB: 5.0, OUTAGE: 1.0e-6}

LEVEL_THRESHOLDS = {
    POWER: (4.0e-8, 1.0e-7, 6.0e-7, 2.0e-6),
    DB: (-1.0, 1.0, 5.0, 10.0),
    OUTAGE: (1.0e-7, 1.0e-5, 1.0e-3, 1.0e-2),
}

UNITS = {POWER: "W", DB: "dB", OUTAGE: "probability"}

# value assigned to vehicle points outside the admissible band
_DEAD = {POWER: 0.0, DB: -np.inf, OUTAGE: 1.0}

THREADS_ENV = "STREETLINK_THREADS"

_CHUNK_ROWS = 64


class UnknownMetric(ValueError):
    pass


class NonMonotoneThresholds(ValueError):
    pass


def metric_kind(metric: str) -> str:
    if metric not in METRICS:
        raise UnknownMetric(f"unknown metric {metric!r}; valid metrics: {', '.join(METRICS)}")
    return KIND.get(metric, DB)


def lower_is_better(metric: str) -> bool:
    return metric_kind(metric) == OUTAGE


@dataclass(frozen=True)
class GridSpec:
    """Cell-centred rectangular grid over the street surface."""

    x_range: tuple[float, float]
    y_range: tuple[float, float]
    resolution: float
    band: tuple[float, float] | None = None

    def __post_init__(self):
        if not self.resolution > 0:
            raise ValueError("grid resolution must be positive")
        if self.x_range[1] <= self.x_range[0] or self.y_range[1] <= self.y_range[0]:
            raise ValueError("grid ranges must be non-empty")

    @staticmethod
    def _centres(lo, hi, step):
        n = max(int(round((hi - lo) / step)), 1)
        return lo + (np.arange(n) + 0.5) * step

    @property
    def xs(self) -> np.ndarray:
        return self._centres(*self.x_range, self.resolution)

    @property
    def ys(self) -> np.ndarray:
        return self._centres(*self.y_range, self.resolution)

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.ys), len(self.xs)

    def mesh(self):
        return np.meshgrid(self.xs, self.ys)

    def admissible(self) -> np.ndarray:
        """Column mask of cells whose centre lies inside the lateral band."""
        xs = self.xs
        if self.band is None:
            return np.ones(xs.shape, bool)
        return (xs >= self.band[0]) & (xs <= self.band[1])


def grid_for(scenario: StreetScenario, resolution: float | None = None, *,
             served_segment: bool | None = None) -> GridSpec:
    """Default grid: full lane width, served segment between the end poles."""
    st = scenario.street
    res = scenario.grid.resolution_m if resolution is None else resolution
    served = scenario.grid.served_segment_only if served_segment is None else served_segment
    poles = st.pole_positions()
    y_range = (poles[0], poles[-1])
    if not served or y_range[1] - y_range[0] < res:
        y_range = (0.0, st.street_length_m)
    return GridSpec((0.0, st.lane_width_m), y_range, res, tuple(st.admissible_band_m))


@dataclass(frozen=True)
class CoverageMap:
    metric: str
    grid: GridSpec
    values: np.ndarray
    levels: np.ndarray
    threshold: float
    coverage_percent: float
    # every grid cell in the denominator, including the border bands
    coverage_percent_full: float

    @property
    def kind(self) -> str:
        return metric_kind(self.metric)

    @property
    def unit(self) -> str:
        return UNITS[self.kind]

    def covered(self) -> np.ndarray:
        return satisfies(self.values, self.threshold, lower_is_better(self.metric))


def satisfies(values, threshold, lower_better: bool = False) -> np.ndarray:
    values = np.asarray(values)
    return values <= threshold if lower_better else values >= threshold


def coverage_percent(values, threshold, *, lower_better: bool = False, mask=None) -> float:
    """Percentage of (masked) points meeting the threshold."""
    ok = satisfies(values, threshold, lower_better)
    if mask is not None:
        mask = np.broadcast_to(np.asarray(mask, bool), ok.shape)
        ok = ok[mask]
    if ok.size == 0:
        return 0.0
    return 100.0 * np.count_nonzero(ok) / ok.size


def quantize_levels(values, thresholds, *, lower_better: bool = False) -> np.ndarray:
    """Level 0..len(thresholds): number of thresholds a value satisfies."""
    thresholds = np.asarray(thresholds, float)
    if np.any(np.diff(thresholds) <= 0):
        raise NonMonotoneThresholds(f"thresholds must be strictly ascending: {thresholds}")
    values = np.asarray(values, float)
    levels = np.zeros(values.shape, np.uint8)
    for t in thresholds:
        levels += satisfies(values, t, lower_better)
    return levels


# --------------------------------------------------------------------------
# point evaluation


def _vlc_terms(scenario, x, y):
    vlc = scenario.vlc
    p = vlc_channel.serving_power(scenario, x, y)
    i = vlc_channel.interference_power(scenario, x, y)
    noise = lm.vlc_noise(p, scenario.env.background_power_w, scenario.noise, vlc)
    return p, i, noise


def _thz_terms(scenario, x, y):
    return (thz_channel.received_power(scenario, x, y),
            thz_channel.interference_power(scenario, x, y))


def _point_values(scenario: StreetScenario, metrics, x, y) -> dict[str, np.ndarray]:
    """Every requested vehicle metric at the points ``(x, y)``."""
    need_v = any(m.endswith("_V") or m in ("SIC_GS", "SIC_PSC", "OP_GS", "OP_PSC")
                 for m in metrics)
    need_t = any(m.endswith("_T") or m in ("SIC_GS", "SIC_PSC", "OP_GS", "OP_PSC")
                 for m in metrics)
    h = scenario.hybrid
    upper = h.upper_tail_cdf
    eta = scenario.vlc.oe_efficiency_a_per_w
    pbs = scenario.env.background_power_w
    out: dict[str, np.ndarray] = {}
    if need_v:
        p, i, noise = _vlc_terms(scenario, x, y)
        out["SNR_V"] = lm.to_db(lm.snr_vlc(p, noise.total, eta))
        out["SINR_V"] = lm.to_db(lm.sinr_vlc(p, i, noise.total, pbs, eta))
        link_v = lm.vlc_link(p, i, noise, pbs, eta)
    if need_t:
        sigma2 = scenario.thz.noise_variance_w
        p_t, i_t = _thz_terms(scenario, x, y)
        out["SNR_T"] = lm.to_db(lm.snr_thz(p_t, sigma2))
        out["SINR_T"] = lm.to_db(lm.sinr_thz(p_t, i_t, sigma2))
        link_t = lm.thz_link(p_t, i_t, sigma2)
    if need_v and need_t:
        for scheme in ("GS", "PSC"):
            out[f"SIC_{scheme}"] = static_coverage_metric(
                scheme, out["SINR_V"], out["SINR_T"],
                low_db=h.low_threshold_db, high_db=h.high_threshold_db)
    if need_v:
        out["OP_V"] = link_v.cdf(h.high_threshold_db, printed_form=upper)
    if need_t:
        out["OP_T"] = link_t.cdf(h.high_threshold_db, printed_form=upper)
    if need_v and need_t:
        out["OP_PSC"] = lm.outage_psc(out["OP_V"], out["OP_T"])
        out["OP_GS"] = lm.outage_gs(
            link_v.cdf(h.low_threshold_db, printed_form=upper),
            link_t.cdf(h.low_threshold_db, printed_form=upper),
            out["OP_V"], out["OP_T"],
            lm.combined_cdf(link_v, link_t, h.high_threshold_db, printed_form=upper))
    return {m: out[m] for m in metrics}


def resolve_threads(threads: int | None = None) -> int:
    if threads is None:
        threads = int(os.environ.get(THREADS_ENV, "1") or 1)
    return max(int(threads), 1)


def _row_chunks(n_rows: int):
    return [(s, min(s + _CHUNK_ROWS, n_rows)) for s in range(0, n_rows, _CHUNK_ROWS)]


def _parallel_rows(fn, n_rows: int, threads: int):
    """Apply ``fn(start, stop)`` over row chunks; results in chunk order."""
    chunks = _row_chunks(n_rows)
    if threads <= 1 or len(chunks) == 1:
        return [fn(a, b) for a, b in chunks]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda c: fn(*c), chunks))


def evaluate_values(scenario: StreetScenario, metrics, grid: GridSpec | None = None,
                    *, threads: int | None = None) -> dict[str, np.ndarray]:
    """Raw value fields ``[ny, nx]`` for several metrics sharing one pass."""
    metrics = list(dict.fromkeys(metrics))
    for m in metrics:
        metric_kind(m)
    grid = grid or grid_for(scenario)
    threads = resolve_threads(threads)
    xs, ys = grid.xs, grid.ys
    out: dict[str, np.ndarray] = {}

    if "LC" in metrics:
        def lc_rows(a, b):
            x, y = np.meshgrid(xs, ys[a:b])
            return vlc_channel.surface_power(scenario, x, y)
        out["LC"] = np.vstack(_parallel_rows(lc_rows, len(ys), threads))

    vehicle = [m for m in metrics if m != "LC"]
    if vehicle:
        cols = grid.admissible()
        band_x = xs[cols]

        def vehicle_rows(a, b):
            x, y = np.meshgrid(band_x, ys[a:b])
            return _point_values(scenario, vehicle, x, y)

        parts = _parallel_rows(vehicle_rows, len(ys), threads) if band_x.size else []
        for m in vehicle:
            field = np.full(grid.shape, _DEAD[metric_kind(m)], float)
            if parts:
                field[:, cols] = np.vstack([p[m] for p in parts])
            out[m] = field
    return {m: out[m] for m in metrics}


def build_map(metric: str, grid: GridSpec, values: np.ndarray,
              threshold: float | None = None) -> CoverageMap:
    kind = metric_kind(metric)
    lower = kind == OUTAGE
    thr = COVERAGE_THRESHOLD[kind] if threshold is None else threshold
    levels = quantize_levels(values, LEVEL_THRESHOLDS[kind], lower_better=lower)
    full = coverage_percent(values, thr, lower_better=lower)
    if metric == "LC":
        admissible = full
    else:
        admissible = coverage_percent(values, thr, lower_better=lower,
                                      mask=grid.admissible()[None, :])
    return CoverageMap(metric, grid, values, levels, thr, admissible, full)


def evaluate_map(scenario: StreetScenario, metric: str, grid: GridSpec | None = None, *,
                 threshold: float | None = None, threads: int | None = None) -> CoverageMap:
    """Evaluate one metric over the street and summarise its coverage."""
    grid = grid or grid_for(scenario)
    values = evaluate_values(scenario, [metric], grid, threads=threads)[metric]
    return build_map(metric, grid, values, threshold)


def evaluate_maps(scenario: StreetScenario, metrics, grid: GridSpec | None = None, *,
                  threads: int | None = None) -> dict[str, CoverageMap]:
    grid = grid or grid_for(scenario)
    values = evaluate_values(scenario, metrics, grid, threads=threads)
    return {m: build_map(m, grid, v) for m, v in values.items()}


TABLE_COLUMNS = ("VLC", "NPSC", "GS", "PSC")


def condition_table(scenario: StreetScenario, rows, *, npsc: StreetScenario | None = None,
                    grid: GridSpec | None = None, threads: int | None = None) -> list[dict]:
    """SINR coverage of VLC and the hybrid schemes under several conditions.

    Each row sets ``visibility_km`` and ``background_power_w``. ``npsc``
    supplies the THz design used for the NPSC column (the hybrid design
    itself when omitted).
    """
    grid = grid or grid_for(scenario)
    mask = grid.admissible()[None, :]
    out = []
    for row in rows:
        env = replace(scenario.env, visibility_km=float(row["visibility_km"]),
                      background_power_w=float(row["background_power_w"]))
        sc = replace(scenario, env=env)
        vals = evaluate_values(sc, ["SINR_V", "SIC_GS", "SIC_PSC"], grid, threads=threads)
        alt = replace(npsc or scenario, env=env)
        npsc_vals = evaluate_values(alt, ["SIC_PSC"], grid, threads=threads)["SIC_PSC"]
        thr = COVERAGE_THRESHOLD[DB]
        out.append({
            "visibility_km": float(row["visibility_km"]),
            "background_power_w": float(row["background_power_w"]),
            "VLC": coverage_percent(vals["SINR_V"], thr, mask=mask),
            "NPSC": coverage_percent(npsc_vals, thr, mask=mask),
            "GS": coverage_percent(vals["SIC_GS"], thr, mask=mask),
            "PSC": coverage_percent(vals["SIC_PSC"], thr, mask=mask),
        })
    return out
