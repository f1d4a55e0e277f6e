"""File outputs: map CSV, JSON summaries, PPM/PNG renderings and run manifests."""

from __future__ import annotations

import csv
import datetime as dt
import hashlib
import json
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .coverage import LEVEL_THRESHOLDS, CoverageMap, coverage_percent

# dark-to-bright, one entry per level 0..4
PALETTE = (
    (16, 16, 48),
    (72, 32, 120),
    (32, 112, 176),
    (64, 184, 112),
    (248, 224, 64),
)


def fmt9(value: float) -> str:
    return format(float(value), ".9g")


def write_map_csv(cmap: CoverageMap, path: str | Path) -> None:
    """Rows ``x_m,y_m,value,level`` ordered by y, then x."""
    xs, ys = cmap.grid.xs, cmap.grid.ys
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["x_m", "y_m", "value", "level"])
        for r, y in enumerate(ys):
            row_v = cmap.values[r]
            row_l = cmap.levels[r]
            for c, x in enumerate(xs):
                writer.writerow([fmt9(x), fmt9(y), fmt9(row_v[c]), int(row_l[c])])


def map_summary(cmap: CoverageMap, denominator: str = "admissible") -> dict:
    """JSON-ready summary; keys are fixed and locale independent."""
    if denominator not in ("admissible", "full"):
        raise ValueError("denominator must be 'admissible' or 'full'")
    lower = cmap.kind == "outage"
    mask = None
    if denominator == "admissible" and cmap.metric != "LC":
        mask = cmap.grid.admissible()[None, :]
    per_level = {fmt9(t): coverage_percent(cmap.values, t, lower_better=lower, mask=mask)
                 for t in LEVEL_THRESHOLDS[cmap.kind]}
    g = cmap.grid
    return {
        "metric": cmap.metric,
        "unit": cmap.unit,
        "threshold": cmap.threshold,
        "denominator": denominator,
        "coverage_percent": (cmap.coverage_percent if denominator == "admissible"
                             else cmap.coverage_percent_full),
        "coverage_percent_admissible": cmap.coverage_percent,
        "coverage_percent_full": cmap.coverage_percent_full,
        "coverage_percent_per_threshold": per_level,
        "level_thresholds": list(LEVEL_THRESHOLDS[cmap.kind]),
        "level_counts": [int(np.count_nonzero(cmap.levels == k)) for k in range(5)],
        "grid": {
            "x_range_m": list(g.x_range),
            "y_range_m": list(g.y_range),
            "resolution_m": g.resolution,
            "admissible_band_m": list(g.band) if g.band else None,
            "shape": list(g.shape),
        },
    }


def write_json(data, path: str | Path) -> None:
    Path(path).write_text(json.dumps(data, indent=2, sort_keys=True, allow_nan=False) + "\n")


def ppm_bytes(levels: np.ndarray, palette: Sequence[tuple[int, int, int]] = PALETTE) -> bytes:
    """Binary P6 image, one pixel per cell, highest y on the first row."""
    levels = np.asarray(levels)
    if levels.ndim != 2:
        raise ValueError("level map must be 2-D")
    if levels.size and (levels.min() < 0 or levels.max() >= len(palette)):
        raise ValueError("level outside palette range")
    lut = np.asarray(palette, np.uint8)
    pixels = lut[levels[::-1].astype(np.intp)]
    h, w = levels.shape
    return f"P6\n{w} {h}\n255\n".encode("ascii") + pixels.tobytes()


def write_ppm(levels: np.ndarray, path: str | Path,
              palette: Sequence[tuple[int, int, int]] = PALETTE) -> None:
    Path(path).write_bytes(ppm_bytes(levels, palette))


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def plot_map(cmap: CoverageMap, path: str | Path, title: str | None = None) -> None:
    """Level map in street coordinates with a five-colour legend."""
    plt = _pyplot()
    from matplotlib.colors import BoundaryNorm, ListedColormap

    colours = ListedColormap([tuple(c / 255 for c in rgb) for rgb in PALETTE])
    norm = BoundaryNorm(np.arange(-0.5, 5.5), colours.N)
    g = cmap.grid
    fig, ax = plt.subplots(figsize=(4.0, 7.0))
    im = ax.imshow(cmap.levels, origin="lower", cmap=colours, norm=norm, aspect="auto",
                   extent=(g.x_range[0], g.x_range[1], g.y_range[0], g.y_range[1]),
                   interpolation="nearest")
    bar = fig.colorbar(im, ax=ax, ticks=range(5))
    t = LEVEL_THRESHOLDS[cmap.kind]
    sign = "<=" if cmap.kind == "outage" else ">="
    bar.ax.set_yticklabels([f"below {t[0]:g}"] + [f"{sign} {v:g}" for v in t])
    ax.set_xlabel("x (m)")
    ax.set_ylabel("y (m)")
    ax.set_title(title or f"{cmap.metric}: {cmap.coverage_percent:.2f}% covered", fontsize=9)
    fig.tight_layout()
    fig.savefig(path, dpi=110, metadata={"Software": None})
    plt.close(fig)


def plot_table(rows: Sequence[dict], columns: Sequence[str], path: str | Path) -> None:
    """Grouped bars, one group per table row."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(7.0, 3.6))
    n = len(columns)
    width = 0.8 / max(n, 1)
    x = np.arange(len(rows))
    for j, col in enumerate(columns):
        ax.bar(x + (j - (n - 1) / 2) * width, [r[col] for r in rows], width, label=col)
    ax.set_xticks(x, [f"{r['visibility_km']:g} km\n{r['background_power_w']:.1e} W" for r in rows],
                  fontsize=7)
    ax.set_ylabel("coverage (%)")
    lows = [r[c] for r in rows for c in columns]
    ax.set_ylim(max(0.0, min(lows, default=0.0) - 5.0), 100.5)
    ax.legend(fontsize=7, ncol=n)
    fig.tight_layout()
    fig.savefig(path, dpi=110, metadata={"Software": None})
    plt.close(fig)


def plot_trace(objectives: Sequence[float], feasible: Sequence[bool], best_index: int,
               path: str | Path, label: str = "objective") -> None:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6.0, 3.2))
    idx = np.arange(len(objectives))
    obj = np.asarray(objectives, float)
    ok = np.asarray(feasible, bool)
    ax.plot(idx[ok], obj[ok], ".", ms=3, label="feasible")
    if (~ok).any():
        ax.plot(idx[~ok], obj[~ok], "x", ms=3, color="0.6", label="infeasible")
    ax.axvline(best_index, color="k", lw=0.8, ls="--")
    ax.set_xlabel("configuration index")
    ax.set_ylabel(f"{label} coverage (%)")
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path, dpi=110, metadata={"Software": None})
    plt.close(fig)


@dataclass
class RunManifest:
    command: str
    config_digest: str
    timestamp: str
    tool_version: str
    outputs: list[str] = field(default_factory=list)

    def write(self, path: str | Path) -> None:
        write_json(asdict(self), path)


def config_digest(config_text: str) -> str:
    return hashlib.sha256(config_text.encode("utf-8")).hexdigest()


def timestamp() -> str:
    """UTC time, pinned by SOURCE_DATE_EPOCH when set (reproducible runs)."""
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    moment = (dt.datetime.fromtimestamp(int(epoch), dt.timezone.utc) if epoch
              else dt.datetime.now(dt.timezone.utc))
    return moment.replace(microsecond=0).isoformat()
