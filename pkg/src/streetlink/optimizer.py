"""Exhaustive grid search over scenario parameters.

Every axis names a dotted config key. A scalar value given for a
two-element field (for example both fixtures' side rotation) is applied to
both elements. The objective and constraints are coverage percentages.
"""

from __future__ import annotations

import csv
import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np

from . import coverage
from .scenario import ConfigError, StreetScenario, get_path, set_path

DEFAULT_BUDGET = 1_000_000


class BudgetExceeded(RuntimeError):
    pass


class NoFeasiblePoint(RuntimeError):
    """No configuration met the constraints; ``best`` is the unconstrained winner."""

    def __init__(self, message: str, best: "SearchResult"):
        super().__init__(message)
        self.best = best


@dataclass(frozen=True)
class ParamAxis:
    key: str
    values: tuple
    unit: str = ""
    bounds: tuple[float, float] | None = None

    def __post_init__(self):
        if not self.values:
            raise ConfigError(f"axis {self.key!r} has no values")

    @classmethod
    def from_range(cls, key: str, lo: float, hi: float, step: float, unit: str = ""):
        if step <= 0 or hi < lo:
            raise ConfigError(f"axis {key!r}: need step > 0 and max >= min")
        n = int(math.floor((hi - lo) / step + 1e-9)) + 1
        values = tuple(float(round(lo + j * step, 12)) for j in range(n))
        return cls(key, values, unit, (float(lo), float(hi)))

    @property
    def numeric(self) -> bool:
        return all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in self.values)

    @property
    def step(self) -> float | None:
        """Common spacing of an evenly spaced numeric axis, else None."""
        if not self.numeric or len(self.values) < 2:
            return None
        diffs = np.diff(np.asarray(self.values, float))
        if np.allclose(diffs, diffs[0], rtol=1e-9, atol=1e-12) and diffs[0] > 0:
            return float(diffs[0])
        return None

    @property
    def limits(self) -> tuple[float, float]:
        if self.bounds is not None:
            return self.bounds
        return float(min(self.values)), float(max(self.values))


@dataclass(frozen=True)
class Constraint:
    metric: str
    min_percent: float


@dataclass(frozen=True)
class SearchSpec:
    axes: tuple[ParamAxis, ...]
    objective: str
    constraints: tuple[Constraint, ...] = ()
    report_metrics: tuple[str, ...] = ()
    budget: int = DEFAULT_BUDGET
    grid_resolution: float | None = None

    def __post_init__(self):
        if not self.axes:
            raise ConfigError("a search needs at least one axis")
        for m in self.metrics:
            coverage.metric_kind(m)

    @property
    def size(self) -> int:
        return math.prod(len(a.values) for a in self.axes)

    @property
    def metrics(self) -> tuple[str, ...]:
        names = [self.objective, *(c.metric for c in self.constraints), *self.report_metrics]
        return tuple(dict.fromkeys(names))


@dataclass(frozen=True)
class TraceRow:
    index: int
    values: tuple
    objective: float
    metrics: dict[str, float]
    feasible: bool


@dataclass(frozen=True)
class SearchResult:
    spec: SearchSpec
    trace: tuple[TraceRow, ...]
    best: TraceRow
    scenario: StreetScenario = field(repr=False)

    @property
    def best_values(self) -> dict[str, Any]:
        return {a.key: v for a, v in zip(self.spec.axes, self.best.values)}


def apply_values(scenario: StreetScenario, axes: Sequence[ParamAxis], values) -> StreetScenario:
    for axis, value in zip(axes, values):
        current = get_path(scenario, axis.key)
        if isinstance(current, tuple) and not isinstance(value, (list, tuple)):
            value = [value, value]
        scenario = set_path(scenario, axis.key, value)
    return scenario


Evaluator = Callable[[StreetScenario, tuple[str, ...]], dict[str, float]]


def coverage_evaluator(resolution: float | None = None) -> Evaluator:
    """Coverage percentage of each metric from one shared evaluation pass."""

    def evaluate(scenario: StreetScenario, metrics: tuple[str, ...]) -> dict[str, float]:
        grid = coverage.grid_for(scenario, resolution)
        values = coverage.evaluate_values(scenario, metrics, grid, threads=1)
        return {m: coverage.build_map(m, grid, v).coverage_percent for m, v in values.items()}

    return evaluate


def _pick(rows: Sequence[TraceRow]) -> TraceRow:
    # highest objective, ties broken by the smallest axis-value tuple
    top = max(r.objective for r in rows)
    return min((r for r in rows if r.objective == top), key=lambda r: _sort_key(r.values))


def _sort_key(values):
    return tuple(tuple(v) if isinstance(v, (list, tuple)) else (v,) for v in values)


def grid_search(scenario: StreetScenario, spec: SearchSpec, *, threads: int | None = None,
                evaluator: Evaluator | None = None) -> SearchResult:
    """Evaluate every axis combination and return the constrained maximiser.

    Raises ``BudgetExceeded`` before evaluating anything if the Cartesian
    product is larger than ``spec.budget`` and ``NoFeasiblePoint`` (carrying
    the unconstrained best) when no combination meets the constraints.
    """
    if spec.size > spec.budget:
        raise BudgetExceeded(f"search space has {spec.size} points, budget is {spec.budget}")
    for axis in spec.axes:
        get_path(scenario, axis.key)
    evaluate = evaluator or coverage_evaluator(spec.grid_resolution)
    combos = list(itertools.product(*(a.values for a in spec.axes)))
    metrics = spec.metrics

    def run(item):
        index, values = item
        scored = evaluate(apply_values(scenario, spec.axes, values), metrics)
        feasible = all(scored[c.metric] >= c.min_percent for c in spec.constraints)
        return TraceRow(index, values, scored[spec.objective], scored, feasible)

    threads = coverage.resolve_threads(threads)
    items = list(enumerate(combos))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            trace = list(pool.map(run, items))
    else:
        trace = [run(item) for item in items]
    trace.sort(key=lambda r: r.index)

    feasible = [r for r in trace if r.feasible]
    overall = _pick(trace)
    if not feasible:
        result = SearchResult(spec, tuple(trace), overall,
                              apply_values(scenario, spec.axes, overall.values))
        raise NoFeasiblePoint("no configuration satisfies the constraints", result)
    best = _pick(feasible)
    return SearchResult(spec, tuple(trace), best, apply_values(scenario, spec.axes, best.values))


def refine(spec: SearchSpec, around: dict[str, Any], shrink: float) -> SearchSpec:
    """Re-centre each evenly spaced axis on ``around`` with a finer step.

    The new axis spans one old step either side of the incumbent with step
    ``old_step * shrink``, clipped to the original bounds. Other axes are
    pinned to the incumbent value.
    """
    if not 0 < shrink < 1:
        raise ConfigError("shrink must lie in (0, 1)")
    axes = []
    for axis in spec.axes:
        centre = around[axis.key]
        step = axis.step
        if step is None:
            axes.append(replace(axis, values=(centre,)))
            continue
        lo, hi = axis.limits
        new_step = step * shrink
        start = max(lo, centre - step)
        stop = min(hi, centre + step)
        n = int(math.floor((stop - start) / new_step + 1e-9)) + 1
        values = [float(round(start + j * new_step, 12)) for j in range(n)]
        if not any(math.isclose(v, centre, abs_tol=1e-9) for v in values):
            values = sorted(values + [float(centre)])
        axes.append(ParamAxis(axis.key, tuple(values), axis.unit, (lo, hi)))
    return replace(spec, axes=tuple(axes))


def search_with_refinement(scenario: StreetScenario, spec: SearchSpec, *, rounds: int = 0,
                           shrink: float = 0.5, threads: int | None = None,
                           evaluator: Evaluator | None = None) -> list[SearchResult]:
    """Coarse search followed by ``rounds`` refinements around the incumbent."""
    results = [grid_search(scenario, spec, threads=threads, evaluator=evaluator)]
    for _ in range(rounds):
        spec = refine(spec, results[-1].best_values, shrink)
        results.append(grid_search(scenario, spec, threads=threads, evaluator=evaluator))
    return results


def tradeoff_report(trace: Sequence[TraceRow], metrics: Sequence[str]) -> list[TraceRow]:
    """Non-dominated rows (maximising every metric), sorted by the first metric."""
    points = [(r, tuple(r.metrics[m] for m in metrics)) for r in trace]
    front = []
    for row, p in points:
        dominated = any(all(a >= b for a, b in zip(q, p)) and q != p for _, q in points)
        if not dominated:
            front.append((row, p))
    # identical metric vectors: keep the first occurrence only
    seen, unique = set(), []
    for row, p in front:
        if p not in seen:
            seen.add(p)
            unique.append(row)
    return sorted(unique, key=lambda r: (r.metrics[metrics[0]], r.index))


def _fmt(v) -> str:
    if isinstance(v, (list, tuple)):
        return ";".join(_fmt(x) for x in v)
    if isinstance(v, float):
        return format(v, ".9g")
    return str(v)


def write_trace_csv(result: SearchResult, path: str | Path) -> None:
    spec = result.spec
    extra = [m for m in spec.metrics if m != spec.objective]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["config_index", *(a.key for a in spec.axes), "objective", *extra])
        for row in result.trace:
            writer.writerow([row.index, *(_fmt(v) for v in row.values), _fmt(row.objective),
                             *(_fmt(row.metrics[m]) for m in extra)])


def spec_from_dict(data: dict[str, Any], *, budget: int | None = None) -> SearchSpec:
    """Build a search spec from the JSON preset layout."""
    try:
        axes = []
        for item in data["axes"]:
            if "values" in item:
                axes.append(ParamAxis(item["key"], tuple(item["values"]), item.get("unit", "")))
            else:
                axes.append(ParamAxis.from_range(item["key"], item["min"], item["max"],
                                                 item["step"], item.get("unit", "")))
        constraints = tuple(Constraint(c["metric"], float(c["min_percent"]))
                            for c in data.get("constraints", []))
        return SearchSpec(
            tuple(axes), data["objective"]["metric"], constraints,
            tuple(data.get("report_metrics", [])),
            int(budget if budget is not None else data.get("budget", DEFAULT_BUDGET)),
            data.get("grid_resolution"))
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"malformed search preset: {exc}") from exc
