"""Command-line entry point: ``streetlink coverage | scenario-table | optimize | presets``.

Exit codes: 0 success, 2 invalid configuration or arguments, 3 file I/O
failure, 4 no feasible configuration in a search.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from . import __version__, coverage, optimizer, presets, report
from .scenario import (ConfigError, StreetScenario, apply_overrides, default_scenario,
                       dumps, from_dict, load, validate)

EXIT_OK, EXIT_CONFIG, EXIT_IO, EXIT_INFEASIBLE = 0, 2, 3, 4


class UsageError(Exception):
    pass


def _build_scenario(args, preset: str | None) -> StreetScenario:
    scenario = default_scenario()
    if preset:
        scenario = presets.load_scenario_preset(preset, scenario)
    if args.config:
        path = Path(args.config)
        if not path.exists():
            raise FileNotFoundError(f"config file not found: {path}")
        scenario = load(path, scenario)
    scenario = apply_overrides(scenario, args.set or [])
    if args.grid_res is not None:
        scenario = apply_overrides(scenario, [f"grid.resolution_m={args.grid_res}"])
    problems = validate(scenario)
    if problems:
        raise ConfigError("invalid scenario:\n  " + "\n  ".join(problems))
    return scenario


def _out_dir(args) -> Path:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _manifest(command: str, scenario: StreetScenario, out: Path, files: list[Path]) -> None:
    manifest = report.RunManifest(command, report.config_digest(dumps(scenario)),
                                  report.timestamp(), __version__,
                                  [p.name for p in files])
    manifest.write(out / "manifest.json")


def cmd_coverage(args) -> int:
    coverage.metric_kind(args.metric)
    scenario = _build_scenario(args, args.preset)
    out = _out_dir(args)
    cmap = coverage.evaluate_map(scenario, args.metric, threads=args.threads)
    stem = out / args.metric
    files = [out / "config.json", stem.with_suffix(".csv"), stem.with_suffix(".json"),
             stem.with_suffix(".ppm")]
    (out / "config.json").write_text(dumps(scenario))
    report.write_map_csv(cmap, files[1])
    summary = report.map_summary(cmap, args.denominator)
    report.write_json(summary, files[2])
    report.write_ppm(cmap.levels, files[3])
    if not args.no_figures:
        files.append(stem.with_suffix(".png"))
        report.plot_map(cmap, files[-1])
    _manifest("coverage", scenario, out, files)
    print(f"{args.metric}: {summary['coverage_percent']:.2f}% covered "
          f"({args.denominator} denominator) -> {out}")
    return EXIT_OK


def _conditions(name_or_path: str) -> dict:
    doc = presets.read_preset(name_or_path)
    if not isinstance(doc.get("rows", []), list):
        raise ConfigError("condition file: 'rows' must be a list")
    return doc


def cmd_scenario_table(args) -> int:
    preset = args.preset or (None if args.config else "hybrid")
    scenario = _build_scenario(args, preset)
    doc = _conditions(args.conditions)
    rows = doc.get("rows", [])
    for row in rows:
        if not {"visibility_km", "background_power_w"} <= set(row):
            raise ConfigError("each condition row needs visibility_km and background_power_w")
    npsc = None
    npsc_name = args.npsc_preset or doc.get("npsc_preset")
    if npsc_name:
        npsc_doc = presets.read_preset(npsc_name)
        # only the THz design differs between the two hybrid variants
        npsc = from_dict({"thz": npsc_doc.get("scenario", {}).get("thz", {})}, scenario)
    out = _out_dir(args)
    table = coverage.condition_table(scenario, rows, npsc=npsc, threads=args.threads)
    columns = ["visibility_km", "background_power_w", *coverage.TABLE_COLUMNS]
    path = out / "scenario_table.csv"
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for r in table:
            writer.writerow([report.fmt9(r[c]) for c in columns])
    files = [out / "config.json", path]
    (out / "config.json").write_text(dumps(scenario))
    if table and not args.no_figures:
        files.append(out / "scenario_table.png")
        report.plot_table(table, coverage.TABLE_COLUMNS, files[-1])
    _manifest("scenario-table", scenario, out, files)
    for r in table:
        print("  ".join(f"{c}={report.fmt9(r[c])}" for c in columns))
    return EXIT_OK


def cmd_optimize(args) -> int:
    doc = presets.read_preset(args.preset)
    if "axes" not in doc:
        raise ConfigError(f"{args.preset!r} is not a search preset")
    base = None if args.config else doc.get("base_preset")
    scenario = _build_scenario(args, base)
    spec = optimizer.spec_from_dict(doc, budget=args.budget)
    refine_cfg = doc.get("refine", {})
    rounds = refine_cfg.get("rounds", 0) if args.rounds is None else args.rounds
    out = _out_dir(args)
    files: list[Path] = []
    try:
        results = optimizer.search_with_refinement(
            scenario, spec, rounds=rounds, shrink=refine_cfg.get("shrink", 0.5),
            threads=args.threads)
    except optimizer.NoFeasiblePoint as exc:
        optimizer.write_trace_csv(exc.best, out / "trace.csv")
        files.append(out / "trace.csv")
        _manifest("optimize", scenario, out, files)
        print(f"no feasible configuration; best unconstrained {spec.objective} "
              f"= {exc.best.best.objective:.2f}% (trace in {out})", file=sys.stderr)
        return EXIT_INFEASIBLE
    for n, res in enumerate(results):
        name = "trace.csv" if n == 0 else f"trace_refine{n}.csv"
        optimizer.write_trace_csv(res, out / name)
        files.append(out / name)
    final = results[-1]
    (out / "best_config.json").write_text(dumps(final.scenario))
    files.append(out / "best_config.json")
    metrics = [spec.objective, *(m for m in spec.metrics if m != spec.objective)]
    summary = {
        "objective": spec.objective,
        "best_objective_percent": final.best.objective,
        "best_metrics_percent": final.best.metrics,
        "best_values": {k: list(v) if isinstance(v, tuple) else v
                        for k, v in final.best_values.items()},
        "evaluations": sum(len(r.trace) for r in results),
        "pareto": [dict(index=r.index, **r.metrics)
                   for r in optimizer.tradeoff_report(final.trace, metrics)]
        if len(metrics) > 1 else [],
    }
    report.write_json(summary, out / "summary.json")
    files.append(out / "summary.json")
    if not args.no_figures:
        files.append(out / "trace.png")
        first = results[0]
        report.plot_trace([r.objective for r in first.trace], [r.feasible for r in first.trace],
                          first.best.index, files[-1], spec.objective)
    _manifest("optimize", final.scenario, out, files)
    print(f"best {spec.objective} = {final.best.objective:.2f}% with "
          + json.dumps(summary["best_values"]))
    return EXIT_OK


def cmd_presets(args) -> int:
    for name in presets.list_presets():
        doc = presets.read_preset(name)
        print(f"{name:18s} {doc.get('description', '')}")
    return EXIT_OK


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="scenario JSON file (applied over the preset)")
    p.add_argument("--set", action="append", metavar="KEY=VALUE",
                   help="override a dotted config key; value parsed as JSON")
    p.add_argument("--grid-res", type=float, help="grid resolution in metres")
    p.add_argument("--out-dir", default="streetlink-out", help="output directory")
    p.add_argument("--threads", type=int, default=None,
                   help=f"worker threads (default: ${coverage.THREADS_ENV} or 1)")
    p.add_argument("--no-figures", action="store_true", help="skip PNG figures")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="streetlink",
                                     description="Street VLC/THz coverage simulator.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("coverage", help="evaluate one metric over the street")
    _common(p)
    p.add_argument("--preset", help="scenario preset name or JSON path")
    p.add_argument("--metric", default="LC", help="one of " + ", ".join(coverage.METRICS))
    p.add_argument("--denominator", choices=("admissible", "full"), default="admissible")
    p.set_defaults(func=cmd_coverage)

    p = sub.add_parser("scenario-table", help="hybrid coverage under weather conditions")
    _common(p)
    p.add_argument("--preset", help="scenario preset (default: hybrid)")
    p.add_argument("--conditions", default="weather_table",
                   help="condition rows: preset name or JSON path")
    p.add_argument("--npsc-preset", help="preset whose THz design feeds the NPSC column")
    p.set_defaults(func=cmd_scenario_table)

    p = sub.add_parser("optimize", help="grid search from a search preset")
    _common(p)
    p.add_argument("--preset", required=True, help="search preset name or JSON path")
    p.add_argument("--budget", type=int, default=None, help="maximum configurations per pass")
    p.add_argument("--rounds", type=int, default=None, help="refinement rounds")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("presets", help="list bundled presets")
    p.set_defaults(func=cmd_presets)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_CONFIG
    try:
        return args.func(args)
    except (ConfigError, coverage.UnknownMetric, optimizer.BudgetExceeded, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
