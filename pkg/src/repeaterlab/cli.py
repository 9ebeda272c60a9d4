"""Command-line interface.

Subcommands:
  run            execute one configured sweep, writing CSV and JSON summary
  min-repeaters  minimum repeater search over a list of distances
  chart          render an SVG chart from a results CSV
  validate       parse and constraint-check a config file

Exit codes: 0 success, 1 usage or configuration error, 2 runtime fault.
The ``REPEATERLAB_SEED`` environment variable overrides the base seed.
"""

import argparse
import json
import os
import sys

from .charts import CHART_KINDS, render_chart
from .config import load_config
from .errors import ConfigurationError
from .experiments import SweepSpec, run_sweep
from .output import parse_results_csv, write_results, write_summary


def _seed_override() -> int:
    raw = os.environ.get("REPEATERLAB_SEED")
    if raw is None:
        return None
    try:
        return int(raw)
    except ValueError:
        raise ConfigurationError(
            f"REPEATERLAB_SEED must be an integer, got {raw!r}") from None


def _replace_seed(spec: SweepSpec, args) -> SweepSpec:
    seed = _seed_override()
    if args.seed is not None:
        seed = args.seed
    if seed is None:
        return spec
    from dataclasses import replace
    return replace(spec, base_seed=seed)


def _cmd_run(args) -> int:
    cfg = load_config(args.config)
    spec = _replace_seed(cfg.sweep(args.sweep), args)
    out_dir = args.out or cfg.globals_.output_dir
    os.makedirs(out_dir, exist_ok=True)
    trace_lines = []

    def trace(t, src, dst, kind, session):
        trace_lines.append(json.dumps(
            {"t": t, "from": src, "to": dst, "kind": kind, "session": session},
            separators=(", ", ": ")))

    results = run_sweep(spec, profiles=cfg.profiles,
                        trace=trace if args.trace else None)
    csv_path = os.path.join(out_dir, f"{args.sweep}.csv")
    write_results(results, csv_path)
    write_summary(results, os.path.join(out_dir, f"{args.sweep}.json"))
    if args.trace:
        trace_path = os.path.join(out_dir, f"{args.sweep}.trace.jsonl")
        with open(trace_path, "w", encoding="utf-8") as fh:
            fh.write("\n".join(trace_lines))
            if trace_lines:
                fh.write("\n")
    errors = [r for r in results if r.error]
    print(f"wrote {csv_path}: {len(results)} configurations, "
          f"{sum(r.e_count for r in results)} successes, {len(errors)} errored")
    for r in errors:
        print(f"  error at D={r.total_distance_km} km, "
              f"N={r.router_count}: {r.error}", file=sys.stderr)
    return 0


def _cmd_min_repeaters(args) -> int:
    cfg = load_config(args.config)
    try:
        distances = tuple(float(d) for d in args.distances.split(","))
    except ValueError:
        raise ConfigurationError(
            f"--distances must be a comma-separated list of numbers, "
            f"got {args.distances!r}") from None
    glob = cfg.globals_
    spec = SweepSpec(kind="MinRepeaterSearch", profile=args.profile,
                     distances_km=distances, base_seed=glob.base_seed,
                     attempts=glob.attempts, t_sim_s=glob.t_sim_s,
                     retry_budget=glob.retry_budget,
                     f_threshold=glob.f_threshold)
    if spec.profile not in cfg.profiles:
        raise ConfigurationError(f"unknown profile {spec.profile!r}")
    spec = _replace_seed(spec, args)
    results = run_sweep(spec, profiles=cfg.profiles)
    out_dir = args.out or glob.output_dir
    os.makedirs(out_dir, exist_ok=True)
    csv_path = os.path.join(out_dir, "min_repeaters.csv")
    write_results(results, csv_path)
    for r in results:
        label = "unreachable" if r.error else str(r.router_count - 2)
        print(f"D={r.total_distance_km:g} km -> min repeaters: {label}")
    print(f"wrote {csv_path}")
    return 0


def _cmd_chart(args) -> int:
    try:
        with open(args.input, encoding="utf-8") as fh:
            rows = parse_results_csv(fh.read())
    except FileNotFoundError:
        raise ConfigurationError(f"input file not found: {args.input}") from None
    render_chart(rows, args.kind, args.out)
    print(f"wrote {args.out}")
    return 0


def _cmd_validate(args) -> int:
    cfg = load_config(args.config)
    print(f"config OK: {len(cfg.profiles)} profiles, {len(cfg.sweeps)} sweeps")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="repeaterlab",
        description="Deterministic simulator of linear quantum repeater chains")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one configured sweep")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--sweep", required=True)
    p_run.add_argument("--seed", type=int, default=None)
    p_run.add_argument("--out", default=None)
    p_run.add_argument("--trace", action="store_true")
    p_run.set_defaults(func=_cmd_run)

    p_min = sub.add_parser("min-repeaters", help="minimum repeater search")
    p_min.add_argument("--config", required=True)
    p_min.add_argument("--distances", required=True,
                       help="comma-separated distances in km")
    p_min.add_argument("--profile", default="idealized")
    p_min.add_argument("--seed", type=int, default=None)
    p_min.add_argument("--out", default=None)
    p_min.set_defaults(func=_cmd_min_repeaters)

    p_chart = sub.add_parser("chart", help="render an SVG chart from a CSV")
    p_chart.add_argument("--input", required=True)
    p_chart.add_argument("--kind", required=True, choices=CHART_KINDS)
    p_chart.add_argument("--out", required=True)
    p_chart.set_defaults(func=_cmd_chart)

    p_val = sub.add_parser("validate", help="check a config file")
    p_val.add_argument("--config", required=True)
    p_val.set_defaults(func=_cmd_validate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # runtime faults (SimulationFault and kin) exit 2
        print(f"fault: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
