"""Command-line interface: run one trial, run a matrix, build reports.

Exit codes: 0 on completion (trial failures are data, not errors),
2 for configuration problems, 3 for I/O problems. The output directory
can also be set through the THERMOCUT_OUT environment variable; an
explicit --out wins over it.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace
from pathlib import Path

from .config import ConfigError, load_scenario, load_suite
from .metrics import summarize_trial
from .runner import report, run_matrix, trial_filename, write_trace_csv
from .trial import run_trial

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3


def _resolve_out(explicit: str | None, default: str) -> Path:
    if explicit:
        return Path(explicit)
    env = os.environ.get("THERMOCUT_OUT")
    if env:
        return Path(env)
    return Path(default)


def _cmd_run(args) -> int:
    suite, cell, phantom = load_scenario(args.config)
    seed = args.seed if args.seed is not None else suite.seeds[0]
    cfg = suite.trial_config(cell, phantom, seed)
    if args.dump_frames:
        cfg = replace(cfg, dump_dir=args.dump_frames,
                      dump_every=args.dump_every)
    result = run_trial(cfg)
    out_dir = _resolve_out(args.out, "out")
    out_dir.mkdir(parents=True, exist_ok=True)
    trace_path = out_dir / trial_filename(cell.name, phantom, seed)
    write_trace_csv(result, trace_path)
    summary = summarize_trial(result, cfg.phantom)
    status = "success" if result.success else \
        f"failure ({result.failure_cause} at " \
        f"{1e3 * (result.failure_position or 0):.1f} mm)"
    print(f"trial {cell.name} on {phantom}, seed {seed}: {status}")
    print(f"  peak deflection {1e3 * summary['peak_deflection']:.2f} mm, "
          f"mean width {1e3 * summary['mean_width']:.2f} mm, "
          f"mean velocity {1e3 * summary['mean_velocity']:.2f} mm/s")
    print(f"  trace written to {trace_path}")
    return EXIT_OK


def _cmd_matrix(args) -> int:
    suite = load_suite(args.suite)
    out_dir = _resolve_out(args.out, "out")
    rows = run_matrix(suite, out_dir, jobs=args.jobs)
    for row in rows:
        print(f"{row['controller']:>10s} {row['phantom']:>6s}: "
              f"success {row['success_rate']:.2f}, peak defl "
              f"{1e3 * row['mean_peak_deflection']:.2f} mm, width "
              f"{1e3 * row['mean_width']:.2f} mm")
    print(f"summary written to {out_dir / 'summary.csv'}")
    return EXIT_OK


def _cmd_report(args) -> int:
    out = report(args.in_dir, make_plots=not args.no_plots)
    print(f"report written to {out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="thermocut",
        description="Velocity-controlled thermal cutting simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a single scenario")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--seed", type=int, default=None)
    p_run.add_argument("--out", default=None)
    p_run.add_argument("--dump-frames", default=None,
                       help="directory for 16-bit PGM frame dumps")
    p_run.add_argument("--dump-every", type=int, default=25,
                       help="dump cadence in frames")
    p_run.set_defaults(func=_cmd_run)

    p_matrix = sub.add_parser("matrix", help="run a trial matrix")
    p_matrix.add_argument("--suite", required=True)
    p_matrix.add_argument("--out", default=None)
    p_matrix.add_argument("--jobs", type=int, default=None)
    p_matrix.set_defaults(func=_cmd_matrix)

    p_report = sub.add_parser("report",
                              help="summarise traces and draw plots")
    p_report.add_argument("--in", dest="in_dir", required=True)
    p_report.add_argument("--no-plots", action="store_true")
    p_report.set_defaults(func=_cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, FileNotFoundError) as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
