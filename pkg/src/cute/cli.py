"""Command-line entry point: ``cute run|sweep|analyze|pipesize``."""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

from . import analysis
from .config import ConfigError, NetworkConfig, SweepConfig, load_config
from .experiments import PRESETS, SweepError, csv_lines, emit_csv, preset, run_sweep, single_row
from .netsim import SimulationStalled, TraceRecord
from .window import WindowConfigError


def _write_table(table, out) -> None:
    if out:
        with open(out, "w", newline="", encoding="utf-8") as fh:
            csv.writer(fh, lineterminator="\n").writerows(table)
    else:
        csv.writer(sys.stdout, lineterminator="\n").writerows(table)


def _emit(rows, out) -> None:
    if out:
        emit_csv(rows, out)
    else:
        _write_table(csv_lines(rows), None)


def cmd_run(args) -> None:
    config = load_config(args.config)
    if not isinstance(config, NetworkConfig):
        raise ConfigError(f"{args.config} is a sweep; use 'cute sweep'")
    if args.seed is not None:
        config = config.model_copy(update={"seed": args.seed})
    if args.trace:
        with open(args.trace, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(TraceRecord._fields)

            def hook(rec: TraceRecord) -> None:
                writer.writerow([format(rec.time, ".6g"), rec.kind,
                                 rec.connection, rec.ws, rec.seq])

            row = single_row(config, trace=hook)
    else:
        row = single_row(config)
    _emit([row], args.out)


def cmd_sweep(args) -> None:
    if (args.config is None) == (args.preset is None):
        raise ConfigError("give exactly one of a config file or --preset")
    sweep = preset(args.preset) if args.preset else load_config(args.config)
    if not isinstance(sweep, SweepConfig):
        raise ConfigError(f"{args.config} is a single network; use 'cute run'")
    if args.seed is not None:
        sweep = sweep.model_copy(update={"seed_base": args.seed})
    if args.replications is not None:
        sweep = sweep.model_copy(update={"replications": args.replications})
    _emit(run_sweep(sweep, jobs=args.jobs), args.out)


def cmd_analyze(args) -> None:
    model = analysis.ClosedNetworkModel(args.service_times)
    table = [["C", "throughput", "response", "power"]]
    for p in analysis.power_curve(model, args.c_max):
        table.append([str(p.customers)] + [format(v, ".6g") for v in
                                           (p.throughput, p.response, p.power)])
    _write_table(table, args.out)


def cmd_pipesize(args) -> None:
    if args.hops is not None:
        size = analysis.terrestrial_pipe_size(args.hops)
    elif args.min_delay is not None and args.bottleneck is not None:
        size = analysis.satellite_pipe_size(args.min_delay, args.bottleneck)
    else:
        raise ConfigError("give --hops, or both --min-delay and --bottleneck")
    text = f"{size}\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cute",
        description="Timeout-based window congestion control experiments.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None,
                        help="override the config seed (sweeps: seed base)")
    common.add_argument("--out", default=None,
                        help="output file (default: stdout)")
    common.add_argument("--trace", default=None,
                        help="write a per-event trace CSV (run only)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", parents=[common], help="simulate one network")
    p.add_argument("config")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", parents=[common], help="run a parameter sweep")
    p.add_argument("config", nargs="?")
    p.add_argument("--preset", choices=PRESETS)
    p.add_argument("--replications", type=int, default=None)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("analyze", parents=[common],
                       help="MVA power curve of a closed cyclic network")
    p.add_argument("--service-times", type=float, nargs="+", required=True)
    p.add_argument("--c-max", type=int, required=True)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("pipesize", parents=[common], help="pipe-size rules")
    p.add_argument("--hops", type=int)
    p.add_argument("--min-delay", type=float)
    p.add_argument("--bottleneck", type=float)
    p.set_defaults(func=cmd_pipesize)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.trace and args.command != "run":
        print("cute: --trace is only supported by 'run'", file=sys.stderr)
        return 2
    try:
        args.func(args)
    except (ConfigError, WindowConfigError, SweepError, SimulationStalled,
            ValueError, OSError) as exc:
        print(f"cute: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
