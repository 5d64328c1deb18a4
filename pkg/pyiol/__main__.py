"""
iol - incremental online learning for ensemble deep RVFL networks.
"""

import argparse
import json
import logging
import os
import sys

from scipy import linalg

from .errors import IOLError
from .settings import __version__, CACHE_DIR
from . import bench
from . import export
from . import preset
from . import util


EXPORT_TYPES = ("csv_long", "json", "summary")


def add_run_args(arg, default_preset=None):
    """Flags shared by the subcommands that run experiments."""
    arg.add_argument("--config", metavar="/path/to/config.json",
                     help="Experiment config file to run.")

    arg.add_argument("--preset", metavar="preset_name",
                     help="Which bundled or user preset to run. \
                           Use '--preset' alone to list presets.",
                     const="list_presets", nargs="?",
                     default=default_preset)

    arg.add_argument("--seed", type=int, metavar="u64",
                     help="Base seed, repetition r uses seed + r.")

    arg.add_argument("--style", choices=("ridge", "forward", "both"),
                     help="Which IOL style(s) to run.")

    arg.add_argument("--reps", type=int, metavar="n",
                     help="Number of repetitions.")

    arg.add_argument("--workers", type=int, metavar="n",
                     help="Worker processes for repetitions.")

    arg.add_argument("--out", metavar="dir", default=CACHE_DIR,
                     help="Where to write the exported report.")

    arg.add_argument("--stream", action="store_true",
                     help="Also export the first repetition's stream \
                           with its metadata.")


def get_args():
    """Get the script arguments."""
    description = "iol - Incremental online learning for edRVFL"
    arg = argparse.ArgumentParser(description=description)

    arg.add_argument("-q", action="store_true",
                     help="Quiet mode, don\'t print anything.")

    arg.add_argument("-v", action="store_true",
                     help="Print \"iol\" version.")

    sub = arg.add_subparsers(dest="command")

    add_run_args(sub.add_parser("simulate",
                                help="Run a synthetic regret simulation."),
                 default_preset="synthetic_batch")

    add_run_args(sub.add_parser("bench", help="Run a dataset experiment."))

    ablate = sub.add_parser("ablate", help="Sweep one config axis.")
    add_run_args(ablate)
    ablate.add_argument("--axis", choices=bench.AXES, required=True,
                        help="Config axis to vary.")
    ablate.add_argument("--values", required=True, metavar="v1,v2,...",
                        help="Comma separated axis values.")

    exp = sub.add_parser("export", help="Re-export a saved JSON report.")
    exp.add_argument("--report", required=True, metavar="report.json",
                     help="Report written by a previous run.")
    exp.add_argument("--format", choices=EXPORT_TYPES, default="csv_long",
                     help="Export format.")
    exp.add_argument("--out", metavar="dir", default=CACHE_DIR,
                     help="Where to write the export.")

    return arg


def parse_args_exit(parser):
    """Process args that exit."""
    args = parser.parse_args()

    if len(sys.argv) <= 1:
        parser.print_help()
        sys.exit(1)

    if args.v:
        parser.exit(0, "iol %s\n" % __version__)

    if not args.command:
        parser.error("No subcommand given.")

    if getattr(args, "preset", None) == "list_presets":
        preset.list_out()
        sys.exit(0)

    if args.command in ("bench", "ablate") and \
       not args.config and not args.preset:
        parser.error("--config or --preset is required.")


def parse_value(value):
    """Axis values are JSON scalars, anything else stays a string."""
    try:
        return json.loads(value)
    except ValueError:
        return value


def load_config(args):
    """Config from --config or --preset with the CLI overrides applied."""
    overrides = {
        "seed": args.seed,
        "reps": args.reps,
        "workers": args.workers,
        "styles": (["ridge", "forward"] if args.style == "both"
                   else [args.style] if args.style else None),
    }

    if args.config:
        data = util.read_file_json(args.config)
        data.update({k: v for k, v in overrides.items() if v is not None})
        return bench.ExperimentConfig.from_dict(data)

    return preset.file(args.preset, **overrides)


def save(report, out):
    """Write every export type of a report."""
    for export_type in EXPORT_TYPES:
        export.export_report(report, export_type, out)


def parse_args(parser):
    """Process args."""
    args = parser.parse_args()

    if args.q:
        logging.getLogger().disabled = True
        sys.stdout = sys.stderr = open(os.devnull, "w")

    if args.command == "export":
        report = export.load_report(args.report)
        export.export_report(report, args.format, args.out)
        return

    cfg = load_config(args)

    if args.stream:
        export.export_stream(bench.build_stream(cfg, 0), cfg.name, args.out)

    if args.command == "simulate":
        save(bench.simulate(cfg), args.out)

    elif args.command == "bench":
        save(bench.run_experiment(cfg), args.out)

    else:
        values = [parse_value(v) for v in args.values.split(",")]
        for report in bench.ablation_sweep(cfg, args.axis, values):
            save(report, args.out)


def main():
    """Main script function."""
    util.setup_logging()
    parser = get_args()

    parse_args_exit(parser)

    try:
        parse_args(parser)
    except IOLError as err:
        logging.error("%s", err)
        sys.exit(err.exit_code)
    except linalg.LinAlgError as err:
        logging.error("Linear algebra failure: %s", err)
        sys.exit(3)
    except OSError as err:
        logging.error("%s", err)
        sys.exit(2)


if __name__ == "__main__":
    main()
