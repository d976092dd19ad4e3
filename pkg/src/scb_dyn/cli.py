"""Command-line entry point ``scb-dyn``.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

import argparse
import os
import sys
import time

from .config import ConfigError, load_config, parse_axis, SCHEMAS
from .experiments import run_experiment, sweep, write_manifest, write_outputs
from .ode import StepSizeUnderflow

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3


def _default_jobs():
    text = os.environ.get("SCB_DYN_JOBS", "1")
    try:
        return max(1, int(text))
    except ValueError:
        return 1


def build_parser():
    parser = argparse.ArgumentParser(
        prog="scb-dyn",
        description="Cooper pair box dynamics: qubit vs mean-field models under noise.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run the experiment described by a config file")
    run.add_argument("config")
    run.add_argument("--out", help="output directory (overrides output.dir)")
    run.add_argument("--quiet", action="store_true")
    run.add_argument("--jobs", type=int, default=_default_jobs())

    sw = sub.add_parser("sweep", help="run a config over a grid of parameter values")
    sw.add_argument("config")
    sw.add_argument("--axis", action="append", default=[], metavar="KEY=START:STOP:COUNT[:log]")
    sw.add_argument("--out")
    sw.add_argument("--quiet", action="store_true")
    sw.add_argument("--jobs", type=int, default=_default_jobs())
    sw.add_argument("--max-points", type=int, default=None)

    val = sub.add_parser("validate", help="check a config file without running it")
    val.add_argument("config")
    return parser


def _say(args, msg):
    if not getattr(args, "quiet", False):
        print(msg)


def main(argv=None):
    args = build_parser().parse_args(argv)

    try:
        cfg = load_config(args.config)
    except (ConfigError, OSError) as exc:
        message = f"config error: {exc}"
        print(message, file=sys.stderr)
        if args.command != "validate" and args.out:
            write_manifest(args.out, {}, 0.0, {}, status="error", error=message, exit_code=EXIT_CONFIG)
        return EXIT_CONFIG

    if args.command == "validate":
        print(f"{args.config}: ok ({cfg.kind})")
        return EXIT_OK

    out_dir = args.out or cfg.out_dir
    start = time.perf_counter()
    files = {}
    try:
        if args.command == "sweep":
            axes = [parse_axis(a, SCHEMAS[cfg.kind]) for a in args.axis]
            result = sweep(cfg, axes, jobs=args.jobs, max_points=args.max_points)
        elif cfg.kind == "decay-sweep":
            result = sweep(cfg, jobs=args.jobs)
        else:
            result = run_experiment(cfg)
        files = write_outputs(cfg, result, out_dir)
    except ConfigError as exc:
        return _fail(out_dir, cfg, start, files, f"config error: {exc}", EXIT_CONFIG)
    except StepSizeUnderflow as exc:
        return _fail(out_dir, cfg, start, files, f"numerical failure: {exc}", EXIT_NUMERIC)
    except (ArithmeticError, RuntimeError, ValueError, FloatingPointError) as exc:
        return _fail(out_dir, cfg, start, files, f"numerical failure: {exc}", EXIT_NUMERIC)

    write_manifest(out_dir, cfg.echo(), time.perf_counter() - start, files)
    _say(args, f"{cfg.kind}: wrote {', '.join(files)} to {out_dir}")
    for key, value in result.summary.items():
        _say(args, f"  {key} = {value}")
    return EXIT_OK


def _fail(out_dir, cfg, start, files, message, code):
    print(message, file=sys.stderr)
    write_manifest(out_dir, cfg.echo(), time.perf_counter() - start, files,
                   status="error", error=message, exit_code=code)
    return code


if __name__ == "__main__":
    sys.exit(main())
