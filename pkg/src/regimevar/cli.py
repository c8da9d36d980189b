"""Command-line front end.

Subcommands: simulate, ingest, pretest, fit, analyze.  Exit codes: 0 on
success, 1 for configuration/validation errors, 2 for numerical failures,
3 for I/O errors.  Failures print a single-line JSON error record to stderr.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from regimevar import __version__
from regimevar.config import load_config
from regimevar.exceptions import ConfigError, DataError, EstimationError
from regimevar import pipeline

_COMMANDS = {
    "simulate": pipeline.cmd_simulate,
    "ingest": pipeline.cmd_ingest,
    "pretest": pipeline.cmd_pretest,
    "fit": pipeline.cmd_fit,
    "analyze": pipeline.cmd_analyze,
}

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_NUMERICAL = 2
EXIT_IO = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="regimevar",
        description="Regime-switching VAR pipeline: simulate, ingest, pretest, fit, analyze.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in _COMMANDS.items():
        p = sub.add_parser(name, help=fn.__doc__.splitlines()[0] if fn.__doc__ else name)
        p.add_argument("--config", required=True, help="path to the JSON pipeline config")
        p.add_argument("--seed", type=int, default=None, help="override the config master seed")
        p.add_argument("--out", default=None, help="override the output directory")
        p.add_argument(
            "--format",
            choices=("csv", "json", "both"),
            default=None,
            help="override emission formats",
        )
    return parser


def _error_record(exc: Exception, code: int) -> str:
    return json.dumps(
        {"error": type(exc).__name__, "message": str(exc), "exit_code": code},
        sort_keys=True,
    )


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config)
        formats = None
        if args.format is not None:
            formats = ("csv", "json") if args.format == "both" else (args.format,)
        config = config.with_overrides(seed=args.seed, out_dir=args.out, formats=formats)
        written = _COMMANDS[args.command](config)
    except (ConfigError, DataError) as exc:
        print(_error_record(exc, EXIT_VALIDATION), file=sys.stderr)
        return EXIT_VALIDATION
    except (EstimationError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(_error_record(exc, EXIT_NUMERICAL), file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(_error_record(exc, EXIT_IO), file=sys.stderr)
        return EXIT_IO
    for name in sorted(written):
        print(f"{args.command}: wrote {written[name]}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
