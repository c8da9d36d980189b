#!/usr/bin/env python3
"""Run the full pipeline on a synthetic multi-country fixture.

Generates data with known parameters, then runs every stage in order:
simulate -> ingest -> pretest -> fit -> analyze.  Outputs land under the
config's output directory (default: out/).
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

from regimevar.cli import main as cli_main

DEFAULT_CONFIG = Path(__file__).resolve().parents[1] / "configs" / "synthetic_demo.json"

STAGES = ("simulate", "ingest", "pretest", "fit", "analyze")


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--config", default=str(DEFAULT_CONFIG))
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--out", default=None)
    args = parser.parse_args()

    extra: list[str] = []
    if args.seed is not None:
        extra += ["--seed", str(args.seed)]
    if args.out is not None:
        extra += ["--out", args.out]

    for stage in STAGES:
        t0 = time.perf_counter()
        code = cli_main([stage, "--config", args.config, *extra])
        dt = time.perf_counter() - t0
        print(f"[{stage}] exit={code} ({dt:.1f}s)")
        if code != 0:
            return code
    return 0


if __name__ == "__main__":
    sys.exit(main())
