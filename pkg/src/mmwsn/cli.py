"""Command-line entry point: `simulate --config ... --sweep ... --out ...`."""

from __future__ import annotations

import argparse
import json
import sys

from .config import WsnConfig
from .errors import ConfigError, MmwsnError
from .simulate import AXES, SweepSpec, emit, run_sweep


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="simulate",
        description="Monte-Carlo MSE sweeps for hybrid mmWave WSN transceiver designs")
    parser.add_argument("--config", required=True, help="JSON scenario config")
    parser.add_argument("--sweep", required=True, choices=AXES)
    parser.add_argument("--values", required=True,
                        help="comma-separated axis values")
    parser.add_argument("--trials", type=int, default=200)
    parser.add_argument("--designs", default="digital_total,hybrid_total",
                        help="comma-separated design names")
    parser.add_argument("--bounds", default="",
                        help="comma-separated bound names (bcrb,centralized)")
    parser.add_argument("--out", required=True, help="output file path")
    parser.add_argument("--format", default="csv", choices=("csv", "json"))
    parser.add_argument("--seed", type=int, default=None,
                        help="seed base (defaults to the config seed)")
    parser.add_argument("--empirical", action="store_true",
                        help="add signal-level empirical MSE cross-validation")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        with open(args.config) as fh:
            cfg = WsnConfig.from_dict(json.load(fh))
        axis = args.sweep
        if axis in ("sensor_count", "rf_chains_s"):
            values = tuple(int(v) for v in args.values.split(","))
        else:
            values = tuple(float(v) for v in args.values.split(","))
        spec = SweepSpec(
            axis=axis, values=values, trials=args.trials,
            designs=tuple(d for d in args.designs.split(",") if d),
            bounds=tuple(b for b in args.bounds.split(",") if b),
            seed_base=args.seed if args.seed is not None else cfg.seed,
            empirical=args.empirical)
    except (ConfigError, OSError, json.JSONDecodeError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        table = run_sweep(cfg, spec)
        emit(table, args.format, args.out)
    except MmwsnError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
