"""Command line front end: one subcommand per experiment suite.

Configuration comes from an optional JSON file (flat keys, unknown keys are
errors) overlaid by command line flags. Every run writes records.jsonl,
summary.csv, and manifest.json into its output directory and exits nonzero
iff any verdict is FAIL.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from datetime import datetime, timezone
from pathlib import Path

from .config import EXPERIMENTS, ConfigError, config_from_dict, config_hash
from .records import RunWriter
from .suites import run_suite
from ..randomfield import PRNG_ID
from ..torus import GAMMA_PRESETS

__all__ = ["main", "build_parser"]


def _seed_range(text: str) -> tuple[int, int]:
    lo, sep, hi = text.partition("..")
    if not sep:
        raise argparse.ArgumentTypeError(
            f"seed range must look like A..B (half-open), got {text!r}"
        )
    try:
        return int(lo), int(hi)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad seed range {text!r}: {exc}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="JSON config file")
    common.add_argument("--out", metavar="DIR", help="output directory for this run")
    common.add_argument("--workers", type=int, metavar="K", help="process pool size")
    common.add_argument(
        "--seed-range",
        type=_seed_range,
        metavar="A..B",
        help="half-open seed interval, e.g. 0..5",
    )
    common.add_argument(
        "--gamma",
        metavar="PRESET|LITERAL",
        help=f"aspect ratio: one of {sorted(GAMMA_PRESETS)} or a float literal",
    )

    parser = argparse.ArgumentParser(
        prog="wicktorus",
        description="Deterministic experiment suites for the wicktorus library.",
    )
    subs = parser.add_subparsers(dest="experiment", required=True, metavar="SUITE")
    descriptions = {
        "count-verify": "resonance counting sweeps with slope and exactness verdicts",
        "converge": "truncation-difference decay of the nonlinear remainder",
        "evolve": "trajectory checkpoints with mass/energy drift tracking",
        "picard": "contraction of the localized fixed-point iteration",
        "prob-verify": "Gaussian tail and sup-norm growth checks",
        "strichartz-scan": "space-time L4/L2 ratio growth across truncations",
        "tloc-scan": "norm scaling of time-localized fields in the window width",
        "cs-check": "matrix Cauchy-Schwarz inequality fuzzing",
        "divisor-scan": "divisor-pair growth exponents and factorization spot checks",
    }
    for name in EXPERIMENTS:
        sub = subs.add_parser(name, parents=[common], help=descriptions[name])
        if name == "evolve":
            sub.add_argument("--n", type=int, help="truncation radius")
            sub.add_argument("--dt", type=float, help="time step")
            sub.add_argument("--t-final", type=float, help="integration time")
            sub.add_argument("--delta", type=float, help="window width to record")
            sub.add_argument(
                "--seed", type=int, help="single seed (same as --seed-range S..S+1)"
            )
            sub.add_argument("--scheme", help="time stepper id, ifrk4 or gauss-ifrk4")
            sub.add_argument(
                "--store-stride", type=int, help="steps between stored checkpoints"
            )
    return parser


_EVOLVE_KEYS = ("n", "dt", "t_final", "delta", "scheme", "store_stride")


def _build_config(args: argparse.Namespace):
    data: dict = {}
    if args.config:
        raw = Path(args.config).read_text()
        try:
            data = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{args.config} is not valid JSON: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError(f"{args.config} must hold a JSON object of flat keys")
        if "experiment" in data and data["experiment"] != args.experiment:
            raise ConfigError(
                f"config file is for {data['experiment']!r} but the "
                f"{args.experiment!r} subcommand was invoked"
            )
    data["experiment"] = args.experiment
    if args.gamma is not None:
        data["gamma"] = args.gamma
    if args.seed_range is not None:
        data["seed_start"], data["seed_end"] = args.seed_range
    if args.workers is not None:
        data["workers"] = args.workers
    if args.out is not None:
        data["out"] = args.out
    if args.experiment == "evolve":
        for key in _EVOLVE_KEYS:
            value = getattr(args, key)
            if value is not None:
                data[key] = value
        if args.seed is not None:
            data["seed_start"] = args.seed
            data["seed_end"] = args.seed + 1
    return config_from_dict(data)


def _resolve_out(cfg) -> Path:
    if cfg.out:
        return Path(cfg.out)
    env = os.environ.get("WICKTORUS_OUT")
    if env:
        return Path(env) / cfg.experiment
    stamp = datetime.now(timezone.utc).strftime("%Y%m%dT%H%M%SZ")
    return Path("runs") / f"{cfg.experiment}-{config_hash(cfg)[:8]}-{stamp}"


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _build_config(args)
        from .config import torus_of

        torus = torus_of(cfg)
        out_dir = _resolve_out(cfg)
        result = run_suite(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    writer = RunWriter(out_dir, cfg, PRNG_ID, torus.gamma_str)
    writer.write_records(result.records)
    writer.write_summary(result.summary_rows)
    writer.finalize(result.verdicts)
    print(f"{len(result.records)} records -> {writer.out_dir / 'records.jsonl'}")
    print(f"config hash {config_hash(cfg)}")
    for v in result.verdicts:
        print(f"{v['status']} {v['name']}: {v['detail']}")
    if not result.verdicts:
        print("no verdicts configured (records only)")
    return 0 if result.ok else 1


if __name__ == "__main__":
    sys.exit(main())
