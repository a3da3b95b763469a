"""Command-line entry point: run or validate experiment configs."""

import argparse
import sys

from .config import build_experiment_config, load_config
from .experiments import run_experiment
from .validation import ValidationError


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="noma-games",
        description="Game-theoretic resource allocation experiments for NOMA networks",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run an experiment and write its CSV")
    run_p.add_argument("--config", required=True, help="experiment config file")
    run_p.add_argument("--seed", type=int, default=None,
                       help="override the base seed")
    run_p.add_argument("--out", default=None, help="override the output path")
    run_p.add_argument("--oracle", action="store_true",
                       help="also run the brute-force oracles")

    val_p = sub.add_parser("validate", help="check a config without running it")
    val_p.add_argument("--config", required=True, help="experiment config file")
    return parser


def main(argv=None):
    args = _build_parser().parse_args(argv)
    try:
        flat = load_config(args.config)
        if args.command == "validate":
            config = build_experiment_config(flat)
            print(f"ok: {config.experiment} experiment, "
                  f"{len(config.seeds)} seed(s), hash {config.hash()[:12]}")
            return 0
        config = build_experiment_config(
            flat, seed_override=args.seed, out_override=args.out,
            oracle=args.oracle,
        )
        path = run_experiment(config)
        print(f"wrote {path}")
        return 0
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - map any runtime failure to exit 2
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
