"""Command-line interface.

Subcommands::

    smclab run --config cfg.json [--output DIR] [--workers N] [--seed S]
    smclab oracle --config cfg.json
    smclab simulate --config cfg.json [--output DIR]

Exit codes: 0 success, 1 validation error, 2 I/O error, 3 runtime
degeneracy abort (the particle population died mid-run).
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from .config import load_config
from .dataset import write_dataset_csv
from .errors import DegenerateWeightsError, ValidationError
from .harness import oracle_values, resolve_dataset, run_experiment

__all__ = ["main"]

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_IO = 2
EXIT_DEGENERACY = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="smclab",
        description="Particle filtering experiments with exact oracles and degeneracy diagnostics",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run R seeded replications and write traces + report")
    run.add_argument("--config", required=True, help="experiment config JSON")
    run.add_argument("--output", default=None, help="output directory (overrides config)")
    run.add_argument("--workers", type=int, default=1, help="parallel replication workers")
    run.add_argument("--seed", type=int, default=None, help="master seed override")

    oracle = sub.add_parser("oracle", help="compute exact oracle values only (JSON to stdout)")
    oracle.add_argument("--config", required=True)

    sim = sub.add_parser("simulate", help="emit the configured dataset CSV only")
    sim.add_argument("--config", required=True)
    sim.add_argument("--output", default=None, help="output directory (overrides config)")
    return parser


def _output_dir(config, override, base_dir: Path) -> Path:
    if override is not None:
        return Path(override)
    if config.output_dir is None:
        raise ValidationError("no output directory: set config.output_dir or pass --output")
    out = Path(config.output_dir)
    return out if out.is_absolute() else base_dir / out


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        config = load_config(args.config)
        base_dir = Path(args.config).resolve().parent
        if getattr(args, "seed", None) is not None:
            config = dataclasses.replace(config, master_seed=args.seed)

        if args.command == "run":
            out = run_experiment(
                config,
                output_dir=_output_dir(config, args.output, base_dir),
                workers=args.workers,
                base_dir=base_dir,
            )
            print(f"wrote {config.R} trace file(s) and report.json to {out}")
        elif args.command == "oracle":
            data = resolve_dataset(config, base_dir)
            print(json.dumps(oracle_values(config, data), sort_keys=True, indent=2))
        else:  # simulate
            out = _output_dir(config, args.output, base_dir)
            out.mkdir(parents=True, exist_ok=True)
            data = resolve_dataset(config, base_dir)
            write_dataset_csv(data, out / "dataset.csv")
            print(f"wrote {out / 'dataset.csv'}")
    except ValidationError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_VALIDATION
    except DegenerateWeightsError as err:
        print(f"degeneracy abort: {err}", file=sys.stderr)
        return EXIT_DEGENERACY
    except OSError as err:
        print(f"i/o error: {err}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
