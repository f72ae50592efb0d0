"""``desklab`` command line.

    desklab run --config P [--trials N] [--seed S] [--out P] [--format csv|json] [--workers W]
    desklab validate --config P

The master seed is taken from, in increasing priority: the config file,
the ``DESKLAB_SEED`` environment variable, ``--seed``.  Exit status is 0 on
success, 2 for a bad config or command line, 3 when the run itself fails.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

from .config import MAX_SEED, ConfigError, ExperimentConfig, from_mapping, parse_config

SEED_ENV = "DESKLAB_SEED"
EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="desklab", description="Seeded quantum and billiard experiment runner.")
    sub = p.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run the configured experiment")
    run.add_argument("--config", required=True, help="path to a JSON run config")
    run.add_argument("--trials", type=int, help="override the trial count")
    run.add_argument("--seed", type=int, help=f"override the master seed (beats ${SEED_ENV})")
    run.add_argument("--out", help="output path; '-' or omitted writes to stdout unless the config names one")
    run.add_argument("--format", choices=("csv", "json"), help="override the output format")
    run.add_argument("--workers", type=int, default=1, help="worker processes (default 1)")
    val = sub.add_parser("validate", help="check a config and print it with defaults filled in")
    val.add_argument("--config", required=True, help="path to a JSON run config")
    return p


def load(path: str, *, trials=None, seed=None, out=None, fmt=None, env=None) -> ExperimentConfig:
    """Read a config file and apply environment and command-line overrides."""
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError("--config", f"cannot read {path}: {exc.strerror}") from None
    config = parse_config(text)
    doc = config.to_dict()
    env = os.environ if env is None else env
    if env.get(SEED_ENV, "") != "":
        try:
            doc["master_seed"] = int(env[SEED_ENV], 0)
        except ValueError:
            raise ConfigError(SEED_ENV, f"expected an integer, got {env[SEED_ENV]!r}") from None
    if seed is not None:
        doc["master_seed"] = seed
    if trials is not None:
        doc["trials"] = trials
    if out is not None:
        doc["output"]["path"] = None if out == "-" else out
    if fmt is not None:
        doc["output"]["format"] = fmt
    if not 0 <= doc["master_seed"] < MAX_SEED:
        raise ConfigError("master_seed", f"must lie in [0, 2**64), got {doc['master_seed']}")
    return from_mapping(doc)


def _write(data: bytes, path: str | None):
    if path is None:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
    else:
        with open(path, "wb") as fh:
            fh.write(data)


def main(argv=None) -> int:
    try:
        args = _parser().parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    try:
        if args.command == "validate":
            config = load(args.config)
        else:
            if args.workers < 1:
                raise ConfigError("--workers", "must be >= 1")
            config = load(args.config, trials=args.trials, seed=args.seed, out=args.out, fmt=args.format)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.command == "validate":
        print(json.dumps(config.to_dict(), indent=2))
        return EXIT_OK

    from .emit import emit
    from .runner import run

    try:
        summary = run(config, workers=args.workers)
        _write(emit(summary, config.output_format), config.output_path)
    except Exception as exc:  # any failure inside the experiment is a runtime error
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    print(
        f"{config.experiment}: {config.trials} trials in {summary.duration_s:.2f} s"
        + (f", written to {config.output_path}" if config.output_path else ""),
        file=sys.stderr,
    )
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
