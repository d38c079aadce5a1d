"""Command-line entry point.

    evorl run --config CONFIG --out DIR [--seed N] [--replicates N]
    evorl validate --config CONFIG
    evorl oracles [--seed N]

Exit codes: 0 success, 1 invalid configuration, 2 runtime error.
"""

from __future__ import annotations

import argparse
import logging
import sys

from .config import ConfigError, parse_config, with_overrides

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME = 0, 1, 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="evorl", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a scenario and write CSV + manifest outputs")
    run_p.add_argument("--config", required=True)
    run_p.add_argument("--out", required=True)
    run_p.add_argument("--seed", type=int, help="overrides the config seed")
    run_p.add_argument("--replicates", type=int, help="overrides the config replicate count")

    val_p = sub.add_parser("validate", help="check a config file and print the resolved form")
    val_p.add_argument("--config", required=True)

    ora_p = sub.add_parser("oracles", help="run the built-in Monte-Carlo and closed-form checks")
    ora_p.add_argument("--seed", type=int, default=20230514)
    return parser


def _load(args):
    cfg = parse_config(args.config)
    if getattr(args, "seed", None) is not None or getattr(args, "replicates", None) is not None:
        cfg = with_overrides(cfg, seed=args.seed, replicates=args.replicates)
    return cfg


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")

    if args.command == "oracles":
        from .oracles import run_oracles

        results = run_oracles(args.seed)
        for r in results:
            print(r.line())
        failed = sum(not r.passed for r in results)
        print(f"{len(results) - failed}/{len(results)} oracle checks passed")
        return EXIT_OK if not failed else EXIT_RUNTIME

    try:
        cfg = _load(args)
    except ConfigError as exc:
        for path, msg in exc.errors:
            print(f"error: {path + ': ' if path else ''}{msg}", file=sys.stderr)
        return EXIT_INVALID

    if args.command == "validate":
        import json

        from .config import to_dict

        print(json.dumps(to_dict(cfg), indent=2))
        return EXIT_OK

    from .harness import run

    try:
        manifest = run(cfg, args.out)
    except Exception as exc:  # noqa: BLE001 - report any runtime failure via exit code
        print(f"error: run failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    for key, name in manifest.outputs.items():
        print(f"{key}: {args.out}/{name}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
