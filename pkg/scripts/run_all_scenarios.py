"""Run every config in configs/ and print the final summary row of each.

    python scripts/run_all_scenarios.py [--out results] [--replicates N]
"""

import argparse
import csv
from pathlib import Path

from evorl.config import parse_config, with_overrides
from evorl.harness import SUMMARY_FILE, run

ROOT = Path(__file__).resolve().parent.parent


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--configs", default=ROOT / "configs", type=Path)
    parser.add_argument("--out", default=ROOT / "results", type=Path)
    parser.add_argument("--replicates", type=int)
    args = parser.parse_args()

    for path in sorted(args.configs.glob("*.json")):
        cfg = parse_config(path)
        if args.replicates is not None:
            cfg = with_overrides(cfg, replicates=args.replicates)
        out = args.out / path.stem
        manifest = run(cfg, out)
        with open(out / SUMMARY_FILE, newline="") as f:
            last = list(csv.DictReader(f))[-1]
        means = ", ".join(f"{k[:-5]}={float(v):.4f}" for k, v in last.items() if k.endswith("_mean"))
        print(f"{path.stem:<20} {manifest.status}: {means}")


if __name__ == "__main__":
    main()
