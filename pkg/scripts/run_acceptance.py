"""Run the acceptance suite and write a JSON summary.

    python scripts/run_acceptance.py [--only 1 2 ...] [--output summary.json]
"""
import argparse
import json
import sys

from heatcut.acceptance import run_all


def main():
    p = argparse.ArgumentParser()
    p.add_argument("--only", type=int, nargs="*")
    p.add_argument("--output", default="acceptance_summary.json")
    args = p.parse_args()
    results = run_all(args.only)
    for r in results:
        print(r.line())
    with open(args.output, "w") as fh:
        json.dump([r.to_dict() for r in results], fh, indent=2, default=float)
    return 0 if all(r.passed for r in results) else 1


if __name__ == "__main__":
    sys.exit(main())
