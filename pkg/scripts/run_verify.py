"""Run the built-in oracle verification and print one line per check.

    python3 scripts/run_verify.py OUT_DIR [--seed N] [--workers N]
"""
import argparse
import sys

from ssbm.verify import run_verify, verify_config


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("out")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()
    checks = run_verify(args.out, verify_config(args.seed), workers=args.workers)
    for c in checks:
        print(c.line())
    return 0 if all(c.passed for c in checks) else 2


if __name__ == "__main__":
    sys.exit(main())
