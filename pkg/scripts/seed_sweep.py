"""Repeat the oracle verification over several seeds to gauge the spread of each check.

This is how the frozen AUC bound was sanity-checked; it takes about a minute per seed.

    python3 scripts/seed_sweep.py WORK_DIR --seeds 0 1 2
"""
import argparse
from pathlib import Path

from ssbm.verify import run_verify, verify_config


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("work")
    ap.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2])
    args = ap.parse_args()
    for seed in args.seeds:
        for c in run_verify(Path(args.work) / f"seed{seed}", verify_config(seed)):
            print(f"seed {seed} {c.line()}")


if __name__ == "__main__":
    main()
