"""Write the synthetic planted-region corpus to a directory.

    python3 scripts/make_synthetic_corpus.py OUT_DIR [--utterances N] [--seed N]
"""
import argparse
import dataclasses

from ssbm.synth import SyntheticCorpusConfig, write_corpus


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("out")
    ap.add_argument("--utterances", type=int, default=10)
    ap.add_argument("--seed", type=int, default=SyntheticCorpusConfig.seed)
    args = ap.parse_args()
    cfg = dataclasses.replace(SyntheticCorpusConfig(), n_utterances=args.utterances, seed=args.seed)
    print(write_corpus(args.out, cfg))


if __name__ == "__main__":
    main()
