"""Command-line entry point.

Verbs run one stage each (``report`` and ``verify`` run everything still
missing). Exit codes: 0 success, 1 usage or config error, 2 data error or a
failed verification, 3 external recognizer failure.
"""
from __future__ import annotations

import argparse
import dataclasses
import logging
import sys

from .config import ConfigError, ExperimentConfig, load_config
from .formats import DataError
from .recog import RecognizerError

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_RECOGNIZER = 0, 1, 2, 3

log = logging.getLogger("ssbm")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="ssbm", description="Bubble-noise importance maps and the SSBM benchmark.")
    p.add_argument("verb", choices=("probe", "importance", "evaluate", "report", "verify"))
    p.add_argument("--config", help="JSON experiment config (defaults are used when omitted)")
    p.add_argument("--corpus", help="corpus manifest (JSON lines); not used by verify")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, help="override the config seed")
    p.add_argument("--workers", type=int, default=1, help="parallel utterance workers")
    p.add_argument("--resume", action="store_true", help="keep finished utterances of an interrupted stage")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def _config(args, default: ExperimentConfig) -> ExperimentConfig:
    cfg = load_config(args.config) if args.config else default
    if args.seed is not None:
        cfg = dataclasses.replace(cfg, seed=args.seed)
    return cfg


def _run(args) -> int:
    if args.workers < 1:
        raise ConfigError("--workers must be at least 1")
    if args.verb == "verify":
        from .verify import run_verify, verify_config

        checks = run_verify(args.out, _config(args, verify_config()), workers=args.workers, resume=args.resume)
        for c in checks:
            print(c.line())
        return EXIT_OK if all(c.passed for c in checks) else EXIT_DATA

    from .pipeline import Experiment

    if not args.corpus:
        raise ConfigError(f"{args.verb} needs --corpus")
    ex = Experiment(_config(args, ExperimentConfig()), args.corpus, args.out, workers=args.workers, resume=args.resume)
    if args.verb == "probe":
        ex.probe()
    elif args.verb == "importance":
        ex.importance()
    elif args.verb == "evaluate":
        ex.evaluate()
    else:
        summary = ex.run_all()
        for method, best in sorted(summary["methods"].items()):
            print(f"{method}: best SSBM {best['best_ssbm']} at threshold {best['best_threshold']}")
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return _run(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except RecognizerError as exc:
        print(f"recognizer error: {exc}", file=sys.stderr)
        return EXIT_RECOGNIZER


if __name__ == "__main__":
    sys.exit(main())
