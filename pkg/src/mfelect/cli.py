"""Command-line entry point: ``mfelect <subcommand> [--config ...]``.

Each subcommand runs one pipeline stage and prints a JSON summary on
stdout. Failures exit nonzero with ``{"error": kind, "message": ...}`` on
stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import warnings

from . import farima, pipeline
from .errors import MFElectError

EXIT_INPUT = 2
EXIT_INTERNAL = 1


def _global_flags(parser: argparse.ArgumentParser, default) -> None:
    parser.add_argument("--config", default=default, help="JSON PipelineConfig file")
    parser.add_argument("--out", default=default, help="output directory")
    parser.add_argument("--seed", type=int, default=default,
                        help="generator seed (synth)")
    parser.add_argument("--window", default=default, help="analysis window START:END")
    parser.add_argument("--statistic", choices=("median", "mean"), default=default)
    parser.add_argument("--drop-multiparty", action="store_true", default=default,
                        help="exclude tweets matching more than one party")
    parser.add_argument("-v", "--verbose", action="store_true", default=default)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mfelect", description="Multifactor election forecasting pipeline.")
    _global_flags(parser, None)
    # repeated on every subcommand so flags work on either side of it
    common = argparse.ArgumentParser(add_help=False)
    _global_flags(common, argparse.SUPPRESS)
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "synth": "generate a synthetic corpus",
        "ingest": "parse, tag, score and bucket the corpus",
        "sentiment-stats": "polarity counts per party, per day and for top users",
        "graph-stats": "interaction graph, PageRank and topology measures",
        "score": "user-day scores, daily series, W1 matrices, t fits",
        "forecast": "FARIMA fits, forecasts, vote shares and forecast track",
        "baselines": "count-based vote-share baselines",
        "evaluate": "method x party shares and MAE against the reference",
    }
    for name in pipeline.STAGES:
        sub.add_parser(name, parents=[common], help=helps[name])
    return parser


def load_config(args) -> pipeline.PipelineConfig:
    data = {}
    base = None
    if args.config:
        cfg = pipeline.PipelineConfig.load(args.config)
        data = cfg.to_dict()
    overrides = {"out": args.out, "seed": args.seed, "window": args.window,
                 "statistic": args.statistic}
    data.update({k: v for k, v in overrides.items() if v is not None})
    if args.drop_multiparty:
        data["drop_multiparty"] = True
    return pipeline.PipelineConfig.from_dict(data, base)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", farima.TruncationWarning)
            result = pipeline.STAGES[args.command](cfg)
    except MFElectError as exc:
        print(json.dumps(exc.to_dict(), sort_keys=True), file=sys.stderr)
        return EXIT_INPUT
    except (OSError, ValueError) as exc:
        err = {"error": type(exc).__name__, "message": str(exc)}
        print(json.dumps(err, sort_keys=True), file=sys.stderr)
        return EXIT_INPUT
    except Exception as exc:  # noqa: BLE001 - last-resort report
        err = {"error": "internal_error", "type": type(exc).__name__, "message": str(exc)}
        print(json.dumps(err, sort_keys=True), file=sys.stderr)
        return EXIT_INTERNAL
    print(json.dumps(result, sort_keys=True, indent=2, default=str))
    return 0


if __name__ == "__main__":
    sys.exit(main())
