"""Standalone figure scripts: esfigs {progress-rate, stationary-delta, trace}
--in simulator.csv --out figure.png"""

import argparse
import sys

from .csvio import FigureDataError
from .plots import plot_progress_rate, plot_stationary_delta, plot_trace

_COMMANDS = {
    "progress-rate": plot_progress_rate,
    "stationary-delta": plot_stationary_delta,
    "trace": plot_trace,
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="esfigs", description="render figures from eslinc CSV outputs")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--in", dest="input", required=True, help="simulator CSV")
        p.add_argument("--out", dest="output", required=True, help="image path")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        _COMMANDS[args.command](args.input, args.output)
    except (FigureDataError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(args.output)
    return 0


if __name__ == "__main__":
    sys.exit(main())
