"""Command-line entry: `python -m tsfm_adapters --model <id>` or `--echo`."""

from __future__ import annotations

import argparse
import sys

from . import __version__
from .serve import AdapterConfig, serve


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tsfm-adapter",
        description="Serve a pretrained time-series model (or a last-value "
        "echo forecaster) over the stdio JSON-lines protocol.",
    )
    parser.add_argument("--version", action="version", version=f"tsfm-adapter {__version__}")
    group = parser.add_mutually_exclusive_group(required=True)
    group.add_argument("--model", default=None,
                       help="model registry id, e.g. amazon/chronos-bolt-base or "
                       "google/timesfm-2.0-500m-pytorch")
    group.add_argument("--echo", action="store_true",
                       help="serve the last-value forecaster without any model")
    parser.add_argument("--device", choices=("cpu", "accelerator"), default="cpu",
                        help="inference device (default %(default)s)")
    parser.add_argument("--frequency-component", type=int, default=0,
                        help="timesfm frequency setting (default %(default)s)")
    parser.add_argument("--seed", type=int, default=None,
                        help="fix the inference seed for deterministic sampling")
    return parser


def main(argv=None) -> None:
    args = build_parser().parse_args(argv)
    config = AdapterConfig(
        model_id=None if args.echo else args.model,
        device=args.device,
        frequency_component=args.frequency_component,
        seed=args.seed,
    )
    sys.exit(serve(config))


if __name__ == "__main__":
    main()
