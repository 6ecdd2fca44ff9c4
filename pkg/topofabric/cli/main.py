import argparse
import sys

from topofabric.cli.base import EXIT_INPUT
from topofabric.cli.commands import COMMANDS
from topofabric.logger.logging import LEVELS, configure_logging


def _non_negative(value: str) -> int:
    seed = int(value)
    if seed < 0:
        raise argparse.ArgumentTypeError("seed must be non-negative")
    return seed


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fabric",
        description="Topological semantics and delay-compensated control experiments",
    )
    parser.add_argument(
        "--log-level",
        choices=LEVELS,
        default=None,
        help="Log verbosity (defaults to the FABRIC_LOG environment variable, then WARNING)",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    for name, command_class in COMMANDS.items():
        sub = subparsers.add_parser(name, help=command_class.help, description=command_class.help)
        sub.add_argument("--config", type=str, help="Experiment config JSON (defaults apply)")
        sub.add_argument("--out", type=str, default=None, help="Output directory")
        sub.add_argument("--seed", type=_non_negative, default=None, help="Seed for all randomness")
        sub.add_argument("--input", type=str, default=None, help="Input file for the experiment")
        command_class().add_arguments(sub)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        options = vars(parser.parse_args(argv))
    except SystemExit as e:
        # argparse exits with 2 on usage errors, matching the input-error code
        return EXIT_INPUT if e.code else 0
    configure_logging(options.pop("log_level"))
    return COMMANDS[options["command"]]().execute(**options)


if __name__ == "__main__":
    sys.exit(main())
