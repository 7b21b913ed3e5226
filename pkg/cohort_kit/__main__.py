import argparse
import logging
import sys
import typing as T

from . import VERSION
from .commands import combine
from .commands import ingest
from .commands import profile
from .commands import spike
from .commands import synth
from .commands import test
from .error import EXIT_INPUT_ERROR, CohortUserError

# do not use __name__ here is because if you run tools as a module, __name__ will be "__main__"
LOG = logging.getLogger("cohort_kit")


def logger_configuration(logger: logging.Logger, level: int, stream=None) -> None:
    # main() may run several times in one process; keep a single handler on the current stream
    for old in list(logger.handlers):
        logger.removeHandler(old)
    formatter = logging.Formatter("%(asctime)s - %(levelname)-6s - %(message)s")
    handler = logging.StreamHandler(stream)
    handler.setFormatter(formatter)
    logger.addHandler(handler)
    logger.setLevel(level)


def general_arguments(parser, command):
    if command == "ingest":
        parser.add_argument(
            "events_path",
            help="Path to the event records (CSV or JSON lines with id, timestamp, kind)",
        )
    elif command in ["test", "profile"]:
        parser.add_argument(
            "archive",
            help="Path to a dataset archive written by ingest",
        )
    elif command == "spike":
        parser.add_argument(
            "archive",
            help="Path to a dataset archive written by ingest. Not needed with --pvalues",
            nargs="?",
        )

    if command in ["test", "spike", "synth"]:
        parser.add_argument(
            "--seed",
            help="Run seed, a 64-bit unsigned integer. Default is 0",
            type=int,
            default=None,
            required=False,
        )
        parser.add_argument(
            "--threads",
            help="Worker threads. Results do not depend on it. Default is 1",
            type=int,
            default=None,
            required=False,
        )
    if command in ["test", "spike"]:
        parser.add_argument(
            "--replicates",
            help="Number of Monte Carlo replicates R. Default is 100000",
            type=int,
            default=None,
            required=False,
        )

    parser.add_argument(
        "--config",
        help="INI file whose [%s] section overrides the built-in defaults" % command,
        default=None,
        required=False,
    )
    if command == "ingest":
        output_help = "Path of the dataset archive to write"
    elif command == "synth":
        output_help = "Directory for the generated files"
    else:
        output_help = 'Path of the JSON report. Default is "-" (stdout)'
    parser.add_argument(
        "--output",
        help=output_help,
        default=None,
        required=False,
    )


def main(argv: T.Optional[T.List[str]] = None):
    cohort_kit_commands = [
        ingest,
        test,
        spike,
        combine,
        synth,
        profile,
    ]
    parser = argparse.ArgumentParser(
        "cohort_kit",
    )
    parser.add_argument(
        "--version",
        help="show the version of cohort kit and exit",
        action="version",
        version=f"Cohort kit version : {VERSION}",
    )
    parser.add_argument(
        "--verbose",
        help="Show verbose",
        action="store_true",
        default=False,
        required=False,
    )
    parser.add_argument(
        "--quiet",
        help="Hide progress bars",
        action="store_true",
        default=False,
        required=False,
    )

    all_commands = [module.Command() for module in cohort_kit_commands]

    subparsers = parser.add_subparsers(
        description="please choose one of the available subcommands",
    )
    for command in all_commands:
        cmd_parser = subparsers.add_parser(
            command.name, help=command.help, conflict_handler="resolve"
        )
        general_arguments(cmd_parser, command.name)
        command.add_basic_arguments(cmd_parser)
        cmd_parser.set_defaults(func=command.run)

    args = parser.parse_args(argv)
    if not hasattr(args, "func"):
        parser.print_help(sys.stderr)
        sys.exit(2)

    log_level = logging.DEBUG if args.verbose else logging.INFO
    logger_configuration(LOG, log_level, sys.stderr)
    vars_args = vars(args)
    vars_args["disable_progress"] = args.quiet
    LOG.debug(f"argparse vars: {vars_args}")
    try:
        args.func(vars_args)
    except CohortUserError as ex:
        LOG.error(str(ex))
        sys.exit(ex.exit_code)
    except ValueError as ex:
        LOG.error(f"Invalid input: {ex}")
        sys.exit(EXIT_INPUT_ERROR)


if __name__ == "__main__":
    main()
