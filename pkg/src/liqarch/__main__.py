"""Main module for executing liqarch on command-line.

Functions
---------
main
    Runs the pipeline stage selected on the command line.
cli
    Entry point of the liqarch command; maps failures to exit codes.
"""

from argparse import Namespace
from logging import captureWarnings, getLogger
from platform import python_version
from sys import argv, exit
from typing import Optional, Sequence

from liqarch.config import RunConfig, apply_overrides, load_config
from liqarch.exceptions import ConfigError, InvalidArgumentError, LiqarchError
from liqarch.log import LOG_HANDLER, LOGGER, configure_logging
from liqarch.parameters import configure_arguments
from liqarch.pipeline import STAGES

# Ensure warnings are handled properly.
captureWarnings(True)
getLogger("py.warnings").addHandler(LOG_HANDLER)

EXIT_SUCCESS = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2


def build_config(args: Namespace) -> RunConfig:
    config = load_config(args.config) if getattr(args, "config", None) else RunConfig()
    config = apply_overrides(config, args)
    return config.validate(check_inputs=args.command in ("ingest", "run"))


def main(args: Namespace) -> None:
    """Runs one pipeline stage.

    Parameters
    ----------
    args: argparse.Namespace
        Return object of argparse.ArgumentParser object created by
        liqarch.parameters.configure_arguments and applied to command
        line arguments.
    """
    config = build_config(args)
    configure_logging(config.log_level)
    LOGGER.info(" ".join([f"python{python_version()}", *argv]))
    LOGGER.debug(f"config: {config}")
    STAGES[args.command](config)
    LOGGER.info("Done!")


def cli(arguments: Optional[Sequence[str]] = None) -> int:
    """Parses arguments, runs main and returns the exit code:
    0 on success, 1 for configuration problems, 2 for any other failure.
    """
    args = configure_arguments().parse_args(arguments)
    try:
        main(args)
    except (ConfigError, InvalidArgumentError) as error:
        LOGGER.error("configuration error: %s", error)
        return EXIT_CONFIG
    except (LiqarchError, OSError) as error:
        LOGGER.error("%s", error)
        return EXIT_RUNTIME
    return EXIT_SUCCESS


if __name__ == "__main__":
    exit(cli())
