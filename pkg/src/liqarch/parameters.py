"""Module for liqarch's argument parser configuration.

Classes
-------
ValidateWindowLength
    Validator for --window_len parameter.

Functions
---------
configure_arguments
    Creates argument parser for the liqarch command.
"""

from argparse import Action, ArgumentParser, BooleanOptionalAction
from dataclasses import fields
from warnings import warn

from liqarch.backtest import DEFAULT_CRYPTO_WINDOW, DEFAULT_STOCK_WINDOW
from liqarch.config import RunConfig
from liqarch.exceptions import ArgumentWarning

COMMANDS = {
    "synth": "Generate a synthetic universe.",
    "ingest": "Parse minute CSVs into minute_bars.csv and day_status.csv.",
    "liquidity": "Compute daily liquidity-adjusted records and their statistics.",
    "fit": "Fit full-sample ARMA-GARCH models and ADF tests.",
    "backtest": "Fit rolling-window ARMA-GARCH models on both return paths.",
    "report": "Run the t-tests comparing regular and adjusted fits.",
    "portfolio": "Build and score the TMV and LAMV portfolios.",
    "run": "Run every stage in order.",
}

SHORT_FLAGS = {
    "inputs": "-i",
    "log_level": "-l",
    "output_dir": "-o",
    "seed": "-s",
    "window_len": "-w",
}

OPTIONAL_INTEGERS = ("window_len", "annualization_days", "lambda_window")

HELP = {
    "venue": "Market type: stock (390-minute sessions) or crypto (1440-minute days).",
    "inputs": "Minute-bar CSV files with columns ticker, minute_start, close, amount.",
    "output_dir": "Directory that receives every stage's CSV files.",
    "seed": "Master seed of the synthetic generators.",
    "threads": (
        "Number of workers fitting rolling windows; values above 1 use ray."
        " Falls back to LIQARCH_THREADS."
    ),
    "log_level": (
        "Logging verbosity level. Must be one of DEBUG, INFO,"
        " WARNING, ERROR, CRITICAL (listed in decreasing"
        " verbosity)."
    ),
    "min_minutes": "Minimum number of minute returns for a day to be used.",
    "beta_cap": "Upper bound of the liquidity betas.",
    "window_len": "Days per estimation window (default 242 stock, 365 crypto).",
    "reselect_orders": "Re-select ARMA orders by AIC in every window.",
    "annualization_days": "Periods per year of the Sharpe ratio (default 252 stock, 365 crypto).",
    "lambda_window": "Market days behind each risk aversion (default window_len).",
    "synth": "Generate a synthetic universe when no inputs are given.",
}


class ValidateWindowLength(Action):
    """Validator for --window_len parameter."""

    def __call__(self, parser, args, values, option_string=None):
        """Validates --window_len parameter.

        Warns if the length differs from both the 242-day stock and the
        365-day crypto convention.
        """
        if values not in (DEFAULT_STOCK_WINDOW, DEFAULT_CRYPTO_WINDOW):
            warn(
                f"window_len {values} differs from the {DEFAULT_STOCK_WINDOW}-day"
                f" (stock) and {DEFAULT_CRYPTO_WINDOW}-day (crypto) conventions.",
                category=ArgumentWarning,
            )
        setattr(args, self.dest, values)


def _add_config_flags(parser: ArgumentParser) -> None:
    parser.add_argument(
        "-c",
        "--config",
        help="TOML file with [run], [liquidity], [backtest], [portfolio] and [synth] sections.",
    )
    for item in fields(RunConfig):
        flags = [f"--{item.name}"]
        if item.name in SHORT_FLAGS:
            flags.insert(0, SHORT_FLAGS[item.name])
        options = {"default": None, "help": HELP.get(item.name)}
        if item.name == "inputs":
            options["nargs"] = "+"
        elif isinstance(item.default, bool):
            options["action"] = BooleanOptionalAction
        elif item.name in OPTIONAL_INTEGERS:
            options["type"] = int
        elif isinstance(item.default, (int, float, str)):
            options["type"] = type(item.default)
        if item.name == "window_len":
            options["action"] = ValidateWindowLength
        parser.add_argument(*flags, **options)


def configure_arguments():
    """Creates argument parser.

    Returns
    -------
    argparse.ArgumentParser with one sub-command per pipeline stage,
    each accepting --config and a flag for every configuration key.
    Flags default to None so that only given flags override the
    configuration file.
    """
    parser = ArgumentParser(
        prog="liqarch",
        description="Liquidity-adjusted ARMA-GARCH analysis of minute-level returns.",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    for command, description in COMMANDS.items():
        subparser = subparsers.add_parser(command, help=description, description=description)
        _add_config_flags(subparser)
    return parser
