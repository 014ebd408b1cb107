"""Module for run configuration.

A RunConfig holds every tunable of a pipeline run. Values come from
defaults, then an optional TOML file, then command-line flags.

Classes
-------
RunConfig
    All settings of a pipeline run.

Functions
---------
load_config
    Reads a RunConfig from a TOML file.
apply_overrides
    Returns a RunConfig updated with explicitly given flags.
"""

import sys
from argparse import Namespace
from dataclasses import asdict, dataclass, field, fields, replace
from os import environ
from pathlib import Path
from typing import Any, Dict, List, Optional

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from liqarch.backtest import (
    DEFAULT_CRYPTO_WINDOW,
    DEFAULT_MAX_DEGENERATE_RUN,
    DEFAULT_STOCK_WINDOW,
    MIN_WINDOW,
    WindowSpec,
)
from liqarch.econometrics import MAX_ORDER
from liqarch.exceptions import ConfigError, InvalidArgumentError
from liqarch.liquidity import DEFAULT_BETA_CAP, DEFAULT_HISTOGRAM_BINS
from liqarch.log import LOG_LEVELS
from liqarch.marketdata import DEFAULT_MIN_MINUTES, Venue, make_venue
from liqarch.portfolio import DEFAULT_LAMBDA_FLOOR, PortfolioSpec
from liqarch.synth import DailyDynamics, JumpParams

THREADS_VARIABLE = "LIQARCH_THREADS"
SYNTH_MODES = ("minute", "daily")

SECTIONS = {
    "run": ("venue", "inputs", "output_dir", "seed", "threads", "log_level"),
    "liquidity": ("min_minutes", "beta_cap", "histogram_bins"),
    "backtest": (
        "window_len",
        "p_max",
        "q_max",
        "reselect_orders",
        "include_mean",
        "max_degenerate_run",
    ),
    "portfolio": ("annualization_days", "lambda_floor", "lambda_window"),
    "synth": (
        "synth",
        "synth_mode",
        "synth_assets",
        "synth_days",
        "synth_intensity",
        "synth_jump_mean",
        "synth_jump_sd",
        "synth_base_sigma",
        "synth_volume_mu",
        "synth_volume_sigma",
        "synth_volume_spike",
        "synth_drift",
        "synth_ar",
        "synth_omega",
        "synth_alpha",
        "synth_beta",
        "synth_beta_jump",
        "synth_beta_diff",
        "synth_beta_dispersion",
    ),
}


@dataclass(frozen=True)
class RunConfig:
    """Settings of a pipeline run.

    window_len, annualization_days and lambda_window default to the
    venue's conventions when left unset. The synth_* keys describe the
    synthetic universe generated when synth is enabled; in the [synth]
    TOML section they appear without the prefix, and synth itself as
    `enabled`.
    """

    venue: str = "crypto"
    inputs: List[str] = field(default_factory=list)
    output_dir: str = "liqarch_output"
    seed: int = 0
    threads: int = 1
    log_level: str = "WARNING"
    min_minutes: int = DEFAULT_MIN_MINUTES
    beta_cap: float = DEFAULT_BETA_CAP
    histogram_bins: int = DEFAULT_HISTOGRAM_BINS
    window_len: Optional[int] = None
    p_max: int = MAX_ORDER
    q_max: int = MAX_ORDER
    reselect_orders: bool = True
    include_mean: bool = False
    max_degenerate_run: int = DEFAULT_MAX_DEGENERATE_RUN
    annualization_days: Optional[int] = None
    lambda_floor: float = DEFAULT_LAMBDA_FLOOR
    lambda_window: Optional[int] = None
    synth: bool = False
    synth_mode: str = "minute"
    synth_assets: int = 3
    synth_days: int = 800
    synth_intensity: float = 1.0
    synth_jump_mean: float = 0.0
    synth_jump_sd: float = 0.05
    synth_base_sigma: float = 1e-3
    synth_volume_mu: float = 10.0
    synth_volume_sigma: float = 0.5
    synth_volume_spike: float = 1e4
    synth_drift: float = 0.0
    synth_ar: float = 0.7
    synth_omega: float = 2e-5
    synth_alpha: float = 0.2
    synth_beta: float = 0.75
    synth_beta_jump: float = 1.5
    synth_beta_diff: float = 1.0
    synth_beta_dispersion: float = 0.5

    @property
    def venue_spec(self) -> Venue:
        return make_venue(self.venue)

    @property
    def effective_window_len(self) -> int:
        if self.window_len is not None:
            return self.window_len
        if self.venue == "stock":
            return DEFAULT_STOCK_WINDOW
        return DEFAULT_CRYPTO_WINDOW

    @property
    def effective_annualization_days(self) -> int:
        if self.annualization_days is not None:
            return self.annualization_days
        return self.venue_spec.annualization_days

    @property
    def output_path(self) -> Path:
        return Path(self.output_dir)

    def window_spec(self) -> WindowSpec:
        return WindowSpec(
            window_len=self.effective_window_len,
            p_max=self.p_max,
            q_max=self.q_max,
            reselect_orders=self.reselect_orders,
            include_mean=self.include_mean,
            max_degenerate_run=self.max_degenerate_run,
        )

    def portfolio_spec(self) -> PortfolioSpec:
        return PortfolioSpec(
            window_len=self.effective_window_len,
            annualization_days=self.effective_annualization_days,
            lambda_floor=self.lambda_floor,
            lambda_window=self.lambda_window,
        )

    def jump_params(self) -> JumpParams:
        return JumpParams(
            intensity=self.synth_intensity,
            jump_mean=self.synth_jump_mean,
            jump_sd=self.synth_jump_sd,
            base_sigma=self.synth_base_sigma,
            volume_mu=self.synth_volume_mu,
            volume_sigma=self.synth_volume_sigma,
            volume_spike=self.synth_volume_spike,
        )

    def daily_dynamics(self) -> DailyDynamics:
        return DailyDynamics(
            omega=self.synth_omega,
            alpha=self.synth_alpha,
            beta=self.synth_beta,
            drift=self.synth_drift,
            ar=self.synth_ar,
        )

    def validate(self, check_inputs: bool = True) -> "RunConfig":
        """Raises ConfigError for unusable settings; returns self."""
        problems = []
        if self.venue not in ("stock", "crypto"):
            problems.append(f"venue must be stock or crypto, got '{self.venue}'")
        if str(self.log_level).upper() not in LOG_LEVELS:
            problems.append(f"log_level must be one of {', '.join(LOG_LEVELS)}")
        if not self.beta_cap > 0:
            problems.append(f"beta_cap must be positive, got {self.beta_cap}")
        if self.window_len is not None and self.window_len < MIN_WINDOW:
            problems.append(f"window_len must be at least {MIN_WINDOW}, got {self.window_len}")
        for name in ("p_max", "q_max"):
            if not 0 <= getattr(self, name) <= MAX_ORDER:
                problems.append(f"{name} must be between 0 and {MAX_ORDER}")
        for name in ("threads", "min_minutes", "histogram_bins", "synth_assets", "synth_days"):
            if getattr(self, name) < 1:
                problems.append(f"{name} must be at least 1, got {getattr(self, name)}")
        if not self.lambda_floor > 0:
            problems.append("lambda_floor must be positive")
        if self.synth_mode not in SYNTH_MODES:
            problems.append(f"synth_mode must be one of {', '.join(SYNTH_MODES)}")
        if check_inputs:
            missing = [path for path in self.inputs if not Path(path).is_file()]
            if missing:
                problems.append(f"input files not found: {', '.join(missing)}")
        if not problems:
            try:
                self.window_spec()
                self.portfolio_spec()
                if self.synth:
                    self.jump_params()
                    self.daily_dynamics()
            except InvalidArgumentError as error:
                problems.append(str(error))
        if problems:
            raise ConfigError("; ".join(problems))
        return self

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


FIELD_TYPES = {item.name: item for item in fields(RunConfig)}


def _toml_key(section: str, name: str) -> str:
    if section != "synth":
        return name
    return "enabled" if name == "synth" else name[len("synth_") :]


def load_config(path: str) -> RunConfig:
    """Reads a RunConfig from TOML; unknown sections or keys raise ConfigError."""
    try:
        with open(path, "rb") as file:
            document = tomllib.load(file)
    except FileNotFoundError as error:
        raise ConfigError(f"config file not found: {path}") from error
    except tomllib.TOMLDecodeError as error:
        raise ConfigError(f"invalid TOML in {path}: {error}") from error

    values = {}
    for section, table in document.items():
        if section not in SECTIONS or not isinstance(table, dict):
            raise ConfigError(f"unknown config section [{section}]")
        known = {_toml_key(section, name): name for name in SECTIONS[section]}
        for key, value in table.items():
            if key not in known:
                raise ConfigError(f"unknown key '{key}' in section [{section}]")
            values[known[key]] = value
    if "inputs" in values and isinstance(values["inputs"], str):
        values["inputs"] = [values["inputs"]]
    return RunConfig(**values)


def apply_overrides(config: RunConfig, args: Namespace) -> RunConfig:
    """Overrides config with every flag in args that is not None.

    threads falls back to the LIQARCH_THREADS environment variable when
    the flag is absent.
    """
    overrides = {
        name: getattr(args, name)
        for name in FIELD_TYPES
        if getattr(args, name, None) is not None
    }
    if "threads" not in overrides and environ.get(THREADS_VARIABLE):
        try:
            overrides["threads"] = int(environ[THREADS_VARIABLE])
        except ValueError as error:
            raise ConfigError(
                f"{THREADS_VARIABLE} must be an integer, got '{environ[THREADS_VARIABLE]}'"
            ) from error
    return replace(config, **overrides)
