"""Module for the pipeline stages behind the liqarch command.

Every stage reads its inputs from files in the output directory and
writes its results there, so running the stages one by one gives the
same files as `run`.

Functions
---------
run_synth
run_ingest
run_liquidity
run_fit
run_backtest
run_report
run_portfolio
run_pipeline
make_runner
"""

from functools import wraps
from importlib.metadata import PackageNotFoundError, version
from json import dumps
from pathlib import Path
from typing import Callable, Dict, List, Mapping

from numpy.random import default_rng
from pandas import DataFrame, concat, read_csv

from liqarch.backtest import (
    SerialWindowRunner,
    WindowRunner,
    comparison_panels,
    fit_windows,
    forecast_series_from_frame,
    forecasts_frame,
    window_fits_frame,
)
from liqarch.config import RunConfig
from liqarch.econometrics import MAX_ORDER, fit_arma_garch
from liqarch.exceptions import (
    AllFailedError,
    ConfigError,
    LiqarchError,
    MisalignmentError,
    PipelineError,
    TooShortError,
    ZeroVarianceError,
)
from liqarch.liquidity import (
    BETA_MEASURES,
    compute_daily_records,
    describe_records,
    histogram_frame,
    records_frame,
)
from liqarch.log import LOGGER
from liqarch.marketdata import (
    day_status_frame,
    parse_minute_csv,
    partition_days,
    write_minute_csv,
)
from liqarch.portfolio import market_returns, run_tmv_lamv
from liqarch.stats import adf_frame, adf_test, anova_frame, compare_panel, ttests_frame
from liqarch.synth import (
    DailyJumpParams,
    gen_garch_series,
    gen_universe,
    planted_records,
    trading_calendar,
)
from liqarch.utilities import splitmix64

MINUTE_BARS = "minute_bars.csv"
DAY_STATUS = "day_status.csv"
DAILY_RECORDS = "daily_records.csv"
FIXTURE_TRUTH = "fixture_truth.csv"
DESCRIPTIVE_STATS = "descriptive_stats.csv"
ANOVA = "anova.csv"
FULL_SAMPLE_FITS = "full_sample_fits.csv"
ADF = "adf.csv"
WINDOW_FITS = "window_fits.csv"
FORECASTS = "forecasts.csv"
TTESTS = "ttests.csv"
PORTFOLIO = "portfolio.csv"
PORTFOLIO_DAILY = "portfolio_daily.csv"
RUN_MANIFEST = "run_manifest.json"
SKIPPED = "skipped.csv"
SKIPPED_COLUMNS = ["stage", "ticker", "reason"]
PACKAGES = ("liqarch", "numpy", "pandas", "scipy", "statsmodels")
FIT_COLUMNS = [
    "ticker",
    "path",
    "p",
    "q",
    *(f"phi_{i}" for i in range(1, MAX_ORDER + 1)),
    *(f"theta_{j}" for j in range(1, MAX_ORDER + 1)),
    "omega",
    "alpha",
    "beta",
    "loglik",
    "aic",
    "mean_forecast",
    "converged",
]
UNRECORDED_SETTINGS = ("threads", "log_level")

StageCounts = Dict[str, int]


def _stage(name: str) -> Callable:
    """Logs a stage and wraps its failures in PipelineError(name)."""

    def decorator(function: Callable[[RunConfig], StageCounts]):
        @wraps(function)
        def wrapper(config: RunConfig) -> StageCounts:
            LOGGER.info("stage %s started", name)
            config.output_path.mkdir(parents=True, exist_ok=True)
            try:
                counts = function(config)
            except PipelineError:
                raise
            except (LiqarchError, OSError, ValueError) as error:
                raise PipelineError(name, str(error)) from error
            LOGGER.info("stage %s finished: %s", name, counts)
            return counts

        return wrapper

    return decorator


def _write(frame: DataFrame, config: RunConfig, name: str) -> StageCounts:
    frame.to_csv(config.output_path / name, index=False, lineterminator="\n")
    return {name: len(frame)}


def _read(config: RunConfig, name: str) -> DataFrame:
    path = config.output_path / name
    if not path.is_file():
        raise FileNotFoundError(f"{path} not found; run the stage that writes it first")
    return read_csv(path, dtype={"ticker": str, "date": str, "window_end": str})


def _by_ticker(frame: DataFrame) -> Dict[str, DataFrame]:
    return {
        str(ticker): group.sort_values("date", kind="mergesort").reset_index(drop=True)
        for ticker, group in frame.groupby("ticker", sort=True)
    }


def make_runner(threads: int) -> WindowRunner:
    """SerialWindowRunner for one thread, RayWindowRunner otherwise.

    Falls back to the serial runner when ray is not installed.
    """
    if threads <= 1:
        return SerialWindowRunner()
    try:
        from liqarch.ray import make_ray_runner
    except ImportError:
        LOGGER.warning("ray is not installed; fitting windows serially")
        return SerialWindowRunner()
    return make_ray_runner(threads)


@_stage("synth")
def run_synth(config: RunConfig) -> StageCounts:
    """Writes a synthetic universe: minute bars or planted daily records,
    plus fixture_truth.csv.
    """
    if config.synth_mode == "minute":
        universe = gen_universe(
            assets=config.synth_assets,
            days=config.synth_days,
            params=config.jump_params(),
            seed=config.seed,
            venue=config.venue,
            dynamics=config.daily_dynamics(),
        )
        counts = {MINUTE_BARS: write_minute_csv(universe.bars(), config.output_path / MINUTE_BARS)}
        counts.update(_write(universe.truth, config, FIXTURE_TRUTH))
        return counts

    venue = config.venue_spec
    dates = [day.isoformat() for day in trading_calendar(venue, config.synth_days)]
    records, truths = [], []
    for asset in range(config.synth_assets):
        asset_seed = splitmix64(config.seed, asset)
        base = gen_garch_series(
            config.synth_omega, config.synth_alpha, config.synth_beta, config.synth_days, asset_seed
        )
        rng = default_rng(splitmix64(asset_seed, config.synth_days))
        planted = DailyJumpParams(
            target_beta_jump=config.synth_beta_jump
            * rng.lognormal(0.0, config.synth_beta_dispersion, config.synth_days),
            target_beta_diff=config.synth_beta_diff,
        )
        asset_records, truth = planted_records(
            base, planted, f"SYN{asset:02d}", dates, config.beta_cap
        )
        records.append(asset_records)
        truths.append(truth)
    counts = _write(concat(records, ignore_index=True), config, DAILY_RECORDS)
    counts.update(_write(concat(truths, ignore_index=True), config, FIXTURE_TRUTH))
    return counts


def _ingest_inputs(config: RunConfig) -> List[Path]:
    if config.inputs:
        return [Path(path) for path in config.inputs]
    return [config.output_path / MINUTE_BARS]


@_stage("ingest")
def run_ingest(config: RunConfig) -> StageCounts:
    paths = _ingest_inputs(config)
    frames = []
    for path in paths:
        with open(path, "rb") as stream:
            frames.append(parse_minute_csv(stream))
    bars = concat(frames, ignore_index=True).sort_values(
        ["ticker", "minute_start"], kind="mergesort", ignore_index=True
    )
    days = partition_days(bars, config.venue_spec)
    counts = {MINUTE_BARS: write_minute_csv(bars, config.output_path / MINUTE_BARS)}
    counts.update(_write(day_status_frame(days, config.min_minutes), config, DAY_STATUS))
    return counts


@_stage("liquidity")
def run_liquidity(config: RunConfig) -> StageCounts:
    with open(config.output_path / MINUTE_BARS, "rb") as stream:
        bars = parse_minute_csv(stream)
    days = partition_days(bars, config.venue_spec)
    records = records_frame(compute_daily_records(days, config.min_minutes, config.beta_cap))
    counts = _write(records, config, DAILY_RECORDS)
    counts.update(_write(describe_records(records), config, DESCRIPTIVE_STATS))
    for measure in BETA_MEASURES:
        frame = histogram_frame(records, measure, config.histogram_bins, config.beta_cap)
        counts.update(_write(frame, config, f"histogram_{measure}.csv"))
    counts.update(_write(anova_frame(records), config, ANOVA))
    return counts


@_stage("fit")
def run_fit(config: RunConfig) -> StageCounts:
    """Full-sample ARMA-GARCH fits and ADF tests of both paths per ticker."""
    fit_rows, adf_results = [], {}
    for ticker, records in _by_ticker(_read(config, DAILY_RECORDS)).items():
        for path, column in (("reg", "r"), ("liq", "r_liq")):
            series = records[column].to_numpy()
            row = {"ticker": ticker, "path": path}
            try:
                fit = fit_arma_garch(series, config.p_max, config.q_max, config.include_mean)
                row.update(fit.summary_row())
            except LiqarchError as error:
                LOGGER.warning("%s %s: full-sample fit failed: %s", ticker, path, error)
                row["converged"] = False
            fit_rows.append(row)
            try:
                adf_results[(ticker, column)] = adf_test(series)
            except (TooShortError, ZeroVarianceError) as error:
                LOGGER.warning("%s %s: ADF skipped: %s", ticker, column, error)
    fits = DataFrame(fit_rows, columns=FIT_COLUMNS)
    counts = _write(fits, config, FULL_SAMPLE_FITS)
    counts.update(_write(adf_frame(adf_results), config, ADF))
    return counts


@_stage("backtest")
def run_backtest(config: RunConfig) -> StageCounts:
    spec = config.window_spec()
    runner = make_runner(config.threads)
    fits, skipped = [], {}
    for ticker, records in _by_ticker(_read(config, DAILY_RECORDS)).items():
        try:
            fits.append(fit_windows(records, spec, runner))
        except LiqarchError as error:
            LOGGER.warning("%s: backtest skipped: %s", ticker, error)
            skipped[ticker] = str(error)
    if not fits:
        raise AllFailedError("No ticker could be backtested.")
    counts = _write(window_fits_frame(fits), config, WINDOW_FITS)
    counts.update(
        _write(forecasts_frame(item.forecast_series() for item in fits), config, FORECASTS)
    )
    counts.update(_record_skipped(config, "backtest", skipped))
    return counts


@_stage("report")
def run_report(config: RunConfig) -> StageCounts:
    results, skipped = {}, {}
    for ticker, panel in comparison_panels(_read(config, WINDOW_FITS)).items():
        try:
            results[ticker] = compare_panel(panel)
        except LiqarchError as error:
            LOGGER.warning("%s: t-tests skipped: %s", ticker, error)
            skipped[ticker] = str(error)
    counts = _write(ttests_frame(results), config, TTESTS)
    counts.update(_record_skipped(config, "report", skipped))
    return counts


@_stage("portfolio")
def run_portfolio(config: RunConfig) -> StageCounts:
    spec = config.portfolio_spec()
    records = _read(config, DAILY_RECORDS)
    market = market_returns(records)
    per_ticker = _by_ticker(records)
    summaries, dailies, skipped = [], [], {}
    for ticker, forecasts in forecast_series_from_frame(_read(config, FORECASTS)).items():
        try:
            if ticker not in per_ticker:
                raise MisalignmentError(f"{ticker} has forecasts but no daily records")
            comparison = run_tmv_lamv(forecasts, per_ticker[ticker], market, spec)
        except LiqarchError as error:
            LOGGER.warning("%s: portfolio skipped: %s", ticker, error)
            skipped[ticker] = str(error)
            continue
        summary, daily = comparison.to_frames()
        summaries.append(summary)
        dailies.append(daily)
    counts = _write(_concat_or_empty(summaries), config, PORTFOLIO)
    counts.update(_write(_concat_or_empty(dailies), config, PORTFOLIO_DAILY))
    counts.update(_record_skipped(config, "portfolio", skipped))
    return counts


def _concat_or_empty(frames: List[DataFrame]) -> DataFrame:
    return concat(frames, ignore_index=True) if frames else DataFrame()


def _record_skipped(config: RunConfig, stage: str, skipped: Mapping[str, str]) -> StageCounts:
    """Replaces the stage's rows of skipped.csv with the tickers it skipped."""
    path = config.output_path / SKIPPED
    rows = []
    if path.is_file():
        previous = read_csv(path, dtype=str, keep_default_na=False)
        rows = [row for row in previous.to_dict("records") if row["stage"] != stage]
    rows += [
        {"stage": stage, "ticker": ticker, "reason": reason}
        for ticker, reason in skipped.items()
    ]
    return _write(DataFrame(rows, columns=SKIPPED_COLUMNS), config, SKIPPED)


def skipped_tickers(config: RunConfig) -> List[Dict[str, str]]:
    """Rows of skipped.csv, empty before any stage skipped a ticker."""
    path = config.output_path / SKIPPED
    if not path.is_file():
        return []
    return read_csv(path, dtype=str, keep_default_na=False).to_dict("records")


def _versions() -> Dict[str, str]:
    versions = {}
    for package in PACKAGES:
        try:
            versions[package] = version(package)
        except PackageNotFoundError:
            versions[package] = "unknown"
    return versions


def run_pipeline(config: RunConfig) -> StageCounts:
    """Runs every stage and writes run_manifest.json.

    Synthetic data is generated first when synth is enabled and no
    inputs are given; daily-mode synthetic records skip ingestion and
    the liquidity stage.
    """
    if not (config.inputs or config.synth):
        raise ConfigError("run needs inputs or an enabled synthetic universe")
    stages = [run_ingest, run_liquidity]
    if config.synth and not config.inputs:
        stages = [run_synth] + ([] if config.synth_mode == "daily" else stages)
    stages += [run_fit, run_backtest, run_report, run_portfolio]

    counts: StageCounts = {}
    for stage in stages:
        counts.update(stage(config))
    manifest = {
        "config": {
            key: value
            for key, value in config.to_dict().items()
            if key not in UNRECORDED_SETTINGS
        },
        "versions": _versions(),
        "rows": counts,
        "skipped": skipped_tickers(config),
    }
    (config.output_path / RUN_MANIFEST).write_text(
        dumps(manifest, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
    LOGGER.info("wrote %s", config.output_path / RUN_MANIFEST)
    return counts


STAGES = {
    "synth": run_synth,
    "ingest": run_ingest,
    "liquidity": run_liquidity,
    "fit": run_fit,
    "backtest": run_backtest,
    "report": run_report,
    "portfolio": run_portfolio,
    "run": run_pipeline,
}
