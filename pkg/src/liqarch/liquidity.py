"""Module for liquidity-adjusting minute returns and deriving daily
liquidity betas.

A minute's liquidity ratio is its relative absolute return divided by
its relative traded amount. A day's normalization factor eta makes the
scaled ratios sum to the number of minutes, and the adjusted return of
a minute is its return multiplied by sqrt(eta * ratio). Daily betas
compare the regular aggregates with the adjusted ones.

Classes
-------
LiquidityFactors
    Normalization factor and per-minute multipliers of one day.
DailyAggregates
    Compounded returns and realized volatilities of one day.
LiquidityBetas
    Capped jump and diffusion betas of one day.
DailyRecord
    Everything the daily models consume for one (ticker, date).
DescriptiveStats
    Summary statistics of a sample of betas or returns.
Histogram
    Binned distribution of betas on [0, cap].

Functions
---------
normalization_factor
adjust_returns
daily_aggregates
liquidity_betas
liquidity_weighted_variance
daily_record
compute_daily_records
records_frame
describe
describe_records
histogram
histogram_frame
"""

from dataclasses import astuple, dataclass, fields
from datetime import date as Date
from typing import Dict, Iterable, List, NamedTuple, Sequence

from numpy import (
    abs as np_abs,
    clip,
    float64,
    histogram as np_histogram,
    linspace,
    median,
    ndarray,
    prod,
    sqrt,
    zeros,
)
from pandas import DataFrame
from scipy.stats import kurtosis, skew  # type: ignore[import]

from liqarch.exceptions import (
    AllZeroAmountsError,
    AllZeroReturnsError,
    EmptyInputError,
    InvalidArgumentError,
    LengthMismatchError,
)
from liqarch.log import LOGGER
from liqarch.marketdata import (
    DEFAULT_MIN_MINUTES,
    TradingDay,
    minute_returns,
    return_amounts,
    validate_day,
)
from liqarch.utilities import as_finite_array

DEFAULT_BETA_CAP = 10.0
DEFAULT_HISTOGRAM_BINS = 50
BETA_MEASURES = ("beta_jump", "beta_diff")
RECORD_MEASURES = ("r", "r_liq", "beta_jump", "sigma", "sigma_liq", "beta_diff")


@dataclass(frozen=True, eq=False)
class LiquidityFactors:
    """Attributes
    ----------
    eta:
        Day normalization factor.
    per_minute:
        sqrt(eta * ratio) for each included minute.
    effective_minutes:
        Number of included minutes.
    included:
        Boolean mask over the input minutes; minutes with zero amount
        and a nonzero return are excluded.
    """

    eta: float
    per_minute: ndarray
    effective_minutes: int
    included: ndarray


def normalization_factor(returns: Iterable[float], amounts: Iterable[float]) -> LiquidityFactors:
    """Computes the day normalization factor and per-minute multipliers.

    Parameters
    ----------
    returns:
        Minute simple returns of one day.
    amounts:
        Traded amounts aligned with returns.

    Raises
    ------
    AllZeroReturnsError
        When every included minute has a zero return.
    AllZeroAmountsError
        When every minute has zero amount and a nonzero return.
    """
    returns = as_finite_array(returns, "returns")
    amounts = as_finite_array(amounts, "amounts")
    if len(returns) != len(amounts):
        raise LengthMismatchError(
            f"returns ({len(returns)}) and amounts ({len(amounts)}) differ in length"
        )
    if len(returns) == 0:
        raise EmptyInputError("No minutes to normalize.")
    if (amounts < 0).any():
        raise InvalidArgumentError("amounts must be non-negative")

    absolute = np_abs(returns)
    included = ~((amounts == 0) & (absolute > 0))
    excluded = int((~included).sum())
    if excluded:
        LOGGER.debug("excluded %d zero-amount minutes with nonzero return", excluded)
    if not included.any():
        raise AllZeroAmountsError("Every minute has zero amount and a nonzero return.")

    absolute, amounts = absolute[included], amounts[included]
    if not (absolute > 0).any():
        raise AllZeroReturnsError("Every minute return is zero.")

    moving = absolute > 0
    ratio = zeros(len(absolute))
    ratio[moving] = (absolute[moving] / absolute.mean()) / (
        amounts[moving] / amounts.mean()
    )
    effective_minutes = len(absolute)
    eta = effective_minutes / ratio.sum()
    return LiquidityFactors(
        eta=float(eta),
        per_minute=sqrt(eta * ratio),
        effective_minutes=effective_minutes,
        included=included,
    )


def adjust_returns(returns: Iterable[float], factors: LiquidityFactors) -> ndarray:
    """Multiplies minute returns by their liquidity factors.

    returns may either hold one value per included minute or one per
    input minute, in which case the excluded minutes are dropped.
    """
    returns = as_finite_array(returns, "returns")
    if len(returns) == len(factors.per_minute):
        return returns * factors.per_minute
    if len(returns) == len(factors.included):
        return returns[factors.included] * factors.per_minute
    raise LengthMismatchError(
        f"{len(returns)} returns do not match {len(factors.per_minute)} factors"
    )


def liquidity_weighted_variance(returns: Iterable[float], factors: LiquidityFactors) -> float:
    """Liquidity-weighted day variance (1/T) sum f^2 (r - mean r)^2."""
    returns = as_finite_array(returns, "returns")
    if len(returns) == len(factors.included) and len(returns) != len(factors.per_minute):
        returns = returns[factors.included]
    if len(returns) != len(factors.per_minute):
        raise LengthMismatchError(
            f"{len(returns)} returns do not match {len(factors.per_minute)} factors"
        )
    deviations = returns - returns.mean()
    return float((factors.per_minute**2 * deviations**2).mean())


class DailyAggregates(NamedTuple):
    r: float
    r_liq: float
    sigma: float
    sigma_liq: float
    effective_minutes: int


def _realized_volatility(returns: ndarray) -> float:
    return float(sqrt(len(returns) * returns.var()))


def daily_aggregates(returns: Iterable[float], adjusted: Iterable[float]) -> DailyAggregates:
    """Compounds regular and adjusted minute returns into a day.

    Returns
    -------
    DailyAggregates with r = prod(1 + r) - 1, the same for the adjusted
    path, and the realized volatilities sqrt(T * population variance).
    """
    returns = as_finite_array(returns, "returns")
    adjusted = as_finite_array(adjusted, "adjusted")
    if len(returns) != len(adjusted):
        raise LengthMismatchError("returns and adjusted returns differ in length")
    if len(returns) == 0:
        raise EmptyInputError("No minutes to aggregate.")
    return DailyAggregates(
        r=float(prod(1.0 + returns) - 1.0),
        r_liq=float(prod(1.0 + adjusted) - 1.0),
        sigma=_realized_volatility(returns),
        sigma_liq=_realized_volatility(adjusted),
        effective_minutes=len(returns),
    )


class LiquidityBetas(NamedTuple):
    beta_jump: float
    beta_diff: float
    degenerate: bool


def _capped_ratio(numerator: float, denominator: float, cap: float):
    numerator, denominator = abs(numerator), abs(denominator)
    if denominator == 0:
        return (cap if numerator > 0 else 1.0), True
    if numerator == 0:
        return 1.0, True
    return min(numerator / denominator, cap), False


def liquidity_betas(
    aggregates: DailyAggregates, cap: float = DEFAULT_BETA_CAP
) -> LiquidityBetas:
    """beta_jump = |r / r_liq| and beta_diff = sigma / sigma_liq, capped.

    A zero denominator gives cap (or 1 when the numerator is also zero)
    and a zero numerator gives 1; both mark the day degenerate.
    """
    if not cap > 0:
        raise InvalidArgumentError(f"cap must be positive, got {cap}")
    beta_jump, jump_degenerate = _capped_ratio(aggregates.r, aggregates.r_liq, cap)
    beta_diff, diff_degenerate = _capped_ratio(aggregates.sigma, aggregates.sigma_liq, cap)
    return LiquidityBetas(
        beta_jump=float(beta_jump),
        beta_diff=float(beta_diff),
        degenerate=jump_degenerate or diff_degenerate,
    )


@dataclass(frozen=True)
class DailyRecord:
    ticker: str
    date: Date
    r: float
    r_liq: float
    sigma: float
    sigma_liq: float
    beta_jump: float
    beta_diff: float
    degenerate: bool


RECORD_COLUMNS = tuple(field.name for field in fields(DailyRecord))


def daily_record(day: TradingDay, cap: float = DEFAULT_BETA_CAP) -> DailyRecord:
    """Builds the DailyRecord of one valid day.

    Days whose returns or amounts are all zero keep r_liq = r and
    unit betas, flagged degenerate.
    """
    returns = minute_returns(day)
    amounts = return_amounts(day)
    try:
        factors = normalization_factor(returns, amounts)
    except (AllZeroReturnsError, AllZeroAmountsError) as error:
        LOGGER.info("%s %s is degenerate: %s", day.ticker, day.date, error)
        aggregates = daily_aggregates(returns, returns)
        betas = LiquidityBetas(beta_jump=1.0, beta_diff=1.0, degenerate=True)
    else:
        included = returns[factors.included]
        liquid = daily_aggregates(included, adjust_returns(included, factors))
        # r and sigma compound every minute; the exclusion only touches the adjusted path
        aggregates = daily_aggregates(returns, returns)._replace(
            r_liq=liquid.r_liq,
            sigma_liq=liquid.sigma_liq,
            effective_minutes=liquid.effective_minutes,
        )
        betas = liquidity_betas(aggregates, cap)
    return DailyRecord(
        ticker=day.ticker,
        date=day.date,
        r=aggregates.r,
        r_liq=aggregates.r_liq,
        sigma=aggregates.sigma,
        sigma_liq=aggregates.sigma_liq,
        beta_jump=betas.beta_jump,
        beta_diff=betas.beta_diff,
        degenerate=betas.degenerate,
    )


def compute_daily_records(
    days: Sequence[TradingDay],
    min_minutes: int = DEFAULT_MIN_MINUTES,
    cap: float = DEFAULT_BETA_CAP,
) -> List[DailyRecord]:
    """DailyRecords of the valid days, in input order."""
    records = []
    for day in days:
        status = validate_day(day, min_minutes)
        if not status.valid:
            LOGGER.info("skipping %s %s: %s", day.ticker, day.date, status.reason)
            continue
        records.append(daily_record(day, cap))
    return records


def records_frame(records: Iterable[DailyRecord]) -> DataFrame:
    """DailyRecords as a frame; dates become ISO strings."""
    rows = [astuple(record) for record in records]
    frame = DataFrame(rows, columns=list(RECORD_COLUMNS))
    frame["date"] = [str(value) for value in frame["date"]]
    return frame


@dataclass(frozen=True)
class DescriptiveStats:
    count: int
    mean: float
    std: float
    min: float
    median: float
    max: float
    skewness: float
    kurtosis: float
    days_ge_1: int
    pct_ge_1: float


def describe(values: Iterable[float], threshold: float = 1.0) -> DescriptiveStats:
    """Summary statistics with bias-corrected skewness and excess kurtosis.

    days_ge_1 counts values >= threshold and pct_ge_1 is their share.
    """
    values = as_finite_array(values, "values")
    count = len(values)
    if count == 0:
        raise EmptyInputError("Cannot describe an empty sample.")
    spread = float(values.std(ddof=1)) if count > 1 else 0.0
    skew_defined = count > 2 and spread > 0
    kurtosis_defined = count > 3 and spread > 0
    above = int((values >= threshold).sum())
    return DescriptiveStats(
        count=count,
        mean=float(values.mean()),
        std=spread,
        min=float(values.min()),
        median=float(median(values)),
        max=float(values.max()),
        skewness=float(skew(values, bias=False)) if skew_defined else 0.0,
        kurtosis=float(kurtosis(values, bias=False)) if kurtosis_defined else 0.0,
        days_ge_1=above,
        pct_ge_1=above / count,
    )


def describe_records(frame: DataFrame, threshold: float = 1.0) -> DataFrame:
    """One row per (ticker, measure) for the return and beta columns."""
    rows = []
    for ticker, group in frame.groupby("ticker", sort=True):
        for measure in RECORD_MEASURES:
            stats = describe(group[measure].to_numpy(dtype=float64), threshold)
            rows.append({"ticker": ticker, "measure": measure, **stats.__dict__})
    columns = ["ticker", "measure", *(field.name for field in fields(DescriptiveStats))]
    return DataFrame(rows, columns=columns)


@dataclass(frozen=True, eq=False)
class Histogram:
    bin_edges: ndarray
    counts: ndarray
    cap: float


def histogram(
    values: Iterable[float], bins: int = DEFAULT_HISTOGRAM_BINS, cap: float = DEFAULT_BETA_CAP
) -> Histogram:
    """Equal-width histogram of values clipped to [0, cap]."""
    values = as_finite_array(values, "values")
    if len(values) == 0:
        raise EmptyInputError("Cannot bin an empty sample.")
    if bins < 1:
        raise InvalidArgumentError(f"bins must be at least 1, got {bins}")
    if not cap > 0:
        raise InvalidArgumentError(f"cap must be positive, got {cap}")
    edges = linspace(0.0, cap, bins + 1)
    counts, _ = np_histogram(clip(values, 0.0, cap), bins=edges)
    return Histogram(bin_edges=edges, counts=counts, cap=float(cap))


def histogram_frame(
    frame: DataFrame,
    measure: str,
    bins: int = DEFAULT_HISTOGRAM_BINS,
    cap: float = DEFAULT_BETA_CAP,
) -> DataFrame:
    """Per-ticker histogram rows: ticker, bin_left, bin_right, count."""
    if measure not in BETA_MEASURES:
        raise InvalidArgumentError(
            f"measure must be one of {', '.join(BETA_MEASURES)}, got '{measure}'"
        )
    parts: Dict[str, List] = {"ticker": [], "bin_left": [], "bin_right": [], "count": []}
    for ticker, group in frame.groupby("ticker", sort=True):
        result = histogram(group[measure].to_numpy(dtype=float64), bins, cap)
        parts["ticker"].extend([ticker] * bins)
        parts["bin_left"].extend(result.bin_edges[:-1])
        parts["bin_right"].extend(result.bin_edges[1:])
        parts["count"].extend(int(count) for count in result.counts)
    return DataFrame(parts)
