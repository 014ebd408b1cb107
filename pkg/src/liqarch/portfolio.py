"""Module for the two-asset mean-variance portfolios driven by
ARMA-GARCH forecasts.

Each day the portfolio splits wealth between one risky asset and a
risk-free asset returning 0, maximizing w mu - (lambda / 2) w^2 sigma^2
over the long-only box w in [0, 1]. The traditional portfolio (TMV)
uses the forecast and variance of regular returns, the liquidity-
adjusted one (LAMV) those of adjusted returns. Both settle on realized
regular returns.

Classes
-------
RiskAversion
MvWeights
PortfolioSpec
PortfolioSeries
PortfolioComparison

Functions
---------
market_returns
market_lambda
mv_weights
realized_portfolio_returns
sharpe_annualized
run_tmv_lamv
"""

from dataclasses import dataclass
from math import sqrt
from typing import Dict, Iterable, List, Optional

from numpy import array, clip, cumprod, float64, ndarray, searchsorted
from pandas import DataFrame, Series

from liqarch.backtest import ForecastSeries
from liqarch.exceptions import (
    DegenerateVolatilityError,
    DomainError,
    InvalidArgumentError,
    MisalignmentError,
    TooShortError,
    ZeroVarianceError,
)
from liqarch.log import LOGGER
from liqarch.stats import Direction
from liqarch.utilities import as_finite_array

DEFAULT_LAMBDA_FLOOR = 1e-4
MIN_LAMBDA_WINDOW = 30
MIN_SHARPE_OBSERVATIONS = 30
SHARPE_TIE_TOLERANCE = 1e-12
PORTFOLIOS = ("TMV", "LAMV")


@dataclass(frozen=True)
class RiskAversion:
    value: float

    def __post_init__(self) -> None:
        if not self.value > 0:
            raise DomainError(f"Risk aversion must be positive, got {self.value}")


@dataclass(frozen=True)
class MvWeights:
    w_asset: float
    w_rf: float


def market_returns(records: DataFrame) -> Series:
    """Equal-weight daily return of every ticker present on each date."""
    return records.groupby("date", sort=True)["r"].mean()


def market_lambda(
    window: Iterable[float], lambda_floor: float = DEFAULT_LAMBDA_FLOOR
) -> RiskAversion:
    """lambda = mean / variance of the market window, floored.

    Raises
    ------
    TooShortError
        For windows shorter than 30 days.
    ZeroVarianceError
        For constant windows.
    """
    window = as_finite_array(window, "window")
    if len(window) < MIN_LAMBDA_WINDOW:
        raise TooShortError(
            f"Risk aversion needs at least {MIN_LAMBDA_WINDOW} market days, "
            f"got {len(window)}"
        )
    variance = float(window.var(ddof=1))
    if variance == 0:
        raise ZeroVarianceError("Market returns are constant over the window.")
    return RiskAversion(max(float(window.mean()) / variance, lambda_floor))


def mv_weights(mu_hat: float, sigma2: float, lam: RiskAversion) -> MvWeights:
    """Long-only optimum w = clamp(mu_hat / (lambda sigma2), 0, 1)."""
    if not sigma2 > 0:
        raise DomainError(f"sigma2 must be positive, got {sigma2}")
    w_asset = float(clip(mu_hat / (lam.value * sigma2), 0.0, 1.0))
    return MvWeights(w_asset=w_asset, w_rf=1.0 - w_asset)


def realized_portfolio_returns(
    weights: Iterable[float], asset_returns: Iterable[float]
) -> ndarray:
    """p_{t+1} = w(t) r_{t+1}.

    weights[i] is decided before asset_returns[i] is realized.
    """
    weights = as_finite_array(weights, "weights")
    asset_returns = as_finite_array(asset_returns, "asset_returns")
    if len(weights) != len(asset_returns):
        raise MisalignmentError(
            f"{len(weights)} weights do not match {len(asset_returns)} returns"
        )
    if ((weights < 0) | (weights > 1)).any():
        raise InvalidArgumentError("weights must lie in [0, 1]")
    return weights * asset_returns


def sharpe_annualized(returns: Iterable[float], periods_per_year: int) -> float:
    """(mean / sd) sqrt(periods_per_year) with a 0 risk-free rate."""
    returns = as_finite_array(returns, "returns")
    if len(returns) < MIN_SHARPE_OBSERVATIONS:
        raise TooShortError(
            f"Sharpe ratio needs at least {MIN_SHARPE_OBSERVATIONS} returns, "
            f"got {len(returns)}"
        )
    spread = float(returns.std(ddof=1))
    if spread == 0:
        raise DegenerateVolatilityError("Portfolio returns have zero volatility.")
    return float(returns.mean()) / spread * sqrt(periods_per_year)


@dataclass(frozen=True)
class PortfolioSpec:
    """Attributes
    ----------
    window_len:
        Days of asset history behind each variance estimate.
    annualization_days:
        Periods per year of the Sharpe ratio (252 stock, 365 crypto).
    lambda_floor:
        Lower bound of the risk aversion.
    lambda_window:
        Days of market history behind each risk aversion; window_len
        when unset.
    """

    window_len: int
    annualization_days: int
    lambda_floor: float = DEFAULT_LAMBDA_FLOOR
    lambda_window: Optional[int] = None

    def __post_init__(self) -> None:
        if self.window_len < 2:
            raise InvalidArgumentError("window_len must be at least 2")
        if self.annualization_days < 1:
            raise InvalidArgumentError("annualization_days must be positive")
        if not self.lambda_floor > 0:
            raise InvalidArgumentError("lambda_floor must be positive")

    @property
    def market_window(self) -> int:
        return self.lambda_window if self.lambda_window is not None else self.window_len


@dataclass(frozen=True, eq=False)
class PortfolioSeries:
    name: str
    dates: List[str]
    weights: ndarray
    returns: ndarray
    sharpe: float

    @property
    def cumulative(self) -> ndarray:
        return cumprod(1.0 + self.returns) - 1.0


@dataclass(frozen=True, eq=False)
class PortfolioComparison:
    ticker: str
    tmv: PortfolioSeries
    lamv: PortfolioSeries

    @property
    def direction(self) -> Direction:
        """UP when LAMV has the higher Sharpe ratio."""
        difference = self.lamv.sharpe - self.tmv.sharpe
        if abs(difference) <= SHARPE_TIE_TOLERANCE:
            return Direction.NO_CHANGE
        return Direction.UP if difference > 0 else Direction.DOWN

    def to_frames(self):
        """(summary rows for portfolio.csv, daily rows for portfolio_daily.csv)."""
        summary = DataFrame(
            [
                {
                    "ticker": self.ticker,
                    "portfolio": series.name,
                    "sharpe_annualized": series.sharpe,
                    "direction": self.direction.value,
                }
                for series in (self.tmv, self.lamv)
            ],
            columns=SUMMARY_COLUMNS,
        )
        daily = DataFrame(
            [
                {
                    "ticker": self.ticker,
                    "date": day,
                    "portfolio": series.name,
                    "weight": weight,
                    "realized_return": realized,
                    "cumulative_return": cumulative,
                }
                for series in (self.tmv, self.lamv)
                for day, weight, realized, cumulative in zip(
                    series.dates, series.weights, series.returns, series.cumulative
                )
            ],
            columns=DAILY_COLUMNS,
        )
        return summary, daily


SUMMARY_COLUMNS = ["ticker", "portfolio", "sharpe_annualized", "direction"]
DAILY_COLUMNS = [
    "ticker",
    "date",
    "portfolio",
    "weight",
    "realized_return",
    "cumulative_return",
]


def run_tmv_lamv(
    forecasts: ForecastSeries,
    records: DataFrame,
    market: Series,
    spec: PortfolioSpec,
) -> PortfolioComparison:
    """Builds the TMV and LAMV portfolios of one ticker.

    Parameters
    ----------
    forecasts:
        Mean forecasts of both paths, dated by the day they forecast.
    records:
        Daily records of the ticker (date, r, r_liq) sorted by date.
    market:
        Equal-weight market return indexed by date (see market_returns).
    spec:
        Window lengths, annualization and risk-aversion floor.

    Every input to the weight of day t is dated strictly before t.
    """
    dates = [str(value) for value in records["date"]]
    regular = records["r"].to_numpy(dtype=float64)
    adjusted = records["r_liq"].to_numpy(dtype=float64)
    market_dates = [str(value) for value in market.index]
    market_values = market.to_numpy(dtype=float64)
    position = {day: index for index, day in enumerate(dates)}

    weights: Dict[str, List[float]] = {name: [] for name in PORTFOLIOS}
    realized: List[float] = []
    for day, mu_reg, mu_liq in zip(
        forecasts.dates, forecasts.mu_hat_reg, forecasts.mu_hat_liq
    ):
        if day not in position:
            raise MisalignmentError(f"Forecast date {day} has no daily record.")
        index = position[day]
        if index < spec.window_len:
            raise MisalignmentError(
                f"Forecast date {day} has fewer than {spec.window_len} days of history."
            )
        market_end = searchsorted(market_dates, day)
        lam = market_lambda(
            market_values[max(0, market_end - spec.market_window) : market_end],
            spec.lambda_floor,
        )
        history = slice(index - spec.window_len, index)
        weights["TMV"].append(
            mv_weights(mu_reg, float(regular[history].var(ddof=1)), lam).w_asset
        )
        weights["LAMV"].append(
            mv_weights(mu_liq, float(adjusted[history].var(ddof=1)), lam).w_asset
        )
        realized.append(float(regular[index]))

    series = {}
    for name in PORTFOLIOS:
        returns = realized_portfolio_returns(weights[name], realized)
        series[name] = PortfolioSeries(
            name=name,
            dates=list(forecasts.dates),
            weights=array(weights[name], dtype=float64),
            returns=returns,
            sharpe=sharpe_annualized(returns, spec.annualization_days),
        )
    LOGGER.info(
        "%s: TMV Sharpe %.4f, LAMV Sharpe %.4f",
        forecasts.ticker,
        series["TMV"].sharpe,
        series["LAMV"].sharpe,
    )
    return PortfolioComparison(
        ticker=forecasts.ticker, tmv=series["TMV"], lamv=series["LAMV"]
    )
