"""Module for generating synthetic market data with known structure.

Minute-level days combine a Gaussian diffusion with compound-Poisson
jumps in log-returns; traded amounts are lognormal and spike on jump
minutes, so that jumps coincide with liquidity shocks. Optional daily
dynamics give the diffusion an AR(1) drift and GARCH(1, 1) variance
across days. Daily fixtures plant jumps of known size directly into a
daily return series.

Classes
-------
JumpParams
    Per-minute diffusion, jump and amount parameters.
DailyDynamics
    Day-to-day drift and variance of the diffusion.
DailyJumpParams
    Planted liquidity betas for daily fixtures.
SyntheticUniverse
    Generated days and the jump counts behind them.

Functions
---------
gen_garch_series
gen_jump_day
gen_universe
trading_calendar
rolling_arma_mean
plant_daily_jumps
planted_records
"""

from dataclasses import dataclass, field
from datetime import date as Date, datetime, time as Time
from typing import List, Optional, Sequence, Tuple, Union

from numpy import (
    asarray,
    broadcast_to,
    clip,
    cumsum,
    empty,
    exp,
    float64,
    full,
    nan,
    ndarray,
    sqrt,
)
from numpy.random import default_rng
from pandas import DataFrame, Timestamp, bdate_range, date_range

from liqarch.econometrics import fit_arma, forecast_mean
from liqarch.exceptions import (
    InvalidArgumentError,
    LiqarchError,
    NonStationaryParamsError,
)
from liqarch.liquidity import DEFAULT_BETA_CAP, RECORD_COLUMNS
from liqarch.log import LOGGER
from liqarch.marketdata import (
    STOCK_TIMEZONE,
    TradingDay,
    Venue,
    VenueKind,
    flatten_days,
    make_venue,
)
from liqarch.utilities import as_finite_array, splitmix64

OPEN_PRICE = 100.0
DEFAULT_START = Date(2021, 1, 4)
DEFAULT_MEAN_WINDOW = 60


@dataclass(frozen=True)
class JumpParams:
    """Attributes
    ----------
    intensity:
        Poisson mean of jumps per day.
    jump_mean, jump_sd:
        Normal distribution of a jump's log-return.
    base_sigma:
        Standard deviation of the diffusive minute log-return.
    volume_mu, volume_sigma:
        Lognormal parameters of the minute amount.
    volume_spike:
        Multiplier of the amount on jump minutes.
    """

    intensity: float = 0.0
    jump_mean: float = 0.0
    jump_sd: float = 0.0
    base_sigma: float = 1e-3
    volume_mu: float = 10.0
    volume_sigma: float = 0.5
    volume_spike: float = 1.0

    def __post_init__(self) -> None:
        if self.intensity < 0:
            raise InvalidArgumentError(f"intensity must be non-negative, got {self.intensity}")
        if self.jump_sd < 0:
            raise InvalidArgumentError(f"jump_sd must be non-negative, got {self.jump_sd}")
        if not self.base_sigma > 0:
            raise InvalidArgumentError(f"base_sigma must be positive, got {self.base_sigma}")
        if self.volume_sigma < 0:
            raise InvalidArgumentError("volume_sigma must be non-negative")
        if not self.volume_spike > 0:
            raise InvalidArgumentError(f"volume_spike must be positive, got {self.volume_spike}")


@dataclass(frozen=True)
class DailyDynamics:
    """Diffusion dynamics across days, in daily log-return units.

    The expected diffusion return of day t is drift + ar * D_{t-1},
    where D is the realized diffusion return, and its variance follows
    GARCH(1, 1) driven by the realized deviations.
    """

    omega: float
    alpha: float = 0.0
    beta: float = 0.0
    drift: float = 0.0
    ar: float = 0.0

    def __post_init__(self) -> None:
        _check_garch(self.omega, self.alpha, self.beta)
        if not -1 < self.ar < 1:
            raise NonStationaryParamsError(f"ar must lie in (-1, 1), got {self.ar}")

    @property
    def unconditional_variance(self) -> float:
        return self.omega / (1.0 - self.alpha - self.beta)


def _check_garch(omega: float, alpha: float, beta: float) -> None:
    if not omega > 0 or alpha < 0 or beta < 0 or not alpha + beta < 1:
        raise NonStationaryParamsError(
            f"GARCH(1,1) needs omega > 0, alpha, beta >= 0 and alpha + beta < 1; "
            f"got {omega}, {alpha}, {beta}"
        )


def gen_garch_series(
    omega: float, alpha: float, beta: float, n: int, seed: int
) -> ndarray:
    """Simulates n GARCH(1, 1) innovations started at the unconditional
    variance.
    """
    _check_garch(omega, alpha, beta)
    if n < 1:
        raise InvalidArgumentError(f"n must be at least 1, got {n}")
    shocks = default_rng(seed).standard_normal(n)
    series = empty(n)
    variance = omega / (1.0 - alpha - beta)
    for t in range(n):
        series[t] = sqrt(variance) * shocks[t]
        variance = omega + alpha * series[t] ** 2 + beta * variance
    return series


def _session_start(day: Date, minutes: int) -> Timestamp:
    if minutes == 390:
        return Timestamp(datetime.combine(day, Time(9, 30)), tz=STOCK_TIMEZONE).tz_convert("UTC")
    return Timestamp(datetime.combine(day, Time(0, 0)), tz="UTC")


def _simulate_day(
    params: JumpParams,
    minutes: int,
    seed: int,
    ticker: str,
    day: Date,
    open_price: float,
    drift: float,
    sigma: float,
    intensity: float,
) -> Tuple[TradingDay, int, float]:
    """One day plus its jump count and realized diffusion log-return."""
    if minutes not in (390, 1440):
        raise InvalidArgumentError(f"T must be 390 or 1440, got {minutes}")
    rng = default_rng(seed)
    diffusion = drift + sigma * rng.standard_normal(minutes)
    jump_count = min(int(rng.poisson(intensity)), minutes)
    jump_minutes = rng.choice(minutes, size=jump_count, replace=False)
    jump_sizes = rng.normal(params.jump_mean, params.jump_sd, size=jump_count)
    amounts = rng.lognormal(params.volume_mu, params.volume_sigma, size=minutes)

    log_returns = diffusion.copy()
    log_returns[jump_minutes] += jump_sizes
    amounts[jump_minutes] *= params.volume_spike
    close = open_price * exp(cumsum(log_returns))
    start = _session_start(day, minutes)
    trading_day = TradingDay(
        ticker=ticker,
        date=day,
        minute_start=date_range(start, periods=minutes, freq="min"),
        close=close,
        amount=amounts,
        prev_close=open_price,
    )
    return trading_day, jump_count, float(diffusion.sum())


def gen_jump_day(
    params: JumpParams,
    T: int,
    seed: int,
    ticker: str = "SYN",
    day: Date = DEFAULT_START,
    intensity: Optional[float] = None,
) -> TradingDay:
    """Simulates one jump-diffusion day of T minutes from a price of 100.

    intensity overrides params.intensity for this day.
    """
    day_intensity = params.intensity if intensity is None else intensity
    if day_intensity < 0:
        raise InvalidArgumentError("intensity must be non-negative")
    trading_day, _, _ = _simulate_day(
        params,
        T,
        seed,
        ticker,
        day,
        OPEN_PRICE,
        drift=0.0,
        sigma=params.base_sigma,
        intensity=day_intensity,
    )
    return trading_day


def trading_calendar(venue: Venue, days: int, start: Date = DEFAULT_START) -> List[Date]:
    """The first `days` session dates from start: weekdays for stocks,
    every date for crypto.
    """
    if venue.kind is VenueKind.STOCK:
        index = bdate_range(start=start, periods=days)
    else:
        index = date_range(start=start, periods=days, freq="D")
    return [timestamp.date() for timestamp in index]


@dataclass(eq=False)
class SyntheticUniverse:
    days: List[TradingDay]
    truth: DataFrame = field(repr=False)

    def bars(self) -> DataFrame:
        """The generated minutes in the parse_minute_csv layout."""
        return flatten_days(self.days)


def gen_universe(
    assets: int,
    days: int,
    params: Union[JumpParams, Sequence[JumpParams]],
    seed: int,
    venue: Union[str, Venue] = "crypto",
    dynamics: Optional[DailyDynamics] = None,
    start: Date = DEFAULT_START,
    ticker_prefix: str = "SYN",
) -> SyntheticUniverse:
    """Simulates `assets` independent tickers over `days` sessions.

    Asset i draws from the stream splitmix64(seed, i) and its day d from
    splitmix64(asset seed, d), so each asset's data is independent of
    how many assets are generated. Prices carry over between days.
    """
    if assets < 1 or days < 1:
        raise InvalidArgumentError("assets and days must be at least 1")
    if isinstance(params, JumpParams):
        params = [params] * assets
    if len(params) != assets:
        raise InvalidArgumentError(f"Expected {assets} JumpParams, got {len(params)}")
    venue = make_venue(venue) if isinstance(venue, str) else venue
    calendar = trading_calendar(venue, days, start)
    width = max(2, len(str(assets - 1)))

    generated, truth = [], []
    for asset, asset_params in enumerate(params):
        ticker = f"{ticker_prefix}{asset:0{width}d}"
        asset_seed = splitmix64(seed, asset)
        price = OPEN_PRICE
        variance = dynamics.unconditional_variance if dynamics else None
        previous_diffusion = 0.0
        for index, day in enumerate(calendar):
            if dynamics is None:
                drift, sigma = 0.0, asset_params.base_sigma
            else:
                expected = dynamics.drift + dynamics.ar * previous_diffusion
                drift = expected / venue.session_minutes
                sigma = float(sqrt(variance / venue.session_minutes))
            trading_day, jump_count, diffusion = _simulate_day(
                asset_params,
                venue.session_minutes,
                splitmix64(asset_seed, index),
                ticker,
                day,
                price,
                drift=drift,
                sigma=sigma,
                intensity=asset_params.intensity,
            )
            if dynamics is not None:
                deviation = diffusion - expected
                variance = (
                    dynamics.omega
                    + dynamics.alpha * deviation**2
                    + dynamics.beta * variance
                )
                previous_diffusion = diffusion
            price = float(trading_day.close[-1])
            generated.append(trading_day)
            truth.append(
                {"ticker": ticker, "date": day.isoformat(), "jump_count": jump_count}
            )
    LOGGER.info("generated %d synthetic days for %d assets", len(generated), assets)
    return SyntheticUniverse(
        days=generated,
        truth=DataFrame(truth, columns=["ticker", "date", "jump_count"]),
    )


def rolling_arma_mean(series: Sequence[float], window: int = DEFAULT_MEAN_WINDOW) -> ndarray:
    """AR(1)-implied mean of each day from the preceding `window` days.

    Days without a full window, and windows the AR(1) fit fails on, get 0.
    """
    series = as_finite_array(series, "series")
    means = full(len(series), 0.0)
    for t in range(window, len(series)):
        history = series[t - window : t]
        try:
            means[t] = forecast_mean(fit_arma(history, 1, 0), history)
        except LiqarchError as error:
            LOGGER.debug("rolling mean at %d failed: %s", t, error)
    return means


@dataclass(frozen=True, eq=False)
class DailyJumpParams:
    """Attributes
    ----------
    target_beta_jump, target_beta_diff:
        Planted betas, a scalar or one value per day (all > 0).
    mean_window:
        Window of the rolling AR(1) mean when mu is not given.
    mu:
        Baseline mean of each day, overriding the rolling mean.
    """

    target_beta_jump: Union[float, Sequence[float]]
    target_beta_diff: Union[float, Sequence[float]] = 1.0
    mean_window: int = DEFAULT_MEAN_WINDOW
    mu: Optional[Sequence[float]] = None

    def __post_init__(self) -> None:
        for name in ("target_beta_jump", "target_beta_diff"):
            values = asarray(getattr(self, name), dtype=float64)
            if not (values > 0).all():
                raise InvalidArgumentError(f"{name} must be positive")


def _per_day(values, n: int, name: str) -> ndarray:
    values = asarray(values, dtype=float64)
    try:
        return broadcast_to(values, (n,)).copy()
    except ValueError as error:
        raise InvalidArgumentError(f"{name} must be a scalar or have {n} values") from error


def plant_daily_jumps(base_daily_returns: Sequence[float], params: DailyJumpParams) -> ndarray:
    """r'_t = r_t + (beta_jump_t - 1) beta_diff_t mu_t."""
    returns = as_finite_array(base_daily_returns, "base_daily_returns")
    n = len(returns)
    beta_jump = _per_day(params.target_beta_jump, n, "target_beta_jump")
    beta_diff = _per_day(params.target_beta_diff, n, "target_beta_diff")
    if params.mu is None:
        mu = rolling_arma_mean(returns, params.mean_window)
    else:
        mu = _per_day(params.mu, n, "mu")
    return returns + (beta_jump - 1.0) * beta_diff * mu


def planted_records(
    base_daily_returns: Sequence[float],
    params: DailyJumpParams,
    ticker: str,
    dates: Sequence[str],
    cap: float = DEFAULT_BETA_CAP,
) -> Tuple[DataFrame, DataFrame]:
    """Daily records with planted jumps and r_liq = r / beta_jump.

    Returns
    -------
    (records in the daily_records layout, with empty sigma columns;
    truth rows ticker, date, planted_beta_jump, planted_beta_diff).
    """
    returns = plant_daily_jumps(base_daily_returns, params)
    n = len(returns)
    if len(dates) != n:
        raise InvalidArgumentError(f"Expected {n} dates, got {len(dates)}")
    beta_jump = _per_day(params.target_beta_jump, n, "target_beta_jump")
    beta_diff = _per_day(params.target_beta_diff, n, "target_beta_diff")
    records = DataFrame(
        {
            "ticker": [ticker] * n,
            "date": [str(value) for value in dates],
            "r": returns,
            "r_liq": returns / beta_jump,
            "sigma": full(n, nan),
            "sigma_liq": full(n, nan),
            "beta_jump": clip(beta_jump, 0.0, cap),
            "beta_diff": clip(beta_diff, 0.0, cap),
            "degenerate": [False] * n,
        },
        columns=list(RECORD_COLUMNS),
    )
    truth = DataFrame(
        {
            "ticker": [ticker] * n,
            "date": records["date"],
            "planted_beta_jump": beta_jump,
            "planted_beta_diff": beta_diff,
        }
    )
    return records, truth
