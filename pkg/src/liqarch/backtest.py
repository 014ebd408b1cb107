"""Module for rolling-window ARMA-GARCH comparisons of regular and
liquidity-adjusted daily returns.

Window i covers days [i, i + window_len) and forecasts day
i + window_len, so a series of n days yields n - window_len windows.
Both return paths are fitted on every window independently.

Classes
-------
WindowSpec
    Window length and model-selection settings.
WindowFit
    Scalar summary of one ARMA-GARCH fit.
WindowRunner
    Abstract strategy for fitting all windows.
SerialWindowRunner
    Fits windows chunk by chunk in the calling process.
WindowFits
    All window fits of one ticker.
ComparisonPanel
    Per-window log-likelihoods and GARCH coefficients of both paths.
ForecastSeries
    Per-day mean forecasts of both paths.

Functions
---------
rolling_windows
fit_window
fit_window_chunk
fit_windows
run_model_comparison
forecast_series
window_fits_frame
forecasts_frame
comparison_panels
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from numpy import array, bool_, float64, nan, ndarray
from pandas import DataFrame, concat

from liqarch.econometrics import (
    MAX_ORDER,
    ArmaGarchFit,
    fit_arma_garch,
    select_arma,
)
from liqarch.exceptions import InvalidArgumentError, LiqarchError, TooShortError
from liqarch.log import LOGGER
from liqarch.utilities import as_finite_array, longest_true_run

MIN_WINDOW = 60
DEFAULT_STOCK_WINDOW = 242
DEFAULT_CRYPTO_WINDOW = 365
DEFAULT_MAX_DEGENERATE_RUN = 10
PATHS = ("reg", "liq")
Orders = Tuple[Optional[Tuple[int, int]], Optional[Tuple[int, int]]]


@dataclass(frozen=True)
class WindowSpec:
    """Attributes
    ----------
    window_len:
        Days per estimation window (at least 60).
    p_max, q_max:
        Largest ARMA orders considered.
    reselect_orders:
        Re-run AIC selection in every window; otherwise the orders
        chosen on the first window are kept.
    include_mean:
        Fit an ARMA intercept.
    max_degenerate_run:
        Longest tolerated run of consecutive degenerate days.
    """

    window_len: int
    p_max: int = MAX_ORDER
    q_max: int = MAX_ORDER
    reselect_orders: bool = True
    include_mean: bool = False
    max_degenerate_run: int = DEFAULT_MAX_DEGENERATE_RUN

    def __post_init__(self) -> None:
        if self.window_len < MIN_WINDOW:
            raise InvalidArgumentError(
                f"window_len must be at least {MIN_WINDOW}, got {self.window_len}"
            )
        for name in ("p_max", "q_max"):
            if not 0 <= getattr(self, name) <= MAX_ORDER:
                raise InvalidArgumentError(
                    f"{name} must be between 0 and {MAX_ORDER}, got {getattr(self, name)}"
                )
        if self.max_degenerate_run < 0:
            raise InvalidArgumentError("max_degenerate_run must be non-negative")


@dataclass(frozen=True)
class WindowFit:
    p: int
    q: int
    omega: float
    alpha: float
    beta: float
    loglik: float
    converged: bool
    mean_forecast: float

    @classmethod
    def from_fit(cls, fit: ArmaGarchFit) -> "WindowFit":
        return cls(
            p=fit.arma.p,
            q=fit.arma.q,
            omega=fit.garch.omega,
            alpha=fit.garch.alpha,
            beta=fit.garch.beta,
            loglik=fit.loglik,
            converged=fit.converged,
            mean_forecast=fit.mean_forecast,
        )

    @classmethod
    def failed(cls) -> "WindowFit":
        """Placeholder for a window no model could be fitted on.

        Its mean forecast is 0 so that the portfolio holds cash.
        """
        return cls(
            p=-1,
            q=-1,
            omega=nan,
            alpha=nan,
            beta=nan,
            loglik=nan,
            converged=False,
            mean_forecast=0.0,
        )


def rolling_windows(n_days: int, window_len: int) -> List[Tuple[int, int]]:
    """Half-open index ranges [start, end) of every estimation window.

    Raises
    ------
    TooShortError
        When n_days <= window_len.
    """
    if n_days <= window_len:
        raise TooShortError(
            f"{n_days} days leave no day to forecast with window_len {window_len}"
        )
    return [(end - window_len, end) for end in range(window_len, n_days)]


def fit_window(
    series: ndarray,
    start: int,
    end: int,
    spec: WindowSpec,
    order: Optional[Tuple[int, int]] = None,
) -> WindowFit:
    """Fits ARMA-GARCH to series[start:end]; failures become WindowFit.failed()."""
    try:
        fit = fit_arma_garch(
            series[start:end],
            p_max=spec.p_max,
            q_max=spec.q_max,
            include_mean=spec.include_mean,
            order=order,
        )
    except LiqarchError as error:
        LOGGER.debug("window [%d, %d) failed: %s", start, end, error)
        return WindowFit.failed()
    return WindowFit.from_fit(fit)


def fit_window_chunk(
    regular: ndarray,
    adjusted: ndarray,
    windows: Sequence[Tuple[int, int]],
    spec: WindowSpec,
    orders: Orders,
    chunk_size: int,
    chunk_index: int,
) -> Tuple[int, List[Tuple[WindowFit, WindowFit]]]:
    """Fits both paths on windows[chunk_index : chunk_index + chunk_size].

    Returns
    -------
    (chunk_index, fits) so that chunks finished out of order can be
    sorted back.
    """
    fits = [
        (
            fit_window(regular, start, end, spec, orders[0]),
            fit_window(adjusted, start, end, spec, orders[1]),
        )
        for start, end in windows[chunk_index : chunk_index + chunk_size]
    ]
    return chunk_index, fits


class WindowRunner(ABC):
    """Fits every window of a pair of aligned series."""

    def __init__(self, chunk_size: int = 16) -> None:
        if chunk_size < 1:
            raise InvalidArgumentError(f"chunk_size must be positive, got {chunk_size}")
        self.chunk_size = chunk_size

    @abstractmethod
    def fit_windows(
        self,
        regular: ndarray,
        adjusted: ndarray,
        windows: Sequence[Tuple[int, int]],
        spec: WindowSpec,
        orders: Orders,
    ) -> List[Tuple[WindowFit, WindowFit]]:
        pass


class SerialWindowRunner(WindowRunner):
    def fit_windows(
        self,
        regular: ndarray,
        adjusted: ndarray,
        windows: Sequence[Tuple[int, int]],
        spec: WindowSpec,
        orders: Orders,
    ) -> List[Tuple[WindowFit, WindowFit]]:
        fits: List[Tuple[WindowFit, WindowFit]] = []
        for chunk_index in range(0, len(windows), self.chunk_size):
            _, chunk = fit_window_chunk(
                regular, adjusted, windows, spec, orders, self.chunk_size, chunk_index
            )
            fits.extend(chunk)
        return fits


@dataclass(frozen=True, eq=False)
class ComparisonPanel:
    """Per-window statistics of the regular (reg) and adjusted (liq)
    paths of one ticker, aligned by window_end.
    """

    ticker: str
    window_end: List[str]
    loglik_reg: ndarray
    loglik_liq: ndarray
    a_reg: ndarray
    a_liq: ndarray
    b_reg: ndarray
    b_liq: ndarray
    converged_reg: ndarray
    converged_liq: ndarray

    def __len__(self) -> int:
        return len(self.window_end)

    @property
    def both_converged(self) -> ndarray:
        return self.converged_reg & self.converged_liq

    def paired(self, measure: str) -> Tuple[ndarray, ndarray]:
        """Regular and adjusted values of loglik, a or b over the windows
        where both fits converged.
        """
        if measure not in ("loglik", "a", "b"):
            raise InvalidArgumentError(f"Unknown measure '{measure}'")
        mask = self.both_converged
        return (
            getattr(self, f"{measure}_reg")[mask],
            getattr(self, f"{measure}_liq")[mask],
        )


@dataclass(frozen=True, eq=False)
class ForecastSeries:
    ticker: str
    dates: List[str]
    mu_hat_reg: ndarray
    mu_hat_liq: ndarray

    def __len__(self) -> int:
        return len(self.dates)


@dataclass(frozen=True, eq=False)
class WindowFits:
    """Both paths' fits for every window of one ticker.

    window_end holds the date of the last day inside each window and
    target the date of the day it forecasts.
    """

    ticker: str
    window_end: List[str]
    target: List[str]
    regular: List[WindowFit]
    adjusted: List[WindowFit]

    def comparison_panel(self) -> ComparisonPanel:
        def column(fits: List[WindowFit], name: str) -> ndarray:
            return array([getattr(fit, name) for fit in fits], dtype=float64)

        return ComparisonPanel(
            ticker=self.ticker,
            window_end=list(self.window_end),
            loglik_reg=column(self.regular, "loglik"),
            loglik_liq=column(self.adjusted, "loglik"),
            a_reg=column(self.regular, "alpha"),
            a_liq=column(self.adjusted, "alpha"),
            b_reg=column(self.regular, "beta"),
            b_liq=column(self.adjusted, "beta"),
            converged_reg=array([fit.converged for fit in self.regular], dtype=bool_),
            converged_liq=array([fit.converged for fit in self.adjusted], dtype=bool_),
        )

    def forecast_series(self) -> ForecastSeries:
        return ForecastSeries(
            ticker=self.ticker,
            dates=list(self.target),
            mu_hat_reg=array([fit.mean_forecast for fit in self.regular]),
            mu_hat_liq=array([fit.mean_forecast for fit in self.adjusted]),
        )

    def to_frame(self) -> DataFrame:
        rows = []
        for end, regular, adjusted in zip(self.window_end, self.regular, self.adjusted):
            for path, fit in zip(PATHS, (regular, adjusted)):
                rows.append(
                    {
                        "ticker": self.ticker,
                        "window_end": end,
                        "path": path,
                        "p": fit.p,
                        "q": fit.q,
                        "omega": fit.omega,
                        "alpha": fit.alpha,
                        "beta": fit.beta,
                        "loglik": fit.loglik,
                        "converged": fit.converged,
                    }
                )
        return DataFrame(rows, columns=WINDOW_FIT_COLUMNS)


WINDOW_FIT_COLUMNS = [
    "ticker",
    "window_end",
    "path",
    "p",
    "q",
    "omega",
    "alpha",
    "beta",
    "loglik",
    "converged",
]


def _prepare(records: DataFrame, spec: WindowSpec) -> Tuple[str, List[str], ndarray, ndarray]:
    """Validates one ticker's daily records and extracts both paths."""
    tickers = records["ticker"].unique()
    if len(tickers) != 1:
        raise InvalidArgumentError(
            f"Records must hold exactly one ticker, got {len(tickers)}"
        )
    dates = [str(value) for value in records["date"]]
    if any(later <= earlier for earlier, later in zip(dates, dates[1:])):
        raise InvalidArgumentError("Record dates must be strictly increasing.")
    if "degenerate" in records.columns:
        run = longest_true_run(records["degenerate"].astype(bool))
        if run > spec.max_degenerate_run:
            raise InvalidArgumentError(
                f"{tickers[0]} has {run} consecutive degenerate days "
                f"(limit {spec.max_degenerate_run})"
            )
    regular = as_finite_array(records["r"].to_numpy(), "r")
    adjusted = as_finite_array(records["r_liq"].to_numpy(), "r_liq")
    return str(tickers[0]), dates, regular, adjusted


def _fixed_orders(regular: ndarray, adjusted: ndarray, spec: WindowSpec) -> Orders:
    """Orders selected on the first window of each path; (0, 0) when
    selection fails.
    """
    orders = []
    for series in (regular, adjusted):
        try:
            orders.append(
                select_arma(
                    series[: spec.window_len], spec.p_max, spec.q_max, spec.include_mean
                )
            )
        except LiqarchError as error:
            LOGGER.warning("order selection on the first window failed: %s", error)
            orders.append((0, 0))
    return orders[0], orders[1]


def fit_windows(
    records: DataFrame, spec: WindowSpec, runner: Optional[WindowRunner] = None
) -> WindowFits:
    """Fits both paths of one ticker on every rolling window.

    Parameters
    ----------
    records:
        Daily records of one ticker sorted by date, with at least the
        columns ticker, date, r and r_liq.
    spec:
        Window settings.
    runner:
        How windows are distributed; SerialWindowRunner by default.
    """
    ticker, dates, regular, adjusted = _prepare(records, spec)
    windows = rolling_windows(len(dates), spec.window_len)
    orders: Orders = (None, None)
    if not spec.reselect_orders:
        orders = _fixed_orders(regular, adjusted, spec)
    runner = runner if runner is not None else SerialWindowRunner()
    LOGGER.info("%s: fitting %d windows with %s", ticker, len(windows), type(runner).__name__)
    fits = runner.fit_windows(regular, adjusted, windows, spec, orders)
    failed = sum(not (reg.converged and liq.converged) for reg, liq in fits)
    if failed:
        LOGGER.info("%s: %d of %d windows did not converge on both paths", ticker, failed, len(fits))
    return WindowFits(
        ticker=ticker,
        window_end=[dates[end - 1] for _, end in windows],
        target=[dates[end] for _, end in windows],
        regular=[regular_fit for regular_fit, _ in fits],
        adjusted=[adjusted_fit for _, adjusted_fit in fits],
    )


def run_model_comparison(
    records: DataFrame, spec: WindowSpec, runner: Optional[WindowRunner] = None
) -> ComparisonPanel:
    return fit_windows(records, spec, runner).comparison_panel()


def forecast_series(
    records: DataFrame, spec: WindowSpec, runner: Optional[WindowRunner] = None
) -> ForecastSeries:
    return fit_windows(records, spec, runner).forecast_series()


def window_fits_frame(fits: Iterable[WindowFits]) -> DataFrame:
    frames = [item.to_frame() for item in fits]
    if not frames:
        return DataFrame(columns=WINDOW_FIT_COLUMNS)
    return concat(frames, ignore_index=True)


def forecasts_frame(series: Iterable[ForecastSeries]) -> DataFrame:
    """Rows ticker, date, mu_hat_reg, mu_hat_liq."""
    rows = [
        {"ticker": item.ticker, "date": day, "mu_hat_reg": reg, "mu_hat_liq": liq}
        for item in series
        for day, reg, liq in zip(item.dates, item.mu_hat_reg, item.mu_hat_liq)
    ]
    return DataFrame(rows, columns=["ticker", "date", "mu_hat_reg", "mu_hat_liq"])


def forecast_series_from_frame(frame: DataFrame) -> Dict[str, ForecastSeries]:
    """Inverse of forecasts_frame, keyed by ticker."""
    return {
        str(ticker): ForecastSeries(
            ticker=str(ticker),
            dates=[str(value) for value in group["date"]],
            mu_hat_reg=group["mu_hat_reg"].to_numpy(dtype=float64),
            mu_hat_liq=group["mu_hat_liq"].to_numpy(dtype=float64),
        )
        for ticker, group in frame.groupby("ticker", sort=True)
    }


def comparison_panels(frame: DataFrame) -> Dict[str, ComparisonPanel]:
    """Rebuilds ComparisonPanels from window_fits_frame output."""
    panels = {}
    for ticker, group in frame.groupby("ticker", sort=True):
        paths = {path: group[group["path"] == path] for path in PATHS}
        regular, adjusted = paths["reg"], paths["liq"]
        if list(regular["window_end"]) != list(adjusted["window_end"]):
            raise InvalidArgumentError(f"{ticker}: regular and adjusted windows differ")
        panels[str(ticker)] = ComparisonPanel(
            ticker=str(ticker),
            window_end=[str(value) for value in regular["window_end"]],
            loglik_reg=regular["loglik"].to_numpy(dtype=float64),
            loglik_liq=adjusted["loglik"].to_numpy(dtype=float64),
            a_reg=regular["alpha"].to_numpy(dtype=float64),
            a_liq=adjusted["alpha"].to_numpy(dtype=float64),
            b_reg=regular["beta"].to_numpy(dtype=float64),
            b_liq=adjusted["beta"].to_numpy(dtype=float64),
            converged_reg=_as_bool(regular["converged"]),
            converged_liq=_as_bool(adjusted["converged"]),
        )
    return panels


def _as_bool(column) -> ndarray:
    return array([str(value) == "True" for value in column], dtype=bool_)
