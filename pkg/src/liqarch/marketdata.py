"""Module for ingesting minute bars and grouping them into trading days.

Classes
-------
VenueKind
    The two supported market types.
Venue
    Session length and annualization convention of a market type.
MinuteBar
    One validated minute observation.
TradingDay
    All bars of one ticker on one session date.
DayStatus
    Outcome of validating a TradingDay.

Functions
---------
make_venue
    Creates the Venue for a market type.
parse_minute_csv
    Reads minute bars from a CSV stream.
bars_from_volume
    Derives the amount column from share volume and close.
write_minute_csv
    Writes minute bars back to CSV.
iter_bars
    Iterates over the rows of a bar frame as MinuteBar.
partition_days
    Groups a bar frame into TradingDays.
flatten_days
    Concatenates TradingDays back into a bar frame.
minute_returns
    Simple minute returns of a TradingDay.
return_amounts
    Amounts aligned with minute_returns.
validate_day
    Checks a TradingDay against the minimum-minutes and uniqueness rules.
day_status_frame
    Tabulates DayStatus over many days.
"""

from dataclasses import dataclass
from datetime import date as Date
from enum import Enum
from typing import IO, Iterator, List, NamedTuple, Optional, Sequence, Union

from numpy import any as np_any, concatenate, diff, float64, inf, isnan, ndarray
from pandas import (
    DataFrame,
    DatetimeIndex,
    MultiIndex,
    Series,
    Timestamp,
    concat,
    read_csv,
    to_datetime,
    to_numeric,
)

from liqarch.exceptions import (
    BadTimestampError,
    InvalidArgumentError,
    MissingColumnError,
    NegativeAmountError,
    NonPositivePriceError,
    TooFewBarsError,
    UnsortedInputError,
)
from liqarch.log import LOGGER

BAR_COLUMNS = ("ticker", "minute_start", "close", "amount")
# decimal text of the parsed prices and amounts, written back unchanged
TEXT_COLUMNS = {"close": "close_text", "amount": "amount_text"}
TIMESTAMP_FORMAT = "%Y-%m-%dT%H:%M:%SZ"
STOCK_TIMEZONE = "America/New_York"
STOCK_OPEN_MINUTE = 9 * 60 + 30
STOCK_CLOSE_MINUTE = 16 * 60
DEFAULT_MIN_MINUTES = 30


class VenueKind(Enum):
    STOCK = "stock"
    CRYPTO = "crypto"


@dataclass(frozen=True)
class Venue:
    kind: VenueKind
    session_minutes: int
    annualization_days: int

    def __post_init__(self) -> None:
        if self.session_minutes not in (390, 1440):
            raise InvalidArgumentError(
                f"session_minutes must be 390 or 1440, got {self.session_minutes}"
            )

    @property
    def timezone(self) -> str:
        """Timezone in which session dates are determined."""
        return STOCK_TIMEZONE if self.kind is VenueKind.STOCK else "UTC"


def make_venue(kind: Union[str, VenueKind]) -> Venue:
    """Creates the Venue for a market type.

    Parameters
    ----------
    kind:
        "stock" (390-minute NYSE session, 252 days per year) or
        "crypto" (1440-minute UTC day, 365 days per year).
    """
    try:
        kind = VenueKind(kind)
    except ValueError as error:
        raise InvalidArgumentError(
            f"Unknown venue '{kind}'. Must be one of: stock, crypto"
        ) from error
    if kind is VenueKind.STOCK:
        return Venue(kind=kind, session_minutes=390, annualization_days=252)
    return Venue(kind=kind, session_minutes=1440, annualization_days=365)


class MinuteBar(NamedTuple):
    ticker: str
    minute_start: Timestamp
    close: float
    amount: float


def _empty_bars() -> DataFrame:
    return DataFrame(
        {
            "ticker": Series([], dtype=object),
            "minute_start": Series([], dtype="datetime64[ns, UTC]"),
            "close": Series([], dtype=float64),
            "amount": Series([], dtype=float64),
            "close_text": Series([], dtype=object),
            "amount_text": Series([], dtype=object),
        }
    )


def _first_line(mask) -> Optional[int]:
    """CSV line number (header is line 1) of the first True row."""
    positions = mask.to_numpy().nonzero()[0]
    if positions.size == 0:
        return None
    return int(positions[0]) + 2


def parse_minute_csv(source: Union[str, IO]) -> DataFrame:
    """Reads minute bars from a UTF-8 CSV.

    Parameters
    ----------
    source:
        Path or (byte or text) stream holding a header row followed by
        rows with at least the columns ticker, minute_start, close,
        amount. minute_start is an ISO-8601 UTC timestamp aligned to a
        whole minute. Extra columns are ignored.

    Returns
    -------
    A pandas.DataFrame with columns ticker, minute_start (UTC), close
    and amount, in file order, plus close_text and amount_text holding
    the decimal text as read.

    Raises
    ------
    MissingColumnError
        When a required column is absent.
    BadTimestampError, NonPositivePriceError, NegativeAmountError
        For the first offending row; the message names its line number.
    """
    frame = read_csv(source, dtype=str, keep_default_na=False, encoding="utf-8")
    missing = [column for column in BAR_COLUMNS if column not in frame.columns]
    if missing:
        raise MissingColumnError(f"Missing required columns: {', '.join(missing)}")
    if frame.empty:
        return _empty_bars()

    minute_start = to_datetime(
        frame["minute_start"].str.strip(), utc=True, errors="coerce", format="ISO8601"
    )
    bad = minute_start.isna() | (minute_start != minute_start.dt.floor("min"))
    line = _first_line(bad)
    if line is not None:
        raise BadTimestampError(
            line, f"bad minute_start '{frame['minute_start'].iloc[line - 2]}'"
        )

    close_text = frame["close"].str.strip()
    close = to_numeric(close_text, errors="coerce")
    line = _first_line(~close.between(0, inf, inclusive="neither"))
    if line is not None:
        raise NonPositivePriceError(
            line, f"close '{frame['close'].iloc[line - 2]}' is not a positive number"
        )

    amount_text = frame["amount"].str.strip()
    amount = to_numeric(amount_text, errors="coerce")
    line = _first_line(~amount.between(0, inf, inclusive="left"))
    if line is not None:
        raise NegativeAmountError(
            line,
            f"amount '{frame['amount'].iloc[line - 2]}' is not a non-negative number",
        )

    bars = DataFrame(
        {
            "ticker": frame["ticker"].str.strip(),
            "minute_start": minute_start,
            "close": close.astype(float64),
            "amount": amount.astype(float64),
            "close_text": close_text,
            "amount_text": amount_text,
        }
    )
    LOGGER.debug("parsed %d minute bars", len(bars))
    return bars


def bars_from_volume(frame: DataFrame) -> DataFrame:
    """Replaces a share-volume column by amount = volume * close.

    Used for sources that only report traded volume.
    """
    if "volume" not in frame.columns:
        raise MissingColumnError("Missing required column: volume")
    volume = to_numeric(frame["volume"], errors="coerce").astype(float64)
    if isnan(volume.to_numpy()).any() or (volume < 0).any():
        raise InvalidArgumentError("volume must be a non-negative number")
    bars = frame.drop(columns=["volume"]).copy()
    bars["amount"] = volume * bars["close"].astype(float64)
    return bars


def write_minute_csv(bars: DataFrame, target: Union[str, IO]) -> int:
    """Writes bars in the parse_minute_csv layout.

    Prices and amounts keep the decimal text they were parsed from;
    other values are written at full precision so that parsing the
    output yields identical floats.

    Returns
    -------
    The number of rows written.
    """
    frame = bars.loc[:, list(BAR_COLUMNS)].copy()
    for column, text_column in TEXT_COLUMNS.items():
        if text_column in bars.columns:
            text = bars[text_column].copy()
            missing = text.isna()
            if missing.any():
                text[missing] = frame.loc[missing, column].map(lambda value: repr(float(value)))
            frame[column] = text
    frame.to_csv(target, index=False, date_format=TIMESTAMP_FORMAT, lineterminator="\n")
    return len(frame)


def iter_bars(bars: DataFrame) -> Iterator[MinuteBar]:
    for row in bars.loc[:, list(BAR_COLUMNS)].itertuples(index=False, name=None):
        yield MinuteBar(*row)


@dataclass(eq=False)
class TradingDay:
    """Bars of one ticker on one session date, in minute order.

    Attributes
    ----------
    ticker:
        Asset identifier.
    date:
        Session date (UTC date for crypto, New York date for stocks).
    minute_start:
        UTC minute timestamps.
    close:
        Close prices, one per minute.
    amount:
        Traded amount in currency units, one per minute.
    prev_close:
        Close of the last bar of the ticker's previous day, if any.
    """

    ticker: str
    date: Date
    minute_start: DatetimeIndex
    close: ndarray
    amount: ndarray
    prev_close: Optional[float] = None

    def __len__(self) -> int:
        return len(self.close)

    @property
    def bars(self) -> List[MinuteBar]:
        return list(iter_bars(self.to_frame()))

    def to_frame(self) -> DataFrame:
        return DataFrame(
            {
                "ticker": [self.ticker] * len(self),
                "minute_start": self.minute_start,
                "close": self.close,
                "amount": self.amount,
            }
        )


def _session_mask(local_minute_start, venue: Venue):
    if venue.kind is VenueKind.CRYPTO:
        return None
    minute_of_day = local_minute_start.dt.hour * 60 + local_minute_start.dt.minute
    return (minute_of_day >= STOCK_OPEN_MINUTE) & (minute_of_day < STOCK_CLOSE_MINUTE)


def partition_days(bars: DataFrame, venue: Venue) -> List[TradingDay]:
    """Groups bars sorted by (ticker, minute_start) into TradingDays.

    Stock bars outside 09:30-16:00 New York time are dropped. Each day
    carries the close of the ticker's previous retained bar as
    prev_close. Duplicate minutes are kept (see validate_day).

    Raises
    ------
    UnsortedInputError
        When bars are not sorted by (ticker, minute_start).
    """
    if bars.empty:
        return []
    keys = MultiIndex.from_arrays([bars["ticker"], bars["minute_start"]])
    if not keys.is_monotonic_increasing:
        raise UnsortedInputError("Bars must be sorted by (ticker, minute_start).")

    local = bars["minute_start"].dt.tz_convert(venue.timezone)
    mask = _session_mask(local, venue)
    if mask is not None:
        dropped = int((~mask).sum())
        if dropped:
            LOGGER.debug("dropped %d bars outside the stock session", dropped)
        bars = bars.loc[mask.to_numpy()]
        local = local.loc[mask.to_numpy()]

    grouped = bars.assign(session_date=local.dt.date).groupby(
        ["ticker", "session_date"], sort=False
    )
    days = []
    previous_ticker, prev_close = None, None
    for (ticker, session_date), group in grouped:
        if ticker != previous_ticker:
            previous_ticker, prev_close = ticker, None
        close = group["close"].to_numpy(dtype=float64)
        days.append(
            TradingDay(
                ticker=ticker,
                date=session_date,
                minute_start=DatetimeIndex(group["minute_start"]),
                close=close,
                amount=group["amount"].to_numpy(dtype=float64),
                prev_close=prev_close,
            )
        )
        prev_close = float(close[-1])
    return days


def flatten_days(days: Sequence[TradingDay]) -> DataFrame:
    """Concatenates days into a bar frame (inverse of partition_days)."""
    if not days:
        return _empty_bars()
    return concat([day.to_frame() for day in days], ignore_index=True)


def minute_returns(day: TradingDay) -> ndarray:
    """Simple minute returns close_t / close_{t-1} - 1.

    The first minute's return uses prev_close when available and is
    omitted otherwise.

    Raises
    ------
    TooFewBarsError
        When fewer than two prices are available.
    """
    prices = day.close
    if day.prev_close is not None:
        prices = concatenate(([day.prev_close], prices))
    if len(prices) < 2:
        raise TooFewBarsError(
            f"{day.ticker} {day.date}: at least two prices are needed for a return"
        )
    return prices[1:] / prices[:-1] - 1.0


def return_amounts(day: TradingDay) -> ndarray:
    """Amounts of the minutes whose returns minute_returns produces."""
    if day.prev_close is not None:
        return day.amount
    return day.amount[1:]


@dataclass(frozen=True)
class DayStatus:
    valid: bool
    effective_minutes: int
    reason: str = ""


def validate_day(day: TradingDay, min_minutes: int = DEFAULT_MIN_MINUTES) -> DayStatus:
    """Checks that a day has unique minutes and enough returns.

    Parameters
    ----------
    day:
        The day to check.
    min_minutes:
        Minimum number of minute returns for the day to be valid.
    """
    effective = max(len(day) - (0 if day.prev_close is not None else 1), 0)
    if np_any(diff(day.minute_start.asi8) == 0):
        return DayStatus(valid=False, effective_minutes=effective, reason="duplicate minute")
    if effective < min_minutes:
        return DayStatus(valid=False, effective_minutes=effective, reason="too few minutes")
    return DayStatus(valid=True, effective_minutes=effective)


def day_status_frame(
    days: Sequence[TradingDay], min_minutes: int = DEFAULT_MIN_MINUTES
) -> DataFrame:
    """One row per day: ticker, date, valid, effective_minutes, reason."""
    rows = []
    for day in days:
        status = validate_day(day, min_minutes)
        rows.append(
            {
                "ticker": day.ticker,
                "date": day.date.isoformat(),
                "valid": status.valid,
                "effective_minutes": status.effective_minutes,
                "reason": status.reason,
            }
        )
        if not status.valid:
            LOGGER.info("%s %s rejected: %s", day.ticker, day.date, status.reason)
    return DataFrame(
        rows, columns=["ticker", "date", "valid", "effective_minutes", "reason"]
    )
