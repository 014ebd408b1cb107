"""Module for the hypothesis tests used to compare regular and
liquidity-adjusted models.

Classes
-------
Significance
    Star marks for the 10%, 5% and 1% levels.
Direction
    Sign of a significant difference (adjusted relative to regular).
TestResult
    Outcome of a pooled two-sample t-test.
AdfResult
    Outcome of an augmented Dickey-Fuller test.
AnovaResult
    Outcome of a one-way ANOVA.

Functions
---------
t_test_two_sample
adf_test
anova_oneway
compare_panel
ttests_frame
adf_frame
anova_frame
"""

from dataclasses import dataclass
from enum import Enum
from math import floor, isfinite
from typing import Dict, Iterable, Mapping, Optional, Sequence, Tuple

from numpy import diff, errstate, float64, ptp
from numpy.linalg import LinAlgError
from pandas import DataFrame
from scipy.stats import f_oneway, ttest_ind  # type: ignore[import]
from statsmodels.tsa.stattools import adfuller  # type: ignore[import]

from liqarch.backtest import ComparisonPanel
from liqarch.exceptions import (
    TooFewGroupsError,
    TooShortError,
    ZeroVarianceError,
)
from liqarch.log import LOGGER
from liqarch.utilities import as_finite_array

ADF_CRITICAL_VALUES = (-3.43, -2.86, -2.57)
MIN_ADF_OBSERVATIONS = 25
PANEL_MEASURES = ("loglik", "a", "b")


class Significance(Enum):
    NONE = ""
    TEN_PERCENT = "*"
    FIVE_PERCENT = "**"
    ONE_PERCENT = "***"


SIGNIFICANCE_LEVELS = (
    (0.01, Significance.ONE_PERCENT),
    (0.05, Significance.FIVE_PERCENT),
    (0.10, Significance.TEN_PERCENT),
)


class Direction(Enum):
    UP = "↑"
    DOWN = "↓"
    NO_CHANGE = "↔"


INTERPRETATIONS = {
    "loglik": {
        Direction.UP: "liquidity adjustment improves model fit",
        Direction.DOWN: "liquidity adjustment does not improve model fit",
        Direction.NO_CHANGE: "no statistically significant impact on model fit",
    },
    "a": {
        Direction.UP: "liquidity adjustment increases the shock coefficient",
        Direction.DOWN: "liquidity adjustment reduces the shock coefficient",
        Direction.NO_CHANGE: "no statistically significant impact on the shock coefficient",
    },
    "b": {
        Direction.UP: "liquidity adjustment increases the volatility coefficient",
        Direction.DOWN: "liquidity adjustment reduces the volatility coefficient",
        Direction.NO_CHANGE: "no statistically significant impact on the volatility coefficient",
    },
}


def _significance(p_value: float) -> Significance:
    for level, mark in SIGNIFICANCE_LEVELS:
        if p_value < level:
            return mark
    return Significance.NONE


@dataclass(frozen=True)
class TestResult:
    """Pooled two-sample t-test of x (regular) against y (adjusted).

    direction is UP when y is significantly larger than x, DOWN when it
    is significantly smaller. Significance is judged on the two-sided
    p-value; the one-sided p-values decide the direction.
    """

    __test__ = False

    statistic: float
    dof: int
    p_two_sided: float
    p_less: float
    p_greater: float
    significance: Significance
    direction: Direction


def t_test_two_sample(x: Iterable[float], y: Iterable[float]) -> TestResult:
    """Student t-test with pooled variance and nx + ny - 2 degrees of
    freedom.

    Raises
    ------
    TooShortError
        When a sample has fewer than two values.
    ZeroVarianceError
        When both samples are constant with different means.
    """
    x = as_finite_array(x, "x")
    y = as_finite_array(y, "y")
    if len(x) < 2 or len(y) < 2:
        raise TooShortError("Each sample needs at least two values.")
    dof = len(x) + len(y) - 2
    if x.var() == 0 and y.var() == 0:
        if x.mean() != y.mean():
            raise ZeroVarianceError("Both samples are constant but differ.")
        statistic, p_two_sided, p_less, p_greater = 0.0, 1.0, 0.5, 0.5
    else:
        statistic, p_two_sided = ttest_ind(x, y, equal_var=True)
        p_less = ttest_ind(x, y, equal_var=True, alternative="less").pvalue
        p_greater = ttest_ind(x, y, equal_var=True, alternative="greater").pvalue

    significance = _significance(float(p_two_sided))
    direction = Direction.NO_CHANGE
    if significance is not Significance.NONE:
        direction = Direction.UP if p_less < p_greater else Direction.DOWN
    return TestResult(
        statistic=float(statistic),
        dof=dof,
        p_two_sided=float(p_two_sided),
        p_less=float(p_less),
        p_greater=float(p_greater),
        significance=significance,
        direction=direction,
    )


@dataclass(frozen=True)
class AdfResult:
    statistic: float
    lag_used: int
    reject_5pct: bool
    critical_values: Tuple[float, float, float] = ADF_CRITICAL_VALUES


def adf_test(series: Iterable[float], max_lag: Optional[int] = None) -> AdfResult:
    """Augmented Dickey-Fuller test with a constant and no trend.

    The lag is chosen by AIC over 0..max_lag; max_lag defaults to
    floor(12 (n / 100)^(1/4)). The statistic is compared with the
    asymptotic 5% critical value -2.86 rather than MacKinnon's
    finite-sample values.

    Raises
    ------
    TooShortError
        For fewer than 25 observations.
    ZeroVarianceError
        When the series or its differences are constant, or the
        regression fits exactly.
    """
    levels = as_finite_array(series, "series")
    n = len(levels)
    if n < MIN_ADF_OBSERVATIONS:
        raise TooShortError(
            f"ADF needs at least {MIN_ADF_OBSERVATIONS} observations, got {n}"
        )
    if ptp(diff(levels)) == 0:
        raise ZeroVarianceError("ADF regression has zero residual variance.")
    if max_lag is None:
        max_lag = floor(12.0 * (n / 100.0) ** 0.25)
    max_lag = max(0, min(int(max_lag), n // 2 - 3))

    try:
        with errstate(divide="ignore", invalid="ignore"):
            statistic, _, lag, *_ = adfuller(
                levels,
                maxlag=max_lag,
                regression="c",
                autolag="AIC" if max_lag > 0 else None,
            )
    except (LinAlgError, ValueError) as error:
        raise ZeroVarianceError(f"ADF regression failed: {error}") from error
    if not isfinite(statistic):
        raise ZeroVarianceError("ADF regression fits exactly.")
    LOGGER.debug("ADF statistic %.4f with %d lags", statistic, lag)
    return AdfResult(
        statistic=float(statistic),
        lag_used=int(lag),
        reject_5pct=statistic < ADF_CRITICAL_VALUES[1],
    )


@dataclass(frozen=True)
class AnovaResult:
    statistic: float
    dof_between: int
    dof_within: int
    p_value: float


def anova_oneway(groups: Sequence[Iterable[float]]) -> AnovaResult:
    """One-way ANOVA F test of equal group means.

    Raises
    ------
    TooFewGroupsError
        With fewer than two groups or a group of fewer than two values.
    ZeroVarianceError
        When every group is constant but the means differ.
    """
    groups = [as_finite_array(group, "group") for group in groups]
    if len(groups) < 2:
        raise TooFewGroupsError("ANOVA needs at least two groups.")
    if any(len(group) < 2 for group in groups):
        raise TooFewGroupsError("Every group needs at least two values.")
    dof_between = len(groups) - 1
    dof_within = sum(len(group) for group in groups) - len(groups)
    if all(group.var() == 0 for group in groups):
        if len({float(group[0]) for group in groups}) > 1:
            raise ZeroVarianceError("All groups are constant but their means differ.")
        return AnovaResult(0.0, dof_between, dof_within, 1.0)
    statistic, p_value = f_oneway(*groups)
    return AnovaResult(
        statistic=float(statistic),
        dof_between=dof_between,
        dof_within=dof_within,
        p_value=float(p_value),
    )


def compare_panel(panel: ComparisonPanel) -> Dict[str, TestResult]:
    """t-tests of loglik, a and b over windows where both paths converged."""
    results = {}
    for measure in PANEL_MEASURES:
        regular, adjusted = panel.paired(measure)
        results[measure] = t_test_two_sample(regular, adjusted)
    return results


TTEST_COLUMNS = [
    "ticker",
    "panel",
    "T",
    "dof",
    "p_two_sided",
    "p_less",
    "p_greater",
    "sig",
    "direction",
    "interpretation",
]


def ttests_frame(results: Mapping[str, Mapping[str, TestResult]]) -> DataFrame:
    rows = []
    for ticker, tests in results.items():
        for measure, result in tests.items():
            rows.append(
                {
                    "ticker": ticker,
                    "panel": measure,
                    "T": result.statistic,
                    "dof": result.dof,
                    "p_two_sided": result.p_two_sided,
                    "p_less": result.p_less,
                    "p_greater": result.p_greater,
                    "sig": result.significance.value,
                    "direction": result.direction.value,
                    "interpretation": INTERPRETATIONS[measure][result.direction],
                }
            )
    return DataFrame(rows, columns=TTEST_COLUMNS)


def adf_frame(results: Mapping[Tuple[str, str], AdfResult]) -> DataFrame:
    """Rows ticker, series, statistic, lag_used, critical values, reject_5pct."""
    rows = [
        {
            "ticker": ticker,
            "series": series,
            "statistic": result.statistic,
            "lag_used": result.lag_used,
            "cv_1pct": result.critical_values[0],
            "cv_5pct": result.critical_values[1],
            "cv_10pct": result.critical_values[2],
            "reject_5pct": result.reject_5pct,
        }
        for (ticker, series), result in results.items()
    ]
    return DataFrame(
        rows,
        columns=[
            "ticker",
            "series",
            "statistic",
            "lag_used",
            "cv_1pct",
            "cv_5pct",
            "cv_10pct",
            "reject_5pct",
        ],
    )


def anova_frame(records: DataFrame, measures: Sequence[str] = ("beta_jump", "beta_diff")) -> DataFrame:
    """ANOVA of each beta measure across tickers."""
    rows = []
    for measure in measures:
        groups = [
            group[measure].to_numpy(dtype=float64)
            for _, group in records.groupby("ticker", sort=True)
        ]
        if len(groups) < 2:
            LOGGER.warning("ANOVA of %s skipped: fewer than two tickers", measure)
            continue
        result = anova_oneway(groups)
        rows.append(
            {
                "measure": measure,
                "F": result.statistic,
                "dof_between": result.dof_between,
                "dof_within": result.dof_within,
                "p_value": result.p_value,
            }
        )
    return DataFrame(rows, columns=["measure", "F", "dof_between", "dof_within", "p_value"])
