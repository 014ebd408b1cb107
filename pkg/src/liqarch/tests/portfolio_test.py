"""Tests for liqarch.portfolio."""

from math import sqrt

from numpy import array, full, linspace, ones, resize, zeros
from numpy.random import default_rng
from pandas import DataFrame, date_range
from pytest import approx, fixture, mark, raises
from scipy.signal import lfilter  # type: ignore[import]

from liqarch.backtest import ForecastSeries
from liqarch.exceptions import (
    DegenerateVolatilityError,
    DomainError,
    InvalidArgumentError,
    MisalignmentError,
    TooShortError,
    ZeroVarianceError,
)
from liqarch.portfolio import (
    DAILY_COLUMNS,
    SUMMARY_COLUMNS,
    PortfolioSpec,
    RiskAversion,
    market_lambda,
    market_returns,
    mv_weights,
    realized_portfolio_returns,
    run_tmv_lamv,
    sharpe_annualized,
)
from liqarch.stats import Direction
from liqarch.synth import rolling_arma_mean


def exact_moments(mean, sd, n):
    """n values with the given mean and sample standard deviation."""
    signs = resize(array([1.0, -1.0]), n)
    return mean + sd * sqrt((n - 1) / n) * signs


def make_records(regular, adjusted=None, ticker="AAA"):
    n = len(regular)
    return DataFrame(
        {
            "ticker": [ticker] * n,
            "date": list(date_range("2021-01-04", periods=n, freq="D").strftime("%Y-%m-%d")),
            "r": regular,
            "r_liq": regular if adjusted is None else adjusted,
        }
    )


def forecasts_for(records, window, mu_reg, mu_liq=None):
    dates = list(records["date"])[window:]
    return ForecastSeries(
        ticker=str(records["ticker"].iloc[0]),
        dates=dates,
        mu_hat_reg=array(mu_reg, dtype=float),
        mu_hat_liq=array(mu_reg if mu_liq is None else mu_liq, dtype=float),
    )


class TestMarketLambda:
    def test_direct_division(self):
        assert market_lambda(exact_moments(0.0008, 0.01, 40)).value == approx(8.0)

    def test_negative_mean_is_floored(self):
        window = exact_moments(-0.001, 0.01, 40)
        assert market_lambda(window, lambda_floor=1e-3).value == 1e-3

    @mark.parametrize(
        "window, error",
        [(full(40, 0.25), ZeroVarianceError), (exact_moments(0.001, 0.01, 29), TooShortError)],
    )
    def test_errors(self, window, error):
        with raises(error):
            market_lambda(window)

    def test_market_returns_average_tickers_per_date(self):
        records = DataFrame(
            {
                "ticker": ["A", "B", "A", "B"],
                "date": ["2021-01-04", "2021-01-04", "2021-01-05", "2021-01-05"],
                "r": [0.01, 0.03, -0.02, 0.0],
            }
        )
        market = market_returns(records)
        assert list(market.index) == ["2021-01-04", "2021-01-05"]
        assert market.tolist() == approx([0.02, -0.01])


MV_WEIGHT_TEST_CASES = [
    {"description": "interior optimum", "mu_hat": 0.001, "sigma2": 0.0004, "lam": 5.0, "expected": 0.5},
    {"description": "clamped at one", "mu_hat": 0.002, "sigma2": 0.0004, "lam": 4.0, "expected": 1.0},
    {"description": "negative forecast", "mu_hat": -0.001, "sigma2": 0.0004, "lam": 4.0, "expected": 0.0},
    {"description": "zero forecast", "mu_hat": 0.0, "sigma2": 0.0004, "lam": 4.0, "expected": 0.0},
]


@mark.parametrize("test_case", MV_WEIGHT_TEST_CASES)
def test_mv_weights(test_case):
    weights = mv_weights(test_case["mu_hat"], test_case["sigma2"], RiskAversion(test_case["lam"]))
    assert weights.w_asset == approx(test_case["expected"])
    assert weights.w_asset + weights.w_rf == 1.0


@mark.parametrize("sigma2", [0.0, -1e-4])
def test_mv_weights_domain(sigma2):
    with raises(DomainError):
        mv_weights(0.001, sigma2, RiskAversion(1.0))


def test_mv_weights_beat_grid():
    rng = default_rng(4)
    grid = linspace(0.0, 1.0, 1001)
    for mu_hat, sigma2, lam in zip(
        rng.uniform(-0.01, 0.01, 10000),
        rng.uniform(1e-5, 1e-3, 10000),
        rng.uniform(0.1, 50.0, 10000),
    ):
        w = mv_weights(mu_hat, sigma2, RiskAversion(lam)).w_asset
        optimum = w * mu_hat - 0.5 * lam * w**2 * sigma2
        assert (grid * mu_hat - 0.5 * lam * grid**2 * sigma2).max() <= optimum + 1e-15


@mark.parametrize("value", [0.0, -2.0])
def test_risk_aversion_must_be_positive(value):
    with raises(DomainError):
        RiskAversion(value)


class TestRealizedReturns:
    def test_weights(self):
        asset = array([0.01, -0.02, 0.03])
        assert (realized_portfolio_returns(zeros(3), asset) == 0).all()
        assert realized_portfolio_returns(ones(3), asset).tolist() == asset.tolist()
        assert realized_portfolio_returns([0.5], [0.02]).tolist() == approx([0.01])

    @mark.parametrize(
        "weights, returns, error",
        [([0.5, 0.5], [0.01], MisalignmentError), ([1.5], [0.01], InvalidArgumentError)],
    )
    def test_errors(self, weights, returns, error):
        with raises(error):
            realized_portfolio_returns(weights, returns)


class TestSharpe:
    def test_closed_form(self):
        returns = exact_moments(0.001, 0.02, 252)
        assert sharpe_annualized(returns, 252) == approx(0.7937, abs=1e-4)

    @mark.parametrize("scale", [0.1, 3.0])
    def test_scale_invariance(self, scale):
        returns = default_rng(0).normal(0.001, 0.02, 100)
        assert sharpe_annualized(scale * returns, 365) == approx(sharpe_annualized(returns, 365))

    @mark.parametrize(
        "returns, error",
        [(full(40, 0.125), DegenerateVolatilityError), (exact_moments(0.0, 0.01, 29), TooShortError)],
    )
    def test_errors(self, returns, error):
        with raises(error):
            sharpe_annualized(returns, 252)


@fixture
def random_records():
    rng = default_rng(1)
    return make_records(rng.normal(0.0005, 0.01, 160))


class TestRunTmvLamv:
    def test_identical_paths_tie(self, random_records):
        mu = default_rng(2).uniform(-0.001, 0.002, 100)
        spec = PortfolioSpec(window_len=60, annualization_days=365)
        comparison = run_tmv_lamv(
            forecasts_for(random_records, 60, mu), random_records, market_returns(random_records), spec
        )
        assert comparison.tmv.sharpe == comparison.lamv.sharpe
        assert comparison.direction is Direction.NO_CHANGE
        for series in (comparison.tmv, comparison.lamv):
            assert ((series.weights >= 0) & (series.weights <= 1)).all()
            assert len(series.returns) == 100

    def test_weights_use_past_days_only(self, random_records):
        mu = full(100, 0.001)
        spec = PortfolioSpec(window_len=60, annualization_days=365)
        market = market_returns(random_records)
        base = run_tmv_lamv(forecasts_for(random_records, 60, mu), random_records, market, spec)
        changed = random_records.copy()
        changed.loc[100:, "r"] = changed.loc[100:, "r"] * 5.0
        changed.loc[100:, "r_liq"] = changed.loc[100:, "r"]
        after = run_tmv_lamv(
            forecasts_for(changed, 60, mu), changed, market_returns(changed), spec
        )
        assert base.tmv.weights[:41].tolist() == after.tmv.weights[:41].tolist()

    def test_frames(self, random_records):
        mu = default_rng(3).uniform(0.0, 0.002, 100)
        spec = PortfolioSpec(window_len=60, annualization_days=252, lambda_window=40)
        comparison = run_tmv_lamv(
            forecasts_for(random_records, 60, mu, mu / 2),
            random_records,
            market_returns(random_records),
            spec,
        )
        summary, daily = comparison.to_frames()
        assert list(summary.columns) == SUMMARY_COLUMNS
        assert summary["portfolio"].tolist() == ["TMV", "LAMV"]
        assert list(daily.columns) == DAILY_COLUMNS
        assert len(daily) == 200
        last = daily[daily["portfolio"] == "TMV"].iloc[-1]
        assert last["cumulative_return"] == approx(comparison.tmv.cumulative[-1])

    @mark.parametrize(
        "forecasts",
        [
            ForecastSeries("AAA", ["2021-02-13"], zeros(1), zeros(1)),
            ForecastSeries("AAA", ["2030-01-01"], zeros(1), zeros(1)),
        ],
    )
    def test_misalignment(self, random_records, forecasts):
        with raises(MisalignmentError):
            run_tmv_lamv(
                forecasts,
                random_records,
                market_returns(random_records),
                PortfolioSpec(window_len=60, annualization_days=365),
            )

    def test_spec_validation(self):
        with raises(InvalidArgumentError):
            PortfolioSpec(window_len=60, annualization_days=365, lambda_floor=0.0)


def test_adjusted_forecasts_improve_sharpe_on_jumpy_asset():
    rng = default_rng(20240101)
    n, window = 1200, 60
    diffusion = lfilter([1.0], [1.0, -0.5], rng.normal(0.0, 0.01, n))
    jumps = (rng.random(n) < 0.3) * rng.normal(0.0, 0.021, n)
    records = make_records(diffusion + jumps, diffusion)
    forecasts = forecasts_for(
        records,
        window,
        rolling_arma_mean(records["r"].to_numpy(), window)[window:],
        rolling_arma_mean(records["r_liq"].to_numpy(), window)[window:],
    )
    comparison = run_tmv_lamv(
        forecasts,
        records,
        market_returns(records),
        PortfolioSpec(window_len=window, annualization_days=365),
    )
    assert comparison.lamv.sharpe >= comparison.tmv.sharpe
    assert comparison.direction is Direction.UP
