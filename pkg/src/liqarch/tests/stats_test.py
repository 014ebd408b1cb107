"""Tests for liqarch.stats."""

from numpy import arange, array, cumsum, full
from numpy.random import default_rng
from pandas import DataFrame
from pytest import approx, mark, raises

from liqarch.backtest import ComparisonPanel
from liqarch.exceptions import (
    NonFiniteError,
    TooFewGroupsError,
    TooShortError,
    ZeroVarianceError,
)
from liqarch.stats import (
    ADF_CRITICAL_VALUES,
    TTEST_COLUMNS,
    Direction,
    Significance,
    adf_frame,
    adf_test,
    anova_frame,
    anova_oneway,
    compare_panel,
    t_test_two_sample,
    ttests_frame,
)


def unit_sample(center, n=100):
    """n values with mean center and sample sd exactly 1."""
    values = default_rng(n).standard_normal(n)
    values = (values - values.mean()) / values.std(ddof=1)
    return values + center


class TestTTest:
    def test_identical_samples(self):
        sample = default_rng(0).standard_normal(50)
        result = t_test_two_sample(sample, sample)
        assert result.statistic == 0.0
        assert result.p_two_sided == approx(1.0)
        assert result.direction is Direction.NO_CHANGE
        assert result.significance is Significance.NONE

    def test_closed_form_statistic(self):
        result = t_test_two_sample(unit_sample(1.0), unit_sample(0.0))
        assert result.statistic == approx(7.0711, abs=1e-4)
        assert result.dof == 198
        assert result.significance is Significance.ONE_PERCENT
        assert result.direction is Direction.DOWN
        assert result.p_greater < result.p_less

    def test_adjusted_larger_is_up(self):
        result = t_test_two_sample(unit_sample(0.0), unit_sample(0.5))
        assert result.direction is Direction.UP
        assert result.p_less < 0.01

    def test_dof(self):
        rng = default_rng(1)
        result = t_test_two_sample(rng.standard_normal(2410), rng.standard_normal(2410))
        assert result.dof == 4818

    def test_one_sided_p_values_sum_to_one(self):
        rng = default_rng(2)
        result = t_test_two_sample(rng.standard_normal(30), rng.standard_normal(40) + 0.1)
        assert result.p_less + result.p_greater == approx(1.0)
        assert result.p_two_sided == approx(2 * min(result.p_less, result.p_greater))

    @mark.parametrize(
        "p_shift, expected",
        [(0.25, Significance.TEN_PERCENT), (0.3, Significance.FIVE_PERCENT)],
    )
    def test_star_levels(self, p_shift, expected):
        result = t_test_two_sample(unit_sample(0.0), unit_sample(p_shift))
        levels = {Significance.TEN_PERCENT: (0.05, 0.10), Significance.FIVE_PERCENT: (0.01, 0.05)}
        low, high = levels[expected]
        assert low <= result.p_two_sided < high
        assert result.significance is expected

    def test_constant_equal_samples(self):
        result = t_test_two_sample([1.0, 1.0, 1.0], [1.0, 1.0])
        assert result.statistic == 0.0
        assert result.direction is Direction.NO_CHANGE

    @mark.parametrize(
        "x, y, error",
        [
            ([1.0], [1.0, 2.0], TooShortError),
            ([1.0, 1.0], [2.0, 2.0], ZeroVarianceError),
            ([1.0, float("inf")], [2.0, 2.0], NonFiniteError),
        ],
    )
    def test_errors(self, x, y, error):
        with raises(error):
            t_test_two_sample(x, y)


class TestAdf:
    def test_power_on_white_noise(self):
        rejections = sum(
            adf_test(default_rng(seed).standard_normal(500)).reject_5pct for seed in range(100)
        )
        assert rejections >= 95

    def test_size_on_random_walk(self):
        rejections = sum(
            adf_test(cumsum(default_rng(seed).standard_normal(500))).reject_5pct
            for seed in range(100)
        )
        assert 2 <= rejections <= 8

    def test_lag_bounds(self):
        series = default_rng(3).standard_normal(100)
        result = adf_test(series)
        assert 0 <= result.lag_used <= 12
        assert adf_test(series, max_lag=0).lag_used == 0
        assert result.critical_values == ADF_CRITICAL_VALUES

    @mark.parametrize(
        "series, error",
        [
            (arange(100, dtype=float), ZeroVarianceError),
            (full(60, 2.0), ZeroVarianceError),
            (default_rng(4).standard_normal(24), TooShortError),
        ],
    )
    def test_errors(self, series, error):
        with raises(error):
            adf_test(series)


class TestAnova:
    def test_identical_groups(self):
        group = [1.0, 2.0, 3.0, 4.0]
        assert anova_oneway([group, group]).statistic == approx(0.0, abs=1e-12)

    def test_two_groups_match_squared_t(self):
        rng = default_rng(5)
        x, y = rng.standard_normal(40), rng.standard_normal(55) + 0.3
        result = anova_oneway([x, y])
        t = t_test_two_sample(x, y).statistic
        assert abs(result.statistic - t**2) < 1e-9
        assert (result.dof_between, result.dof_within) == (1, 93)

    def test_shifted_group(self):
        rng = default_rng(6)
        groups = [rng.standard_normal(200), rng.standard_normal(200), rng.standard_normal(200) + 1]
        assert anova_oneway(groups).p_value < 0.01

    @mark.parametrize(
        "groups, error",
        [
            ([[1.0, 2.0]], TooFewGroupsError),
            ([[1.0, 2.0], [3.0]], TooFewGroupsError),
            ([[1.0, 1.0], [2.0, 2.0]], ZeroVarianceError),
        ],
    )
    def test_errors(self, groups, error):
        with raises(error):
            anova_oneway(groups)

    def test_anova_frame(self):
        rng = default_rng(7)
        records = DataFrame(
            {
                "ticker": ["A"] * 30 + ["B"] * 30,
                "beta_jump": rng.uniform(0.5, 2.0, 60),
                "beta_diff": rng.uniform(0.5, 2.0, 60),
            }
        )
        frame = anova_frame(records)
        assert frame["measure"].tolist() == ["beta_jump", "beta_diff"]
        assert (frame["dof_between"] == 1).all() and (frame["dof_within"] == 58).all()

    def test_anova_frame_single_ticker(self):
        records = DataFrame({"ticker": ["A"] * 3, "beta_jump": [1.0, 2.0, 3.0], "beta_diff": [1.0] * 3})
        assert anova_frame(records).empty


def make_panel(a_liq_shift):
    rng = default_rng(8)
    n = 300
    a_reg = rng.uniform(0.0, 0.2, n)
    return ComparisonPanel(
        ticker="SYN00",
        window_end=[str(index) for index in range(n)],
        loglik_reg=rng.normal(100.0, 5.0, n),
        loglik_liq=rng.normal(100.0, 5.0, n),
        a_reg=a_reg,
        a_liq=a_reg + a_liq_shift,
        b_reg=rng.uniform(0.7, 0.9, n),
        b_liq=rng.uniform(0.7, 0.9, n),
        converged_reg=array([True] * n),
        converged_liq=array([True] * (n - 1) + [False]),
    )


class TestComparePanel:
    def test_compare_panel(self):
        results = compare_panel(make_panel(0.05))
        assert set(results) == {"loglik", "a", "b"}
        assert results["a"].direction is Direction.UP
        assert results["a"].dof == 2 * 299 - 2

    def test_ttests_frame(self):
        frame = ttests_frame({"SYN00": compare_panel(make_panel(-0.05))})
        assert list(frame.columns) == TTEST_COLUMNS
        row = frame[frame["panel"] == "a"].iloc[0]
        assert row["direction"] == "↓"
        assert row["sig"] == "***"
        assert row["interpretation"] == "liquidity adjustment reduces the shock coefficient"


def test_adf_frame():
    series = default_rng(9).standard_normal(200)
    frame = adf_frame({("A", "r"): adf_test(series), ("A", "r_liq"): adf_test(series)})
    assert frame["series"].tolist() == ["r", "r_liq"]
    assert frame["cv_5pct"].tolist() == [-2.86, -2.86]
    assert frame["reject_5pct"].all()
