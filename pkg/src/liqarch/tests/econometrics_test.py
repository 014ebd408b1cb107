"""Tests for liqarch.econometrics."""

from collections import Counter
from math import log, pi

from numpy import allclose, array, isnan, zeros
from numpy.random import default_rng
from pytest import approx, mark, raises
from scipy.optimize import approx_fprime  # type: ignore[import]
from scipy.signal import lfilter  # type: ignore[import]

from liqarch.econometrics import (
    STATIONARITY_MARGIN,
    ArmaFit,
    arma_grid,
    arma_residuals,
    best_order,
    fit_arma,
    fit_arma_garch,
    fit_garch11,
    forecast_mean,
    garch_score,
    garch_variance,
    loglik_garch,
    select_arma,
)
from liqarch.exceptions import (
    AllFailedError,
    DegenerateVarianceError,
    DomainError,
    InvalidArgumentError,
    NonFiniteError,
    TooShortError,
)
from liqarch.synth import gen_garch_series


def ar1(phi, n, seed, innovations=None):
    if innovations is None:
        innovations = default_rng(seed).standard_normal(n)
    return lfilter([1.0], [1.0, -phi], innovations)


def arma_fit(p, q, phi=(), theta=(), residuals=(0.0,)):
    return ArmaFit(
        p=p,
        q=q,
        phi=array(phi, dtype=float),
        theta=array(theta, dtype=float),
        residuals=array(residuals, dtype=float),
        aic=0.0,
        loglik=0.0,
        converged=True,
    )


ARMA_RESIDUAL_TEST_CASES = [
    {
        "description": "AR(1)",
        "series": [1.0, 2.0, 3.0],
        "phi": [0.5],
        "theta": [],
        "expected": [1.0, 1.5, 2.0],
    },
    {
        "description": "MA(1)",
        "series": [1.0, 1.0, 1.0],
        "phi": [],
        "theta": [0.5],
        "expected": [1.0, 0.5, 0.75],
    },
    {
        "description": "ARMA(1,1)",
        "series": [1.0, 0.0, 2.0],
        "phi": [0.5],
        "theta": [0.5],
        "expected": [1.0, -1.0, 2.5],
    },
    {
        "description": "null model",
        "series": [0.3, -0.1, 0.2],
        "phi": [],
        "theta": [],
        "expected": [0.3, -0.1, 0.2],
    },
]


@mark.parametrize("test_case", ARMA_RESIDUAL_TEST_CASES)
def test_arma_residuals(test_case):
    residuals = arma_residuals(test_case["series"], test_case["phi"], test_case["theta"])
    assert allclose(residuals, test_case["expected"])


class TestFitArma:
    def test_null_model(self):
        series = default_rng(0).standard_normal(200)
        fit = fit_arma(series, 0, 0)
        assert allclose(fit.residuals, series)
        assert fit.mean == 0.0
        assert fit.converged
        n = len(series)
        loglik = -0.5 * n * (log(2 * pi) + log((series**2).mean()) + 1.0)
        assert fit.loglik == approx(loglik)
        assert fit.aic == approx(2.0 - 2.0 * loglik)

    def test_ar1_recovery(self):
        estimates = [fit_arma(ar1(0.5, 2000, seed), 1, 0).phi[0] for seed in range(20)]
        assert sum(estimates) / len(estimates) == approx(0.5, abs=0.06)

    def test_ma1_recovery(self):
        shocks = default_rng(11).standard_normal(3001)
        series = shocks[1:] + 0.4 * shocks[:-1]
        fit = fit_arma(series, 0, 1)
        assert fit.converged
        assert fit.theta[0] == approx(0.4, abs=0.06)

    def test_include_mean(self):
        series = 3.0 + default_rng(1).standard_normal(500)
        fit = fit_arma(series, 0, 0, include_mean=True)
        assert fit.mean == approx(series.mean())
        assert abs(fit.residuals.mean()) < 1e-12
        assert fit.aic == approx(4.0 - 2.0 * fit.loglik)

    def test_zero_series(self):
        fit = fit_arma(zeros(100), 1, 1)
        assert not fit.converged
        assert isnan(fit.aic)
        assert (fit.phi == 0).all() and (fit.theta == 0).all()
        assert (fit.residuals == 0).all()

    @mark.parametrize(
        "series, p, q, error",
        [
            (zeros(21), 1, 1, TooShortError),
            (zeros(100), 5, 0, InvalidArgumentError),
            (zeros(100), 0, -1, InvalidArgumentError),
            ([0.0] * 50 + [float("nan")], 0, 0, NonFiniteError),
        ],
    )
    def test_errors(self, series, p, q, error):
        with raises(error):
            fit_arma(series, p, q)


class TestSelectArma:
    def test_white_noise_prefers_null_model(self):
        selections = Counter(
            select_arma(default_rng(seed).standard_normal(1000)) for seed in range(20)
        )
        assert selections[(0, 0)] >= 12

    def test_ar1_selects_autoregression(self):
        selections = [select_arma(ar1(0.8, 1000, seed)) for seed in range(20)]
        assert sum(p >= 1 for p, _ in selections) >= 18

    @mark.parametrize("scale", [8.0, 1e-3])
    def test_argmin_invariant_to_scale(self, scale):
        shocks = default_rng(5).standard_normal(601)
        series = ar1(0.6, 600, 5, shocks[1:] + 0.3 * shocks[:-1])
        assert select_arma(series, 2, 2) == select_arma(scale * series, 2, 2)

    def test_grid_skips_orders_too_long_for_series(self):
        grid = arma_grid(default_rng(2).standard_normal(22), 2, 2)
        assert (2, 1) not in grid and (1, 1) in grid

    def test_ties_prefer_parsimony(self):
        def fit(aic, p, q):
            return ArmaFit(p, q, zeros(p), zeros(q), zeros(1), aic, 0.0, True)

        grid = {(0, 1): fit(5.0, 0, 1), (1, 0): fit(5.0, 1, 0), (1, 1): fit(5.0, 1, 1)}
        assert best_order(grid) == (0, 1)
        grid[(0, 0)] = ArmaFit(0, 0, zeros(0), zeros(0), zeros(1), 1.0, 0.0, False)
        assert best_order(grid) == (0, 1)

    def test_all_failed(self):
        with raises(AllFailedError):
            select_arma(zeros(100), 1, 1)


class TestGarch:
    def test_constant_variance_closed_form(self):
        residuals = default_rng(3).standard_normal(100)
        omega = float(residuals.var())
        assert allclose(garch_variance(residuals, omega, 0.0, 0.0), omega)
        expected = -0.5 * (log(2 * pi) + log(omega) + residuals**2 / omega).sum()
        assert loglik_garch(residuals, omega, 0.0, 0.0) == approx(expected)

    def test_variance_recursion(self):
        residuals = array([1.0, -1.0, 2.0])
        variance = garch_variance(residuals, 0.1, 0.2, 0.5)
        s1 = residuals.var()
        s2 = 0.1 + 0.2 * 1.0 + 0.5 * s1
        s3 = 0.1 + 0.2 * 1.0 + 0.5 * s2
        assert allclose(variance, [s1, s2, s3])

    @mark.parametrize(
        "residuals, params",
        [
            ([0.0, 0.0, 0.0], (0.1, 0.1, 0.8)),
            ([1.0, -1.0], (0.0, 0.1, 0.8)),
            ([1.0, -1.0], (0.1, -0.1, 0.8)),
        ],
    )
    def test_loglik_domain(self, residuals, params):
        with raises(DomainError):
            loglik_garch(residuals, *params)

    def test_score_matches_central_differences(self):
        residuals = gen_garch_series(0.05, 0.1, 0.85, 400, seed=4)
        rng = default_rng(10)

        def loglik(params):
            return loglik_garch(residuals, *params)

        for _ in range(10):
            point = array(
                [rng.uniform(0.01, 0.1), rng.uniform(0.02, 0.3), rng.uniform(0.3, 0.65)]
            )
            step = 1e-5 * point
            central = 0.5 * (
                approx_fprime(point, loglik, step) + approx_fprime(point, loglik, -step)
            )
            assert allclose(garch_score(residuals, *point), central, rtol=1e-4, atol=1e-6)

    def test_recovery(self):
        fits = [
            fit_garch11(gen_garch_series(0.05, 0.10, 0.85, 5000, seed=seed))
            for seed in range(20)
        ]
        for seed, fit in enumerate(fits):
            residuals = gen_garch_series(0.05, 0.10, 0.85, 5000, seed=seed)
            start = loglik_garch(residuals, 0.05 * residuals.var(), 0.05, 0.90)
            assert fit.loglik >= start
            assert fit.omega > 0 and fit.alpha >= 0 and fit.beta >= 0
            assert fit.alpha + fit.beta <= 1.0 - STATIONARITY_MARGIN + 1e-12
        assert sum(abs(fit.alpha - 0.10) for fit in fits) / len(fits) <= 0.05
        assert sum(abs(fit.beta - 0.85) for fit in fits) / len(fits) <= 0.05

    def test_iid_residuals_have_small_shock_coefficient(self):
        alphas = [
            fit_garch11(default_rng(seed).standard_normal(1000)).alpha for seed in range(20)
        ]
        assert sum(alpha <= 0.05 for alpha in alphas) >= 11

    def test_fit_is_no_worse_than_start(self):
        residuals = default_rng(6).standard_normal(80)
        fit = fit_garch11(residuals)
        start = loglik_garch(residuals, 0.05 * residuals.var(), 0.05, 0.90)
        assert fit.loglik >= start
        assert fit.loglik == approx(loglik_garch(residuals, fit.omega, fit.alpha, fit.beta))

    def test_scale_equivariance(self):
        residuals = gen_garch_series(0.05, 0.10, 0.85, 1000, seed=7)
        base, scaled = fit_garch11(residuals), fit_garch11(100.0 * residuals)
        assert scaled.alpha == approx(base.alpha, abs=1e-4)
        assert scaled.beta == approx(base.beta, abs=1e-4)
        assert scaled.omega == approx(1e4 * base.omega, rel=1e-3)

    @mark.parametrize(
        "residuals, error",
        [(zeros(60), DegenerateVarianceError), (default_rng(0).standard_normal(49), TooShortError)],
    )
    def test_errors(self, residuals, error):
        with raises(error):
            fit_garch11(residuals)


FORECAST_TEST_CASES = [
    {
        "description": "AR(1)",
        "fit": arma_fit(1, 0, phi=[0.5]),
        "history": [0.01, -0.03, 0.02],
        "expected": 0.01,
    },
    {
        "description": "null model",
        "fit": arma_fit(0, 0),
        "history": [0.5],
        "expected": 0.0,
    },
    {
        "description": "MA(1)",
        "fit": arma_fit(0, 1, theta=[0.3], residuals=[0.2, -0.01]),
        "history": [0.4, 0.1],
        "expected": -0.003,
    },
    {
        "description": "ARMA(2,1)",
        "fit": arma_fit(2, 1, phi=[0.5, 0.25], theta=[0.1], residuals=[0.0, 0.3]),
        "history": [0.4, 0.2],
        "expected": 0.5 * 0.2 + 0.25 * 0.4 + 0.1 * 0.3,
    },
]


@mark.parametrize("test_case", FORECAST_TEST_CASES)
def test_forecast_mean(test_case):
    assert forecast_mean(test_case["fit"], test_case["history"]) == approx(
        test_case["expected"]
    )


def test_forecast_mean_short_history():
    with raises(TooShortError):
        forecast_mean(arma_fit(2, 0, phi=[0.5, 0.1]), [0.1])


class TestFitArmaGarch:
    def test_white_noise(self):
        series = default_rng(8).standard_normal(500)
        fit = fit_arma_garch(series, 1, 1)
        assert abs(fit.mean_forecast) < 0.2
        assert fit.loglik == fit.garch.loglik
        row = fit.summary_row()
        assert list(row)[:2] == ["p", "q"]
        assert isnan(row["phi_4"]) and isnan(row["theta_4"])
        assert {"omega", "alpha", "beta", "loglik", "aic", "mean_forecast", "converged"} <= set(row)

    def test_joint_recovery(self):
        phis, alphas, betas = [], [], []
        for seed in range(20):
            shocks = gen_garch_series(0.05, 0.10, 0.85, 3000, seed=seed)
            fit = fit_arma_garch(ar1(0.5, 3000, seed, shocks), order=(1, 0))
            phis.append(fit.arma.phi[0])
            alphas.append(fit.garch.alpha)
            betas.append(fit.garch.beta)
        assert sum(phis) / 20 == approx(0.5, abs=0.06)
        assert sum(alphas) / 20 == approx(0.10, abs=0.05)
        assert sum(betas) / 20 == approx(0.85, abs=0.05)

    def test_fixed_order_is_used(self):
        series = ar1(0.5, 300, 9)
        fit = fit_arma_garch(series, order=(2, 1))
        assert fit.arma.order == (2, 1)

    def test_fixed_order_on_zero_series(self):
        with raises(AllFailedError):
            fit_arma_garch(zeros(100), order=(1, 0))
