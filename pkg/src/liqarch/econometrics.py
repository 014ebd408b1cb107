"""Module for fitting ARMA(p, q) mean models with GARCH(1, 1) errors.

ARMA models are fitted by conditional sum of squares with zero
pre-sample values and no intercept unless requested. GARCH(1, 1) is
fitted by Gaussian quasi maximum likelihood on the ARMA residuals,
with the first conditional variance set to the sample variance of the
residuals.

Classes
-------
ArmaFit
    A fitted ARMA model and its residuals.
GarchFit
    A fitted GARCH(1, 1) model and its conditional variances.
ArmaGarchFit
    An ARMA fit, the GARCH fit of its residuals and a one-step mean
    forecast.

Functions
---------
arma_residuals
    Innovations of a series under given ARMA coefficients.
fit_arma
    Fits ARMA(p, q) by conditional sum of squares.
arma_grid
    Fits every order up to (p_max, q_max).
select_arma
    Chooses the order with minimal AIC.
garch_variance
    Conditional variance path of GARCH(1, 1).
loglik_garch
    Gaussian GARCH(1, 1) log-likelihood.
garch_score
    Analytic gradient of loglik_garch in (omega, alpha, beta).
fit_garch11
    Fits GARCH(1, 1) by quasi maximum likelihood.
forecast_mean
    One-step-ahead ARMA mean forecast.
fit_arma_garch
    Order selection, ARMA fit, GARCH fit and forecast in one call.
"""

from dataclasses import dataclass
from math import log, pi
from typing import Dict, Iterable, Optional, Tuple

from numpy import (
    abs as np_abs,
    all as np_all,
    array,
    column_stack,
    concatenate,
    empty,
    exp,
    float64,
    isfinite,
    log as np_log,
    nan,
    nan_to_num,
    ndarray,
    ones,
    roots,
    sqrt,
    zeros,
)
from numpy.linalg import lstsq
from scipy.optimize import least_squares, minimize  # type: ignore[import]
from scipy.signal import lfilter  # type: ignore[import]
from scipy.special import softmax  # type: ignore[import]

from liqarch.exceptions import (
    AllFailedError,
    DegenerateVarianceError,
    DomainError,
    InvalidArgumentError,
    TooShortError,
)
from liqarch.log import LOGGER
from liqarch.utilities import as_finite_array

MAX_ORDER = 4
MIN_ARMA_OBSERVATIONS = 20
MIN_GARCH_OBSERVATIONS = 50
STATIONARITY_MARGIN = 1e-6
MAX_EVALUATIONS = 2000
OBJECTIVE_TOLERANCE = 1e-8
PARAMETER_TOLERANCE = 1e-6
START_OMEGA_SHARE = 0.05
START_ALPHA = 0.05
START_BETA = 0.90
LOG_2PI = log(2.0 * pi)
_RESIDUAL_CEILING = 1e100


@dataclass(frozen=True, eq=False)
class ArmaFit:
    """Attributes
    ----------
    p, q:
        AR and MA orders.
    phi, theta:
        AR and MA coefficients.
    residuals:
        In-sample innovations, one per observation.
    aic:
        2 k - 2 loglik with k = p + q + 1 (+1 with a mean).
    loglik:
        Concentrated Gaussian conditional log-likelihood.
    converged:
        Whether the optimizer reported success with finite criteria.
    mean:
        Intercept; 0 unless the fit included a mean.
    """

    p: int
    q: int
    phi: ndarray
    theta: ndarray
    residuals: ndarray
    aic: float
    loglik: float
    converged: bool
    mean: float = 0.0

    @property
    def order(self) -> Tuple[int, int]:
        return self.p, self.q


def _as_coefficients(values: Iterable[float]) -> ndarray:
    return array(values, dtype=float64).reshape(-1)


def arma_residuals(
    series: Iterable[float], phi: Iterable[float], theta: Iterable[float], mean: float = 0.0
) -> ndarray:
    """e_t = (r_t - mean) - sum phi_i (r_{t-i} - mean) - sum theta_j e_{t-j}.

    Pre-sample values of the series and of e are zero.
    """
    series = as_finite_array(series, "series")
    ar = concatenate(([1.0], -_as_coefficients(phi)))
    ma = concatenate(([1.0], _as_coefficients(theta)))
    return lfilter(ar, ma, series - mean)


def _check_order(p: int, q: int) -> None:
    for name, order in (("p", p), ("q", q)):
        if not 0 <= order <= MAX_ORDER:
            raise InvalidArgumentError(
                f"{name} must be between 0 and {MAX_ORDER}, got {order}"
            )


def _is_stable(coefficients: ndarray, sign: float) -> bool:
    """Whether 1 + sign * sum c_i z^i has all roots outside the unit circle."""
    if not (coefficients != 0).any():
        return True
    polynomial = concatenate((sign * coefficients[::-1], [1.0]))
    return bool(np_all(np_abs(roots(polynomial)) > 1.0))


def _lagged(values: ndarray, lags: int, start: int) -> ndarray:
    """Columns values[t - 1], ..., values[t - lags] for t = start, ..."""
    if not lags:
        return empty((len(values) - start, 0))
    return column_stack(
        [values[start - lag : len(values) - lag] for lag in range(1, lags + 1)]
    )


def _hannan_rissanen(series: ndarray, p: int, q: int) -> ndarray:
    """Starting values from a long autoregression and a lagged OLS."""
    n = len(series)
    innovations = series
    offset = p
    if q:
        long_order = min(max(p + q + 1, 10), n // 4)
        design = _lagged(series, long_order, long_order)
        coefficients = lstsq(design, series[long_order:], rcond=None)[0]
        innovations = concatenate(
            (zeros(long_order), series[long_order:] - design @ coefficients)
        )
        offset = long_order + max(p, q)
    design = column_stack(
        (_lagged(series, p, offset), _lagged(innovations, q, offset))
    )
    start = lstsq(design, series[offset:], rcond=None)[0]
    phi, theta = start[:p], start[p:]
    if not _is_stable(phi, -1.0):
        phi = zeros(p)
    if not _is_stable(theta, 1.0):
        theta = zeros(q)
    return concatenate((phi, theta))


def _css_residuals(params: ndarray, series: ndarray, p: int) -> ndarray:
    residuals = lfilter(
        concatenate(([1.0], -params[:p])), concatenate(([1.0], params[p:])), series
    )
    return nan_to_num(
        residuals,
        nan=_RESIDUAL_CEILING,
        posinf=_RESIDUAL_CEILING,
        neginf=-_RESIDUAL_CEILING,
    )


def fit_arma(
    series: Iterable[float],
    p: int,
    q: int,
    include_mean: bool = False,
    max_evaluations: int = MAX_EVALUATIONS,
) -> ArmaFit:
    """Fits ARMA(p, q) by conditional sum of squares.

    The optimization runs on the series divided by its root mean square
    so that the chosen coefficients do not depend on the scale of the
    data. An all-zero series yields a non-converged fit with NaN AIC.

    Raises
    ------
    TooShortError
        When the series has fewer than 20 + p + q observations.
    """
    _check_order(p, q)
    series = as_finite_array(series, "series")
    n = len(series)
    if n < MIN_ARMA_OBSERVATIONS + p + q:
        raise TooShortError(
            f"ARMA({p},{q}) needs at least {MIN_ARMA_OBSERVATIONS + p + q} "
            f"observations, got {n}"
        )
    mean = float(series.mean()) if include_mean else 0.0
    centered = series - mean
    scale = float(sqrt((centered**2).mean()))
    if scale == 0:
        return ArmaFit(
            p=p,
            q=q,
            phi=zeros(p),
            theta=zeros(q),
            residuals=centered,
            aic=nan,
            loglik=nan,
            converged=False,
            mean=mean,
        )

    standardized = centered / scale
    converged = True
    params = zeros(p + q)
    if p + q:
        start = _hannan_rissanen(standardized, p, q)
        result = least_squares(
            _css_residuals,
            start,
            args=(standardized, p),
            method="lm",
            max_nfev=max_evaluations,
        )
        params = result.x
        converged = bool(result.success)

    phi, theta = params[:p], params[p:]
    residuals = arma_residuals(series, phi, theta, mean)
    ssr = float((residuals**2).sum())
    if not (isfinite(ssr) and ssr > 0):
        loglik, aic, converged = nan, nan, False
    else:
        loglik = -0.5 * n * (LOG_2PI + log(ssr / n) + 1.0)
        k = p + q + 1 + (1 if include_mean else 0)
        aic = 2.0 * k - 2.0 * loglik
    return ArmaFit(
        p=p,
        q=q,
        phi=phi,
        theta=theta,
        residuals=residuals,
        aic=aic,
        loglik=loglik,
        converged=converged,
        mean=mean,
    )


def arma_grid(
    series: Iterable[float],
    p_max: int = MAX_ORDER,
    q_max: int = MAX_ORDER,
    include_mean: bool = False,
) -> Dict[Tuple[int, int], ArmaFit]:
    """Fits ARMA(p, q) for 0 <= p <= p_max, 0 <= q <= q_max.

    Orders the series is too short for are skipped.
    """
    _check_order(p_max, q_max)
    series = as_finite_array(series, "series")
    if len(series) < MIN_ARMA_OBSERVATIONS:
        raise TooShortError(
            f"Order selection needs at least {MIN_ARMA_OBSERVATIONS} observations, "
            f"got {len(series)}"
        )
    grid = {}
    for p in range(p_max + 1):
        for q in range(q_max + 1):
            if len(series) < MIN_ARMA_OBSERVATIONS + p + q:
                continue
            grid[(p, q)] = fit_arma(series, p, q, include_mean)
    return grid


def best_order(grid: Dict[Tuple[int, int], ArmaFit]) -> Tuple[int, int]:
    """Order with minimal AIC among converged fits.

    Ties go to the smaller p + q, then the smaller p.
    """
    candidates = [
        (fit.aic, p + q, p, q)
        for (p, q), fit in grid.items()
        if fit.converged and isfinite(fit.aic)
    ]
    if not candidates:
        raise AllFailedError("No ARMA order converged.")
    _, _, p, q = min(candidates)
    return p, q


def select_arma(
    series: Iterable[float],
    p_max: int = MAX_ORDER,
    q_max: int = MAX_ORDER,
    include_mean: bool = False,
) -> Tuple[int, int]:
    """Chooses (p, q) minimizing AIC over the order grid."""
    return best_order(arma_grid(series, p_max, q_max, include_mean))


@dataclass(frozen=True, eq=False)
class GarchFit:
    omega: float
    alpha: float
    beta: float
    loglik: float
    converged: bool
    conditional_variance: ndarray


def garch_variance(
    residuals: Iterable[float], omega: float, alpha: float, beta: float
) -> ndarray:
    """s_1 = var(residuals), s_t = omega + alpha e_{t-1}^2 + beta s_{t-1}."""
    residuals = as_finite_array(residuals, "residuals")
    return _variance_path(residuals, omega, alpha, beta, float(residuals.var()))


def _variance_path(
    residuals: ndarray, omega: float, alpha: float, beta: float, initial: float
) -> ndarray:
    variance = empty(len(residuals))
    variance[0] = initial
    if len(residuals) > 1:
        variance[1:] = lfilter(
            [1.0],
            [1.0, -beta],
            omega + alpha * residuals[:-1] ** 2,
            zi=[beta * initial],
        )[0]
    return variance


def _loglik(residuals: ndarray, variance: ndarray) -> float:
    if not (variance > 0).all() or not isfinite(variance).all():
        return -float("inf")
    return float(
        -0.5 * (LOG_2PI + np_log(variance) + residuals**2 / variance).sum()
    )


def _check_garch_params(omega: float, alpha: float, beta: float) -> None:
    if not omega > 0:
        raise DomainError(f"omega must be positive, got {omega}")
    if not (alpha >= 0 and beta >= 0):
        raise DomainError(f"alpha and beta must be non-negative, got {alpha}, {beta}")


def loglik_garch(
    residuals: Iterable[float], omega: float, alpha: float, beta: float
) -> float:
    """Gaussian GARCH(1, 1) log-likelihood of residuals.

    Raises
    ------
    DomainError
        For omega <= 0, negative alpha or beta, or zero residual variance.
    """
    _check_garch_params(omega, alpha, beta)
    residuals = as_finite_array(residuals, "residuals")
    if len(residuals) == 0 or not residuals.var() > 0:
        raise DomainError("residuals have zero variance")
    return _loglik(residuals, _variance_path(residuals, omega, alpha, beta, residuals.var()))


def garch_score(
    residuals: Iterable[float], omega: float, alpha: float, beta: float
) -> ndarray:
    """Gradient of loglik_garch with respect to (omega, alpha, beta)."""
    _check_garch_params(omega, alpha, beta)
    residuals = as_finite_array(residuals, "residuals")
    if len(residuals) == 0 or not residuals.var() > 0:
        raise DomainError("residuals have zero variance")
    initial = float(residuals.var())
    variance = _variance_path(residuals, omega, alpha, beta, initial)
    sensitivity = 0.5 * (residuals**2 / variance - 1.0) / variance
    score = zeros(3)
    if len(residuals) < 2:
        return score
    drivers = (
        ones(len(residuals) - 1),
        residuals[:-1] ** 2,
        variance[:-1],
    )
    for index, driver in enumerate(drivers):
        derivative = lfilter([1.0], [1.0, -beta], driver)
        score[index] = float((sensitivity[1:] * derivative).sum())
    return score


def _unpack(params: ndarray) -> Tuple[float, float, float]:
    """omega = exp(u0); (alpha, beta) = c * softmax(u1, u2, 0)[:2]."""
    ceiling = 1.0 - STATIONARITY_MARGIN
    weights = softmax(array([params[1], params[2], 0.0]))
    alpha, beta = ceiling * weights[0], ceiling * weights[1]
    if alpha + beta > ceiling:
        beta = ceiling - alpha
    return float(exp(params[0])), float(alpha), float(beta)


def _pack(omega: float, alpha: float, beta: float) -> ndarray:
    ceiling = 1.0 - STATIONARITY_MARGIN
    slack = 1.0 - (alpha + beta) / ceiling
    return array(
        [log(omega), log(alpha / ceiling / slack), log(beta / ceiling / slack)]
    )


def _negative_loglik(params: ndarray, residuals: ndarray) -> float:
    omega, alpha, beta = _unpack(params)
    return -_loglik(residuals, _variance_path(residuals, omega, alpha, beta, 1.0))


def fit_garch11(
    residuals: Iterable[float], max_evaluations: int = MAX_EVALUATIONS
) -> GarchFit:
    """Fits GARCH(1, 1) by Gaussian quasi maximum likelihood.

    Nelder-Mead runs on unconstrained parameters that map onto
    omega > 0, alpha, beta >= 0, alpha + beta <= 1 - 1e-6, using the
    residuals scaled to unit variance. When the optimum is no better
    than the starting point (omega = 0.05 var, alpha = 0.05,
    beta = 0.90), the starting point is returned as not converged.

    Raises
    ------
    TooShortError
        For fewer than 50 residuals.
    DegenerateVarianceError
        When the residuals have zero variance.
    """
    residuals = as_finite_array(residuals, "residuals")
    n = len(residuals)
    if n < MIN_GARCH_OBSERVATIONS:
        raise TooShortError(
            f"GARCH(1,1) needs at least {MIN_GARCH_OBSERVATIONS} residuals, got {n}"
        )
    variance = float(residuals.var())
    if not variance > 0:
        raise DegenerateVarianceError("Residuals have zero variance.")

    standardized = residuals / sqrt(variance)
    result = minimize(
        _negative_loglik,
        _pack(START_OMEGA_SHARE, START_ALPHA, START_BETA),
        args=(standardized,),
        method="Nelder-Mead",
        options={
            "maxfev": max_evaluations,
            "fatol": OBJECTIVE_TOLERANCE,
            "xatol": PARAMETER_TOLERANCE,
        },
    )
    omega, alpha, beta = _unpack(result.x)
    omega *= variance
    converged = bool(result.success)
    loglik = loglik_garch(residuals, omega, alpha, beta)
    start = (START_OMEGA_SHARE * variance, START_ALPHA, START_BETA)
    start_loglik = loglik_garch(residuals, *start)
    if not loglik > start_loglik:
        LOGGER.debug("GARCH optimizer did not improve on the starting point")
        (omega, alpha, beta), loglik, converged = start, start_loglik, False
    return GarchFit(
        omega=omega,
        alpha=alpha,
        beta=beta,
        loglik=loglik,
        converged=converged,
        conditional_variance=_variance_path(residuals, omega, alpha, beta, variance),
    )


def forecast_mean(fit: ArmaFit, history: Iterable[float]) -> float:
    """One-step-ahead forecast from the last observations of history.

    history is the series the fit was estimated on; its residuals supply
    the MA terms.
    """
    history = as_finite_array(history, "history")
    needed = max(fit.p, fit.q, 1)
    if len(history) < needed:
        raise TooShortError(f"Forecast needs at least {needed} observations.")
    if fit.q and len(fit.residuals) < fit.q:
        raise TooShortError("Fit has fewer residuals than its MA order.")
    centered = history - fit.mean
    ar_part = sum(fit.phi[i] * centered[-1 - i] for i in range(fit.p))
    ma_part = sum(fit.theta[j] * fit.residuals[-1 - j] for j in range(fit.q))
    return float(fit.mean + ar_part + ma_part)


@dataclass(frozen=True, eq=False)
class ArmaGarchFit:
    arma: ArmaFit
    garch: GarchFit
    mean_forecast: float

    @property
    def loglik(self) -> float:
        return self.garch.loglik

    @property
    def converged(self) -> bool:
        return self.arma.converged and self.garch.converged

    def summary_row(self) -> Dict[str, object]:
        """Flat row for tabular output; unused coefficients are NaN."""
        row: Dict[str, object] = {"p": self.arma.p, "q": self.arma.q}
        for i in range(MAX_ORDER):
            row[f"phi_{i + 1}"] = float(self.arma.phi[i]) if i < self.arma.p else nan
        for j in range(MAX_ORDER):
            row[f"theta_{j + 1}"] = float(self.arma.theta[j]) if j < self.arma.q else nan
        row.update(
            omega=self.garch.omega,
            alpha=self.garch.alpha,
            beta=self.garch.beta,
            loglik=self.loglik,
            aic=self.arma.aic,
            mean_forecast=self.mean_forecast,
            converged=self.converged,
        )
        return row


def fit_arma_garch(
    series: Iterable[float],
    p_max: int = MAX_ORDER,
    q_max: int = MAX_ORDER,
    include_mean: bool = False,
    order: Optional[Tuple[int, int]] = None,
) -> ArmaGarchFit:
    """Selects an ARMA order (unless given), fits it, fits GARCH(1, 1)
    to its residuals and forecasts the next value.
    """
    series = as_finite_array(series, "series")
    if order is None:
        grid = arma_grid(series, p_max, q_max, include_mean)
        arma = grid[best_order(grid)]
    else:
        arma = fit_arma(series, *order, include_mean=include_mean)
        if not arma.converged:
            raise AllFailedError(f"ARMA{order} did not converge.")
    garch = fit_garch11(arma.residuals)
    return ArmaGarchFit(
        arma=arma, garch=garch, mean_forecast=forecast_mean(arma, series)
    )

