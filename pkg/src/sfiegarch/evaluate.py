"""Forecast-quality and residual-diagnostic statistics.

Everything here is a deterministic function of its input series: error
measures, the Diebold-Mariano comparison, predictive log-likelihood scores,
Mincer-Zarnowitz efficiency regressions with HAC standard errors, portmanteau
and cumulative-periodogram whiteness tests, density-transform (PIT) checks,
and realized-volatility aggregation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr
from scipy.stats import chi2

from .errors import InvalidParameterError
from .innovations import ged_cdf, ged_pdf
from .model import InnovationDist


# ---------------------------------------------------------------------------
# point-forecast error measures


@dataclass(frozen=True)
class ErrorMeasures:
    mae: float
    mpe: float
    max_ae: float
    mpe_skipped: int
    mpe_defined: bool


def error_measures(actual, predicted, zero_tol: float = 1e-12) -> ErrorMeasures:
    """mae = mean|e|, mpe = mean(|e|/|y|), max_ae = max|e| with e = y - yhat.

    Terms with |y| < zero_tol are skipped from mpe and counted; if all terms
    are skipped the mpe is undefined (NaN with the flag cleared).
    """
    y = np.asarray(actual, dtype=float)
    yhat = np.asarray(predicted, dtype=float)
    if y.shape != yhat.shape or y.size < 1:
        raise InvalidParameterError("series must share a positive length")
    err = np.abs(y - yhat)
    keep = np.abs(y) >= zero_tol
    skipped = int(np.sum(~keep))
    defined = bool(np.any(keep))
    mpe = float(np.mean(err[keep] / np.abs(y[keep]))) if defined else math.nan
    return ErrorMeasures(
        mae=float(np.mean(err)),
        mpe=mpe,
        max_ae=float(np.max(err)),
        mpe_skipped=skipped,
        mpe_defined=defined,
    )


# ---------------------------------------------------------------------------
# Diebold-Mariano


@dataclass(frozen=True)
class DMResult:
    stat: float
    pvalue: float
    degenerate: bool


def diebold_mariano(loss_diff, h: int = 1) -> DMResult:
    """DM statistic mean(d)/sqrt(lrv/n) on a loss-differential series.

    The long-run variance uses a Bartlett kernel truncated at lag h-1; the
    p-value is two-sided normal.  A zero-variance differential is degenerate
    (NaN when the mean is also zero, an infinite sentinel otherwise).
    """
    d = np.asarray(loss_diff, dtype=float)
    n = d.size
    if n < 10:
        raise InvalidParameterError("need at least 10 loss differentials")
    if h < 1:
        raise InvalidParameterError("h must be >= 1")
    dbar = float(np.mean(d))
    dc = d - dbar
    gamma0 = float(np.dot(dc, dc)) / n
    lrv = gamma0
    for k in range(1, h):
        w = 1.0 - k / h
        lrv += 2.0 * w * float(np.dot(dc[k:], dc[:-k])) / n
    if lrv <= 0.0:
        if dbar == 0.0:
            return DMResult(stat=math.nan, pvalue=math.nan, degenerate=True)
        return DMResult(stat=math.copysign(math.inf, dbar), pvalue=0.0, degenerate=True)
    stat = dbar / math.sqrt(lrv / n)
    pvalue = 2.0 * (1.0 - float(ndtr(abs(stat))))
    return DMResult(stat=stat, pvalue=pvalue, degenerate=False)


# ---------------------------------------------------------------------------
# predictive log-likelihood


def predictive_loglik(actual, mu_forecast, sigma2_forecast, dist: InnovationDist) -> float:
    """Normalized sum (1/n_p) sum_t ln f(y_t | mu_t, sigma_t) under dist."""
    y = np.asarray(actual, dtype=float)
    mu = np.broadcast_to(np.asarray(mu_forecast, dtype=float), y.shape)
    s2 = np.broadcast_to(np.asarray(sigma2_forecast, dtype=float), y.shape)
    if np.any(s2 <= 0.0):
        raise InvalidParameterError("forecast variances must be positive")
    sig = np.sqrt(s2)
    zs = (y - mu) / sig
    if dist.kind == "gaussian":
        dens = -0.5 * (math.log(2.0 * math.pi) + zs * zs)
    else:
        dens = np.log(ged_pdf(zs, dist.effective_nu))
    return float(np.mean(dens - np.log(sig)))


# ---------------------------------------------------------------------------
# Mincer-Zarnowitz efficiency regression


@dataclass(frozen=True)
class MZResult:
    gamma0: float
    gamma1: float
    se0: float
    se1: float
    lambda_correction: float
    wald_stat: float
    wald_pvalue: float


def mincer_zarnowitz(actual, predicted, n_fit: int, hac_lags: int) -> MZResult:
    """OLS of y on (1, yhat) with Newey-West (Bartlett) standard errors.

    SEs are multiplied by lambda = sqrt(1 + n_p/n_fit) for estimation
    uncertainty; the Wald test targets (gamma0, gamma1) = (0, 1) with the
    lambda-scaled covariance.
    """
    y = np.asarray(actual, dtype=float)
    yhat = np.asarray(predicted, dtype=float)
    n = y.size
    if n < hac_lags + 2:
        raise InvalidParameterError("need length >= hac_lags + 2")
    if np.ptp(yhat) == 0.0:
        raise InvalidParameterError("collinear predictor: forecasts are constant")
    x_mat = np.column_stack([np.ones(n), yhat])
    xtx = x_mat.T @ x_mat
    coef = np.linalg.solve(xtx, x_mat.T @ y)
    resid = y - x_mat @ coef
    if float(np.max(np.abs(resid))) <= 1e-10 * max(1.0, float(np.max(np.abs(y)))):
        # perfect fit: residuals are pure roundoff and the Wald ratio is 0/0
        lam = math.sqrt(1.0 + n / float(n_fit))
        return MZResult(float(coef[0]), float(coef[1]), 0.0, 0.0, lam, 0.0, 1.0)

    xe = x_mat * resid[:, None]
    s_mat = xe.T @ xe
    for k in range(1, hac_lags + 1):
        w = 1.0 - k / (hac_lags + 1.0)
        cross = xe[k:].T @ xe[:-k]
        s_mat += w * (cross + cross.T)
    xtx_inv = np.linalg.inv(xtx)
    cov = xtx_inv @ s_mat @ xtx_inv

    lam = math.sqrt(1.0 + n / float(n_fit))
    cov_corr = cov * lam * lam
    se = np.sqrt(np.diag(cov_corr))
    delta = coef - np.array([0.0, 1.0])
    wald = float(delta @ np.linalg.solve(cov_corr, delta))
    pval = float(chi2.sf(wald, df=2))
    return MZResult(
        gamma0=float(coef[0]),
        gamma1=float(coef[1]),
        se0=float(se[0]),
        se1=float(se[1]),
        lambda_correction=lam,
        wald_stat=wald,
        wald_pvalue=pval,
    )


# ---------------------------------------------------------------------------
# whiteness tests


def sample_acf(x: np.ndarray, max_lag: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    xc = x - x.mean()
    denom = float(np.dot(xc, xc))
    if denom == 0.0:
        raise InvalidParameterError("zero-variance series")
    return np.array([np.dot(xc[k:], xc[: x.size - k]) / denom for k in range(1, max_lag + 1)])


def portmanteau(series, lags, fitted_params: int = 0) -> tuple:
    """Box-Pierce and Ljung-Box tables {lag: (stat, pvalue)}.

    BP_L = n sum rho_k^2, LB_L = n(n+2) sum rho_k^2/(n-k); chi-square degrees
    of freedom lag - fitted_params, floored at 1.
    """
    x = np.asarray(series, dtype=float)
    n = x.size
    lags = sorted(int(v) for v in np.atleast_1d(lags))
    if lags and lags[-1] >= n:
        raise InvalidParameterError("max lag must be below the series length")
    rho = sample_acf(x, lags[-1]) if lags else np.empty(0)
    bp_table, lb_table = {}, {}
    for lag in lags:
        r = rho[:lag]
        bp = n * float(np.sum(r**2))
        lb = n * (n + 2.0) * float(np.sum(r**2 / (n - np.arange(1, lag + 1))))
        df = max(1, lag - fitted_params)
        bp_table[lag] = (bp, float(chi2.sf(bp, df)))
        lb_table[lag] = (lb, float(chi2.sf(lb, df)))
    return bp_table, lb_table


@dataclass(frozen=True)
class CpgramResult:
    stat: float
    reject: bool
    degenerate: bool


def cumulative_periodogram(series, level: float = 0.05) -> CpgramResult:
    """Cumulative-periodogram whiteness test (Kolmogorov-Smirnov style).

    The normalized cumulative periodogram is compared against the uniform
    line; the 5% band uses the 1.358 asymptotic constant with the usual
    small-sample correction.
    """
    x = np.asarray(series, dtype=float)
    n = x.size
    if n < 16:
        raise InvalidParameterError("need at least 16 observations")
    if level != 0.05:
        raise InvalidParameterError("only the 5% band is tabulated")
    fft = np.fft.rfft(x - x.mean())
    power = np.abs(fft[1 : (n - 1) // 2 + 1]) ** 2
    total = float(np.sum(power))
    if total <= 0.0:
        return CpgramResult(stat=math.nan, reject=False, degenerate=True)
    q = power.size
    cum = np.cumsum(power) / total
    line = np.arange(1, q + 1) / q
    d_stat = float(np.max(np.abs(cum - line)))
    m = q - 1.0
    crit = 1.358 / (math.sqrt(m) + 0.12 + 0.11 / math.sqrt(m))
    return CpgramResult(stat=d_stat, reject=bool(d_stat > crit), degenerate=False)


# ---------------------------------------------------------------------------
# density transform (PIT)


def _kolmogorov_sf(x: float, terms: int = 100) -> float:
    if x <= 0.0:
        return 1.0
    k = np.arange(1, terms + 1)
    val = 2.0 * np.sum((-1.0) ** (k - 1) * np.exp(-2.0 * (k * x) ** 2))
    return float(min(1.0, max(0.0, val)))


def ks_uniform(u) -> tuple:
    """(stat, pvalue) of a Kolmogorov-Smirnov test of u against Uniform(0,1)."""
    u = np.sort(np.asarray(u, dtype=float))
    n = u.size
    i = np.arange(1, n + 1)
    d_plus = np.max(i / n - u)
    d_minus = np.max(u - (i - 1) / n)
    d_stat = float(max(d_plus, d_minus))
    return d_stat, _kolmogorov_sf(math.sqrt(n) * d_stat)


@dataclass(frozen=True)
class DensityTransformRow:
    nu: float
    stat: float
    pvalue: float
    degenerate: bool


def density_transform_test(x_resid, sigma2_fitted, nu_grid) -> list:
    """PIT u_t = F(x_t | nu, sigma_t) per nu, KS-tested against uniformity."""
    x = np.asarray(x_resid, dtype=float)
    s2 = np.asarray(sigma2_fitted, dtype=float)
    if x.shape != s2.shape:
        raise InvalidParameterError("residuals and fitted variances must align")
    rows = []
    for nu in nu_grid:
        u = ged_cdf(x / np.sqrt(s2), float(nu))
        if np.ptp(u) == 0.0:
            rows.append(DensityTransformRow(float(nu), math.nan, math.nan, True))
            continue
        stat, pval = ks_uniform(u)
        rows.append(DensityTransformRow(float(nu), stat, pval, False))
    return rows


# ---------------------------------------------------------------------------
# realized volatility


@dataclass(frozen=True)
class RealizedSeries:
    """Per-day realized quantities from intraday returns."""

    daily_returns: np.ndarray
    daily_vol: np.ndarray
    counts: np.ndarray

    def window_vol(self, h: int) -> np.ndarray:
        """v_{t-1}[h] = sum_{j=0}^{h-1} v_{t+j}; window of 1 is the daily vol."""
        if h < 1:
            raise InvalidParameterError("window must cover at least one day")
        v = self.daily_vol
        if h > v.size:
            raise InvalidParameterError("window longer than the sample")
        kernel = np.ones(h)
        return np.convolve(v, kernel, mode="valid")

    def window_returns(self, h: int) -> np.ndarray:
        if h < 1 or h > self.daily_returns.size:
            raise InvalidParameterError("window empty or longer than the sample")
        return np.convolve(self.daily_returns, np.ones(h), mode="valid")


def realized_volatility(intraday, day_sizes) -> RealizedSeries:
    """Demeaned squared sums per day: v_t = sum_k (r_{t,k} - rbar_t)^2.

    day_sizes partitions the intraday series into days (variable counts
    allowed); an empty day is an error.
    """
    r = np.asarray(intraday, dtype=float)
    sizes = [int(c) for c in day_sizes]
    if any(c < 1 for c in sizes):
        raise InvalidParameterError("every day needs at least one observation")
    if sum(sizes) != r.size:
        raise InvalidParameterError("day sizes must partition the series")
    rets, vols = [], []
    pos = 0
    for c in sizes:
        day = r[pos : pos + c]
        pos += c
        rets.append(float(np.sum(day)))
        vols.append(float(np.sum((day - day.mean()) ** 2)))
    return RealizedSeries(
        daily_returns=np.array(rets), daily_vol=np.array(vols), counts=np.array(sizes)
    )
