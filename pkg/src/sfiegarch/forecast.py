"""Exact h-step predictors and their mean-square errors.

Predictor family for the conditional variance, given the fitted history:

    check sigma^2_{n+h} = exp{ hat-ln sigma^2_{n+h} }               (plug-in)
    hat   sigma^2_{n+h} = check sigma^2 * prod_{l=0}^{h-2} E(l)     (exact)
    tilde sigma^2_{n+h} = check sigma^2 * [1 + 0.5 sg^2 sum lam_k^2] (Taylor)

with E(l) = E exp{lambda_l g(Z)} either as the in-sample estimator
(production path) or from the innovation MGF (validation path).  At h = 1 all
three coincide with sigma^2_{n+1}; the unbiased predictor's MSE is

    mse = e^{2 omega} [ prod_{k<=h-2} E2(k) - prod_{k<=h-2} E1(k)^2 ]
                      * prod_{j>=h-1} E2(j),

E2(j) = E exp{2 lambda_j g(Z)}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .acov import unconditional_moment
from .coeffs import arma_psi_weights, lambda_weights
from .errors import InvalidParameterError, MomentDivergenceError
from .estimate import FitResult
from .innovations import fourth_moment, g_mgf, moments
from .model import WHITE_NOISE_ARMA


@dataclass(frozen=True)
class ForecastSet:
    """All predictors and MSEs at one horizon."""

    horizon: int
    sigma2_hat: float
    sigma2_check: float
    sigma2_tilde: float
    ln_sigma2_hat: float
    r_hat: float
    r2_hat: float
    mse_sigma2: float
    mse_x2: float
    mse_ln: float
    e_table: np.ndarray
    sigma_g_sq_hat: float


class ForecastContext:
    """Shared one-pass state for all horizons from one fitted model.

    e_mode "sample" uses the in-sample estimators of sigma_g^2 and E(l);
    "analytic" uses the innovation-law moments at the fitted parameters.
    """

    def __init__(self, fit: FitResult, h_max: int, e_mode: str = "sample"):
        if h_max < 1:
            raise InvalidParameterError("need h_max >= 1")
        if e_mode not in ("sample", "analytic"):
            raise InvalidParameterError("e_mode must be 'sample' or 'analytic'")
        spec = fit.spec_hat
        z = np.asarray(fit.residuals_z, dtype=float)
        n = z.size
        self.fit = fit
        self.spec = spec
        self.h_max = int(h_max)
        self.n = n
        self.lam = lambda_weights(spec, n + h_max)
        # filter-convention shocks (E|Z| as used in estimation) drive the forecasts
        self.u = spec.theta * z + spec.gamma_mag * (np.abs(z) - fit.ez_abs)
        self.u_rev = self.u[::-1].copy()

        abs_z_mean = float(np.mean(np.abs(z)))
        if e_mode == "sample":
            self.sigma_g_sq = (
                spec.theta**2
                + spec.gamma_mag**2
                - (spec.gamma_mag * abs_z_mean) ** 2
                + 2.0 * spec.theta * spec.gamma_mag * float(np.mean(z * np.abs(z)))
            )
            g_hat = spec.theta * z + spec.gamma_mag * (np.abs(z) - abs_z_mean)
            lam_head = self.lam[: max(1, h_max - 1)]
            self.e1 = np.exp(np.outer(lam_head, g_hat)).mean(axis=1)
            self.log_e2_full = np.array(
                [_log_mean_exp(2.0 * lk, g_hat) for lk in self.lam]
            )
        else:
            self.sigma_g_sq = moments(spec.innovation, spec.theta, spec.gamma_mag).sigma_g_sq
            lam_head = self.lam[: max(1, h_max - 1)]
            self.e1 = np.asarray(
                g_mgf(spec.innovation, lam_head, spec.theta, spec.gamma_mag), dtype=float
            )
            self.log_e2_full = np.log(
                np.asarray(
                    g_mgf(spec.innovation, 2.0 * self.lam, spec.theta, spec.gamma_mag),
                    dtype=float,
                )
            )
        self.cum_log_e1 = np.concatenate(([0.0], np.cumsum(np.log(self.e1))))
        self.cum_log_e2 = np.concatenate(([0.0], np.cumsum(self.log_e2_full)))
        self.cum_lam_sq = np.concatenate(([0.0], np.cumsum(self.lam[: h_max + 1] ** 2)))

        try:
            self.e_sigma4 = unconditional_moment(spec, 4.0).sigma
        except (MomentDivergenceError, InvalidParameterError):
            self.e_sigma4 = math.nan
        self.z4 = fourth_moment(spec.innovation)

        self.arma = fit.arma_hat or WHITE_NOISE_ARMA
        self.psi = arma_psi_weights(self.arma, n + h_max)
        self.x_rev = np.asarray(fit.residuals_x, dtype=float)[::-1].copy()


def _log_mean_exp(scale: float, values: np.ndarray) -> float:
    y = scale * values
    m = float(np.max(y))
    return m + math.log(float(np.mean(np.exp(y - m))))


def forecast_ln_sigma2(fit: FitResult, h: int, ctx: ForecastContext | None = None):
    """(hat-ln sigma^2_{n+h}, mse) with mse = sg^2 sum_{k=0}^{h-2} lambda_k^2.

    hat-ln sigma^2_{n+h} = omega + sum_{k=0}^{n-1} lambda_{k+h-1} g(z_{n-k}),
    with g(z_t) = 0 before the sample start; the mse vanishes at h = 1.
    """
    if h < 1:
        raise InvalidParameterError("horizon must be >= 1")
    if ctx is None:
        ctx = ForecastContext(fit, h)
    n = ctx.n
    value = ctx.spec.omega + float(np.dot(ctx.lam[h - 1 : h - 1 + n], ctx.u_rev))
    mse = ctx.sigma_g_sq * float(ctx.cum_lam_sq[h - 1])
    return value, mse


def forecast_sigma2(fit: FitResult, h: int, ctx: ForecastContext | None = None):
    """(sigma2_hat, sigma2_check, sigma2_tilde, mse_sigma2, mse_x2) at horizon h."""
    if ctx is None:
        ctx = ForecastContext(fit, h)
    ln_hat, _ = forecast_ln_sigma2(fit, h, ctx)
    check = math.exp(ln_hat)
    log_prod_e1 = float(ctx.cum_log_e1[h - 1])
    hat = check * math.exp(log_prod_e1)
    tilde = check * (1.0 + 0.5 * ctx.sigma_g_sq * float(ctx.cum_lam_sq[h - 1]))
    if h == 1:
        mse_sigma2 = 0.0
    else:
        head_e2 = float(ctx.cum_log_e2[h - 1])
        tail_e2 = float(ctx.cum_log_e2[-1] - ctx.cum_log_e2[h - 1])
        mse_sigma2 = math.exp(2.0 * ctx.spec.omega) * (
            math.exp(head_e2) - math.exp(2.0 * log_prod_e1)
        ) * math.exp(tail_e2)
    mse_x2 = ctx.e_sigma4 * (ctx.z4 - 1.0) + mse_sigma2
    return hat, check, tilde, mse_sigma2, mse_x2


def forecast_r(fit: FitResult, h: int, ctx: ForecastContext | None = None) -> float:
    """ARMA mean forecast with hat-r_t = r_t for t <= n and hat-x_{n+j} = 0, j > 0."""
    if ctx is None:
        ctx = ForecastContext(fit, h)
    return _forecast_r_path(ctx, h)[h - 1]


def _forecast_r_path(ctx: ForecastContext, h: int) -> np.ndarray:
    arma = ctx.arma
    fit = ctx.fit
    mu = arma.mu
    n = ctx.n
    r_hist = None
    if getattr(fit, "returns", None) is not None:
        r_hist = np.asarray(fit.returns, dtype=float)
    x = np.asarray(fit.residuals_x, dtype=float)
    if r_hist is None:
        # reconstruct returns from residuals through the mean recursion
        r_hist = _returns_from_residuals(arma, x)
    out = np.empty(h)
    for j in range(1, h + 1):
        acc = mu
        for lag, c in arma.ar.items():
            idx = j - lag  # index into future forecasts (1-based j-lag)
            if idx >= 1:
                acc += c * (out[idx - 1] - mu)
            else:
                t = n + idx  # historical index (1-based), value r_t
                acc += c * ((r_hist[t - 1] - mu) if t >= 1 else 0.0)
        for lag, c in arma.ma.items():
            idx = j - lag
            if idx >= 1:
                continue  # hat-x of future innovations is zero
            t = n + idx
            if t >= 1:
                acc += c * x[t - 1]
        out[j - 1] = acc
    return out


def _returns_from_residuals(arma, x: np.ndarray) -> np.ndarray:
    n = x.size
    r = np.empty(n)
    mu = arma.mu
    for t in range(n):
        acc = mu + x[t]
        for lag, c in arma.ar.items():
            idx = t - lag
            acc += c * ((r[idx] - mu) if idx >= 0 else 0.0)
        for lag, c in arma.ma.items():
            idx = t - lag
            acc += c * (x[idx] if idx >= 0 else 0.0)
        r[t] = acc
    return r


def forecast_r2(fit: FitResult, h: int, ctx: ForecastContext | None = None) -> float:
    """h-step forecast of r^2 via the MA(infinity) decomposition

        hat r^2_{n+h} = mu^2 + sum_{k=0}^{h-1} psi_k^2 hat sigma^2_{n+h-k}
                        + S^2 + 2 mu S,

    where S = sum_{j>=h} psi_j x_{n+h-j} collects the realized history (the
    exact expansion's double sum over j,l >= h is S^2) and hat-x_t = 0 for
    t before the sample.
    """
    if ctx is None:
        ctx = ForecastContext(fit, h)
    mu = ctx.arma.mu
    n = ctx.n
    s_hist = float(np.dot(ctx.psi[h : h + n], ctx.x_rev))
    sig_part = 0.0
    for k in range(h):
        hat_k, _, _, _, _ = forecast_sigma2(fit, h - k, ctx)
        sig_part += ctx.psi[k] ** 2 * hat_k
    return mu * mu + sig_part + s_hist * s_hist + 2.0 * mu * s_hist


def forecast_set(fit: FitResult, horizons, e_mode: str = "sample") -> list:
    """ForecastSet for each requested horizon, sharing one context pass."""
    horizons = [int(h) for h in np.atleast_1d(horizons)]
    if any(h < 1 for h in horizons):
        raise InvalidParameterError("horizons must be >= 1")
    h_max = max(horizons)
    ctx = ForecastContext(fit, h_max, e_mode=e_mode)
    out = []
    for h in horizons:
        ln_hat, mse_ln = forecast_ln_sigma2(fit, h, ctx)
        hat, check, tilde, mse_s, mse_x = forecast_sigma2(fit, h, ctx)
        out.append(
            ForecastSet(
                horizon=h,
                sigma2_hat=hat,
                sigma2_check=check,
                sigma2_tilde=tilde,
                ln_sigma2_hat=ln_hat,
                r_hat=forecast_r(fit, h, ctx),
                r2_hat=forecast_r2(fit, h, ctx),
                mse_sigma2=mse_s,
                mse_x2=mse_x,
                mse_ln=mse_ln,
                e_table=ctx.e1[: max(0, h - 1)].copy(),
                sigma_g_sq_hat=ctx.sigma_g_sq,
            )
        )
    return out


def aggregate_horizon(fit: FitResult, day_counts, h_days: int, e_mode: str = "sample"):
    """(return forecast, variance forecast) over a window of h_days days.

    day_counts gives the number of intraday steps in each future day (variable
    counts supported).  The variance weights are Psi_j = [sum_{k=0}^{K-j} psi_k]^2
    for K = total intraday steps in the window.
    """
    counts = [int(c) for c in day_counts][: int(h_days)]
    if h_days < 1 or len(counts) < h_days or any(c < 1 for c in counts):
        raise InvalidParameterError("day window is empty or underspecified")
    k_total = sum(counts)
    ctx = ForecastContext(fit, k_total, e_mode=e_mode)
    r_path = _forecast_r_path(ctx, k_total)
    r_agg = float(np.sum(r_path))
    psi_cum = np.cumsum(ctx.psi[: k_total + 1])
    var_agg = 0.0
    for j in range(1, k_total + 1):
        hat_j, _, _, _, _ = forecast_sigma2(fit, j, ctx)
        var_agg += psi_cum[k_total - j] ** 2 * hat_j
    return r_agg, var_agg
