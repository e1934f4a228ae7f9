"""Two-step quasi-maximum-likelihood estimation.

Step one fits a constrained ARMA mean by conditional least squares with
backward elimination of insignificant lags; step two maximizes the Gaussian
quasi-likelihood

    L_n = -(n/2) ln(2 pi) - (1/2) sum_t [ ln(sigma_t^2) + x_t^2 / sigma_t^2 ]

over the volatility parameters, with the filter recursion initialized by
g(z_t) = 0 before the sample and E|Z| = sqrt(2/pi) under QML.  Inference uses
the sandwich covariance (-H)^-1 B (-H)^-1 built from finite-difference
Hessian and outer-product-of-gradients terms.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares, minimize
from scipy.special import ndtr

from .coeffs import lambda_weights
from .errors import InvalidParameterError, UnitRootError
from .innovations import SQRT_2_OVER_PI
from .kernels import LN_SIGMA2_CAP, arma_residuals, egarch_filter
from .model import (
    ArmaSpec,
    InnovationDist,
    SfiegarchSpec,
    poly_root_moduli,
    validate,
)

LOG_2PI = math.log(2.0 * math.pi)


# ---------------------------------------------------------------------------
# quasi-likelihood


def _arma_residual_series(r: np.ndarray, arma: ArmaSpec) -> np.ndarray:
    ar_lags = np.array(sorted(arma.ar), dtype=np.int64)
    ma_lags = np.array(sorted(arma.ma), dtype=np.int64)
    ar_coefs = np.array([arma.ar[k] for k in ar_lags], dtype=float)
    ma_coefs = np.array([arma.ma[k] for k in ma_lags], dtype=float)
    return arma_residuals(
        np.ascontiguousarray(r, dtype=float),
        float(arma.mu),
        ar_lags,
        ar_coefs,
        ma_lags,
        ma_coefs,
        float(np.mean(r)),
    )


def volatility_filter(x: np.ndarray, spec: SfiegarchSpec, ez_abs: float, lam=None):
    """Run the filter; returns (ln_sigma2, z).  lam defaults to length n."""
    x = np.ascontiguousarray(x, dtype=float)
    if lam is None:
        lam = lambda_weights(spec, max(0, x.size - 1))
    return egarch_filter(
        x, np.ascontiguousarray(lam, dtype=float), spec.omega, spec.theta, spec.gamma_mag, ez_abs
    )


def quasi_loglik(
    data,
    spec: SfiegarchSpec,
    arma: ArmaSpec | None = None,
    ez_abs: float | None = None,
    lam=None,
    per_obs: bool = False,
):
    """Gaussian quasi-log-likelihood of the data under (arma, spec).

    When ``arma`` is given, data are raw returns and the mean recursion runs
    first (pre-sample r = rbar, x = 0); otherwise data are mean residuals.
    Overflow in the variance recursion yields -inf, never an exception.
    """
    r = np.asarray(data, dtype=float)
    x = _arma_residual_series(r, arma) if arma is not None else r
    if ez_abs is None:
        ez_abs = SQRT_2_OVER_PI
    lnsig, z = volatility_filter(x, spec, ez_abs, lam)
    contrib = -0.5 * (LOG_2PI + lnsig + z * z)
    if np.max(np.abs(lnsig)) >= LN_SIGMA2_CAP or not np.all(np.isfinite(contrib)):
        total = -np.inf
    else:
        total = float(np.sum(contrib))
    if per_obs:
        return total, contrib, lnsig, z
    return total


# ---------------------------------------------------------------------------
# step one: constrained ARMA


@dataclass
class ArmaFit:
    arma: ArmaSpec
    residuals: np.ndarray
    se: dict
    pvalues: dict
    dropped: list
    converged: bool


def _arma_param_resid(r, mu, ar_lags, ar_coefs, ma_lags, ma_coefs):
    return arma_residuals(
        r,
        float(mu),
        np.asarray(ar_lags, dtype=np.int64),
        np.asarray(ar_coefs, dtype=float),
        np.asarray(ma_lags, dtype=np.int64),
        np.asarray(ma_coefs, dtype=float),
        float(np.mean(r)),
    )


class _EmptyArmaSolution:
    x = np.empty(0)
    jac = np.empty((0, 0))
    cost = 0.0
    success = True


def _fit_arma_once(r, ar_lags, ma_lags, include_mean):
    n_ar, n_ma = len(ar_lags), len(ma_lags)

    def resid(theta):
        mu = theta[0] if include_mean else 0.0
        off = 1 if include_mean else 0
        return _arma_param_resid(
            r, mu, ar_lags, theta[off : off + n_ar], ma_lags, theta[off + n_ar :]
        )

    k = (1 if include_mean else 0) + n_ar + n_ma
    if k == 0:
        return _EmptyArmaSolution(), np.empty(0)
    x0 = np.zeros(k)
    if include_mean:
        x0[0] = float(np.mean(r))
    sol = least_squares(resid, x0, method="lm", xtol=1e-12, ftol=1e-12)
    dof = max(1, r.size - k)
    sigma2 = 2.0 * sol.cost / dof
    jtj = sol.jac.T @ sol.jac
    try:
        cov = sigma2 * np.linalg.inv(jtj)
    except np.linalg.LinAlgError:
        cov = sigma2 * np.linalg.pinv(jtj)
    se = np.sqrt(np.maximum(np.diag(cov), 0.0))
    return sol, se


def _arma_labels(ar_lags, ma_lags, include_mean):
    labels = (["mu"] if include_mean else [])
    labels += [f"ar{k}" for k in ar_lags] + [f"ma{k}" for k in ma_lags]
    return labels


def fit_arma(
    data,
    ar_lags=(),
    ma_lags=(),
    include_mean: bool = True,
    p_threshold: float = 0.05,
    eliminate: bool = True,
) -> ArmaFit:
    """Conditional-least-squares fit of the constrained ARMA over free lags.

    Backward elimination removes the least significant parameter (normal
    approximation z = coef/se) one at a time while any p-value >= p_threshold.
    A nonstationary AR estimate is rejected with root diagnostics.
    """
    r = np.ascontiguousarray(data, dtype=float)
    ar_lags = sorted(int(k) for k in ar_lags)
    ma_lags = sorted(int(k) for k in ma_lags)
    dropped = []
    while True:
        sol, se = _fit_arma_once(r, ar_lags, ma_lags, include_mean)
        labels = _arma_labels(ar_lags, ma_lags, include_mean)
        with np.errstate(divide="ignore", invalid="ignore"):
            zstat = np.where(se > 0, sol.x / se, np.inf)
        pvals = 2.0 * (1.0 - ndtr(np.abs(zstat)))
        if not eliminate or len(labels) == 0:
            break
        worst = int(np.argmax(pvals))
        if pvals[worst] < p_threshold:
            break
        name = labels[worst]
        dropped.append((name, float(pvals[worst])))
        if name == "mu":
            include_mean = False
        elif name.startswith("ar"):
            ar_lags.remove(int(name[2:]))
        else:
            ma_lags.remove(int(name[2:]))

    off = 1 if include_mean else 0
    mu = float(sol.x[0]) if include_mean else 0.0
    ar = {k: float(v) for k, v in zip(ar_lags, sol.x[off : off + len(ar_lags)])}
    ma = {k: float(v) for k, v in zip(ma_lags, sol.x[off + len(ar_lags) :])}
    arma = ArmaSpec(mu=mu, ar=ar, ma=ma)

    moduli = poly_root_moduli(arma.ar_poly())
    if moduli.size and moduli.min() <= 1.0:
        raise UnitRootError(
            f"nonstationary AR estimate: root modulus {moduli.min():.6g} <= 1 "
            f"(lags {sorted(ar)})"
        )
    residuals = _arma_residual_series(r, arma)
    se_map = dict(zip(_arma_labels(ar_lags, ma_lags, include_mean), se))
    p_map = dict(zip(_arma_labels(ar_lags, ma_lags, include_mean), pvals))
    return ArmaFit(arma, residuals, se_map, p_map, dropped, bool(sol.success))


# ---------------------------------------------------------------------------
# step two: SFIEGARCH QML


@dataclass
class FitConfig:
    max_iter: int = 2000
    tol: float = 1e-8
    ez_abs: float | None = None  # None -> sqrt(2/pi) (QML); set for GED pseudo-likelihood
    fix_d: float | None = None  # pin d (EGARCH path uses fix_d=0.0)
    root_margin: float = 1e-6
    penalty_weight: float = 1e4


@dataclass
class FitResult:
    spec_hat: SfiegarchSpec
    arma_hat: ArmaSpec | None
    loglik: float
    cov_robust: np.ndarray
    se: dict
    aic: float
    bic: float
    hqc: float
    residuals_x: np.ndarray
    residuals_z: np.ndarray
    sigma2_fitted: np.ndarray
    converged: bool
    iterations: int
    param_names: list = field(default_factory=list)
    ez_abs: float = SQRT_2_OVER_PI
    cov_flags: list = field(default_factory=list)
    n_obs: int = 0
    returns: np.ndarray | None = None  # raw series when fitted through the mean step


def _d_from_u(u: float) -> float:
    return -1.0 + 1.5 / (1.0 + math.exp(-u))


def _u_from_d(d: float) -> float:
    frac = (d + 1.0) / 1.5
    frac = min(max(frac, 1e-12), 1.0 - 1e-12)
    return math.log(frac / (1.0 - frac))


def _pack(spec: SfiegarchSpec, cfg: FitConfig) -> np.ndarray:
    head = [spec.omega, spec.theta, spec.gamma_mag]
    if cfg.fix_d is None:
        head.append(_u_from_d(spec.d))
    return np.array(head + list(spec.alpha) + list(spec.beta), dtype=float)


def _unpack(u: np.ndarray, p: int, q: int, s: int, dist, cfg: FitConfig) -> SfiegarchSpec:
    omega, theta, gamma_mag = u[0], u[1], u[2]
    off = 3
    if cfg.fix_d is None:
        d = _d_from_u(u[3])
        off = 4
    else:
        d = cfg.fix_d
    alpha = tuple(u[off : off + p])
    beta = tuple(u[off + p : off + p + q])
    return SfiegarchSpec(
        omega=float(omega),
        theta=float(theta),
        gamma_mag=float(gamma_mag),
        d=float(d),
        s=s,
        alpha=alpha,
        beta=beta,
        innovation=dist,
    )


def _beta_penalty(spec: SfiegarchSpec, cfg: FitConfig) -> float:
    if spec.q == 0:
        return 0.0
    moduli = poly_root_moduli(spec.beta_poly())
    if moduli.size == 0:
        return 0.0
    breach = max(0.0, 1.0 + cfg.root_margin - float(moduli.min()))
    return cfg.penalty_weight * breach * breach


def natural_params(spec: SfiegarchSpec, cfg: FitConfig) -> tuple:
    names = ["omega", "theta", "gamma"]
    vals = [spec.omega, spec.theta, spec.gamma_mag]
    if cfg.fix_d is None:
        names.append("d")
        vals.append(spec.d)
    names += [f"alpha{i+1}" for i in range(spec.p)] + [f"beta{j+1}" for j in range(spec.q)]
    vals += list(spec.alpha) + list(spec.beta)
    return names, np.array(vals, dtype=float)


def _spec_from_natural(vals, p, q, s, dist, cfg: FitConfig) -> SfiegarchSpec:
    omega, theta, gamma_mag = vals[0], vals[1], vals[2]
    off = 3
    d = cfg.fix_d
    if cfg.fix_d is None:
        d = vals[3]
        off = 4
    return SfiegarchSpec(
        omega=float(omega),
        theta=float(theta),
        gamma_mag=float(gamma_mag),
        d=float(d),
        s=s,
        alpha=tuple(vals[off : off + p]),
        beta=tuple(vals[off + p : off + p + q]),
        innovation=dist,
    )


def fit_sfiegarch(
    residuals,
    s: int,
    p: int = 0,
    q: int = 0,
    config: FitConfig | None = None,
    innovation: InnovationDist | None = None,
    start: SfiegarchSpec | None = None,
) -> FitResult:
    """QML fit of the volatility model to mean residuals.

    Derivative-free simplex start refined by BFGS with numerical gradients;
    the transform d = -1 + 1.5*logistic(u) keeps d inside (-1, 0.5) and a
    quadratic penalty keeps the beta roots outside the unit disk.  s = 1 and
    d fixed at 0 reuse this exact code path (FIEGARCH / EGARCH cases).
    """
    x = np.ascontiguousarray(residuals, dtype=float)
    n = x.size
    if n < 10:
        raise InvalidParameterError("need at least 10 observations")
    cfg = config or FitConfig()
    dist = innovation or InnovationDist("gaussian")
    ez = cfg.ez_abs if cfg.ez_abs is not None else SQRT_2_OVER_PI
    lam_m = n - 1  # the likelihood recursion sums at most n-1 coefficient terms

    if start is None:
        start = SfiegarchSpec(
            omega=float(np.log(np.mean(x * x))),
            theta=-0.05,
            gamma_mag=0.2,
            d=0.1 if cfg.fix_d is None else cfg.fix_d,
            s=s,
            alpha=(0.0,) * p,
            beta=(0.0,) * q,
            innovation=dist,
        )

    def objective(u):
        spec = _unpack(u, p, q, s, dist, cfg)
        pen = _beta_penalty(spec, cfg)
        moduli = poly_root_moduli(spec.beta_poly())
        if moduli.size and moduli.min() <= 1e-6:
            return 1e10 + pen
        try:
            lam = lambda_weights(spec, lam_m)
        except UnitRootError:
            return 1e10 + pen
        ll = quasi_loglik(x, spec, ez_abs=ez, lam=lam)
        if not np.isfinite(ll):
            return 1e10 + pen
        return -ll / n + pen

    u0 = _pack(start, cfg)
    nm = minimize(
        objective,
        u0,
        method="Nelder-Mead",
        options={
            # the simplex only has to get past the |z| kink; BFGS does the polish
            "maxiter": min(cfg.max_iter, 150 * u0.size),
            "fatol": max(cfg.tol, 1e-7),
            "xatol": 1e-4,
            "adaptive": u0.size > 6,
        },
    )
    bfgs = minimize(objective, nm.x, method="BFGS", options={"maxiter": cfg.max_iter})
    u_hat = bfgs.x if bfgs.fun <= nm.fun else nm.x
    converged = bool(nm.success or bfgs.success)
    iterations = int(nm.nit + bfgs.nit)

    spec_hat = _unpack(u_hat, p, q, s, dist, cfg)
    lam = lambda_weights(spec_hat, lam_m)
    loglik, contrib, lnsig, z = quasi_loglik(x, spec_hat, ez_abs=ez, lam=lam, per_obs=True)

    names, vals = natural_params(spec_hat, cfg)

    def per_obs_ll(v):
        spec_v = _spec_from_natural(v, p, q, s, dist, cfg)
        if not (-1.0 < spec_v.d < 0.5):
            return np.full(n, np.nan)
        moduli = poly_root_moduli(spec_v.beta_poly())
        if moduli.size and moduli.min() <= 1.0:
            return np.full(n, np.nan)
        _, c, _, _ = quasi_loglik(x, spec_v, ez_abs=ez, per_obs=True)
        return c

    cov, cov_flags = robust_covariance(per_obs_ll, vals)
    se = dict(zip(names, np.sqrt(np.maximum(np.diag(cov), 0.0))))
    k = vals.size
    aic, bic, hqc = info_criteria(loglik, k, n)
    report = validate(spec_hat)
    if not report.ok:
        warnings.warn(f"fitted spec violates side conditions: {report.violations}")

    return FitResult(
        spec_hat=spec_hat,
        arma_hat=None,
        loglik=loglik,
        cov_robust=cov,
        se=se,
        aic=aic,
        bic=bic,
        hqc=hqc,
        residuals_x=x,
        residuals_z=z,
        sigma2_fitted=np.exp(lnsig),
        converged=converged,
        iterations=iterations,
        param_names=names,
        ez_abs=ez,
        cov_flags=cov_flags,
        n_obs=n,
    )


def fit_two_step(
    data,
    s: int,
    p: int = 0,
    q: int = 0,
    ar_lags=(),
    ma_lags=(),
    include_mean: bool = True,
    config: FitConfig | None = None,
    innovation: InnovationDist | None = None,
) -> FitResult:
    """ARMA mean fit followed by SFIEGARCH fit on its residuals."""
    arma_fit = fit_arma(data, ar_lags, ma_lags, include_mean=include_mean)
    result = fit_sfiegarch(arma_fit.residuals, s, p, q, config=config, innovation=innovation)
    result.arma_hat = arma_fit.arma
    result.returns = np.asarray(data, dtype=float)
    return result


# ---------------------------------------------------------------------------
# inference helpers


def robust_covariance(per_obs_loglik, params, eps: float = 1e-4):
    """Sandwich covariance (-H)^-1 B (-H)^-1 from finite differences.

    H is the Hessian of the total log-likelihood (central differences of the
    central-difference gradient); B is the outer product of per-observation
    score contributions.  A singular H falls back to the pseudo-inverse with a
    warning flag.
    """
    params = np.asarray(params, dtype=float)
    k = params.size
    h = eps * np.maximum(1.0, np.abs(params))
    flags = []

    def grad_and_scores(at):
        scores = []
        for j in range(k):
            step = np.zeros(k)
            step[j] = h[j]
            up = per_obs_loglik(at + step)
            dn = per_obs_loglik(at - step)
            scores.append((up - dn) / (2.0 * h[j]))
        return np.column_stack(scores)  # n x k per-observation scores

    s0 = grad_and_scores(params)
    if not np.all(np.isfinite(s0)):
        flags.append("scores contain non-finite values")
        s0 = np.nan_to_num(s0)
    b_mat = s0.T @ s0

    hess = np.empty((k, k))
    for j in range(k):
        step = np.zeros(k)
        step[j] = h[j]
        g_up = grad_and_scores(params + step).sum(axis=0)
        g_dn = grad_and_scores(params - step).sum(axis=0)
        hess[:, j] = (g_up - g_dn) / (2.0 * h[j])
    hess = 0.5 * (hess + hess.T)

    neg_h = -hess
    try:
        h_inv = np.linalg.inv(neg_h)
    except np.linalg.LinAlgError:
        h_inv = np.linalg.pinv(neg_h)
        flags.append("singular Hessian: pseudo-inverse used")
        warnings.warn("singular Hessian in robust covariance; pseudo-inverse used")
    cov = h_inv @ b_mat @ h_inv
    cov = 0.5 * (cov + cov.T)
    return cov, flags


def info_criteria(loglik: float, k: int, n: int) -> tuple:
    """(AIC, BIC, HQC) = (-2L + 2k, -2L + k ln n, -2L + 2k ln ln n)."""
    if n <= k:
        raise InvalidParameterError("need n > k")
    neg2 = -2.0 * loglik
    aic = neg2 + 2.0 * k
    bic = neg2 + k * math.log(n) if n > 0 else math.nan
    hqc = neg2 + 2.0 * k * math.log(math.log(n)) if n > 2 else math.nan
    return aic, bic, hqc
