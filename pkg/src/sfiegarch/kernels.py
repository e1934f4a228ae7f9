"""Hot sequential recursions, in numba and pure-numpy flavours.

Both flavours are importable at all times (the benchmark compares them); the
unsuffixed names are bound to the flavour selected by SFIEGARCH_BACKEND.

``egarch_filter`` is the volatility filter of the quasi-likelihood: from mean
residuals x and a lambda table it produces ln(sigma_t^2) and standardized
residuals z_t, with the convention g(z_t) = 0 before the sample start.
``arma_residuals`` is the sparse constrained-ARMA residual recursion with
pre-sample values r = rbar and x = 0.
"""

import numpy as np

from ._backend import USE_NUMBA, jit_kernel

LN_SIGMA2_CAP = 700.0  # exp() overflow guard; reaching it flags a rejected point


def egarch_filter_numpy(x, lam, omega, theta, gamma_mag, ez_abs):
    n = x.shape[0]
    lnsig = np.empty(n)
    z = np.empty(n)
    u = np.empty(n)
    for t in range(n):
        acc = omega
        if t > 0:
            acc += float(np.dot(lam[:t], u[t - 1 :: -1]))
        if acc > LN_SIGMA2_CAP:
            acc = LN_SIGMA2_CAP
        elif acc < -LN_SIGMA2_CAP:
            acc = -LN_SIGMA2_CAP
        lnsig[t] = acc
        zt = x[t] * np.exp(-0.5 * acc)
        z[t] = zt
        u[t] = theta * zt + gamma_mag * (abs(zt) - ez_abs)
    return lnsig, z


def _egarch_filter_loop(x, lam, omega, theta, gamma_mag, ez_abs):  # pragma: no cover
    n = x.shape[0]
    lnsig = np.empty(n)
    z = np.empty(n)
    u = np.empty(n)
    for t in range(n):
        acc = omega
        for k in range(t):
            acc += lam[k] * u[t - 1 - k]
        if acc > LN_SIGMA2_CAP:
            acc = LN_SIGMA2_CAP
        elif acc < -LN_SIGMA2_CAP:
            acc = -LN_SIGMA2_CAP
        lnsig[t] = acc
        zt = x[t] * np.exp(-0.5 * acc)
        z[t] = zt
        u[t] = theta * zt + gamma_mag * (abs(zt) - ez_abs)
    return lnsig, z


egarch_filter_numba = jit_kernel(_egarch_filter_loop)
egarch_filter = egarch_filter_numba if USE_NUMBA else egarch_filter_numpy


def arma_residuals_numpy(r, mu, ar_lags, ar_coefs, ma_lags, ma_coefs, rbar):
    n = r.shape[0]
    x = np.empty(n)
    dm = r - mu
    dbar = rbar - mu
    for t in range(n):
        acc = dm[t]
        for i in range(ar_lags.shape[0]):
            idx = t - ar_lags[i]
            acc -= ar_coefs[i] * (dm[idx] if idx >= 0 else dbar)
        for j in range(ma_lags.shape[0]):
            idx = t - ma_lags[j]
            if idx >= 0:
                acc -= ma_coefs[j] * x[idx]
        x[t] = acc
    return x


def _arma_residuals_loop(r, mu, ar_lags, ar_coefs, ma_lags, ma_coefs, rbar):  # pragma: no cover
    n = r.shape[0]
    x = np.empty(n)
    dbar = rbar - mu
    for t in range(n):
        acc = r[t] - mu
        for i in range(ar_lags.shape[0]):
            idx = t - ar_lags[i]
            if idx >= 0:
                acc -= ar_coefs[i] * (r[idx] - mu)
            else:
                acc -= ar_coefs[i] * dbar
        for j in range(ma_lags.shape[0]):
            idx = t - ma_lags[j]
            if idx >= 0:
                acc -= ma_coefs[j] * x[idx]
        x[t] = acc
    return x


arma_residuals_numba = jit_kernel(_arma_residuals_loop)
arma_residuals = arma_residuals_numba if USE_NUMBA else arma_residuals_numpy
