"""Sample-path generation.

The log-variance is the causal moving average

    ln(sigma_t^2) - omega = sum_{k=0}^{m} lambda_{d,k} g(Z_{t-1-k}),

truncated at m terms.  Since the shocks g(Z_t) are exogenous to the
log-variance, the whole path is a single linear convolution and is computed
by FFT; only the mean-equation recursion (which feeds back) is sequential.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import fftconvolve, lfilter

from .coeffs import default_truncation, lambda_weights
from .errors import InvalidParameterError
from .innovations import abs_mean, sample
from .model import ArmaSpec, SfiegarchSpec


@dataclass(frozen=True)
class SimPath:
    """One simulated path; x = sigma * z elementwise by construction."""

    x: np.ndarray
    sigma2: np.ndarray
    z: np.ndarray
    ln_sigma2: np.ndarray
    burn_in: int
    m_trunc: int
    seed: object


def simulate_sfiegarch(
    spec: SfiegarchSpec,
    n: int,
    burn_in: int | None = None,
    m_trunc: int | None = None,
    seed=None,
) -> SimPath:
    """Simulate n observations of (X_t, sigma_t^2).

    burn_in defaults to m_trunc so that every emitted point sees a full
    coefficient window.  Deterministic under a fixed seed.
    """
    if n < 1:
        raise InvalidParameterError("n must be >= 1")
    if spec.d >= 0.5:
        raise InvalidParameterError("the process exists only for d < 0.5")
    if m_trunc is None:
        m_trunc = default_truncation(spec)
    if burn_in is None:
        burn_in = m_trunc

    lam = lambda_weights(spec, m_trunc)
    total = n + burn_in
    z = sample(spec.innovation, total, seed)
    u = spec.theta * z + spec.gamma_mag * (np.abs(z) - abs_mean(spec.innovation))

    conv = fftconvolve(u, lam)[:total]
    ln_sigma2 = np.empty(total)
    ln_sigma2[0] = spec.omega  # no past shocks inside the window yet
    ln_sigma2[1:] = spec.omega + conv[: total - 1]

    sigma = np.exp(0.5 * ln_sigma2)
    x = sigma * z
    sl = slice(burn_in, total)
    return SimPath(
        x=x[sl],
        sigma2=(sigma[sl]) ** 2,
        z=z[sl],
        ln_sigma2=ln_sigma2[sl],
        burn_in=burn_in,
        m_trunc=m_trunc,
        seed=seed,
    )


def simulate_returns(arma: ArmaSpec, path: SimPath) -> np.ndarray:
    """Filter a simulated shock series through the constrained ARMA mean.

    r_t = mu + sum phi_k (r_{t-k} - mu) + sum vartheta_j X_{t-j} + X_t with
    pre-sample values r_t = mu and X_t = 0, i.e. zero initial filter state.
    """
    x = np.asarray(path.x, dtype=float)
    return arma.mu + lfilter(arma.ma_poly(), arma.ar_poly(), x)
