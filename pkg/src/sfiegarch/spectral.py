"""Spectral densities of the log-variance and log-squared processes.

    f_lnsig2(w) = (sigma_g^2 / 2pi) |alpha(e^{-iw})/beta(e^{-iw})|^2 [2 sin(s w/2)]^{-2d}
    f_lnx2(w)   = f_lnsig2(w) + (C1/pi) Re(e^{-iw} Lambda(w)) + Var(ln Z^2)/(2pi)

with Lambda(w) = lambda(e^{-iw}) evaluated from a truncated coefficient table.
For d > 0 the density has integrable poles at the seasonal frequencies
2 pi k / s; evaluation there returns +inf.
"""

from __future__ import annotations

import numpy as np
from scipy.integrate import quad

from .coeffs import default_truncation, lambda_weights
from .errors import InvalidParameterError
from .innovations import moments
from .model import SfiegarchSpec


def seasonal_pole_mask(spec: SfiegarchSpec, freq, tol: float = 1e-12) -> np.ndarray:
    """True where freq sits on a seasonal pole frequency 2 pi k / s (d > 0 only)."""
    w = np.atleast_1d(np.asarray(freq, dtype=float))
    if spec.d <= 0.0:
        return np.zeros(w.shape, dtype=bool)
    return np.abs(np.sin(0.5 * spec.s * w)) < tol


def _poly_at_unit_circle(coefs: np.ndarray, w: np.ndarray) -> np.ndarray:
    z = np.exp(-1j * w)
    out = np.zeros_like(z)
    for c in coefs[::-1]:
        out = out * z + c
    return out


def spectral_ln_sigma2(spec: SfiegarchSpec, freq) -> np.ndarray:
    """f_lnsig2 on a scalar or array of frequencies in [0, pi].

    Poles (seasonal frequencies with d > 0) evaluate to +inf.
    """
    if spec.d >= 0.5:
        raise InvalidParameterError("spectral density requires d < 0.5")
    w = np.atleast_1d(np.asarray(freq, dtype=float))
    sg2 = moments(spec.innovation, spec.theta, spec.gamma_mag).sigma_g_sq
    ratio = np.abs(
        _poly_at_unit_circle(spec.alpha_poly(), w) / _poly_at_unit_circle(spec.beta_poly(), w)
    )
    sin_part = 2.0 * np.abs(np.sin(0.5 * spec.s * w))
    on_pole = sin_part < 2e-12  # roundoff at the seasonal frequencies counts as the pole
    with np.errstate(divide="ignore"):
        frac = np.where(on_pole, np.nan, sin_part) ** (-2.0 * spec.d)
    # limit at the pole: +inf for d > 0, 0 for d < 0, 1 for d = 0
    at_pole = np.inf if spec.d > 0 else (0.0 if spec.d < 0 else 1.0)
    frac = np.where(on_pole, at_pole, frac)
    out = sg2 / (2.0 * np.pi) * ratio**2 * frac
    return out if np.ndim(freq) else float(out[0])


def lambda_transfer(lam: np.ndarray, freq) -> np.ndarray:
    """Lambda(w) = sum_k lambda_k e^{-ikw} from a truncated table (chunked)."""
    w = np.atleast_1d(np.asarray(freq, dtype=float))
    out = np.zeros(w.size, dtype=complex)
    chunk = max(1, 2**22 // max(1, w.size))
    for start in range(0, lam.size, chunk):
        k = np.arange(start, min(start + chunk, lam.size))
        out += np.exp(-1j * np.outer(w, k)) @ lam[k]
    return out


def spectral_ln_x2(
    spec: SfiegarchSpec, freq, lam: np.ndarray | None = None, m: int | None = None
) -> np.ndarray:
    """f_lnx2 on a scalar or array of frequencies in [0, pi].

    Nonnegative wherever finite; +inf at seasonal poles for d > 0.
    """
    w = np.atleast_1d(np.asarray(freq, dtype=float))
    if lam is None:
        if m is None:
            m = min(default_truncation(spec), 65_536)
        lam = lambda_weights(spec, m)
    mom = moments(spec.innovation, spec.theta, spec.gamma_mag)
    base = np.atleast_1d(spectral_ln_sigma2(spec, w))
    cross = (mom.c1 / np.pi) * np.real(np.exp(-1j * w) * lambda_transfer(lam, w))
    out = base + cross + mom.ln_sq_var / (2.0 * np.pi)
    return out if np.ndim(freq) else float(out[0])


def integrate_spectral_ln_x2(spec: SfiegarchSpec, m: int | None = None) -> float:
    """Numerical integral of f_lnx2 over (-pi, pi].

    The analytic part (pole-singular but smooth elsewhere) goes through
    adaptive Gauss-Kronrod quadrature with the seasonal poles as break
    points; the truncated trigonometric polynomial part (the C1 cross term,
    a degree m+1 cosine polynomial) is integrated by the full-period uniform
    rule, which is exact for it.  By the Herglotz identity the result equals
    the lag-zero autocovariance of ln(X^2).
    """
    if m is None:
        m = min(default_truncation(spec), 65_536)
    lam = lambda_weights(spec, m)
    mom = moments(spec.innovation, spec.theta, spec.gamma_mag)

    poles = [2.0 * np.pi * k / spec.s for k in range(spec.s // 2 + 1)]
    poles = [w for w in poles if w <= np.pi + 1e-12]
    base, _ = quad(
        lambda w: float(spectral_ln_sigma2(spec, w)),
        0.0,
        np.pi,
        points=poles,
        limit=400,
        epsabs=1e-12,
        epsrel=1e-10,
    )
    n_grid = 1 << int(np.ceil(np.log2(4 * (m + 2))))
    w = 2.0 * np.pi * np.arange(n_grid) / n_grid
    transfer = np.fft.fft(lam, n_grid)  # Lambda(w_j) on the uniform full-period grid
    cross = (mom.c1 / np.pi) * np.real(np.exp(-1j * w) * transfer)
    cross_int = float(np.mean(cross)) * 2.0 * np.pi
    return 2.0 * base + cross_int + mom.ln_sq_var


def periodogram(series) -> tuple:
    """I(w_j) = |sum_t x_t e^{-i w_j t}|^2 / (2 pi n) at Fourier frequencies.

    Returns (freqs, power) for w_j = 2 pi j / n, j = 0..floor(n/2).
    """
    x = np.asarray(series, dtype=float)
    n = x.size
    if n < 2:
        raise InvalidParameterError("periodogram needs at least 2 observations")
    spec_fft = np.fft.rfft(x)
    power = np.abs(spec_fft) ** 2 / (2.0 * np.pi * n)
    freqs = 2.0 * np.pi * np.arange(power.size) / n
    return freqs, power
