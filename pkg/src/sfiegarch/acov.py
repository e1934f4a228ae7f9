"""Closed-form second-order theory and unconditional moments.

The log-variance autocovariance factorizes over the short-memory and seasonal
fractional parts,

    gamma_lnsig2(sh + r) = sum_k gamma_A(sk + r) * gamma_V(s(h - k)),

with gamma_A(h) = sum_i f_i f_{i+|h|} and gamma_V supported on multiples of s.
gamma_V is evaluated through the Gamma-ratio form

    gamma_V(sh) = sigma_g^2 * Gamma(1-2d)/(Gamma(1-d)Gamma(d)) * Gamma(h+d)/Gamma(h+1-d)

(equal to the reflection form with the (-1)^h sign, but free of alternating
Gamma blow-ups at large h).  The observable process adds a news/ln Z^2 cross
term and a white-noise spike:

    gamma_lnx2(h) = gamma_lnsig2(h) + C1 * lambda_{d,|h|-1} * 1{h != 0}
                    + Var(ln Z^2) * 1{h = 0}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.special import gammaln, gamma as _gamma

from .coeffs import arma_ratio_coeffs, default_truncation, lambda_weights
from .errors import InvalidParameterError, MomentDivergenceError
from .innovations import abs_moment, g_mgf, moments
from .model import SfiegarchSpec, poly_root_moduli

_F_TAIL_TOL = 1e-14
_F_MAX_LEN = 200_000


def _f_length(spec: SfiegarchSpec) -> int:
    """Truncation for f_k = [alpha/beta]_k with geometric tail below 1e-14."""
    if spec.q == 0:
        return spec.p + 1
    moduli = poly_root_moduli(spec.beta_poly())
    rho = 1.0 / moduli.min()
    # |f_k| <= C rho^k; crude C from the coefficient magnitudes
    c = max(1.0, np.abs(spec.alpha_poly()).sum() / max(1e-12, 1.0 - rho))
    need = math.log(_F_TAIL_TOL / c) / math.log(rho)
    return int(min(_F_MAX_LEN, max(64, math.ceil(need))))


def f_coeffs(spec: SfiegarchSpec, m: int | None = None) -> np.ndarray:
    if m is None:
        m = _f_length(spec)
    return arma_ratio_coeffs(spec.alpha_poly(), spec.beta_poly(), m)


def gamma_arma(spec: SfiegarchSpec, h: int, f: np.ndarray | None = None) -> float:
    """gamma_A(h) = sum_{i>=0} f_i f_{i+|h|}, truncated below the 1e-14 tail."""
    if f is None:
        f = f_coeffs(spec)
    h = abs(int(h))
    if h >= f.size:
        return 0.0
    return float(np.dot(f[: f.size - h], f[h:]))


def gamma_seasonal(spec: SfiegarchSpec, h: int) -> float:
    """gamma_V(h): zero off multiples of s, Gamma-ratio form on them."""
    if spec.d >= 0.5:
        raise InvalidParameterError("second-order theory requires d < 0.5")
    h = abs(int(h))
    if h % spec.s != 0:
        return 0.0
    j = h // spec.s
    d = spec.d
    sg2 = moments(spec.innovation, spec.theta, spec.gamma_mag).sigma_g_sq
    if d == 0.0:
        return sg2 if j == 0 else 0.0
    if j == 0:
        return sg2 * _gamma(1.0 - 2.0 * d) / _gamma(1.0 - d) ** 2
    # Gamma(1-2d)/(Gamma(1-d)Gamma(d)) = Gamma(1-2d) sin(pi d)/pi; j+d > 0 for j >= 1
    front = sg2 * _gamma(1.0 - 2.0 * d) * math.sin(math.pi * d) / math.pi
    return front * math.exp(gammaln(j + d) - gammaln(j + 1.0 - d))


def gamma_ln_sigma2(spec: SfiegarchSpec, h: int, f: np.ndarray | None = None) -> float:
    """Autocovariance of ln(sigma_t^2) at integer lag h (even in h).

    The outer sum over gamma_A is finite when q = 0 (support |sk + r| <= p)
    and truncated at the geometric 1e-14 tail otherwise.
    """
    if f is None:
        f = f_coeffs(spec)
    h = abs(int(h))
    s = spec.s
    hq, r = divmod(h, s)
    m_f = f.size - 1
    k_lo = -((m_f + r) // s)
    k_hi = (m_f - r) // s
    total = 0.0
    for k in range(k_lo, k_hi + 1):
        ga = gamma_arma(spec, s * k + r, f)
        if ga != 0.0:
            total += ga * gamma_seasonal(spec, s * (hq - k))
    return total


def gamma_ln_x2(
    spec: SfiegarchSpec,
    h: int,
    lam: np.ndarray | None = None,
    lambda_trunc: int | None = None,
    f: np.ndarray | None = None,
) -> float:
    """Autocovariance of ln(X_t^2) at lag h.

    Default is the exact closed form.  When ``lambda_trunc=m`` is given, the
    ln(sigma^2) part is instead the truncated MA(infinity) sum
    sigma_g^2 * sum_{k=0}^{m-|h|} lambda_k lambda_{k+|h|}; this reproduces the
    finite-truncation regime of published reference values.
    """
    mom = moments(spec.innovation, spec.theta, spec.gamma_mag)
    h = abs(int(h))
    if lambda_trunc is not None:
        if lam is None or lam.size < lambda_trunc + 1:
            lam = lambda_weights(spec, lambda_trunc)
        lam = lam[: lambda_trunc + 1]
        base = mom.sigma_g_sq * float(np.dot(lam[: lam.size - h], lam[h:]))
    else:
        base = gamma_ln_sigma2(spec, h, f)
    if h == 0:
        return base + mom.ln_sq_var
    if lam is None:
        lam = lambda_weights(spec, h)
    return base + mom.c1 * float(lam[h - 1])


def acov_ln_x2(spec: SfiegarchSpec, max_lag: int, lambda_trunc: int | None = None) -> np.ndarray:
    """gamma_lnx2 at lags 0..max_lag sharing one coefficient table."""
    m = max(max_lag, lambda_trunc or 0)
    lam = lambda_weights(spec, m)
    f = f_coeffs(spec)
    return np.array(
        [gamma_ln_x2(spec, h, lam=lam, lambda_trunc=lambda_trunc, f=f) for h in range(max_lag + 1)]
    )


@dataclass(frozen=True)
class AcovReport:
    """Autocovariance families on 0..max_lag plus the hyperbolic-tail constants.

    The per-season lag sums sum_r gamma_lnx2(s*h + r) decay along two
    channels: the log-variance channel var_tail * h^(2d-1) (dominant for
    d > 0) and the news/ln Z^2 cross channel cross_tail * h^(d-1) (dominant
    for d < 0).  Both constants are the limiting values of the respective
    decay laws.
    """

    gamma_arma: np.ndarray
    gamma_seasonal: np.ndarray
    gamma_ln_sigma2: np.ndarray
    gamma_ln_x2: np.ndarray
    max_lag: int
    var_tail: float
    cross_tail: float


def acov_report(spec: SfiegarchSpec, max_lag: int) -> AcovReport:
    f = f_coeffs(spec)
    lam = lambda_weights(spec, max(max_lag, 1))
    lags = range(max_lag + 1)
    g_a = np.array([gamma_arma(spec, h, f) for h in lags])
    g_v = np.array([gamma_seasonal(spec, h) for h in lags])
    g_ls = np.array([gamma_ln_sigma2(spec, h, f) for h in lags])
    g_lx = np.array([gamma_ln_x2(spec, h, lam=lam, f=f) for h in lags])
    mom = moments(spec.innovation, spec.theta, spec.gamma_mag)
    d = spec.d
    if d != 0.0:
        sum_gamma_a = gamma_arma(spec, 0, f) + 2.0 * sum(
            gamma_arma(spec, h, f) for h in range(1, f.size)
        )
        gain = float(np.sum(spec.alpha_poly()) / np.sum(spec.beta_poly()))
        var_tail = mom.sigma_g_sq * _gamma(1 - 2 * d) / (_gamma(1 - d) * _gamma(d)) * sum_gamma_a
        cross_tail = mom.c1 * gain / _gamma(d)
    else:
        var_tail = 0.0
        cross_tail = 0.0
    return AcovReport(
        gamma_arma=g_a,
        gamma_seasonal=g_v,
        gamma_ln_sigma2=g_ls,
        gamma_ln_x2=g_lx,
        max_lag=max_lag,
        var_tail=var_tail,
        cross_tail=cross_tail,
    )


class UnconditionalMoment(NamedTuple):
    abs_x: float  # E|X_t|^r
    sigma: float  # E(sigma_t^r)


def _log_mgf_product(spec: SfiegarchSpec, b_scale: float, lam: np.ndarray) -> float:
    """sum_k ln E exp{b_scale * lambda_k * g(Z)} with a divergence detector.

    Convergent long-memory tails shrink geometrically across dyadic blocks
    (block sums scale like 2^{j(2d-1)}); a non-shrinking block sum signals a
    divergent product and raises MomentDivergenceError.
    """
    vals = g_mgf(spec.innovation, b_scale * lam, spec.theta, spec.gamma_mag)
    vals = np.asarray(vals, dtype=float)
    if not np.all(np.isfinite(vals)) or np.any(vals <= 0.0):
        raise MomentDivergenceError("moment product overflowed; moment does not exist")
    logs = np.log(vals)
    n = lam.size
    if n >= 16:
        b1 = float(np.sum(logs[n // 4 : n // 2]))
        b2 = float(np.sum(logs[n // 2 :]))
        if abs(b2) > 1e-10 and abs(b2) >= 0.98 * abs(b1):
            raise MomentDivergenceError(
                "moment product tail is not shrinking at the working truncation; "
                "the moment is infinite or m is far too small"
            )
    return float(np.sum(logs))


def unconditional_moment(
    spec: SfiegarchSpec, r: float, m: int | None = None
) -> UnconditionalMoment:
    """E|X_t|^r and E(sigma_t^r) via the truncated infinite product

        E(sigma_t^r) = e^{r omega/2} prod_k E exp{(r/2) lambda_{d,k} g(Z_0)}.

    Raises MomentDivergenceError when the log-product fails the Cauchy check.
    """
    if spec.d >= 0.5:
        raise InvalidParameterError("moments require d < 0.5")
    if m is None:
        m = default_truncation(spec)
    lam = lambda_weights(spec, m)
    log_prod = _log_mgf_product(spec, 0.5 * r, lam)
    e_sigma = math.exp(0.5 * r * spec.omega + log_prod)
    return UnconditionalMoment(abs_x=abs_moment(spec.innovation, r) * e_sigma, sigma=e_sigma)


def kurtosis_asymmetry(spec: SfiegarchSpec, m: int | None = None) -> tuple:
    """(K_X, A_X):

        K_X = E(Z^4) prod_k E e^{2 lam_k g} / prod_k [E e^{lam_k g}]^2,
        A_X = E(Z^3) prod_k E e^{1.5 lam_k g} / prod_k [E e^{lam_k g}]^{3/2}.
    """
    if m is None:
        m = default_truncation(spec)
    lam = lambda_weights(spec, m)
    mom = moments(spec.innovation, spec.theta, spec.gamma_mag)
    log1 = _log_mgf_product(spec, 1.0, lam)
    log2 = _log_mgf_product(spec, 2.0, lam)
    kurt = mom.z4 * math.exp(log2 - 2.0 * log1)
    if mom.z3 == 0.0:
        asym = 0.0
    else:
        log15 = _log_mgf_product(spec, 1.5, lam)
        asym = mom.z3 * math.exp(log15 - 1.5 * log1)
    return kurt, asym
