"""Power-series coefficient families of the volatility filter.

Everything here expands operators of the form alpha(z) (1 - z^s)^(-d) / beta(z)
into truncated coefficient sequences:

* ``seasonal_pi``      -- pi_{d,k}, the pure seasonal fractional factor,
* ``arma_ratio_coeffs``-- f_k of alpha(z)/beta(z),
* ``lambda_weights``   -- lambda_{d,k} (fast two-stage builder),
* ``lambda_recurrence``-- lambda_{d,k} by the direct recurrence,
* ``inverse_lambda``   -- coefficients of beta(z) (1 - z^s)^d / alpha(z),
* ``arma_psi_weights`` -- MA(infinity) weights of the mean-equation ARMA.

The seasonal fractional coefficients are generated with the stable ratio
recursion delta_{j+1} = delta_j * (j + d) / (j + 1); the Gamma function never
gets evaluated at a large argument.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter
from scipy.special import gamma as _gamma

from ._backend import jit_kernel
from .errors import (
    CommonRootError,
    InvalidParameterError,
    NotInvertibleError,
    UnitRootError,
)
from .model import ROOT_MARGIN, ArmaSpec, SfiegarchSpec, poly_root_moduli

CONV_TOL = 1e-10


def seasonal_pi(d: float, s: int, m: int) -> np.ndarray:
    """Coefficients pi_{d,0..m} of (1 - z^s)^(-d).

    pi_{d,k} = 0 off multiples of s and pi_{d,sj} = Gamma(j+d)/(Gamma(j+1)Gamma(d)),
    computed via the ratio recursion delta_0 = 1, delta_{j+1} = delta_j (j+d)/(j+1).
    """
    if not math.isfinite(d):
        raise InvalidParameterError("d must be finite")
    if s < 1 or m < 0:
        raise InvalidParameterError("need s >= 1 and m >= 0")
    out = np.zeros(m + 1)
    nsea = m // s
    j = np.arange(nsea, dtype=float)
    if nsea >= 1:
        with np.errstate(divide="ignore"):  # j + d = 0 maps to a clean zero weight
            logs = np.cumsum(np.log(np.abs(j + d)) - np.log(j + 1.0))
        signs = np.cumprod(np.sign(j + d))
        out[s * np.arange(1, nsea + 1)] = signs * np.exp(logs)
    out[0] = 1.0
    return out


def seasonal_delta(d: float, s: int, m: int) -> np.ndarray:
    """Coefficients of (1 - z^s)^(+d), i.e. seasonal_pi(-d, s, m)."""
    return seasonal_pi(-d, s, m)


def _check_beta_invertible(beta_poly: np.ndarray, what: str = "beta") -> None:
    moduli = poly_root_moduli(beta_poly)
    if moduli.size and moduli.min() <= 1.0 + ROOT_MARGIN:
        raise UnitRootError(
            f"{what}(z) has a root of modulus {moduli.min():.6g} in the closed unit disk"
        )


def arma_ratio_coeffs(alpha_poly, beta_poly, m: int) -> np.ndarray:
    """Power-series coefficients f_0..f_m of alpha(z)/beta(z).

    Both arguments are increasing-power coefficient arrays with constant term 1.
    """
    a = np.asarray(alpha_poly, dtype=float)
    b = np.asarray(beta_poly, dtype=float)
    _check_beta_invertible(b)
    res = _poly_resultant(a, b)
    if res is not None and abs(res) < 1e-10:
        raise CommonRootError("alpha and beta share a root; the ratio is degenerate")
    impulse = np.zeros(m + 1)
    impulse[0] = 1.0
    return _flush_subnormals(lfilter(a, b, impulse))


def _poly_resultant(a, b):
    from .model import resultant

    a = np.trim_zeros(np.asarray(a, dtype=float), "b")
    b = np.trim_zeros(np.asarray(b, dtype=float), "b")
    if a.size <= 1 or b.size <= 1:
        return None
    return resultant(a, b)


_SUBNORMAL_FLOOR = 2.3e-308


def _flush_subnormals(arr: np.ndarray) -> np.ndarray:
    """Zero out denormal coefficients; they are numerically meaningless and
    make the likelihood recursions pathologically slow on x86."""
    arr[np.abs(arr) < _SUBNORMAL_FLOOR] = 0.0
    return arr


def lambda_weights(spec: SfiegarchSpec, m: int) -> np.ndarray:
    """lambda_{d,0..m} of alpha(z)(1-z^s)^(-d)/beta(z), two-stage O(m(p+q)) build.

    Stage one convolves alpha(z) with the seasonal fractional series; stage two
    solves beta(z)*lambda(z) = alpha(z)(1-z^s)^(-d) by linear recursion.
    Identical to `lambda_recurrence` (checked in the test suite) but usable at
    the simulation-scale truncations of order 10^6.
    """
    _check_beta_invertible(spec.beta_poly())
    pi = seasonal_pi(spec.d, spec.s, m)
    c = np.convolve(spec.alpha_poly(), pi)[: m + 1]
    if spec.q == 0:
        return c
    return _flush_subnormals(lfilter([1.0], spec.beta_poly(), c))


def _lambda_recurrence_py(alpha, beta, w, m):
    lam = np.zeros(m + 1)
    lam[0] = 1.0
    p = alpha.shape[0]
    for k in range(1, m + 1):
        acc = -alpha[k - 1] if k <= p else 0.0
        acc += float(np.dot(lam[:k], w[k:0:-1]))
        lam[k] = acc
    return lam


def _lambda_recurrence_kernel(alpha, beta, w, m):  # pragma: no cover - jit twin
    lam = np.zeros(m + 1)
    lam[0] = 1.0
    p = alpha.shape[0]
    for k in range(1, m + 1):
        acc = -alpha[k - 1] if k <= p else 0.0
        for i in range(k):
            wk = w[k - i]
            if wk != 0.0:
                acc += lam[i] * wk
        lam[k] = acc
    return lam


_lambda_recurrence_jit = jit_kernel(_lambda_recurrence_kernel)


def _recurrence_inner_weights(spec: SfiegarchSpec, m: int) -> np.ndarray:
    """w_u = sum_{j=0}^{min(u,q)} beta_j^* delta*_{d,(u-j)/s} with beta_0^* = -1."""
    delta = seasonal_delta(spec.d, spec.s, m)
    w = -delta.copy()
    for j, bj in enumerate(spec.beta, start=1):
        w[j:] += bj * delta[: m + 1 - j]
    w[0] = 0.0  # the recurrence only sees u = k - i >= 1
    return w


def lambda_recurrence(spec: SfiegarchSpec, m: int, use_jit: bool = True) -> np.ndarray:
    """lambda_{d,0..m} by the direct recurrence.

    lambda_{d,0} = 1; for k >= 1,

        lambda_{d,k} = -alpha_k * 1{k <= p}
                       + sum_{i=0}^{k-1} lambda_{d,i}
                         sum_{j=0}^{min(k-i,q)} beta_j^* delta*_{d,(k-i-j)/s},

    where delta*_{d,m} vanishes off integer seasonal index.  O(m^2); prefer
    `lambda_weights` for large truncations.
    """
    if m < 0:
        raise InvalidParameterError("m must be >= 0")
    _check_beta_invertible(spec.beta_poly())
    alpha = np.asarray(spec.alpha, dtype=float)
    beta = np.asarray(spec.beta, dtype=float)
    w = _recurrence_inner_weights(spec, m)
    fn = _lambda_recurrence_jit if use_jit else _lambda_recurrence_py
    return fn(alpha, beta, w, m)


def tau_weights(spec: SfiegarchSpec, m: int) -> np.ndarray:
    """tau_0..tau_m of beta(z)(1-z^s)^d; convolving with lambda recovers alpha."""
    return np.convolve(spec.beta_poly(), seasonal_delta(spec.d, spec.s, m))[: m + 1]


def inverse_lambda(spec: SfiegarchSpec, m: int) -> np.ndarray:
    """Coefficients of the inverse filter beta(z)(1-z^s)^d / alpha(z).

    Requires d in (-1, 0.5) and alpha(z) free of roots in the closed unit disk;
    the convolution with `lambda_weights` telescopes to (1, 0, 0, ...).
    """
    if not (-1.0 < spec.d < 0.5):
        raise NotInvertibleError(f"invertibility requires d in (-1, 0.5), got d={spec.d}")
    try:
        _check_beta_invertible(spec.alpha_poly(), what="alpha")
    except UnitRootError as exc:
        raise UnitRootError(f"inverse filter needs alpha(z) invertible: {exc}") from exc
    c = np.convolve(spec.beta_poly(), seasonal_delta(spec.d, spec.s, m))[: m + 1]
    if spec.p == 0:
        return c
    return _flush_subnormals(lfilter([1.0], spec.alpha_poly(), c))


def arma_psi_weights(arma: ArmaSpec, m: int) -> np.ndarray:
    """MA(infinity) weights psi_0..psi_m of the mean equation, psi_0 = 1."""
    ar_poly = arma.ar_poly()
    _check_beta_invertible(ar_poly, what="AR polynomial")
    impulse = np.zeros(m + 1)
    impulse[0] = 1.0
    return _flush_subnormals(lfilter(arma.ma_poly(), ar_poly, impulse))


def arma_gain_ratio(spec: SfiegarchSpec) -> float:
    """alpha(1)/beta(1), the long-run gain of the short-memory factor."""
    num = float(np.sum(spec.alpha_poly()))
    den = float(np.sum(spec.beta_poly()))
    return num / den


def lambda_asymptotic(spec: SfiegarchSpec, k: int, r: int = 0) -> float:
    """Closed-form large-k approximation of lambda_{d, s*k + r}.

    Returns s^(1-d) / (Gamma(d) * (s*k+r)^(1-d)) * alpha(1)/beta(1).  A rough
    approximation intended for truncation sizing and tail diagnostics only;
    never used inside likelihood or forecast recursions.
    """
    if spec.d >= 0.5:
        raise InvalidParameterError("asymptotic form requires d < 0.5")
    if not (0 <= r < spec.s) or k < 1:
        raise InvalidParameterError("need 0 <= r < s and k >= 1")
    ratio = arma_gain_ratio(spec)
    if ratio == 0.0:
        return 0.0
    flat = spec.s * k + r
    return spec.s ** (1.0 - spec.d) / (_gamma(spec.d) * flat ** (1.0 - spec.d)) * ratio


def truncation_bound(spec: SfiegarchSpec, eps: float) -> float:
    """Truncation point m with |lambda_{d,m}| < eps via the asymptotic form.

    m ~ s * [ |alpha(1)/beta(1)| / (|Gamma(d)| eps) ]^(1/(1-d)).
    Blows up as d -> 0.5; callers should cap it (see `default_truncation`).
    """
    if spec.d >= 0.5:
        raise InvalidParameterError("truncation bound requires d < 0.5")
    if eps <= 0:
        raise InvalidParameterError("eps must be positive")
    ratio = abs(arma_gain_ratio(spec))
    if ratio == 0.0 or spec.d == 0.0:
        return float(max(spec.p, spec.q) + spec.s)
    base = ratio / (abs(_gamma(spec.d)) * eps)
    return spec.s * base ** (1.0 / (1.0 - spec.d))


TRUNCATION_CAP = 10**6


def default_truncation(spec: SfiegarchSpec, eps: float = 1e-4) -> int:
    """max(5000, asymptotic bound) capped at 1e6 (the bound explodes near d=0.5)."""
    if spec.d >= 0.5:
        return TRUNCATION_CAP
    return int(max(5000, min(truncation_bound(spec, eps), TRUNCATION_CAP)))


@dataclass(frozen=True)
class CoeffTable:
    """Frozen bundle of the coefficient families at one truncation order."""

    lam: np.ndarray
    pi: np.ndarray
    f: np.ndarray
    tau: np.ndarray
    lam_inv: np.ndarray | None
    m: int
    d: float
    s: int


def build_coeff_table(spec: SfiegarchSpec, m: int, with_inverse: bool = True) -> CoeffTable:
    lam = lambda_weights(spec, m)
    pi = seasonal_pi(spec.d, spec.s, m)
    f = arma_ratio_coeffs(spec.alpha_poly(), spec.beta_poly(), m)
    tau = tau_weights(spec, m)
    lam_inv = None
    if with_inverse and -1.0 < spec.d < 0.5:
        alpha_ok = not (
            (moduli := poly_root_moduli(spec.alpha_poly())).size
            and moduli.min() <= 1.0 + ROOT_MARGIN
        )
        if alpha_ok:
            lam_inv = inverse_lambda(spec, m)
    return CoeffTable(lam=lam, pi=pi, f=f, tau=tau, lam_inv=lam_inv, m=m, d=spec.d, s=spec.s)
