"""Seasonal fractionally integrated exponential GARCH toolkit.

Coefficient expansions, simulation, second-order theory (autocovariances and
spectra of the log-squared process), quasi-maximum-likelihood estimation,
exact h-step volatility forecasting with mean-square errors, and
forecast-evaluation statistics.
"""

__version__ = "0.1.0"

from ._backend import BACKEND, USE_NUMBA
from .model import (
    ArmaSpec,
    InnovationDist,
    SfiegarchSpec,
    special_case_of,
    spec_from_json,
    spec_to_json,
    validate,
)
from .coeffs import (
    CoeffTable,
    arma_psi_weights,
    arma_ratio_coeffs,
    build_coeff_table,
    default_truncation,
    inverse_lambda,
    lambda_asymptotic,
    lambda_recurrence,
    lambda_weights,
    seasonal_pi,
    truncation_bound,
)
from .innovations import InnovationMoments, abs_mean, g_mgf, ln_sq_moments, moments, sample
from .simulate import SimPath, simulate_returns, simulate_sfiegarch
from .acov import (
    AcovReport,
    acov_ln_x2,
    acov_report,
    gamma_arma,
    gamma_ln_sigma2,
    gamma_ln_x2,
    gamma_seasonal,
    kurtosis_asymmetry,
    unconditional_moment,
)
from .spectral import periodogram, spectral_ln_sigma2, spectral_ln_x2
from .estimate import (
    FitConfig,
    FitResult,
    fit_arma,
    fit_sfiegarch,
    fit_two_step,
    info_criteria,
    quasi_loglik,
    robust_covariance,
)
from .forecast import (
    ForecastSet,
    aggregate_horizon,
    forecast_ln_sigma2,
    forecast_r,
    forecast_r2,
    forecast_set,
    forecast_sigma2,
)
from .evaluate import (
    cumulative_periodogram,
    density_transform_test,
    diebold_mariano,
    error_measures,
    mincer_zarnowitz,
    portmanteau,
    predictive_loglik,
    realized_volatility,
)
