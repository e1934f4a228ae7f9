import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import gamma as spgamma

from sfiegarch.acov import (
    acov_report,
    acov_ln_x2,
    f_coeffs,
    gamma_arma,
    gamma_ln_sigma2,
    gamma_ln_x2,
    gamma_seasonal,
    kurtosis_asymmetry,
    unconditional_moment,
)
from sfiegarch.coeffs import lambda_weights
from sfiegarch.errors import InvalidParameterError, MomentDivergenceError
from sfiegarch.innovations import moments
from sfiegarch.model import InnovationDist, SfiegarchSpec
from sfiegarch.simulate import simulate_sfiegarch

from conftest import random_valid_spec


def ma_inf_oracle(spec, h, m=200_000):
    """Richardson-extrapolated truncated MA(infinity) autocovariance of ln sigma^2.

    The truncation tail decays like m^(2d-1); evaluating at m and 2m and
    removing the leading power term leaves an O(m^(2d-2)) remainder.
    """
    lam = lambda_weights(spec, 2 * m)
    sg2 = moments(spec.innovation, spec.theta, spec.gamma_mag).sigma_g_sq
    t1 = sg2 * float(np.dot(lam[: m - h], lam[h:m]))
    t2 = sg2 * float(np.dot(lam[: 2 * m - h], lam[h : 2 * m]))
    rho = 2.0 ** (2.0 * spec.d - 1.0)
    return t2 + (t2 - t1) * rho / (1.0 - rho)


class TestGammaArma:
    def test_white_noise(self):
        spec = SfiegarchSpec(d=0.2, s=2, gamma_mag=0.2)
        assert gamma_arma(spec, 0) == 1.0
        assert gamma_arma(spec, 3) == 0.0

    def test_p1_q0_finite_sum(self):
        a1 = 0.4
        spec = SfiegarchSpec(d=0.2, s=2, gamma_mag=0.2, alpha=(a1,))
        assert gamma_arma(spec, 0) == pytest.approx(1 + a1**2)
        assert gamma_arma(spec, 1) == pytest.approx(-a1)  # f = (1, -a1)
        assert gamma_arma(spec, -1) == gamma_arma(spec, 1)
        assert gamma_arma(spec, 2) == 0.0

    def test_geometric_tail_truncation(self):
        spec = SfiegarchSpec(d=0.2, s=2, gamma_mag=0.2, beta=(0.5,))
        # f_k = 0.5^k: gamma_A(h) = 0.5^h / (1 - 0.25)
        for h in (0, 1, 4):
            assert gamma_arma(spec, h) == pytest.approx(0.5**h / 0.75, rel=1e-12)


class TestGammaSeasonal:
    def test_lag_zero_closed_form(self):
        spec = SfiegarchSpec(d=0.4, s=3, theta=0.25, gamma_mag=0.24)
        sg2 = moments(spec.innovation, 0.25, 0.24).sigma_g_sq
        expect = sg2 * spgamma(0.2) / spgamma(0.6) ** 2
        assert gamma_seasonal(spec, 0) == pytest.approx(expect, rel=1e-13)
        # ARFIMA(0,d,0) brute force: sum pi_k pi_{k+0} * sg2 (Richardson)
        assert ma_inf_oracle(spec, 0, m=200_000) == pytest.approx(expect, rel=5e-7)

    def test_reflection_form_equivalence(self):
        for d in (-0.45, -0.2, 0.15, 0.45):
            spec = SfiegarchSpec(d=d, s=2, theta=0.1, gamma_mag=0.2)
            sg2 = moments(spec.innovation, 0.1, 0.2).sigma_g_sq
            for j in (1, 2, 5, 9):
                refl = sg2 * (-1) ** j * spgamma(1 - 2 * d) / (
                    spgamma(1 - d + j) * spgamma(1 - d - j)
                )
                assert gamma_seasonal(spec, 2 * j) == pytest.approx(refl, rel=1e-11), (d, j)

    def test_white_noise_limit(self):
        spec = SfiegarchSpec(d=0.0, s=3, theta=0.1, gamma_mag=0.2)
        assert gamma_seasonal(spec, 0) == moments(spec.innovation, 0.1, 0.2).sigma_g_sq
        assert gamma_seasonal(spec, 3) == 0.0

    def test_off_seasonal_lags_vanish(self):
        spec = SfiegarchSpec(d=0.3, s=6, theta=0.1, gamma_mag=0.2)
        assert all(gamma_seasonal(spec, h) == 0.0 for h in (1, 2, 3, 4, 5, 7, 11))

    def test_hyperbolic_asymptote(self):
        spec = SfiegarchSpec(d=0.4, s=1, theta=0.25, gamma_mag=0.24)
        sg2 = moments(spec.innovation, 0.25, 0.24).sigma_g_sq
        h = 1000
        asym = sg2 * spgamma(0.2) / (spgamma(0.6) * spgamma(0.4)) * h ** (2 * 0.4 - 1)
        assert gamma_seasonal(spec, h) == pytest.approx(asym, rel=0.01)

    def test_existence_boundary(self):
        with pytest.raises(InvalidParameterError):
            gamma_seasonal(SfiegarchSpec(d=0.5, s=2, gamma_mag=0.2), 0)


class TestGammaLnSigma2:
    def test_pure_fractional_reduces_to_gamma_v(self):
        spec = SfiegarchSpec(d=0.3, s=4, theta=-0.2, gamma_mag=0.3)
        for h in (0, 1, 4, 8, 13):
            assert gamma_ln_sigma2(spec, h) == pytest.approx(gamma_seasonal(spec, h), abs=1e-15)

    def test_even_in_h(self):
        spec = SfiegarchSpec(d=0.25, s=2, theta=0.1, gamma_mag=0.2, alpha=(0.3,), beta=(0.2,))
        for h in (1, 3, 7):
            assert gamma_ln_sigma2(spec, h) == gamma_ln_sigma2(spec, -h)

    def test_oracle_equivalence_random_specs(self, rng):
        # 20 random valid specs vs the Richardson MA(infinity) oracle; the
        # oracle's own resolution (its m vs 2m self-difference) widens the
        # 1e-6 floor where extrapolation cannot do better
        for _ in range(20):
            spec = random_valid_spec(rng, d_range=(-0.45, 0.40))
            for h in (0, 1, spec.s, 2 * spec.s + 1, 30):
                o1 = ma_inf_oracle(spec, h, m=50_000)
                o2 = ma_inf_oracle(spec, h, m=100_000)
                exact = gamma_ln_sigma2(spec, h)
                band = max(1e-6 * abs(o2), 3 * abs(o2 - o1), 1e-9)
                assert abs(exact - o2) <= band, (spec, h)

    def test_oracle_equivalence_near_existence_boundary(self):
        # at d = 0.45 the oracle certifies its own accuracy by self-difference
        spec = SfiegarchSpec(d=0.45, s=2, theta=0.25, gamma_mag=0.24, alpha=(0.3,), beta=(0.2,))
        for h in (0, 5):
            o1 = ma_inf_oracle(spec, h, m=100_000)
            o2 = ma_inf_oracle(spec, h, m=200_000)
            exact = gamma_ln_sigma2(spec, h)
            band = max(3 * abs(o2 - o1), 1e-9)
            assert abs(exact - o2) <= band

    def test_p1_q0_finite_support_form(self, rng):
        spec = SfiegarchSpec(d=0.25, s=2, theta=0.1, gamma_mag=0.3, alpha=(0.5,))
        oracle = ma_inf_oracle(spec, 1, m=100_000)
        assert gamma_ln_sigma2(spec, 1) == pytest.approx(oracle, rel=1e-7)


class TestGammaLnX2:
    def test_lag_zero_decomposition(self):
        spec = SfiegarchSpec(d=0.3, s=2, theta=0.2, gamma_mag=0.2)
        mom = moments(spec.innovation, 0.2, 0.2)
        assert gamma_ln_x2(spec, 0) == pytest.approx(
            gamma_ln_sigma2(spec, 0) + mom.ln_sq_var, abs=1e-14
        )

    def test_cross_term_at_nonzero_lag(self):
        spec = SfiegarchSpec(d=0.3, s=2, theta=0.2, gamma_mag=0.2, alpha=(0.3,))
        lam = lambda_weights(spec, 10)
        mom = moments(spec.innovation, 0.2, 0.2)
        h = 3
        assert gamma_ln_x2(spec, h) == pytest.approx(
            gamma_ln_sigma2(spec, h) + mom.c1 * lam[h - 1], abs=1e-14
        )

    def test_paper_reference_values_truncated_route(self):
        # reference values computed at the published truncation regime
        expected = {1.01: 6.7228, 2.0: 5.0978, 3.0: 4.6445, 5.0: 4.3556}
        for nu, val in expected.items():
            dist = InnovationDist("gaussian") if nu == 2.0 else InnovationDist("ged", nu)
            spec = SfiegarchSpec(d=0.4, s=2, omega=0.0, theta=0.25, gamma_mag=0.24, innovation=dist)
            assert gamma_ln_x2(spec, 0, lambda_trunc=83_000) == pytest.approx(val, abs=5e-4)

    def test_decay_stabilization_for_positive_d(self):
        # h^(1-2d) * sum_r gamma(sh+r) stabilizes between h = 2000 and h = 4000
        # (the subleading cross-term decays like h^-d, so d must not be small)
        spec = SfiegarchSpec(d=0.4, s=2, theta=0.25, gamma_mag=0.24)
        lam = lambda_weights(spec, 2 * 4001 + 2)
        f = f_coeffs(spec)

        def scaled(h):
            tot = sum(
                gamma_ln_x2(spec, spec.s * h + r, lam=lam, f=f) for r in range(spec.s)
            )
            return tot * h ** (1 - 2 * spec.d)

        a, b = scaled(2000), scaled(4000)
        assert abs(b / a - 1.0) < 0.02


@settings(max_examples=30, deadline=None)
@given(
    d=st.floats(-0.8, 0.45),
    s=st.integers(1, 8),
    h=st.integers(-40, 40),
)
def test_gamma_seasonal_support_and_evenness(d, s, h):
    spec = SfiegarchSpec(d=d, s=s, theta=0.1, gamma_mag=0.2)
    val = gamma_seasonal(spec, h)
    assert val == gamma_seasonal(spec, -h)
    if h % s != 0:
        assert val == 0.0


class TestUnconditionalMoments:
    def test_degenerate_news(self):
        spec = SfiegarchSpec(omega=0.7, theta=0.0, gamma_mag=0.0, d=0.2, s=2)
        um = unconditional_moment(spec, 2.0, m=500)
        assert um.abs_x == pytest.approx(math.exp(0.7), abs=1e-12)
        assert um.sigma == pytest.approx(math.exp(0.7), abs=1e-12)

    def test_matches_simulation(self):
        spec = SfiegarchSpec(omega=0.0, theta=0.25, gamma_mag=0.24, d=0.25, s=2)
        um = unconditional_moment(spec, 2.0, m=200_000)
        path = simulate_sfiegarch(spec, 10**6, burn_in=50_000, m_trunc=50_000, seed=11)
        mc = float(np.mean(path.x**2))
        se = float(np.std(path.x**2)) / 1000
        assert abs(um.abs_x - mc) < 3 * se

    def test_symmetric_in_theta_for_ged(self):
        base = dict(omega=0.0, gamma_mag=0.24, d=0.2, s=2, innovation=InnovationDist("ged", 1.5))
        up = unconditional_moment(SfiegarchSpec(theta=0.25, **base), 2.0, m=50_000)
        dn = unconditional_moment(SfiegarchSpec(theta=-0.25, **base), 2.0, m=50_000)
        assert up.abs_x == pytest.approx(dn.abs_x, abs=1e-12)

    def test_divergence_detector(self):
        # a filter with non-square-summable weights makes the product blow up
        spec = SfiegarchSpec(omega=0.0, theta=3.0, gamma_mag=3.0, d=0.49, s=1)
        lam = np.ones(2000)  # simulate a pathological non-decaying table
        from sfiegarch.acov import _log_mgf_product

        with pytest.raises(MomentDivergenceError):
            _log_mgf_product(spec, 2.0, lam)


class TestKurtosisAsymmetry:
    def test_degenerate_gaussian(self):
        spec = SfiegarchSpec(omega=0.0, theta=0.0, gamma_mag=0.0, d=0.2, s=2)
        k, a = kurtosis_asymmetry(spec, m=500)
        assert k == pytest.approx(3.0, abs=1e-12)
        assert a == 0.0

    def test_symmetric_innovations_have_zero_asymmetry(self, rng):
        spec = random_valid_spec(rng)
        _, a = kurtosis_asymmetry(spec, m=5000)
        assert a == 0.0

    def test_grid_band(self):
        # 5x5 grid over (alpha1, beta1) in [-0.4, 0.4]^2: kurtosis stays in (3, 4.5)
        grid = np.linspace(-0.4, 0.4, 5)
        for a1 in grid:
            for b1 in grid:
                spec = SfiegarchSpec(
                    omega=0.0, theta=0.25, gamma_mag=0.24, d=0.25, s=2, alpha=(a1,), beta=(b1,)
                )
                k, _ = kurtosis_asymmetry(spec)
                assert 3.0 < k < 4.5, (a1, b1, k)


def test_acov_report_tail_constants():
    # season lag-sums scaled by the dominant power approach the reported limits
    h = 4000
    pos = SfiegarchSpec(d=0.4, s=2, theta=0.25, gamma_mag=0.24, alpha=(0.3,))
    rep = acov_report(pos, 10)
    lam = lambda_weights(pos, pos.s * (h + 1) + 2)
    f = f_coeffs(pos)
    tot = sum(gamma_ln_x2(pos, pos.s * h + r, lam=lam, f=f) for r in range(pos.s))
    assert tot * h ** (1 - 2 * pos.d) == pytest.approx(rep.var_tail, rel=0.08)

    neg = SfiegarchSpec(d=-0.3, s=2, theta=0.25, gamma_mag=0.24, alpha=(0.3,))
    rep2 = acov_report(neg, 10)
    lam2 = lambda_weights(neg, neg.s * (h + 1) + 2)
    f2 = f_coeffs(neg)
    tot2 = sum(gamma_ln_x2(neg, neg.s * h + r, lam=lam2, f=f2) for r in range(neg.s))
    assert tot2 * h ** (1 - neg.d) == pytest.approx(rep2.cross_tail, rel=0.08)


def test_acov_report_consistent_with_scalars():
    spec = SfiegarchSpec(d=0.25, s=3, theta=-0.2, gamma_mag=0.3, beta=(0.3,))
    rep = acov_report(spec, 12)
    assert rep.max_lag == 12
    for h in (0, 3, 7, 12):
        assert rep.gamma_seasonal[h] == gamma_seasonal(spec, h)
        assert rep.gamma_ln_sigma2[h] == pytest.approx(gamma_ln_sigma2(spec, h), abs=1e-14)
        assert rep.gamma_ln_x2[h] == pytest.approx(gamma_ln_x2(spec, h), abs=1e-14)


def test_acov_ln_x2_vector_matches_scalar():
    spec = SfiegarchSpec(d=0.3, s=2, theta=0.25, gamma_mag=0.24, alpha=(0.2,))
    vec = acov_ln_x2(spec, 10)
    for h in range(11):
        assert vec[h] == pytest.approx(gamma_ln_x2(spec, h), abs=1e-14)
