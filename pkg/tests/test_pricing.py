import math

import numpy as np
import pytest

from helpers import ALL_VARIANTS, random_model_params
from levysmile import (
    Contour,
    Merton,
    ModelParams,
    OptionSpec,
    QuadratureError,
    StripError,
    Uniform,
    VarianceGamma,
    bs_price,
    char_exponent,
    correction_symbol,
    model_params_from_dict,
    model_params_to_dict,
    payoff_transform,
    price_approx,
    price_base,
    price_components,
    price_correction,
)
from scipy import integrate

X = math.log(50.0)

TABLE_MERTON = ModelParams(
    sig2_bar=0.2054**2,
    zeta_bar=0.8207,
    measure=Merton(m=-0.5608, s=0.4070),
    v3e=-5.61729e-4,
    u3e=0.3254,
    v2e=-0.1263,
    u2e=-0.1549,
)

TABLE_VG = ModelParams(
    sig2_bar=0.0510**2,
    zeta_bar=0.6783,
    measure=VarianceGamma(a=35.3325, b=11.4922, B=13.6786),
    v3e=-5e-4,
    u3e=0.01,
    v2e=-0.01,
    u2e=-0.005,
)


class TestCharExponent:
    def test_zero_at_origin(self):
        assert char_exponent(TABLE_MERTON, 0.0) == 0.0

    def test_martingale_identity(self):
        rng = np.random.default_rng(2)
        for variant in ALL_VARIANTS:
            for _ in range(10):
                params = random_model_params(rng, variant)
                assert abs(char_exponent(params, -1j)) < 1e-12

    def test_black_scholes_exponent(self):
        params = ModelParams(sig2_bar=0.04, zeta_bar=0.0, measure=Merton(m=0.0, s=0.1))
        assert char_exponent(params, 1.0) == pytest.approx(-0.02 - 0.02j, abs=1e-15)

    def test_gamma_bar(self):
        m = Merton(m=-0.2, s=0.2)
        params = ModelParams(sig2_bar=0.04, zeta_bar=1.5, measure=m)
        assert params.gamma_bar == pytest.approx(-0.02 - 1.5 * m.exp_moment(), rel=1e-14)


class TestCorrectionSymbol:
    def test_zero_at_origin(self):
        assert correction_symbol(TABLE_MERTON, 0.0) == 0.0

    def test_martingale_identity_50_random(self):
        rng = np.random.default_rng(4)
        for variant in ALL_VARIANTS:
            for _ in range(10):
                params = random_model_params(rng, variant)
                assert abs(correction_symbol(params, -1j)) < 1e-12

    def test_v3_bracket_alone(self):
        params = ModelParams(
            sig2_bar=0.04, zeta_bar=0.0, measure=Merton(m=0.0, s=0.1), v3e=1.0
        )
        assert correction_symbol(params, 1.0) == pytest.approx(1.0 - 1.0j, abs=1e-15)


class TestPayoffTransform:
    def test_call_reference_point(self):
        opt = OptionSpec("call", 0.0, 1.0, 0.0)
        val = payoff_transform(opt, -2j)
        assert val == pytest.approx(1.0 / (2.0 * math.sqrt(2.0 * math.pi)), abs=1e-15)

    def test_put_reference_point(self):
        opt = OptionSpec("put", 0.0, 1.0, 0.0)
        assert payoff_transform(opt, 1j) == pytest.approx(
            1.0 / (2.0 * math.sqrt(2.0 * math.pi)), abs=1e-15
        )

    @pytest.mark.parametrize("lam", [-2j, 1.0 - 2j, -3.0 - 1.7j])
    def test_against_numeric_fourier_integral(self, lam):
        # hhat(lam) = (1/sqrt(2pi)) Int e^{-i lam x} (e^x - 1)^+ dx
        opt = OptionSpec("call", 0.0, 1.0, 0.0)

        def f(x):
            return np.exp(-1j * lam * x) * (math.exp(x) - 1.0)

        val, _ = integrate.quad(f, 0.0, 40.0, complex_func=True, limit=400)
        val /= math.sqrt(2.0 * math.pi)
        assert abs(payoff_transform(opt, lam) - val) < 1e-8

    def test_call_strip_enforced(self):
        opt = OptionSpec("call", 0.0, 1.0, 0.0)
        with pytest.raises(StripError):
            payoff_transform(opt, 1.0 - 0.5j)

    def test_put_strip_enforced(self):
        opt = OptionSpec("put", 0.0, 1.0, 0.0)
        with pytest.raises(StripError):
            payoff_transform(opt, 1.0 - 0.5j)


class TestPriceBase:
    def test_black_scholes_reduction_grid(self):
        params = ModelParams(sig2_bar=0.04, zeta_bar=0.0, measure=Merton(m=0.0, s=0.1))
        for lm in (-0.5, -0.25, 0.0, 0.25, 0.5):
            for t in (0.05, 1.0):
                opt = OptionSpec("call", X + lm, t, X)
                got = price_base(params, opt)
                ref = bs_price("call", X, X + lm, t, 0.2)
                assert got == pytest.approx(ref, rel=1e-6)

    def test_deep_itm_equals_forward(self):
        opt = OptionSpec("call", X - 20.0, 0.25, X)
        assert price_base(TABLE_MERTON, opt) == pytest.approx(math.exp(X), rel=1e-6)

    def test_contour_independence(self):
        opt = OptionSpec("call", X + 0.1, 59.0 / 365.0, X)
        p1 = price_base(TABLE_MERTON, opt, Contour(-1.25, 400.0, 65536))
        p2 = price_base(TABLE_MERTON, opt, Contour(-3.0, 400.0, 65536))
        assert abs(p1 - p2) < 1e-7 * (1.0 + p1)

    def test_put_call_parity(self):
        for params in (TABLE_MERTON, TABLE_VG):
            for lm in (-0.2, 0.0, 0.15):
                call = OptionSpec("call", X + lm, 0.4, X)
                put = OptionSpec("put", X + lm, 0.4, X)
                gap = price_base(params, call) - price_base(params, put)
                assert gap == pytest.approx(
                    math.exp(X) - math.exp(X + lm), abs=1e-6 * math.exp(X)
                )

    def test_integrand_hermitian_symmetry(self):
        lam_i = -1.7
        lam_r = np.array([0.3, 1.0, 6.5, 30.0])
        opt = OptionSpec("call", X + 0.05, 0.3, X)

        def integrand(lr):
            lam = lr + 1j * lam_i
            return (
                np.exp(opt.t * char_exponent(TABLE_MERTON, lam))
                * payoff_transform(opt, lam)
                * np.exp(1j * lam * opt.x)
            )

        left = integrand(-lam_r)
        right = np.conj(integrand(lam_r))
        assert np.all(np.abs(left - right) <= 1e-12 * (1.0 + np.abs(right)))

    def test_endpoint_failure_reports_L(self):
        with pytest.raises(QuadratureError, match="L"):
            price_base(TABLE_MERTON, OptionSpec("call", X, 0.1, X), Contour(-1.5, 5.0, 64))

    def test_auto_matches_tight_explicit(self):
        opt = OptionSpec("call", X - 0.1, 0.75, X)
        p_auto = price_base(TABLE_MERTON, opt)
        p_exp = price_base(TABLE_MERTON, opt, Contour(-2.0, 400.0, 65536))
        assert p_auto == pytest.approx(p_exp, rel=1e-8)


def _stencil_derivatives(f, x, h):
    """First three x-derivatives, O(h^4) central stencils."""
    vals = {i: f(x + i * h) for i in range(-3, 4)}
    d1 = (-vals[2] + 8 * vals[1] - 8 * vals[-1] + vals[-2]) / (12 * h)
    d2 = (-vals[2] + 16 * vals[1] - 30 * vals[0] + 16 * vals[-1] - vals[-2]) / (12 * h * h)
    d3 = (-vals[3] + 8 * vals[2] - 13 * vals[1] + 13 * vals[-1] - 8 * vals[-2] + vals[-3]) / (
        8 * h**3
    )
    return d1, d2, d3


def _jump_average(g, measure, x):
    """Int g(x + z) nu(dz) for the Merton density by quadrature."""
    m, s = measure.m, measure.s

    def f(z):
        return g(x + z) * math.exp(-0.5 * ((z - m) / s) ** 2) / (s * math.sqrt(2 * math.pi))

    val, _ = integrate.quad(f, m - 12 * s, m + 12 * s, epsabs=1e-12, epsrel=1e-11, limit=200)
    return val


class TestPriceCorrection:
    def test_zero_when_groups_zero(self):
        params = ModelParams(sig2_bar=0.05, zeta_bar=1.0, measure=Merton(m=-0.2, s=0.2))
        opt = OptionSpec("call", X + 0.1, 0.5, X)
        assert price_correction(params, opt) == pytest.approx(0.0, abs=1e-10)

    def test_call_put_identical(self):
        contour_call = Contour(-1.5, 600.0, 16384)
        contour_put = Contour(0.5, 600.0, 16384)
        for params in (TABLE_MERTON, TABLE_VG):
            call = OptionSpec("call", X + 0.07, 0.3, X)
            put = OptionSpec("put", X + 0.07, 0.3, X)
            u1c = price_correction(params, call, contour_call)
            u1p = price_correction(params, put, contour_put)
            assert abs(u1c - u1p) < 1e-8 * (1.0 + math.exp(X))

    @pytest.mark.parametrize(
        "group,value",
        [("v2e", 0.01), ("v3e", 0.02), ("u2e", 0.015), ("u3e", 0.02)],
    )
    def test_single_bracket_against_operator_oracle(self, group, value):
        # With zero jump intensity the base price is Black-Scholes, so
        # each bracket of the correction can be checked against direct
        # derivative/jump-operator action on the closed form.
        measure = Merton(m=-0.25, s=0.3)
        sig2 = 0.04
        kwargs = {"sig2_bar": sig2, "zeta_bar": 0.0, "measure": measure, group: value}
        params = ModelParams(**kwargs)
        t = 0.5
        opt = OptionSpec("call", X + 0.05, t, X)
        got = price_correction(params, opt)

        sig = math.sqrt(sig2)
        u0 = lambda xx: bs_price("call", xx, opt.k, t, sig)
        delta = lambda xx: math.exp(xx) * 0.5 * math.erfc(
            -((xx - opt.k) / (sig * math.sqrt(t)) + 0.5 * sig * math.sqrt(t)) / math.sqrt(2.0)
        )
        h = 0.01
        d1, d2, d3 = _stencil_derivatives(u0, X, h)
        kappa = measure.exp_moment()
        m1 = measure.mean_jump()
        if group == "v3e":
            oracle = t * value * (d3 - d2)
            tol = 2e-4
        elif group == "v2e":
            oracle = t * value * (d2 - d1)
            tol = 1e-5
        elif group == "u2e":
            jump_u0 = _jump_average(u0, measure, X) - u0(X) - m1 * d1
            oracle = t * value * (-kappa * d1 + jump_u0)
            tol = 1e-4
        else:  # u3e
            dd1, _, _ = _stencil_derivatives(delta, X, h)
            jump_delta = _jump_average(delta, measure, X) - delta(X) - m1 * d2
            oracle = t * value * (-kappa * d2 + jump_delta)
            tol = 1e-4
        assert got == pytest.approx(oracle, rel=tol, abs=1e-8)


class TestPriceApprox:
    def test_reduces_to_base_when_groups_zero(self):
        params = ModelParams(sig2_bar=0.05, zeta_bar=1.2, measure=Merton(m=-0.2, s=0.2))
        opt = OptionSpec("call", X + 0.04, 0.6, X)
        assert price_approx(params, opt) == pytest.approx(price_base(params, opt), abs=1e-10)

    def test_parity(self):
        call = OptionSpec("call", X + 0.12, 0.35, X)
        put = OptionSpec("put", X + 0.12, 0.35, X)
        gap = price_approx(TABLE_MERTON, call) - price_approx(TABLE_MERTON, put)
        assert gap == pytest.approx(math.exp(X) - math.exp(X + 0.12), abs=1e-6 * math.exp(X))

    def test_components_share_grid(self):
        opt = OptionSpec("call", X - 0.05, 0.25, X)
        u0, u1 = price_components(TABLE_MERTON, opt)
        assert u0 == pytest.approx(price_base(TABLE_MERTON, opt), rel=1e-9)
        assert u1 == pytest.approx(price_correction(TABLE_MERTON, opt), rel=1e-7, abs=1e-10)


class TestValidation:
    def test_model_params_require_positive_variance(self):
        with pytest.raises(ValueError, match="sig2_bar"):
            ModelParams(sig2_bar=0.0, zeta_bar=0.0, measure=Merton(m=0.0, s=0.1))

    def test_model_params_require_nonneg_intensity(self):
        with pytest.raises(ValueError, match="zeta_bar"):
            ModelParams(sig2_bar=0.04, zeta_bar=-1.0, measure=Merton(m=0.0, s=0.1))

    def test_option_kind(self):
        with pytest.raises(ValueError):
            OptionSpec("forward", X, 1.0, X)

    def test_option_maturity(self):
        with pytest.raises(ValueError):
            OptionSpec("call", X, 0.0, X)

    def test_contour_panels(self):
        with pytest.raises(ValueError):
            Contour(-1.5, 200.0, 31)
        with pytest.raises(ValueError):
            Contour(-1.5, 200.0, 16)
        with pytest.raises(ValueError):
            Contour(-1.5, 0.0, 64)

    def test_call_contour_needs_line_below_minus_one(self):
        opt = OptionSpec("call", X, 0.5, X)
        with pytest.raises(StripError):
            price_base(TABLE_MERTON, opt, Contour(-0.5, 200.0, 2048))

    def test_put_contour_needs_positive_line(self):
        opt = OptionSpec("put", X, 0.5, X)
        with pytest.raises(StripError):
            price_base(TABLE_MERTON, opt, Contour(-0.5, 200.0, 2048))

    def test_measure_strip_honored(self):
        vg = ModelParams(sig2_bar=0.04, zeta_bar=0.5, measure=VarianceGamma(a=1.7, b=5.0, B=1.0))
        opt = OptionSpec("call", X, 0.5, X)
        with pytest.raises(StripError):
            price_base(vg, opt, Contour(-1.8, 200.0, 2048))
        price_base(vg, opt)  # auto mode clamps into (-1.7, -1)


class TestSerialization:
    def test_round_trip(self):
        data = model_params_to_dict(TABLE_MERTON)
        assert model_params_from_dict(data) == TABLE_MERTON

    def test_missing_keys(self):
        with pytest.raises(ValueError, match="missing keys"):
            model_params_from_dict({"sig2_bar": 0.04})

    def test_example_document(self):
        params = model_params_from_dict(
            {
                "sig2_bar": 0.04,
                "zeta_bar": 0.0,
                "measure": {"variant": "merton", "m": -0.2, "s": 0.2},
            }
        )
        assert params.v3e == 0.0 and params.zeta_bar == 0.0


class TestUniformMeasurePricing:
    def test_uniform_parity_and_contours(self):
        params = ModelParams(
            sig2_bar=0.0922**2,
            zeta_bar=3.9644,
            measure=Uniform(a=-0.2086, b=0.0588),
            v3e=-4.74943e-4,
            u3e=1.1575e-5,
            v2e=0.0078,
            u2e=-5.3749e-4,
        )
        call = OptionSpec("call", X + 0.05, 0.3, X)
        put = OptionSpec("put", X + 0.05, 0.3, X)
        gap = price_approx(params, call) - price_approx(params, put)
        assert gap == pytest.approx(math.exp(X) - math.exp(X + 0.05), abs=1e-6 * math.exp(X))
